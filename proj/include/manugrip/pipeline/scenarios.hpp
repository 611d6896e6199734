#pragma once

#include "manugrip/pipeline/config.hpp"
#include "manugrip/sensor_io.hpp"

#include <string>
#include <vector>

namespace manugrip::pipeline {

/// Known synthetic scenarios: flat-hand, twist-lid, press-lid, pinch-lid,
/// pick-place.
std::vector<std::string> scenario_names();

/// Ground-truth gesture/taxel schedule of one scenario at the config rate.
std::vector<sensor::GestureSample> scenario_frames(const PipelineConfig& config,
                                                   const std::string& name);

/// Geometry of the pick-place scenario, shared with the grasp pipeline: the
/// grasped cube in world coordinates and the carry displacement.
struct PickPlaceLayout {
    Vec3 object_center{0.30, 0.00, 0.15};
    double object_half = 0.02;
    Vec3 carry_delta{0.0, 0.20, 0.0};
    // object center expressed in the palm frame during the grip
    Vec3 grip_local{0.050, 0.005, 0.032};

    Vec3 wrist_grip_position() const { return object_center - grip_local; }
};

PickPlaceLayout pick_place_layout();

/// Flexion plateau used by the twist scenarios (paper-scale 50 degrees).
double twist_plateau_deg();

}  // namespace manugrip::pipeline
