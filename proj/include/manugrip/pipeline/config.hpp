#pragma once

#include "manugrip/fem/material.hpp"
#include "manugrip/fem/simulator.hpp"
#include "manugrip/grasp_engine.hpp"
#include "manugrip/hand_kinematics.hpp"
#include "manugrip/sensor_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace manugrip::pipeline {

/// Everything a run needs, in one JSON document. Field names carry their
/// units. Missing fields fall back to defaults, so partial configs are fine.
struct PipelineConfig {
    std::uint64_t seed = 42;
    double rate_hz = 20.0;

    hand::HandGeometry hand = hand::HandGeometry::defaults();
    sensor::TaxelLayout layout = sensor::TaxelLayout::defaults();
    sensor::ForceCalibration force;
    sensor::ImuNoiseModel noise;
    grasp::GraspParams grasp;
    fem::SimParams sim;
    fem::MaterialParams material;

    int snapshot_every = 10;
    int calib_window = 10;
    double calib_max_spread_deg = 5.0;

    void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& c);

PipelineConfig load_config(const std::string& path);

/// FNV-1a 64 hex digest.
std::string digest_bytes(const std::string& bytes);
std::string digest_file(const std::string& path);

/// Reproducibility record: config hash, input digests, tool version and the
/// produced files (basenames, so reruns into other directories match).
struct RunManifest {
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> inputs;  // basename -> digest
    std::vector<std::string> outputs;                         // basenames

    void add_input(const std::string& path);
    void write(const std::string& out_dir) const;
};

}  // namespace manugrip::pipeline
