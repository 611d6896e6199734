#pragma once

#include "manugrip/fem/simulator.hpp"
#include "manugrip/grasp_engine.hpp"
#include "manugrip/pipeline/config.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace manugrip::pipeline {

struct CommandResult {
    std::vector<std::string> outputs;  // full paths of produced files
};

/// Deterministic synthetic glove stream for a named scenario.
CommandResult cmd_synth(const PipelineConfig& config, const std::string& scenario,
                        const std::string& out_dir);

/// Flat-window calibration: refuses short or unsteady streams.
CommandResult cmd_calibrate(const PipelineConfig& config, const std::string& stream_path,
                            const std::string& out_dir);

/// Joint-angle and analysis-channel reconstruction. calib_path may be empty.
CommandResult cmd_replay(const PipelineConfig& config, const std::string& stream_path,
                         const std::string& calib_path, const std::string& out_dir);

/// Grasp state machine over a stream against an OBJ mesh; emits the contact
/// log and the wrist/fingertip/object trajectory table.
CommandResult cmd_grasp(const PipelineConfig& config, const std::string& stream_path,
                        const std::string& mesh_path, const std::string& calib_path,
                        const std::string& out_dir);

/// Per-phalanx Gaussian contact summary over several trial logs.
CommandResult cmd_grasp_aggregate(const PipelineConfig& config,
                                  const std::vector<std::string>& log_paths,
                                  const std::string& out_dir);

/// Barrier-contact FEM replay of scripted tool trajectories against a
/// tetrahedral target; emits the metrics CSV and periodic piece snapshots.
/// duration <= 0 runs the whole covered horizon.
CommandResult cmd_simulate(const PipelineConfig& config, const std::string& trajectory_path,
                           const std::vector<std::pair<std::string, std::string>>& tool_meshes,
                           const std::string& nodes_path, const std::string& elements_path,
                           const std::string& out_dir, double duration = 0.0);

// ---------------------------------------------------------------------------
// Support I/O shared by commands and tests
// ---------------------------------------------------------------------------

void write_calibration_file(const std::string& path, const hand::CalibrationReference& ref);
hand::CalibrationReference read_calibration_file(const std::string& path);

/// body name -> time-sorted keyframes
using Trajectory = std::map<std::string, std::vector<std::pair<double, Pose>>>;

/// JSON lines {t, body_id, pose: [w,x,y,z,px,py,pz]}.
Trajectory read_trajectory_file(const std::string& path);
void write_trajectory_file(const std::string& path, const Trajectory& traj);

/// One OBJ with an `o piece_<k>` group per piece.
void save_pieces_obj(const std::string& path, const std::vector<ObjectMesh>& pieces);

}  // namespace manugrip::pipeline
