#include "manugrip/pipeline/commands.hpp"

#include "manugrip/pipeline/scenarios.hpp"
#include "manugrip/sensor_io.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace manugrip::pipeline {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

RunManifest start_manifest(const PipelineConfig& config, const std::string& out_dir) {
    fs::create_directories(out_dir);
    RunManifest m;
    m.config_hash = digest_bytes(config_to_json(config).dump());
    return m;
}

hand::CalibrationReference load_calibration_or_identity(const std::string& calib_path) {
    if (calib_path.empty()) return hand::CalibrationReference{};
    return read_calibration_file(calib_path);
}

}  // namespace

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

CommandResult cmd_synth(const PipelineConfig& config, const std::string& scenario,
                        const std::string& out_dir) {
    config.validate();
    RunManifest manifest = start_manifest(config, out_dir);

    const auto truth = scenario_frames(config, scenario);
    const auto frames = sensor::synth_imu_stream(truth, config.noise, config.seed);

    const fs::path stream_path = fs::path(out_dir) / (scenario + ".jsonl");
    sensor::write_stream_file(stream_path.string(), frames);

    manifest.outputs.push_back(stream_path.string());
    manifest.write(out_dir);
    return {{stream_path.string()}};
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

CommandResult cmd_calibrate(const PipelineConfig& config, const std::string& stream_path,
                            const std::string& out_dir) {
    config.validate();
    RunManifest manifest = start_manifest(config, out_dir);
    manifest.add_input(stream_path);

    const auto frames = sensor::read_stream_file(stream_path);
    const int window = config.calib_window;
    if (static_cast<int>(frames.size()) < window) {
        throw std::runtime_error("calibration needs at least " + std::to_string(window) +
                                 " flat-hand frames, got " + std::to_string(frames.size()));
    }

    // The window must hold one steady gesture: per-IMU orientations may not
    // spread beyond the threshold.
    GloveFrame mean_frame = frames.front();
    for (int k = 0; k < kNumImus; ++k) {
        const Quat ref = frames[0].imu[k];
        double spread = 0.0;
        Eigen::Vector4d acc = Eigen::Vector4d::Zero();
        for (int i = 0; i < window; ++i) {
            Quat q = frames[i].imu[k];
            if (q.dot(ref) < 0.0) q.coeffs() = -q.coeffs();
            acc += Eigen::Vector4d(q.w(), q.x(), q.y(), q.z());
            for (int j = 0; j < i; ++j) {
                spread = std::max(spread, rotation_angle(frames[j].imu[k], frames[i].imu[k]));
            }
        }
        if (rad_to_deg(spread) > config.calib_max_spread_deg) {
            throw std::runtime_error("calibration refused: IMU " + std::to_string(k) +
                                     " spread " + fmt(rad_to_deg(spread)) + " deg exceeds " +
                                     fmt(config.calib_max_spread_deg) + " deg");
        }
        acc /= acc.norm();
        mean_frame.imu[k] = Quat(acc(0), acc(1), acc(2), acc(3));
    }

    const auto ref = hand::build_calibration(mean_frame);
    const fs::path out_path = fs::path(out_dir) / "calibration.json";
    write_calibration_file(out_path.string(), ref);

    manifest.outputs.push_back(out_path.string());
    manifest.write(out_dir);
    return {{out_path.string()}};
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

CommandResult cmd_replay(const PipelineConfig& config, const std::string& stream_path,
                         const std::string& calib_path, const std::string& out_dir) {
    config.validate();
    RunManifest manifest = start_manifest(config, out_dir);
    manifest.add_input(stream_path);
    if (!calib_path.empty()) manifest.add_input(calib_path);

    const auto raw = sensor::read_stream_file(stream_path);
    const auto calib = load_calibration_or_identity(calib_path);

    std::vector<GloveFrame> frames;
    frames.reserve(raw.size());
    for (const auto& f : raw) frames.push_back(hand::apply_calibration(calib, f));

    const fs::path angles_path = fs::path(out_dir) / "angles.csv";
    {
        auto out = open_out(angles_path);
        out << "t,thumb_theta1_deg,thumb_theta2_deg,thumb_beta_deg";
        for (const char* f : {"index", "middle", "ring", "little"}) {
            out << "," << f << "_theta1_deg," << f << "_beta_deg," << f << "_theta2_deg," << f
                << "_theta3_deg";
        }
        out << "\n";
        for (const auto& f : frames) {
            const auto a = hand::clamp_joint_limits(hand::frame_to_angles(f));
            out << fmt(f.t) << "," << fmt(rad_to_deg(a.thumb.theta1)) << ","
                << fmt(rad_to_deg(a.thumb.theta2)) << "," << fmt(rad_to_deg(a.thumb.beta));
            for (int i = 0; i < 4; ++i) {
                out << "," << fmt(rad_to_deg(a.fingers[i].theta1)) << ","
                    << fmt(rad_to_deg(a.fingers[i].beta)) << ","
                    << fmt(rad_to_deg(a.fingers[i].theta2)) << ","
                    << fmt(rad_to_deg(a.fingers[i].theta3));
            }
            out << "\n";
        }
    }

    const fs::path channels_path = fs::path(out_dir) / "channels.csv";
    {
        const auto ch = sensor::extract_channels(frames, config.layout, config.force);
        auto out = open_out(channels_path);
        out << "t,palm_force_N,thumb_tip_force_N,index_mcp_flexion_deg\n";
        for (size_t i = 0; i < ch.t.size(); ++i) {
            out << fmt(ch.t[i]) << "," << fmt(ch.palm_force_n[i]) << ","
                << fmt(ch.thumb_tip_force_n[i]) << "," << fmt(ch.index_mcp_flexion_deg[i]) << "\n";
        }
    }

    manifest.outputs.push_back(angles_path.string());
    manifest.outputs.push_back(channels_path.string());
    manifest.write(out_dir);
    return {{angles_path.string(), channels_path.string()}};
}

// ---------------------------------------------------------------------------
// grasp
// ---------------------------------------------------------------------------

CommandResult cmd_grasp(const PipelineConfig& config, const std::string& stream_path,
                        const std::string& mesh_path, const std::string& calib_path,
                        const std::string& out_dir) {
    config.validate();
    RunManifest manifest = start_manifest(config, out_dir);
    manifest.add_input(stream_path);
    manifest.add_input(mesh_path);
    if (!calib_path.empty()) manifest.add_input(calib_path);

    ObjectMesh mesh = load_obj(mesh_path);
    mesh.require_watertight();

    const auto raw = sensor::read_stream_file(stream_path);
    const auto calib = load_calibration_or_identity(calib_path);

    std::vector<grasp::PosedHand> hands;
    std::vector<hand::HandState> states;
    hands.reserve(raw.size());
    for (const auto& rf : raw) {
        const GloveFrame f = hand::apply_calibration(calib, rf);
        const auto angles = hand::clamp_joint_limits(hand::frame_to_angles(f));
        const auto hs = hand::hand_fk(config.hand, angles);
        grasp::PosedHand ph;
        ph.t = f.t;
        ph.model = grasp::build_collision_model(config.hand, hs, f.wrist,
                                                config.grasp.capsule_radius);
        hands.push_back(std::move(ph));
        states.push_back(hs);
    }

    const auto trace = grasp::run_grasp(hands, mesh, config.grasp);

    const fs::path log_path = fs::path(out_dir) / "contacts.jsonl";
    grasp::write_contact_log_file(log_path.string(), trace);

    const fs::path traj_path = fs::path(out_dir) / "trajectory.csv";
    {
        auto out = open_out(traj_path);
        out << "t,phase,wrist_x,wrist_y,wrist_z";
        for (const char* d : {"thumb", "index", "middle", "ring", "little"}) {
            out << "," << d << "_tip_x," << d << "_tip_y," << d << "_tip_z";
        }
        out << ",object_x,object_y,object_z\n";
        for (size_t i = 0; i < trace.size(); ++i) {
            const auto& e = trace[i];
            out << fmt(e.t) << "," << grasp::to_string(e.phase);
            const Vec3& w = e.hand_pose.p;
            out << "," << fmt(w.x()) << "," << fmt(w.y()) << "," << fmt(w.z());
            const auto& hs = states[i];
            Vec3 tips[5] = {e.hand_pose * hs.thumb_tip, e.hand_pose * hs.fingertips[0],
                            e.hand_pose * hs.fingertips[1], e.hand_pose * hs.fingertips[2],
                            e.hand_pose * hs.fingertips[3]};
            for (const Vec3& tip : tips) {
                out << "," << fmt(tip.x()) << "," << fmt(tip.y()) << "," << fmt(tip.z());
            }
            const Vec3& o = e.object_pose.p;
            out << "," << fmt(o.x()) << "," << fmt(o.y()) << "," << fmt(o.z()) << "\n";
        }
    }

    manifest.outputs.push_back(log_path.string());
    manifest.outputs.push_back(traj_path.string());
    manifest.write(out_dir);
    return {{log_path.string(), traj_path.string()}};
}

CommandResult cmd_grasp_aggregate(const PipelineConfig& config,
                                  const std::vector<std::string>& log_paths,
                                  const std::string& out_dir) {
    config.validate();
    RunManifest manifest = start_manifest(config, out_dir);
    if (log_paths.size() < 2) {
        throw std::runtime_error("--aggregate needs at least 2 contact logs");
    }

    std::vector<grasp::ContactLog> logs;
    for (const auto& p : log_paths) {
        manifest.add_input(p);
        logs.push_back(grasp::contact_log_from_trace(grasp::read_contact_log_file(p)));
    }
    const auto summary = grasp::aggregate_contacts(logs);

    json j;
    json clusters = json::array();
    for (const auto& c : summary.clusters) {
        json cov = json::array();
        for (int r = 0; r < 3; ++r) {
            for (int s = 0; s < 3; ++s) cov.push_back(c.covariance(r, s));
        }
        clusters.push_back({{"phalanx", c.phalanx},
                            {"samples", c.samples},
                            {"mean", {c.mean.x(), c.mean.y(), c.mean.z()}},
                            {"covariance", cov},
                            {"degenerate", c.degenerate}});
    }
    j["clusters"] = clusters;

    const fs::path out_path = fs::path(out_dir) / "contact_summary.json";
    {
        auto out = open_out(out_path);
        out << j.dump(2) << "\n";
    }
    manifest.outputs.push_back(out_path.string());
    manifest.write(out_dir);
    return {{out_path.string()}};
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const PipelineConfig& config, const std::string& trajectory_path,
                           const std::vector<std::pair<std::string, std::string>>& tool_meshes,
                           const std::string& nodes_path, const std::string& elements_path,
                           const std::string& out_dir, double duration) {
    config.validate();
    RunManifest manifest = start_manifest(config, out_dir);
    manifest.add_input(trajectory_path);
    manifest.add_input(nodes_path);
    manifest.add_input(elements_path);

    const Trajectory traj = read_trajectory_file(trajectory_path);

    std::vector<fem::ScriptedBody> bodies;
    double horizon = std::numeric_limits<double>::infinity();
    for (const auto& [name, obj_path] : tool_meshes) {
        manifest.add_input(obj_path);
        auto it = traj.find(name);
        if (it == traj.end()) {
            throw std::runtime_error("trajectory file has no poses for body '" + name + "'");
        }
        fem::ScriptedBody body;
        body.name = name;
        body.mesh = load_obj(obj_path);
        body.trajectory = it->second;
        body.validate();
        horizon = std::min(horizon, it->second.back().first);
        bodies.push_back(std::move(body));
    }
    if (bodies.empty()) horizon = duration;
    if (duration > 0.0) horizon = std::min(horizon, duration);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::runtime_error("simulation horizon is empty");
    }

    fem::TetMesh mesh = fem::load_tet_mesh(nodes_path, elements_path);
    fem::Simulator sim(std::move(mesh), config.material, config.sim, std::move(bodies));

    const fs::path metrics_path = fs::path(out_dir) / "metrics.csv";
    const fs::path snap_dir = fs::path(out_dir) / "snapshots";
    fs::create_directories(snap_dir);

    auto out = open_out(metrics_path);
    out << "t,energy_J,pieces,pressure_Pa\n";

    CommandResult result;
    result.outputs.push_back(metrics_path.string());

    auto snapshot = [&](int step_index) {
        char name[32];
        std::snprintf(name, sizeof(name), "step_%05d.obj", step_index);
        const fs::path p = snap_dir / name;
        save_pieces_obj(p.string(), sim.piece_surfaces());
        result.outputs.push_back(p.string());
    };

    const int steps = static_cast<int>(std::llround(horizon / config.sim.dt));
    snapshot(0);
    for (int s = 1; s <= steps; ++s) {
        fem::StepMetrics m;
        try {
            m = sim.step();
        } catch (const fem::StepFailure& e) {
            out.flush();
            throw std::runtime_error(std::string(e.what()) + " (metrics up to the failing step in " +
                                     metrics_path.string() + ")");
        }
        out << fmt(m.t) << "," << fmt(m.elastic_energy_j) << "," << m.pieces << ","
            << fmt(m.contact_pressure_pa) << "\n";
        if (config.snapshot_every > 0 && s % config.snapshot_every == 0) snapshot(s);
    }
    out.flush();

    for (const auto& o : result.outputs) manifest.outputs.push_back(o);
    manifest.write(out_dir);
    return result;
}

// ---------------------------------------------------------------------------
// Support I/O
// ---------------------------------------------------------------------------

void write_calibration_file(const std::string& path, const hand::CalibrationReference& ref) {
    json arr = json::array();
    for (const Quat& q : ref.correction) arr.push_back({q.w(), q.x(), q.y(), q.z()});
    json j;
    j["correction"] = arr;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

hand::CalibrationReference read_calibration_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    const auto& arr = j.at("correction");
    if (arr.size() != kNumImus) throw std::runtime_error(path + ": needs 15 corrections");
    hand::CalibrationReference ref;
    for (int k = 0; k < kNumImus; ++k) {
        const auto& q = arr.at(k);
        ref.correction[k] = Quat(q.at(0).get<double>(), q.at(1).get<double>(),
                                 q.at(2).get<double>(), q.at(3).get<double>())
                                .normalized();
    }
    return ref;
}

Trajectory read_trajectory_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    Trajectory traj;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            const double t = rec.at("t").get<double>();
            const std::string body = rec.at("body_id").get<std::string>();
            const auto& p = rec.at("pose");
            Pose pose;
            pose.q = Quat(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(),
                          p.at(3).get<double>())
                         .normalized();
            pose.p = Vec3(p.at(4).get<double>(), p.at(5).get<double>(), p.at(6).get<double>());
            traj[body].emplace_back(t, pose);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (auto& [name, keys] : traj) {
        std::sort(keys.begin(), keys.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (size_t i = 1; i < keys.size(); ++i) {
            if (keys[i].first <= keys[i - 1].first) {
                throw std::runtime_error(path + ": duplicate timestamp for body '" + name + "'");
            }
        }
    }
    return traj;
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    // interleave by time for readability; bodies in name order
    for (const auto& [name, keys] : traj) {
        for (const auto& [t, pose] : keys) {
            json rec;
            rec["t"] = t;
            rec["body_id"] = name;
            rec["pose"] = {pose.q.w(), pose.q.x(), pose.q.y(), pose.q.z(),
                           pose.p.x(), pose.p.y(), pose.p.z()};
            out << rec.dump() << "\n";
        }
    }
}

void save_pieces_obj(const std::string& path, const std::vector<ObjectMesh>& pieces) {
    auto out = open_out(path);
    out.precision(17);
    int offset = 1;
    for (size_t k = 0; k < pieces.size(); ++k) {
        out << "o piece_" << k << "\n";
        for (const Vec3& v : pieces[k].vertices) {
            out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
        }
        for (const auto& t : pieces[k].triangles) {
            out << "f " << t[0] + offset << " " << t[1] + offset << " " << t[2] + offset << "\n";
        }
        offset += static_cast<int>(pieces[k].vertices.size());
    }
}

}  // namespace manugrip::pipeline
