#include "manugrip/pipeline/commands.hpp"
#include "manugrip/pipeline/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

using namespace manugrip;

namespace {

pipeline::PipelineConfig resolve_config(const std::string& config_path, bool seed_set,
                                        std::uint64_t seed) {
    pipeline::PipelineConfig config;
    if (!config_path.empty()) config = pipeline::load_config(config_path);
    if (seed_set) config.seed = seed;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"manugrip: glove-stream synthesis, grasp reconstruction and contact simulation"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "pipeline config JSON")->expected(1);
    app.add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--out", out_dir, "output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic glove stream");
    std::string scenario;
    synth->add_option("scenario", scenario, "one of: flat-hand, twist-lid, press-lid, pinch-lid, pick-place")
        ->required();

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "build IMU corrections from a flat-hand stream");
    std::string cal_stream;
    calibrate->add_option("stream", cal_stream, "glove stream (JSON lines)")->required();

    // replay
    auto* replay = app.add_subcommand("replay", "reconstruct joint angles and analysis channels");
    std::string rep_stream, rep_calib;
    replay->add_option("stream", rep_stream, "glove stream (JSON lines)")->required();
    replay->add_option("--calib", rep_calib, "calibration file from `calibrate`");

    // grasp
    auto* grasp_cmd = app.add_subcommand("grasp", "run the caging grasp state machine");
    std::string grasp_stream, grasp_mesh, grasp_calib;
    std::vector<std::string> aggregate_logs;
    grasp_cmd->add_option("stream", grasp_stream, "glove stream (JSON lines)");
    grasp_cmd->add_option("mesh", grasp_mesh, "object mesh (ASCII OBJ, watertight)");
    grasp_cmd->add_option("--calib", grasp_calib, "calibration file");
    grasp_cmd->add_option("--aggregate", aggregate_logs,
                          "contact logs to aggregate instead of running a trial");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "FEM replay of scripted tool trajectories");
    std::string traj_path, nodes_path, elements_path;
    std::vector<std::string> tool_args;
    double duration = 0.0;
    simulate->add_option("--trajectory", traj_path, "scripted poses (JSON lines)")->required();
    simulate->add_option("--tool", tool_args, "scripted body as name=mesh.obj (repeatable)");
    simulate->add_option("--nodes", nodes_path, "target tet mesh nodes file")->required();
    simulate->add_option("--elements", elements_path, "target tet mesh elements file")->required();
    simulate->add_option("--duration", duration, "simulated seconds (default: trajectory horizon)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = resolve_config(config_path, seed_set, seed);

        if (synth->parsed()) {
            pipeline::cmd_synth(config, scenario, out_dir);
        } else if (calibrate->parsed()) {
            pipeline::cmd_calibrate(config, cal_stream, out_dir);
        } else if (replay->parsed()) {
            pipeline::cmd_replay(config, rep_stream, rep_calib, out_dir);
        } else if (grasp_cmd->parsed()) {
            if (!aggregate_logs.empty()) {
                pipeline::cmd_grasp_aggregate(config, aggregate_logs, out_dir);
            } else {
                if (grasp_stream.empty() || grasp_mesh.empty()) {
                    throw std::runtime_error("grasp needs a stream and a mesh (or --aggregate logs)");
                }
                pipeline::cmd_grasp(config, grasp_stream, grasp_mesh, grasp_calib, out_dir);
            }
        } else if (simulate->parsed()) {
            std::vector<std::pair<std::string, std::string>> tools;
            for (const std::string& arg : tool_args) {
                const auto eq = arg.find('=');
                if (eq == std::string::npos) {
                    throw std::runtime_error("--tool expects name=mesh.obj, got: " + arg);
                }
                tools.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
            }
            pipeline::cmd_simulate(config, traj_path, tools, nodes_path, elements_path, out_dir,
                                   duration);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
