#include "manugrip/pipeline/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace manugrip::pipeline {

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void finger_from_json(const json& j, hand::FingerGeometry& g) {
    get_if(j, "l1_m", g.l1);
    get_if(j, "l2_m", g.l2);
    get_if(j, "l3_m", g.l3);
    get_if(j, "dx_m", g.dx);
    get_if(j, "dy_m", g.dy);
}

json finger_to_json(const hand::FingerGeometry& g) {
    return {{"l1_m", g.l1}, {"l2_m", g.l2}, {"l3_m", g.l3}, {"dx_m", g.dx}, {"dy_m", g.dy}};
}

}  // namespace

void PipelineConfig::validate() const {
    if (!(rate_hz > 0.0)) throw std::invalid_argument("rate_hz must be > 0");
    hand.validate();
    layout.validate();
    force.validate();
    noise.validate();
    sim.validate();
    material.validate();
    if (calib_window < 2) throw std::invalid_argument("calib_window must be >= 2");
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    get_if(j, "seed", c.seed);
    get_if(j, "rate_hz", c.rate_hz);
    get_if(j, "snapshot_every", c.snapshot_every);
    get_if(j, "calib_window", c.calib_window);
    get_if(j, "calib_max_spread_deg", c.calib_max_spread_deg);

    if (j.contains("hand")) {
        const json& h = j.at("hand");
        static const char* names[4] = {"index", "middle", "ring", "little"};
        for (int f = 0; f < 4; ++f) {
            if (h.contains(names[f])) finger_from_json(h.at(names[f]), c.hand.fingers[f]);
        }
        if (h.contains("thumb")) {
            const json& t = h.at("thumb");
            get_if(t, "l1_m", c.hand.thumb.l1);
            get_if(t, "l2_m", c.hand.thumb.l2);
            get_if(t, "dx_m", c.hand.thumb.dx);
            get_if(t, "dy_m", c.hand.thumb.dy);
        }
        get_if(h, "palm_width_m", c.hand.palm_width);
        get_if(h, "palm_length_m", c.hand.palm_length);
        get_if(h, "palm_thickness_m", c.hand.palm_thickness);
        get_if(h, "thumb_mount_yaw_rad", c.hand.thumb_mount_yaw);
    }

    if (j.contains("force")) {
        const json& f = j.at("force");
        if (f.contains("law")) {
            const std::string law = f.at("law").get<std::string>();
            if (law == "logarithmic") {
                c.force.law = sensor::ForceLaw::Logarithmic;
            } else if (law == "power") {
                c.force.law = sensor::ForceLaw::Power;
            } else {
                throw std::invalid_argument("unknown force law: " + law);
            }
        }
        get_if(f, "c1", c.force.c1);
        get_if(f, "c2", c.force.c2);
        get_if(f, "p1", c.force.p1);
        get_if(f, "p2", c.force.p2);
        get_if(f, "p3", c.force.p3);
    }

    if (j.contains("noise")) {
        const json& n = j.at("noise");
        get_if(n, "bias_deg", c.noise.bias_deg);
        get_if(n, "std_deg", c.noise.std_deg);
        get_if(n, "drift_rate_deg_s", c.noise.drift_rate_deg_s);
    }

    if (j.contains("grasp")) {
        const json& g = j.at("grasp");
        get_if(g, "capsule_radius_m", c.grasp.capsule_radius);
        get_if(g, "debounce_frames", c.grasp.debounce_frames);
    }

    if (j.contains("sim")) {
        const json& s = j.at("sim");
        get_if(s, "dt_s", c.sim.dt);
        get_if(s, "substeps", c.sim.substeps);
        get_if(s, "dhat_rel", c.sim.dhat_rel);
        get_if(s, "eps_rel", c.sim.eps_rel);
        get_if(s, "kappa", c.sim.kappa);
        get_if(s, "newton_tol_v_m_s", c.sim.newton_tol_v);
        get_if(s, "max_newton", c.sim.max_newton);
        get_if(s, "bc_stiffness", c.sim.bc_stiffness);
        get_if(s, "bc_tol_m", c.sim.bc_tol);
        if (s.contains("gravity_m_s2")) {
            const auto& g = s.at("gravity_m_s2");
            c.sim.gravity = Vec3(g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>());
        }
    }

    if (j.contains("material")) {
        const json& m = j.at("material");
        get_if(m, "youngs_modulus_pa", c.material.youngs_modulus_pa);
        get_if(m, "poisson_ratio", c.material.poisson_ratio);
        get_if(m, "density_kg_m3", c.material.density_kg_m3);
        get_if(m, "fracture_stretch", c.material.fracture_stretch);
    }

    c.validate();
    return c;
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["rate_hz"] = c.rate_hz;
    j["snapshot_every"] = c.snapshot_every;
    j["calib_window"] = c.calib_window;
    j["calib_max_spread_deg"] = c.calib_max_spread_deg;

    json h;
    static const char* names[4] = {"index", "middle", "ring", "little"};
    for (int f = 0; f < 4; ++f) h[names[f]] = finger_to_json(c.hand.fingers[f]);
    h["thumb"] = {{"l1_m", c.hand.thumb.l1},
                  {"l2_m", c.hand.thumb.l2},
                  {"dx_m", c.hand.thumb.dx},
                  {"dy_m", c.hand.thumb.dy}};
    h["palm_width_m"] = c.hand.palm_width;
    h["palm_length_m"] = c.hand.palm_length;
    h["palm_thickness_m"] = c.hand.palm_thickness;
    h["thumb_mount_yaw_rad"] = c.hand.thumb_mount_yaw;
    j["hand"] = h;

    j["force"] = {{"law", c.force.law == sensor::ForceLaw::Logarithmic ? "logarithmic" : "power"},
                  {"c1", c.force.c1},
                  {"c2", c.force.c2},
                  {"p1", c.force.p1},
                  {"p2", c.force.p2},
                  {"p3", c.force.p3}};
    j["noise"] = {{"bias_deg", c.noise.bias_deg},
                  {"std_deg", c.noise.std_deg},
                  {"drift_rate_deg_s", c.noise.drift_rate_deg_s}};
    j["grasp"] = {{"capsule_radius_m", c.grasp.capsule_radius},
                  {"debounce_frames", c.grasp.debounce_frames}};
    j["sim"] = {{"dt_s", c.sim.dt},
                {"substeps", c.sim.substeps},
                {"dhat_rel", c.sim.dhat_rel},
                {"eps_rel", c.sim.eps_rel},
                {"kappa", c.sim.kappa},
                {"newton_tol_v_m_s", c.sim.newton_tol_v},
                {"max_newton", c.sim.max_newton},
                {"bc_stiffness", c.sim.bc_stiffness},
                {"bc_tol_m", c.sim.bc_tol},
                {"gravity_m_s2", {c.sim.gravity.x(), c.sim.gravity.y(), c.sim.gravity.z()}}};
    j["material"] = {{"youngs_modulus_pa", c.material.youngs_modulus_pa},
                     {"poisson_ratio", c.material.poisson_ratio},
                     {"density_kg_m3", c.material.density_kg_m3},
                     {"fracture_stretch", c.material.fracture_stretch}};
    return j;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return config_from_json(j);
}

std::string digest_bytes(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return digest_bytes(ss.str());
}

void RunManifest::add_input(const std::string& path) {
    inputs.emplace_back(std::filesystem::path(path).filename().string(), digest_file(path));
}

void RunManifest::write(const std::string& out_dir) const {
    json j;
    j["config_hash"] = config_hash;
    json in = json::object();
    for (const auto& [name, digest] : inputs) in[name] = digest;
    j["inputs"] = in;
    j["version"] = "manugrip 0.1.0";
    json outs = json::array();
    for (const std::string& o : outputs) outs.push_back(std::filesystem::path(o).filename().string());
    j["outputs"] = outs;

    std::ofstream out(std::filesystem::path(out_dir) / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
    out << j.dump(2) << "\n";
}

}  // namespace manugrip::pipeline
