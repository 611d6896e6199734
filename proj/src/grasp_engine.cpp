#include "manugrip/grasp_engine.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

using nlohmann::json;

namespace manugrip::grasp {

namespace {

/// Deepest contact of one capsule against a watertight mesh, if penetrating.
std::optional<CollisionPoint> capsule_vs_mesh(const Capsule& cap, const ObjectMesh& mesh,
                                              const std::vector<Vec3>& world_verts) {
    double best = std::numeric_limits<double>::infinity();
    Vec3 best_on_seg, best_on_tri;
    for (const auto& t : mesh.triangles) {
        Vec3 on_seg, on_tri;
        const double d = segment_triangle_distance(cap.a, cap.b, world_verts[t[0]],
                                                   world_verts[t[1]], world_verts[t[2]],
                                                   &on_seg, &on_tri);
        if (d < best) {
            best = d;
            best_on_seg = on_seg;
            best_on_tri = on_tri;
        }
    }
    if (!std::isfinite(best)) return std::nullopt;

    const bool axis_inside = point_in_mesh(best_on_seg, mesh);
    double depth;
    if (axis_inside) {
        depth = cap.radius + best;
    } else if (best < cap.radius) {
        depth = cap.radius - best;
    } else {
        return std::nullopt;
    }
    CollisionPoint cp;
    cp.position = best_on_tri;
    cp.depth = depth;
    return cp;
}

Vec3 joint_world(const Pose& wrist, const Vec3& palm_point) { return wrist * palm_point; }

}  // namespace

std::array<Capsule, 3> HandCollisionModel::palm_spines() const {
    std::array<Capsule, 3> s;
    const double r = palm_half_extents.z();
    const double y_span = palm_half_extents.y() - r;
    for (int i = 0; i < 3; ++i) {
        const double y = (i - 1) * y_span;
        const Vec3 a_local(-palm_half_extents.x() + r, y, 0.0);
        const Vec3 b_local(palm_half_extents.x() - r, y, 0.0);
        s[i].a = palm_box_pose * a_local;
        s[i].b = palm_box_pose * b_local;
        s[i].radius = r;
    }
    return s;
}

HandCollisionModel build_collision_model(const hand::HandGeometry& geometry,
                                         const hand::HandState& state, const Pose& wrist,
                                         double capsule_radius) {
    if (!(capsule_radius > 0.0)) throw std::invalid_argument("capsule radius must be > 0");

    HandCollisionModel m;
    m.hand_pose = wrist;

    // Thumb: MCP -> proximal frame origin -> tip. The mount yaw is already
    // folded into the thumb poses by hand_fk.
    const Vec3 thumb_mcp(geometry.thumb.dx, geometry.thumb.dy, 0.0);
    m.capsules[0] = {joint_world(wrist, thumb_mcp),
                     joint_world(wrist, state.thumb_poses[0].translation), capsule_radius};
    m.capsules[1] = {joint_world(wrist, state.thumb_poses[0].translation),
                     joint_world(wrist, state.thumb_poses[1].translation), capsule_radius};

    for (int f = 0; f < 4; ++f) {
        const auto& g = geometry.fingers[f];
        const Vec3 mcp(g.dx, g.dy, 0.0);
        const auto& poses = state.finger_poses[f];
        const int base = 2 + 3 * f;
        m.capsules[base] = {joint_world(wrist, mcp),
                            joint_world(wrist, poses[0].translation), capsule_radius};
        m.capsules[base + 1] = {joint_world(wrist, poses[0].translation),
                                joint_world(wrist, poses[1].translation), capsule_radius};
        m.capsules[base + 2] = {joint_world(wrist, poses[1].translation),
                                joint_world(wrist, poses[2].translation), capsule_radius};
    }

    // Palm slab sits behind the palm plane (fingers curl toward +z).
    m.palm_half_extents = Vec3(geometry.palm_length / 2.0, geometry.palm_width / 2.0,
                               geometry.palm_thickness / 2.0);
    Pose box_local;
    box_local.p = Vec3(0.0, 0.0, -geometry.palm_thickness / 2.0);
    m.palm_box_pose = wrist * box_local;
    return m;
}

std::vector<CollisionPoint> detect_collisions(const HandCollisionModel& hand,
                                              const ObjectMesh& mesh) {
    mesh.require_watertight();

    std::vector<Vec3> world_verts(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) world_verts[i] = mesh.world_vertex(i);

    std::vector<CollisionPoint> out;
    for (int i = 0; i < kNumPhalanxes; ++i) {
        auto cp = capsule_vs_mesh(hand.capsules[i], mesh, world_verts);
        if (cp) {
            cp->phalanx = i;
            out.push_back(*cp);
        }
    }

    // Palm box: deepest contact over its medial spines.
    std::optional<CollisionPoint> palm;
    for (const Capsule& spine : hand.palm_spines()) {
        auto cp = capsule_vs_mesh(spine, mesh, world_verts);
        if (cp && (!palm || cp->depth > palm->depth)) palm = cp;
    }
    if (palm) {
        palm->phalanx = kPalmChannel;
        out.push_back(*palm);
    }
    return out;
}

bool point_in_mesh(const Vec3& p, const ObjectMesh& mesh) {
    mesh.require_watertight();

    // Work in the mesh local frame.
    const Vec3 q = mesh.pose.inverse() * p;

    // Boundary counts as inside.
    const double boundary_eps = 1e-9 * std::max(mesh.bounding_diagonal(), 1e-12);
    for (const auto& t : mesh.triangles) {
        if (point_triangle_distance(q, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                    mesh.vertices[t[2]]) <= boundary_eps) {
            return true;
        }
    }

    // Parity ray casting; retry on near-degenerate hits.
    Vec3 dir(0.577350269189626, 0.577350269189626, 0.577350269189626);
    for (int attempt = 0; attempt < 32; ++attempt) {
        bool degenerate = false;
        int crossings = 0;
        for (const auto& t : mesh.triangles) {
            const Vec3& a = mesh.vertices[t[0]];
            const Vec3& b = mesh.vertices[t[1]];
            const Vec3& c = mesh.vertices[t[2]];
            const Vec3 e1 = b - a;
            const Vec3 e2 = c - a;
            const Vec3 pv = dir.cross(e2);
            const double det = e1.dot(pv);
            if (std::abs(det) < 1e-14) continue;
            const double inv = 1.0 / det;
            const Vec3 tv = q - a;
            const double u = tv.dot(pv) * inv;
            const Vec3 qv = tv.cross(e1);
            const double v = dir.dot(qv) * inv;
            const double w = 1.0 - u - v;
            const double tt = e2.dot(qv) * inv;
            if (tt <= 0.0) continue;
            if (u < 0.0 || v < 0.0 || w < 0.0) continue;
            constexpr double edge_eps = 1e-10;
            if (u < edge_eps || v < edge_eps || w < edge_eps) {
                degenerate = true;  // grazing an edge; parity unreliable
                break;
            }
            ++crossings;
        }
        if (!degenerate) return (crossings % 2) == 1;
        // deterministic direction perturbation
        const double s = 0.1 * (attempt + 1);
        dir = Vec3(std::cos(s) * 0.577350269189626 - std::sin(s) * 0.211324865405187,
                   std::sin(s) * 0.577350269189626 + std::cos(s) * 0.211324865405187,
                   0.788675134594813)
                  .normalized();
    }
    throw std::runtime_error("point_in_mesh: parity test failed to find a clean ray");
}

bool caging_test(const std::vector<CollisionPoint>& collisions, const ObjectMesh& mesh) {
    if (collisions.empty()) {
        throw std::invalid_argument("caging_test requires at least one collision point");
    }
    Vec3 center = Vec3::Zero();
    for (const CollisionPoint& c : collisions) center += c.position;
    center /= static_cast<double>(collisions.size());
    return point_in_mesh(center, mesh);
}

const char* to_string(GraspPhase phase) {
    switch (phase) {
        case GraspPhase::Free: return "Free";
        case GraspPhase::Touching: return "Touching";
        case GraspPhase::Caged: return "Caged";
    }
    return "Free";
}

GraspPhase phase_from_string(const std::string& s) {
    if (s == "Free") return GraspPhase::Free;
    if (s == "Touching") return GraspPhase::Touching;
    if (s == "Caged") return GraspPhase::Caged;
    throw std::invalid_argument("unknown grasp phase: " + s);
}

GraspState step_grasp_state(const GraspState& prev, const std::vector<CollisionPoint>& collisions,
                            const ObjectMesh& mesh, const Pose& hand_pose) {
    GraspState next;
    next.contacts = collisions;

    switch (prev.phase) {
        case GraspPhase::Free:
            next.phase = collisions.empty() ? GraspPhase::Free : GraspPhase::Touching;
            break;
        case GraspPhase::Touching:
            if (collisions.empty()) {
                next.phase = GraspPhase::Free;
            } else if (caging_test(collisions, mesh)) {
                next.phase = GraspPhase::Caged;
                next.attachment = hand_pose.inverse() * mesh.pose;
            } else {
                next.phase = GraspPhase::Touching;
            }
            break;
        case GraspPhase::Caged:
            if (collisions.empty() || !caging_test(collisions, mesh)) {
                next.phase = GraspPhase::Free;
            } else {
                next.phase = GraspPhase::Caged;
                next.attachment = prev.attachment;
            }
            break;
    }

    next.haptics.fill(false);
    if (next.phase == GraspPhase::Caged) {
        next.haptics.fill(true);
    } else {
        for (const CollisionPoint& c : collisions) {
            if (c.phalanx >= 0 && c.phalanx < kNumHaptics) next.haptics[c.phalanx] = true;
        }
    }
    return next;
}

Pose attach_follow(const GraspState& state, const Pose& hand_pose) {
    if (state.phase != GraspPhase::Caged || !state.attachment) {
        throw std::logic_error("attach_follow requires the Caged phase");
    }
    return hand_pose * (*state.attachment);
}

std::vector<GraspTraceEntry> run_grasp(const std::vector<PosedHand>& hands, ObjectMesh mesh,
                                       const GraspParams& params) {
    mesh.require_watertight();

    GraspState state;
    std::vector<GraspTraceEntry> trace;
    trace.reserve(hands.size());
    int cage_streak = 0;

    for (const PosedHand& ph : hands) {
        // Object follows the hand while caged.
        if (state.phase == GraspPhase::Caged) {
            mesh.pose = attach_follow(state, ph.model.hand_pose);
        }
        const auto collisions = detect_collisions(ph.model, mesh);

        GraspState next = step_grasp_state(state, collisions, mesh, ph.model.hand_pose);

        // Optional debounce of the Touching -> Caged transition.
        if (params.debounce_frames > 0 && state.phase == GraspPhase::Touching &&
            next.phase == GraspPhase::Caged) {
            ++cage_streak;
            if (cage_streak <= params.debounce_frames) {
                next.phase = GraspPhase::Touching;
                next.attachment.reset();
                next.haptics.fill(false);
                for (const CollisionPoint& c : collisions) {
                    if (c.phalanx >= 0 && c.phalanx < kNumHaptics) next.haptics[c.phalanx] = true;
                }
            }
        } else if (next.phase != GraspPhase::Caged) {
            cage_streak = 0;
        }
        state = next;

        GraspTraceEntry e;
        e.t = ph.t;
        e.phase = state.phase;
        e.contacts = collisions;
        e.haptics = state.haptics;
        e.object_pose = mesh.pose;
        e.hand_pose = ph.model.hand_pose;
        trace.push_back(std::move(e));
    }
    return trace;
}

ContactSummary aggregate_contacts(const std::vector<ContactLog>& logs) {
    if (logs.size() < 2) {
        throw std::invalid_argument("aggregate_contacts requires at least 2 logs");
    }
    std::map<int, std::vector<Vec3>> by_phalanx;
    for (const ContactLog& log : logs) {
        for (const auto& [phalanx, pos] : log.contacts) by_phalanx[phalanx].push_back(pos);
    }

    ContactSummary summary;
    for (const auto& [phalanx, points] : by_phalanx) {
        ContactCluster c;
        c.phalanx = phalanx;
        c.samples = static_cast<int>(points.size());
        Vec3 mean = Vec3::Zero();
        for (const Vec3& p : points) mean += p;
        mean /= static_cast<double>(points.size());
        c.mean = mean;

        if (points.size() < 2) {
            c.degenerate = true;
        } else {
            Mat3 cov = Mat3::Zero();
            for (const Vec3& p : points) {
                const Vec3 d = p - mean;
                cov += d * d.transpose();
            }
            cov /= static_cast<double>(points.size() - 1);
            c.covariance = cov;
        }
        summary.clusters.push_back(c);
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Contact log I/O
// ---------------------------------------------------------------------------

namespace {

json pose_to_json(const Pose& p) {
    return json::array({p.q.w(), p.q.x(), p.q.y(), p.q.z(), p.p.x(), p.p.y(), p.p.z()});
}

Pose pose_from_json(const json& j) {
    Pose p;
    p.q = Quat(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
               j.at(3).get<double>())
              .normalized();
    p.p = Vec3(j.at(4).get<double>(), j.at(5).get<double>(), j.at(6).get<double>());
    return p;
}

}  // namespace

void write_contact_log(std::ostream& out, const std::vector<GraspTraceEntry>& trace) {
    for (const auto& e : trace) {
        json rec;
        rec["t"] = e.t;
        rec["phase"] = to_string(e.phase);
        json contacts = json::array();
        for (const auto& c : e.contacts) {
            contacts.push_back({{"position", {c.position.x(), c.position.y(), c.position.z()}},
                                {"phalanx", c.phalanx},
                                {"depth", c.depth}});
        }
        rec["contacts"] = contacts;
        rec["haptics"] = e.haptics;
        rec["object_pose"] = pose_to_json(e.object_pose);
        rec["hand_pose"] = pose_to_json(e.hand_pose);
        out << rec.dump() << "\n";
    }
}

void write_contact_log_file(const std::string& path, const std::vector<GraspTraceEntry>& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_contact_log(out, trace);
}

std::vector<GraspTraceEntry> read_contact_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<GraspTraceEntry> trace;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            GraspTraceEntry e;
            e.t = rec.at("t").get<double>();
            e.phase = phase_from_string(rec.at("phase").get<std::string>());
            for (const auto& c : rec.at("contacts")) {
                CollisionPoint cp;
                const auto& pos = c.at("position");
                cp.position = Vec3(pos.at(0).get<double>(), pos.at(1).get<double>(),
                                   pos.at(2).get<double>());
                cp.phalanx = c.at("phalanx").get<int>();
                cp.depth = c.at("depth").get<double>();
                e.contacts.push_back(cp);
            }
            const auto& hap = rec.at("haptics");
            for (int i = 0; i < kNumHaptics && i < static_cast<int>(hap.size()); ++i) {
                e.haptics[i] = hap.at(i).get<bool>();
            }
            e.object_pose = pose_from_json(rec.at("object_pose"));
            if (rec.contains("hand_pose")) e.hand_pose = pose_from_json(rec.at("hand_pose"));
            trace.push_back(std::move(e));
        } catch (const std::exception& ex) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return trace;
}

ContactLog contact_log_from_trace(const std::vector<GraspTraceEntry>& trace) {
    ContactLog log;
    for (const auto& e : trace) {
        const Pose inv = e.object_pose.inverse();
        for (const auto& c : e.contacts) {
            log.contacts.emplace_back(c.phalanx, inv * c.position);
        }
    }
    return log;
}

}  // namespace manugrip::grasp
