#pragma once

#include "manugrip/geometry.hpp"
#include "manugrip/hand_kinematics.hpp"
#include "manugrip/mesh.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace manugrip::grasp {

inline constexpr int kNumPhalanxes = 14;
inline constexpr int kPalmChannel = 14;   // haptic channel for the palm
inline constexpr int kNumHaptics = 15;

struct Capsule {
    Vec3 a{0, 0, 0};
    Vec3 b{0, 0, 0};
    double radius = 0.008;
};

/// Posed collision geometry: one capsule per phalanx plus a palm box.
/// The box is queried through three parallel medial capsules.
struct HandCollisionModel {
    std::array<Capsule, kNumPhalanxes> capsules;
    Pose palm_box_pose;             // box frame in world
    Vec3 palm_half_extents{0.04, 0.04, 0.01};
    Pose hand_pose;                 // wrist frame used for attachments

    std::array<Capsule, 3> palm_spines() const;
};

struct GraspParams {
    double capsule_radius = 0.008;
    int debounce_frames = 0;
};

/// Poses capsules from forward kinematics; phalanx ids: thumb {0,1}, then
/// index/middle/ring/little as {proximal, middle, distal}.
HandCollisionModel build_collision_model(const hand::HandGeometry& geometry,
                                         const hand::HandState& state, const Pose& wrist,
                                         double capsule_radius = 0.008);

struct CollisionPoint {
    Vec3 position{0, 0, 0};  // witness point on the mesh surface, world frame
    int phalanx = -1;        // 0..13, or kPalmChannel for the palm
    double depth = 0.0;      // penetration depth, >= 0
};

/// One deepest-penetration contact per penetrating primitive.
std::vector<CollisionPoint> detect_collisions(const HandCollisionModel& hand,
                                              const ObjectMesh& mesh);

/// Ray-crossing parity inside test; boundary points count as inside.
bool point_in_mesh(const Vec3& p, const ObjectMesh& mesh);

/// True when the geometric center of the collision points lies inside the
/// mesh. Throws on an empty collision list.
bool caging_test(const std::vector<CollisionPoint>& collisions, const ObjectMesh& mesh);

enum class GraspPhase : int { Free = 0, Touching = 1, Caged = 2 };

const char* to_string(GraspPhase phase);
GraspPhase phase_from_string(const std::string& s);

struct GraspState {
    GraspPhase phase = GraspPhase::Free;
    std::optional<Pose> attachment;          // object pose in hand frame, iff Caged
    std::array<bool, kNumHaptics> haptics{};
    std::vector<CollisionPoint> contacts;    // contacts of the latest step
};

/// Advances the caging state machine for one frame.
GraspState step_grasp_state(const GraspState& prev, const std::vector<CollisionPoint>& collisions,
                            const ObjectMesh& mesh, const Pose& hand_pose);

/// Object pose while caged: hand pose composed with the stored attachment.
Pose attach_follow(const GraspState& state, const Pose& hand_pose);

// ---------------------------------------------------------------------------
// Frame-by-frame grasp replay
// ---------------------------------------------------------------------------

struct PosedHand {
    double t = 0.0;
    HandCollisionModel model;
};

struct GraspTraceEntry {
    double t = 0.0;
    GraspPhase phase = GraspPhase::Free;
    std::vector<CollisionPoint> contacts;
    std::array<bool, kNumHaptics> haptics{};
    Pose object_pose;
    Pose hand_pose;
};

/// Runs the state machine over a posed-hand sequence. The object follows the
/// hand while caged and keeps its last pose otherwise.
std::vector<GraspTraceEntry> run_grasp(const std::vector<PosedHand>& hands, ObjectMesh mesh,
                                       const GraspParams& params);

// ---------------------------------------------------------------------------
// Contact aggregation
// ---------------------------------------------------------------------------

/// Sample statistics of one phalanx's contact cluster, in the object frame.
struct ContactCluster {
    int phalanx = -1;
    int samples = 0;
    Vec3 mean{0, 0, 0};
    Mat3 covariance = Mat3::Zero();
    bool degenerate = false;  // single-sample cluster
};

struct ContactSummary {
    std::vector<ContactCluster> clusters;  // ordered by phalanx id
};

/// Object-local contact positions of one trial, keyed by phalanx.
struct ContactLog {
    std::vector<std::pair<int, Vec3>> contacts;
};

/// Per-phalanx Gaussian fit over >= 2 trials.
ContactSummary aggregate_contacts(const std::vector<ContactLog>& logs);

// Contact log JSONL I/O (spec format: t, phase, contacts, haptics, object_pose).
void write_contact_log(std::ostream& out, const std::vector<GraspTraceEntry>& trace);
void write_contact_log_file(const std::string& path, const std::vector<GraspTraceEntry>& trace);
std::vector<GraspTraceEntry> read_contact_log_file(const std::string& path);

/// Extracts the object-local contact set of one logged trial.
ContactLog contact_log_from_trace(const std::vector<GraspTraceEntry>& trace);

}  // namespace manugrip::grasp
