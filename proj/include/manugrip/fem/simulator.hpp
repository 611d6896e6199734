#pragma once

#include "manugrip/fem/contact.hpp"
#include "manugrip/fem/elasticity.hpp"
#include "manugrip/fem/material.hpp"
#include "manugrip/fem/tet_mesh.hpp"
#include "manugrip/mesh.hpp"

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace manugrip::fem {

/// Rigid body whose motion is prescribed by a time-indexed pose sequence;
/// enters the solve as a boundary condition.
struct ScriptedBody {
    std::string name;
    ObjectMesh mesh;                                  // local-frame surface
    std::vector<std::pair<double, Pose>> trajectory;  // sorted by time

    /// Piecewise-linear pose (lerp + slerp). Throws when t is outside the
    /// covered horizon (beyond a small tolerance).
    Pose pose_at(double t) const;
    void validate() const;
};

struct SimParams {
    double dt = 0.05;
    int substeps = 1;
    double dhat_rel = 1e-3;       // barrier range, relative to bbox diagonal
    double eps_rel = 1e-6;        // split perturbation, relative to bbox diagonal
    double kappa = 1e7;           // contact stiffness (J/m^2)
    double newton_tol_v = 1e-2;   // converged when ||dir||_inf / dt < this (m/s)
    int max_newton = 100;
    Vec3 gravity{0.0, 0.0, 0.0};
    double bc_stiffness = 1e10;   // scripted-target spring (N/m)
    double bc_tol = 1e-6;         // max scripted deviation from target (m)
    int max_bc_escalations = 4;

    void validate() const;
};

/// Interior faces are keyed by their unordered tet pair, which survives
/// vertex renumbering across topology rebuilds.
using FaceKey = std::pair<int, int>;

inline FaceKey face_key(int tet0, int tet1) {
    return tet0 < tet1 ? FaceKey{tet0, tet1} : FaceKey{tet1, tet0};
}

struct SimState {
    std::vector<Vec3> x;
    std::vector<Vec3> v;
    double time = 0.0;
    std::set<FaceKey> separated;   // permanent
    int piece_count = 1;
};

struct StepMetrics {
    double t = 0.0;
    double elastic_energy_j = 0.0;
    int pieces = 1;
    double contact_pressure_pa = 0.0;
};

struct NewtonTrace {
    std::vector<double> objective;   // value after each accepted iterate
    int iterations = 0;
    double final_step_inf = 0.0;
};

struct StepDiagnostics {
    std::vector<NewtonTrace> solves;
    double min_pair_distance = std::numeric_limits<double>::infinity();
    int new_separations = 0;
    int bc_escalations = 0;
};

struct StepFailure : std::runtime_error {
    double time;
    StepFailure(double t, const std::string& what)
        : std::runtime_error("step failed at t=" + std::to_string(t) + ": " + what), time(t) {}
};

// ---------------------------------------------------------------------------
// Fracture
// ---------------------------------------------------------------------------

/// Faces whose stretch ratio (current over rest distance of any of the three
/// vertex pairs) exceeds the threshold; already-separated faces are skipped.
std::vector<FaceKey> fracture_update(const TetMesh& mesh, std::span<const Vec3> x,
                                     double stretch_threshold, const std::set<FaceKey>& separated);

struct RebuildResult {
    TetMesh mesh;
    std::vector<Vec3> x;
    std::vector<Vec3> v;
    int pieces = 1;
    std::vector<int> tet_component;
    int duplicated_vertices = 0;
};

/// Splits the mesh into connected components over non-separated faces,
/// duplicating shared vertices and nudging the copies apart by eps along the
/// local split-face normals.
RebuildResult rebuild_topology(const TetMesh& mesh, std::span<const Vec3> x,
                               std::span<const Vec3> v, const std::set<FaceKey>& separated,
                               double eps);

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

class Simulator {
public:
    Simulator(TetMesh mesh, MaterialParams material, SimParams params,
              std::vector<ScriptedBody> scripted);

    const TetMesh& mesh() const { return mesh_; }
    const SimState& state() const { return state_; }
    const SimParams& params() const { return params_; }
    const StepDiagnostics& last_diagnostics() const { return diagnostics_; }
    const std::vector<int>& tet_components() const { return tet_component_; }

    /// Advances one full dt (with internal substeps) including fracture and
    /// topology maintenance; returns the per-step metrics.
    StepMetrics step();

    /// Elastic energy of the target object at the current state.
    double elastic_energy() const;

    /// Minimum distance over all admissible surface pairs (exhaustive).
    double min_surface_distance() const;

    /// Surface mesh of each current piece, in world coordinates.
    std::vector<ObjectMesh> piece_surfaces() const;

private:
    void rebuild_contact_set();
    void solve_substep(double t_target);
    std::vector<Vec3> assemble_positions() const;   // deformable then scripted
    void scatter_positions(const std::vector<Vec3>& z);

    TetMesh mesh_;
    Elasticity elasticity_;
    MaterialParams material_;
    SimParams params_;
    std::vector<ScriptedBody> scripted_;
    std::vector<std::vector<Vec3>> scripted_pos_;   // current per body
    std::vector<double> masses_;
    SimState state_;
    ContactSet contacts_;
    StepDiagnostics diagnostics_;
    std::vector<int> tet_component_;
    double dhat_ = 0.0;
    double eps_split_ = 0.0;
    double kappa_ = 0.0;
};

}  // namespace manugrip::fem
