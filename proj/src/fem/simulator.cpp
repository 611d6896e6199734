#include "manugrip/fem/simulator.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace manugrip::fem {

// ---------------------------------------------------------------------------
// ScriptedBody
// ---------------------------------------------------------------------------

void ScriptedBody::validate() const {
    if (trajectory.empty()) throw std::invalid_argument("scripted body '" + name + "' has no poses");
    for (size_t i = 1; i < trajectory.size(); ++i) {
        if (trajectory[i].first <= trajectory[i - 1].first) {
            throw std::invalid_argument("scripted body '" + name + "' pose timestamps must increase");
        }
    }
    mesh.require_watertight();
}

Pose ScriptedBody::pose_at(double t) const {
    constexpr double tol = 1e-9;
    if (trajectory.empty()) throw std::logic_error("scripted body has no trajectory");
    if (t <= trajectory.front().first + tol) return trajectory.front().second;
    if (t >= trajectory.back().first - tol) {
        if (t > trajectory.back().first + tol) {
            throw std::out_of_range("scripted trajectory for '" + name +
                                    "' does not cover t=" + std::to_string(t));
        }
        return trajectory.back().second;
    }
    auto hi = std::upper_bound(trajectory.begin(), trajectory.end(), t,
                               [](double v, const auto& kv) { return v < kv.first; });
    const auto lo = hi - 1;
    const double u = (t - lo->first) / (hi->first - lo->first);
    Pose p;
    p.p = (1.0 - u) * lo->second.p + u * hi->second.p;
    p.q = lo->second.q.slerp(u, hi->second.q).normalized();
    return p;
}

void SimParams::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
    if (!(dhat_rel > 0.0) || !(eps_rel > 0.0)) throw std::invalid_argument("dhat/eps must be > 0");
    if (!(kappa > 0.0)) throw std::invalid_argument("contact stiffness must be > 0");
    if (!(newton_tol_v > 0.0)) throw std::invalid_argument("newton tolerance must be > 0");
}

// ---------------------------------------------------------------------------
// Fracture
// ---------------------------------------------------------------------------

std::vector<FaceKey> fracture_update(const TetMesh& mesh, std::span<const Vec3> x,
                                     double stretch_threshold, const std::set<FaceKey>& separated) {
    std::vector<FaceKey> fresh;
    for (const InteriorFace& f : mesh.interior_faces) {
        const FaceKey key = face_key(f.tet0, f.tet1);
        if (separated.count(key)) continue;
        for (int e = 0; e < 3; ++e) {
            const int a = f.v[e];
            const int b = f.v[(e + 1) % 3];
            const double rest = (mesh.rest[a] - mesh.rest[b]).norm();
            if (rest < 1e-15) throw std::invalid_argument("zero rest distance on interior face");
            const double ratio = (x[a] - x[b]).norm() / rest;
            if (ratio > stretch_threshold) {
                fresh.push_back(key);
                break;
            }
        }
    }
    return fresh;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

RebuildResult rebuild_topology(const TetMesh& mesh, std::span<const Vec3> x,
                               std::span<const Vec3> v, const std::set<FaceKey>& separated,
                               double eps) {
    UnionFind uf(mesh.tet_count());
    for (const InteriorFace& f : mesh.interior_faces) {
        if (!separated.count(face_key(f.tet0, f.tet1))) uf.unite(f.tet0, f.tet1);
    }

    std::map<int, int> root_to_component;
    std::vector<int> component(mesh.tet_count());
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const int root = uf.find(t);
        auto [it, fresh] = root_to_component.try_emplace(root, static_cast<int>(root_to_component.size()));
        component[t] = it->second;
    }
    const int pieces = static_cast<int>(root_to_component.size());

    // Component list per vertex, in first-seen order.
    std::vector<std::vector<int>> vertex_components(mesh.vertex_count());
    for (int t = 0; t < mesh.tet_count(); ++t) {
        for (int idx : mesh.tets[t]) {
            auto& comps = vertex_components[idx];
            if (std::find(comps.begin(), comps.end(), component[t]) == comps.end()) {
                comps.push_back(component[t]);
            }
        }
    }

    RebuildResult out;
    out.pieces = pieces;
    out.tet_component = component;
    out.mesh.rest = mesh.rest;
    out.x.assign(x.begin(), x.end());
    out.v.assign(v.begin(), v.end());

    // (vertex, component) -> vertex id in the split mesh; the first component
    // keeps the original id.
    std::map<std::pair<int, int>, int> copy_id;
    for (int w = 0; w < mesh.vertex_count(); ++w) {
        const auto& comps = vertex_components[w];
        if (comps.empty()) continue;
        copy_id[{w, comps[0]}] = w;
        for (size_t k = 1; k < comps.size(); ++k) {
            copy_id[{w, comps[k]}] = static_cast<int>(out.mesh.rest.size());
            out.mesh.rest.push_back(mesh.rest[w]);
            out.x.push_back(x[w]);
            out.v.push_back(v[w]);
            ++out.duplicated_vertices;
        }
    }

    out.mesh.tets.resize(mesh.tet_count());
    for (int t = 0; t < mesh.tet_count(); ++t) {
        for (int s = 0; s < 4; ++s) {
            out.mesh.tets[t][s] = copy_id.at({mesh.tets[t][s], component[t]});
        }
    }

    if (out.duplicated_vertices > 0) {
        // Nudge each side of every split face into its own material, along the
        // face normal, so the barrier sees a positive gap.
        std::map<std::pair<int, int>, Vec3> push;  // (old vertex, component) -> direction
        for (const InteriorFace& f : mesh.interior_faces) {
            if (!separated.count(face_key(f.tet0, f.tet1))) continue;
            if (component[f.tet0] == component[f.tet1]) continue;
            const Vec3 n = (x[f.v[1]] - x[f.v[0]]).cross(x[f.v[2]] - x[f.v[0]]);
            const double norm = n.norm();
            if (norm < 1e-18) continue;
            const Vec3 nn = n / norm;
            const Vec3 fc = (x[f.v[0]] + x[f.v[1]] + x[f.v[2]]) / 3.0;
            for (const int tet : {f.tet0, f.tet1}) {
                const auto& tv = mesh.tets[tet];
                const Vec3 tc = (x[tv[0]] + x[tv[1]] + x[tv[2]] + x[tv[3]]) / 4.0;
                const double side = nn.dot(tc - fc) >= 0.0 ? 1.0 : -1.0;
                for (int w : f.v) push[{w, component[tet]}] += side * nn;
            }
        }
        for (const auto& [key, dir] : push) {
            const double n = dir.norm();
            if (n < 1e-12) continue;
            out.x[copy_id.at(key)] += eps * dir / n;
        }
    }

    out.mesh.build();
    return out;
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

Simulator::Simulator(TetMesh mesh, MaterialParams material, SimParams params,
                     std::vector<ScriptedBody> scripted)
    : mesh_(std::move(mesh)),
      elasticity_(material),
      material_(material),
      params_(params),
      scripted_(std::move(scripted)) {
    params_.validate();
    material_.validate();
    if (mesh_.tet_count() == 0) throw std::invalid_argument("simulation mesh has no tets");
    if (mesh_.rest_volume.empty()) mesh_.build();

    const double diag = mesh_.bounding_diagonal();
    dhat_ = params_.dhat_rel * diag;
    eps_split_ = params_.eps_rel * diag;
    kappa_ = params_.kappa;

    state_.x = mesh_.rest;
    state_.v.assign(mesh_.rest.size(), Vec3::Zero());
    state_.time = 0.0;

    masses_ = mesh_.lumped_masses(material_.density_kg_m3);

    for (auto& body : scripted_) {
        body.validate();
        std::vector<Vec3> pos(body.mesh.vertices.size());
        const Pose p = body.pose_at(std::max(state_.time, body.trajectory.front().first));
        for (size_t i = 0; i < pos.size(); ++i) pos[i] = p * body.mesh.vertices[i];
        scripted_pos_.push_back(std::move(pos));
    }

    // Initial component bookkeeping (a fresh mesh is one piece).
    auto rebuilt = rebuild_topology(mesh_, state_.x, state_.v, state_.separated, eps_split_);
    state_.piece_count = rebuilt.pieces;
    tet_component_ = rebuilt.tet_component;

    rebuild_contact_set();
}

void Simulator::rebuild_contact_set() {
    contacts_ = ContactSet{};
    const int n_def = mesh_.vertex_count();

    std::set<int> surf_verts;
    for (const SurfaceTriangle& tri : mesh_.surface) {
        contacts_.tris.push_back(tri.v);
        contacts_.tri_body.push_back(0);
        surf_verts.insert(tri.v.begin(), tri.v.end());
    }
    for (int v : surf_verts) {
        contacts_.points.push_back(v);
        contacts_.point_body.push_back(0);
    }

    int offset = n_def;
    for (size_t b = 0; b < scripted_.size(); ++b) {
        const auto& body = scripted_[b];
        for (size_t k = 0; k < body.mesh.vertices.size(); ++k) {
            contacts_.points.push_back(offset + static_cast<int>(k));
            contacts_.point_body.push_back(static_cast<int>(b) + 1);
        }
        for (const auto& t : body.mesh.triangles) {
            contacts_.tris.push_back({offset + t[0], offset + t[1], offset + t[2]});
            contacts_.tri_body.push_back(static_cast<int>(b) + 1);
        }
        offset += static_cast<int>(body.mesh.vertices.size());
    }
}

std::vector<Vec3> Simulator::assemble_positions() const {
    std::vector<Vec3> z = state_.x;
    for (const auto& pos : scripted_pos_) z.insert(z.end(), pos.begin(), pos.end());
    return z;
}

void Simulator::scatter_positions(const std::vector<Vec3>& z) {
    const int n_def = mesh_.vertex_count();
    std::copy(z.begin(), z.begin() + n_def, state_.x.begin());
    int offset = n_def;
    for (auto& pos : scripted_pos_) {
        std::copy(z.begin() + offset, z.begin() + offset + pos.size(), pos.begin());
        offset += static_cast<int>(pos.size());
    }
}

void Simulator::solve_substep(double t_target) {
    const double dt = params_.dt / params_.substeps;
    const int n_def = mesh_.vertex_count();

    // Scripted targets at the end of the substep.
    std::vector<Vec3> targets;
    for (const auto& body : scripted_) {
        const Pose p = body.pose_at(t_target);
        for (const Vec3& v : body.mesh.vertices) targets.push_back(p * v);
    }
    const int n_scr = static_cast<int>(targets.size());
    const int n = n_def + n_scr;

    std::vector<Vec3> z = assemble_positions();
    const std::vector<Vec3> x0(state_.x);

    std::vector<Vec3> xhat(n_def);
    for (int i = 0; i < n_def; ++i) {
        xhat[i] = state_.x[i] + dt * state_.v[i] + dt * dt * params_.gravity;
    }

    double bc_k = params_.bc_stiffness;
    const double dt2 = dt * dt;

    auto objective = [&](const std::vector<Vec3>& zz) {
        double e = 0.0;
        for (int i = 0; i < n_def; ++i) e += 0.5 * masses_[i] * (zz[i] - xhat[i]).squaredNorm();
        e += dt2 * elasticity_.energy(mesh_, std::span<const Vec3>(zz.data(), n_def));
        e += dt2 * barrier_energy(contacts_, zz, dhat_, kappa_);
        for (int s = 0; s < n_scr; ++s) {
            e += 0.5 * bc_k * (zz[n_def + s] - targets[s]).squaredNorm();
        }
        return e;
    };

    for (int escalation = 0;; ++escalation) {
        NewtonTrace trace;
        trace.objective.push_back(objective(z));
        bool converged = false;

        for (int iter = 0; iter < params_.max_newton; ++iter) {
            Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 * n);
            for (int i = 0; i < n_def; ++i) {
                grad.segment<3>(3 * i) += masses_[i] * (z[i] - xhat[i]);
            }
            {
                Eigen::VectorXd eg = Eigen::VectorXd::Zero(3 * n);
                elasticity_.add_gradient(mesh_, std::span<const Vec3>(z.data(), n_def), eg);
                add_barrier_gradient(contacts_, z, dhat_, kappa_, eg);
                grad += dt2 * eg;
            }
            for (int s = 0; s < n_scr; ++s) {
                grad.segment<3>(3 * (n_def + s)) += bc_k * (z[n_def + s] - targets[s]);
            }

            std::vector<Eigen::Triplet<double>> trip;
            elasticity_.add_hessian(mesh_, std::span<const Vec3>(z.data(), n_def), trip);
            add_barrier_hessian(contacts_, z, dhat_, kappa_, trip);
            for (auto& t : trip) t = {t.row(), t.col(), t.value() * dt2};
            for (int i = 0; i < n_def; ++i) {
                for (int r = 0; r < 3; ++r) trip.emplace_back(3 * i + r, 3 * i + r, masses_[i]);
            }
            for (int s = 0; s < n_scr; ++s) {
                for (int r = 0; r < 3; ++r) {
                    trip.emplace_back(3 * (n_def + s) + r, 3 * (n_def + s) + r, bc_k);
                }
            }

            Eigen::SparseMatrix<double> h(3 * n, 3 * n);
            h.setFromTriplets(trip.begin(), trip.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(h);
            if (solver.info() != Eigen::Success) {
                throw StepFailure(state_.time, "hessian factorization failed");
            }
            Eigen::VectorXd p = solver.solve(-grad);

            const double step_inf = p.lpNorm<Eigen::Infinity>();
            trace.final_step_inf = step_inf;
            // Scripted targets must be met before the substep may converge;
            // otherwise a filter-limited approach could stop short.
            double bc_dev = 0.0;
            for (int s = 0; s < n_scr; ++s) {
                bc_dev = std::max(bc_dev, (z[n_def + s] - targets[s]).norm());
            }
            if (step_inf / dt < params_.newton_tol_v && bc_dev <= params_.bc_tol) {
                converged = true;
                trace.iterations = iter;
                break;
            }

            std::vector<Vec3> dz(n);
            for (int i = 0; i < n; ++i) dz[i] = p.segment<3>(3 * i);

            double alpha = filter_max_step(contacts_, z, dz);
            const double e0 = trace.objective.back();
            std::vector<Vec3> znew(n);
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (int i = 0; i < n; ++i) znew[i] = z[i] + alpha * dz[i];
                const double e1 = objective(znew);
                if (e1 <= e0) {
                    z.swap(znew);
                    trace.objective.push_back(e1);
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
                if (alpha < 1e-14) break;
            }
            if (!accepted) {
                throw StepFailure(state_.time, "line search underflow");
            }
            trace.iterations = iter + 1;
        }

        diagnostics_.solves.push_back(std::move(trace));
        if (!converged) {
            throw StepFailure(state_.time, "Newton iteration limit (" +
                                               std::to_string(params_.max_newton) + ") exceeded");
        }

        double bc_err = 0.0;
        for (int s = 0; s < n_scr; ++s) {
            bc_err = std::max(bc_err, (z[n_def + s] - targets[s]).norm());
        }
        if (bc_err <= params_.bc_tol || n_scr == 0) break;
        if (escalation >= params_.max_bc_escalations) {
            throw StepFailure(state_.time, "scripted bodies blocked (deviation " +
                                               std::to_string(bc_err) + " m)");
        }
        bc_k *= 100.0;
        ++diagnostics_.bc_escalations;
    }

    scatter_positions(z);
    for (int i = 0; i < n_def; ++i) state_.v[i] = (state_.x[i] - x0[i]) / dt;
    state_.time = t_target;

    // Stiffness adaptation: tighten when contacts get very close.
    const double dmin = min_pair_distance(contacts_, z);
    if (dmin < 0.01 * dhat_) kappa_ = std::min(kappa_ * 2.0, 1e6 * params_.kappa);
}

StepMetrics Simulator::step() {
    diagnostics_ = StepDiagnostics{};
    const double t0 = state_.time;
    const double dt_sub = params_.dt / params_.substeps;

    for (int s = 1; s <= params_.substeps; ++s) {
        solve_substep(t0 + s * dt_sub);
    }

    // Fracture pass at the end of the full step.
    const auto fresh = fracture_update(mesh_, state_.x, material_.fracture_stretch, state_.separated);
    diagnostics_.new_separations = static_cast<int>(fresh.size());
    if (!fresh.empty()) {
        state_.separated.insert(fresh.begin(), fresh.end());

        const TetMesh pre_mesh = mesh_;
        const std::vector<Vec3> pre_x = state_.x;
        const std::vector<Vec3> pre_v = state_.v;

        double eps = eps_split_;
        bool ok = false;
        for (int attempt = 0; attempt < 2 && !ok; ++attempt, eps *= 2.0) {
            auto rebuilt = rebuild_topology(pre_mesh, pre_x, pre_v, state_.separated, eps);
            mesh_ = std::move(rebuilt.mesh);
            state_.x = std::move(rebuilt.x);
            state_.v = std::move(rebuilt.v);
            state_.piece_count = rebuilt.pieces;
            tet_component_ = rebuilt.tet_component;
            masses_ = mesh_.lumped_masses(material_.density_kg_m3);
            rebuild_contact_set();

            const auto z = assemble_positions();
            ok = rebuilt.duplicated_vertices == 0 || min_pair_distance(contacts_, z) > 0.0;
        }
        if (!ok) throw StepFailure(state_.time, "split perturbation failed to open a gap");
    }

    // Metrics.
    StepMetrics m;
    m.t = state_.time;
    m.pieces = state_.piece_count;
    m.elastic_energy_j = elastic_energy();

    const auto z = assemble_positions();
    const auto active = collect_active_pairs(contacts_, z, dhat_);
    if (!active.empty()) {
        double force_sum = 0.0;
        std::set<int> tris;
        for (const ActivePair& pair : active) {
            force_sum += kappa_ * std::abs(barrier_gradient(pair.distance, dhat_));
            tris.insert(pair.tri_index);
        }
        double area = 0.0;
        for (int ti : tris) {
            const auto& t = contacts_.tris[ti];
            area += 0.5 * (z[t[1]] - z[t[0]]).cross(z[t[2]] - z[t[0]]).norm();
        }
        m.contact_pressure_pa = area > 0.0 ? force_sum / area : 0.0;
    }
    diagnostics_.min_pair_distance = min_pair_distance(contacts_, z);
    return m;
}

double Simulator::elastic_energy() const {
    return elasticity_.energy(mesh_, state_.x);
}

double Simulator::min_surface_distance() const {
    const auto z = assemble_positions();
    return min_pair_distance(contacts_, z);
}

std::vector<ObjectMesh> Simulator::piece_surfaces() const {
    std::vector<ObjectMesh> pieces(state_.piece_count);
    std::vector<std::map<int, int>> remap(state_.piece_count);
    for (const SurfaceTriangle& tri : mesh_.surface) {
        const int c = tet_component_[tri.tet];
        ObjectMesh& piece = pieces[c];
        std::array<int, 3> ids{};
        for (int s = 0; s < 3; ++s) {
            auto [it, fresh] = remap[c].try_emplace(tri.v[s], static_cast<int>(piece.vertices.size()));
            if (fresh) piece.vertices.push_back(state_.x[tri.v[s]]);
            ids[s] = it->second;
        }
        piece.triangles.push_back(ids);
    }
    return pieces;
}

}  // namespace manugrip::fem
