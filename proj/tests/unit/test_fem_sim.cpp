#include "manugrip/fem/simulator.hpp"

#include <doctest.h>

#include <random>

using namespace manugrip;
using namespace manugrip::fem;

namespace {

std::mt19937_64 rng(31415);

MaterialParams soft_material() {
    MaterialParams m;
    m.youngs_modulus_pa = 1e5;
    m.poisson_ratio = 0.3;
    m.density_kg_m3 = 500.0;
    return m;
}

ScriptedBody static_body(const std::string& name, ObjectMesh mesh, const Pose& pose,
                         double horizon) {
    ScriptedBody b;
    b.name = name;
    b.mesh = std::move(mesh);
    b.trajectory = {{0.0, pose}, {horizon, pose}};
    return b;
}

}  // namespace

TEST_CASE("single tet at rest stays put") {
    SimParams params;
    params.dt = 0.05;
    Simulator sim(make_single_tet(0.05), soft_material(), params, {});
    const auto x0 = sim.state().x;
    const auto m = sim.step();
    for (size_t i = 0; i < x0.size(); ++i) {
        CHECK((sim.state().x[i] - x0[i]).norm() < 1e-10);
    }
    CHECK(m.pieces == 1);
    CHECK(m.elastic_energy_j == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.contact_pressure_pa == 0.0);
}

TEST_CASE("free fall gains exactly g*dt per step") {
    SimParams params;
    params.dt = 0.05;
    params.gravity = Vec3(0, 0, -9.81);
    Simulator sim(make_single_tet(0.05), soft_material(), params, {});

    sim.step();
    for (const Vec3& v : sim.state().v) {
        CHECK((v - Vec3(0, 0, -9.81 * 0.05)).norm() < 1e-8);
    }
    sim.step();
    for (const Vec3& v : sim.state().v) {
        CHECK((v - Vec3(0, 0, -2 * 9.81 * 0.05)).norm() < 1e-8);
    }
}

TEST_CASE("momentum is conserved without contact, gravity or scripts") {
    SimParams params;
    params.dt = 0.01;
    params.newton_tol_v = 1e-10;  // drive the solve tight for the check
    TetMesh mesh = make_box_tets(Vec3(0.04, 0.04, 0.04), 2, 2, 2);
    Simulator sim(std::move(mesh), soft_material(), params, {});

    // rigid drift plus an internal squeeze
    auto& state = const_cast<SimState&>(sim.state());
    std::normal_distribution<double> n(0.0, 0.02);
    for (size_t i = 0; i < state.v.size(); ++i) {
        state.v[i] = Vec3(0.05, 0.0, 0.02) + Vec3(n(rng), n(rng), n(rng));
    }

    const auto masses = sim.mesh().lumped_masses(soft_material().density_kg_m3);
    Vec3 p0 = Vec3::Zero();
    for (size_t i = 0; i < masses.size(); ++i) p0 += masses[i] * state.v[i];

    for (int s = 0; s < 5; ++s) {
        sim.step();
        Vec3 p = Vec3::Zero();
        for (size_t i = 0; i < masses.size(); ++i) p += masses[i] * sim.state().v[i];
        CHECK((p - p0).norm() < 1e-8);
    }
}

TEST_CASE("plate press keeps every accepted state intersection-free and monotone") {
    SimParams params;
    params.dt = 0.05;
    params.substeps = 2;

    TetMesh block = make_box_tets(Vec3(0.04, 0.04, 0.02), 2, 2, 1);
    // plate descends onto the block and holds
    ObjectMesh plate = make_box(Vec3(0.03, 0.03, 0.004));
    Pose above, pressed;
    above.p = Vec3(0.04, 0.04, 0.030);   // 6 mm above the top face (z=0.02)
    pressed.p = Vec3(0.04, 0.04, 0.019); // pressed 5 mm into the rest profile
    ScriptedBody body;
    body.name = "plate";
    body.mesh = plate;
    body.trajectory = {{0.0, above}, {0.5, pressed}, {1.5, pressed}};

    Simulator sim(std::move(block), soft_material(), params, {body});

    for (int s = 0; s < 20; ++s) {
        sim.step();
        CHECK(sim.min_surface_distance() > 0.0);
        for (const auto& solve : sim.last_diagnostics().solves) {
            for (size_t i = 1; i < solve.objective.size(); ++i) {
                CHECK(solve.objective[i] <= solve.objective[i - 1]);
            }
        }
    }
    // the block actually deformed
    CHECK(sim.elastic_energy() > 0.0);
}

TEST_CASE("fracture_update flags stretched faces only") {
    const TetMesh mesh = make_two_tets(0.01);
    const double threshold = 1.1;

    SUBCASE("rigid translation produces no separation") {
        std::vector<Vec3> x = mesh.rest;
        for (auto& p : x) p += Vec3(0.5, -0.2, 0.1);
        CHECK(fracture_update(mesh, x, threshold, {}).empty());
    }
    SUBCASE("rigid rotation produces no separation") {
        const Quat q = quat_from_axis_angle(Vec3(1, 2, 3), 1.1);
        std::vector<Vec3> x = mesh.rest;
        for (auto& p : x) p = q * p;
        CHECK(fracture_update(mesh, x, threshold, {}).empty());
    }
    SUBCASE("uniform 5% expansion stays below the threshold") {
        std::vector<Vec3> x = mesh.rest;
        for (auto& p : x) p *= 1.05;
        CHECK(fracture_update(mesh, x, threshold, {}).empty());
    }
    SUBCASE("stretching a shared-face edge past the threshold separates the face") {
        // shared face is {1,2,3}; stretch vertex pair (1,2) by 1.2
        std::vector<Vec3> x = mesh.rest;
        const Vec3 d = x[2] - x[1];
        x[2] = x[1] + 1.2 * d;
        const auto fresh = fracture_update(mesh, x, threshold, {});
        REQUIRE(fresh.size() == 1);
        CHECK(fresh[0] == face_key(0, 1));
    }
    SUBCASE("already separated faces are not reported again") {
        std::vector<Vec3> x = mesh.rest;
        const Vec3 d = x[2] - x[1];
        x[2] = x[1] + 1.3 * d;
        std::set<FaceKey> seen = {face_key(0, 1)};
        CHECK(fracture_update(mesh, x, threshold, seen).empty());
    }
}

TEST_CASE("fracture ratios are isometry invariant") {
    const TetMesh mesh = make_tet_strip(6, 0.01);
    std::normal_distribution<double> n;
    for (int k = 0; k < 20; ++k) {
        const Quat q = Quat(n(rng), n(rng), n(rng), n(rng)).normalized();
        const Vec3 t(n(rng), n(rng), n(rng));
        std::vector<Vec3> x = mesh.rest;
        for (auto& p : x) p = q * p + t;
        for (const InteriorFace& f : mesh.interior_faces) {
            for (int e = 0; e < 3; ++e) {
                const int a = f.v[e], b = f.v[(e + 1) % 3];
                const double ratio = (x[a] - x[b]).norm() / (mesh.rest[a] - mesh.rest[b]).norm();
                CHECK(std::abs(ratio - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("rebuild_topology splits two tets into two pieces") {
    const TetMesh mesh = make_two_tets(0.01);
    std::vector<Vec3> v(mesh.vertex_count(), Vec3(0.1, 0.2, 0.3));
    const double eps = 1e-8;

    std::set<FaceKey> separated = {face_key(0, 1)};
    const auto out = rebuild_topology(mesh, mesh.rest, v, separated, eps);

    CHECK(out.pieces == 2);
    CHECK(out.duplicated_vertices == 3);
    CHECK(out.mesh.vertex_count() == mesh.vertex_count() + 3);
    CHECK(out.mesh.interior_faces.empty());

    // velocities copied onto the duplicates
    for (const Vec3& vv : out.v) CHECK((vv - Vec3(0.1, 0.2, 0.3)).norm() < 1e-15);

    // the two copies of each shared vertex moved apart by 2*eps
    for (int w = 1; w <= 3; ++w) {
        // original id w belongs to component 0; find its duplicate by rest position
        int dup = -1;
        for (int i = mesh.vertex_count(); i < out.mesh.vertex_count(); ++i) {
            if ((out.mesh.rest[i] - mesh.rest[w]).norm() < 1e-15) {
                if (dup < 0 || (out.x[i] - out.x[w]).norm() > 0) dup = i;
            }
        }
        REQUIRE(dup >= 0);
        CHECK((out.x[dup] - out.x[w]).norm() >= 2 * eps - 1e-15);
    }
}

TEST_CASE("rebuild_topology without separations is the identity") {
    const TetMesh mesh = make_tet_strip(5, 0.01);
    std::vector<Vec3> v(mesh.vertex_count(), Vec3::Zero());
    const auto out = rebuild_topology(mesh, mesh.rest, v, {}, 1e-8);
    CHECK(out.pieces == 1);
    CHECK(out.duplicated_vertices == 0);
    CHECK(out.mesh.vertex_count() == mesh.vertex_count());
}

TEST_CASE("mid-bar cross-section separation yields two pieces") {
    const TetMesh bar = make_tet_strip(10, 0.01);
    std::vector<Vec3> v(bar.vertex_count(), Vec3::Zero());
    // separating the single face between tets 4 and 5 cuts the strip
    std::set<FaceKey> separated = {face_key(4, 5)};
    const auto out = rebuild_topology(bar, bar.rest, v, separated, 1e-8);
    CHECK(out.pieces == 2);
}

TEST_CASE("scripted pose interpolation") {
    ScriptedBody b;
    b.name = "tool";
    b.mesh = make_box(Vec3(0.01, 0.01, 0.01));
    Pose p0, p1;
    p1.p = Vec3(1, 0, 0);
    p1.q = quat_from_axis_angle(Vec3(0, 0, 1), kPi / 2);
    b.trajectory = {{0.0, p0}, {1.0, p1}};

    const Pose mid = b.pose_at(0.5);
    CHECK((mid.p - Vec3(0.5, 0, 0)).norm() < 1e-12);
    CHECK(rotation_angle(mid.q, quat_from_axis_angle(Vec3(0, 0, 1), kPi / 4)) < 1e-12);

    CHECK_THROWS_AS(b.pose_at(2.0), std::out_of_range);
}

TEST_CASE("piece surfaces partition the boundary") {
    const TetMesh mesh = make_two_tets(0.01);
    SimParams params;
    params.dt = 0.05;
    Simulator sim(mesh, soft_material(), params, {});
    const auto pieces = sim.piece_surfaces();
    REQUIRE(pieces.size() == 1);
    CHECK(pieces[0].triangles.size() == mesh.surface.size());
}
