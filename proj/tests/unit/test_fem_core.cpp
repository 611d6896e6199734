#include "manugrip/fem/contact.hpp"
#include "manugrip/fem/elasticity.hpp"
#include "manugrip/fem/tet_mesh.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace manugrip;
using namespace manugrip::fem;

namespace {
std::mt19937_64 rng(1618);
}

TEST_CASE("barrier vanishes at and beyond dhat, diverges toward zero") {
    const double dhat = 1e-3;
    CHECK(barrier_value(dhat, dhat) == 0.0);
    CHECK(barrier_value(2 * dhat, dhat) == 0.0);
    CHECK(barrier_gradient(dhat, dhat) == 0.0);

    const double d = dhat / 2;
    const double expected = -(d - dhat) * (d - dhat) * std::log(d / dhat);
    CHECK(barrier_value(d, dhat) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected > 0.0);

    double prev = 0.0;
    for (double dd = dhat * 0.9; dd > 1e-12; dd *= 0.5) {
        const double b = barrier_value(dd, dhat);
        CHECK(b > prev);
        prev = b;
    }
    CHECK(prev > 1e3 * barrier_value(dhat / 2, dhat));

    CHECK_THROWS_AS(barrier_value(0.0, dhat), std::domain_error);
    CHECK_THROWS_AS(barrier_value(-1e-6, dhat), std::domain_error);
}

TEST_CASE("barrier derivatives match finite differences") {
    const double dhat = 2e-3;
    std::uniform_real_distribution<double> u(0.1, 0.95);
    for (int k = 0; k < 50; ++k) {
        const double d = u(rng) * dhat;
        const double h = 1e-7 * dhat;
        const double fd_g = (barrier_value(d + h, dhat) - barrier_value(d - h, dhat)) / (2 * h);
        const double fd_h = (barrier_gradient(d + h, dhat) - barrier_gradient(d - h, dhat)) / (2 * h);
        CHECK(barrier_gradient(d, dhat) == doctest::Approx(fd_g).epsilon(1e-5));
        CHECK(barrier_hessian(d, dhat) == doctest::Approx(fd_h).epsilon(1e-4));
    }
}

TEST_CASE("tet mesh construction and incidence") {
    SUBCASE("two tets share one interior face") {
        const TetMesh m = make_two_tets();
        CHECK(m.tet_count() == 2);
        CHECK(m.interior_faces.size() == 1);
        CHECK(m.surface.size() == 6);
        for (double v : m.rest_volume) CHECK(v > 0.0);
    }
    SUBCASE("strip of 10 tets has 9 interior faces") {
        const TetMesh m = make_tet_strip(10);
        CHECK(m.tet_count() == 10);
        CHECK(m.interior_faces.size() == 9);
    }
    SUBCASE("kuhn grid conforms") {
        const TetMesh m = make_box_tets(Vec3(0.1, 0.1, 0.1), 2, 2, 2);
        CHECK(m.tet_count() == 6 * 8);
        // closed surface: every surface edge is shared by exactly two faces
        std::map<std::pair<int, int>, int> edges;
        for (const auto& f : m.surface) {
            for (int e = 0; e < 3; ++e) {
                auto key = std::minmax(f.v[e], f.v[(e + 1) % 3]);
                edges[{key.first, key.second}]++;
            }
        }
        for (const auto& [e, count] : edges) CHECK(count == 2);
    }
    SUBCASE("sphere blob stays within radius") {
        const TetMesh m = make_sphere_tets(0.025, 6);
        CHECK(m.tet_count() > 100);
        CHECK(m.tet_count() <= 500);
        for (const Vec3& v : m.rest) CHECK(v.norm() <= 0.025 * 1.8);
    }
}

TEST_CASE("tet mesh file round trip") {
    const TetMesh m = make_box_tets(Vec3(0.05, 0.04, 0.03), 2, 1, 1);
    const auto dir = std::filesystem::temp_directory_path();
    const std::string nodes = (dir / "mg_mesh.node").string();
    const std::string elems = (dir / "mg_mesh.ele").string();
    save_tet_mesh(nodes, elems, m);
    const TetMesh back = load_tet_mesh(nodes, elems);
    REQUIRE(back.vertex_count() == m.vertex_count());
    REQUIRE(back.tet_count() == m.tet_count());
    for (int i = 0; i < m.vertex_count(); ++i) {
        CHECK((back.rest[i] - m.rest[i]).norm() < 1e-15);
    }
    std::filesystem::remove(nodes);
    std::filesystem::remove(elems);
}

TEST_CASE("lumped masses preserve total mass") {
    const TetMesh m = make_box_tets(Vec3(0.1, 0.1, 0.1), 2, 2, 2);
    const double density = 750.0;
    const auto masses = m.lumped_masses(density);
    double total = 0.0;
    for (double mi : masses) total += mi;
    CHECK(total == doctest::Approx(density * 0.1 * 0.1 * 0.1).epsilon(1e-12));
}

TEST_CASE("elastic energy is zero with zero gradient at rest") {
    MaterialParams mat;
    mat.youngs_modulus_pa = 1e6;
    mat.poisson_ratio = 0.3;
    const Elasticity el(mat);
    const TetMesh m = make_box_tets(Vec3(0.1, 0.1, 0.1), 2, 2, 2);

    CHECK(std::abs(el.energy(m, m.rest)) < 1e-12);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 * m.vertex_count());
    el.add_gradient(m, m.rest, grad);
    CHECK(grad.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("small uniaxial strain matches the constrained-modulus energy") {
    MaterialParams mat;
    mat.youngs_modulus_pa = 1e6;
    mat.poisson_ratio = 0.3;
    const Elasticity el(mat);
    const TetMesh m = make_box_tets(Vec3(1, 1, 1), 2, 2, 2);

    const double eps = 0.01;
    std::vector<Vec3> x = m.rest;
    for (auto& p : x) p.x() *= 1.0 + eps;

    const double e_mod = mat.youngs_modulus_pa;
    const double nu = mat.poisson_ratio;
    const double constrained = e_mod * (1 - nu) / ((1 + nu) * (1 - 2 * nu));
    const double expected = 0.5 * constrained * eps * eps * 8.0;  // volume 8
    CHECK(el.energy(m, x) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("elastic gradient matches central differences") {
    MaterialParams mat;
    mat.youngs_modulus_pa = 2e5;
    mat.poisson_ratio = 0.35;
    const Elasticity el(mat);
    const TetMesh m = make_two_tets(0.1);

    std::normal_distribution<double> n(0.0, 0.005);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vec3> x = m.rest;
        for (auto& p : x) p += Vec3(n(rng), n(rng), n(rng));

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 * m.vertex_count());
        el.add_gradient(m, x, grad);

        const auto fd = oracles::central_difference(
            [&](const std::vector<Vec3>& xx) { return el.energy(m, xx); }, x, 1e-7);
        const double scale = std::max(1.0, fd.norm());
        CHECK((grad - fd).norm() / scale < 1e-4);
    }
}

TEST_CASE("psi hessian matches finite differences of the piola stress") {
    MaterialParams mat;
    mat.youngs_modulus_pa = 1e6;
    mat.poisson_ratio = 0.25;
    const Elasticity el(mat);

    std::normal_distribution<double> n(0.0, 0.1);
    for (int trial = 0; trial < 10; ++trial) {
        Mat3 f = Mat3::Identity();
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) f(r, c) += n(rng);
        }
        const auto h = el.psi_hessian(f);
        const double step = 1e-6;
        for (int c = 0; c < 9; ++c) {
            Mat3 fp = f, fm = f;
            fp.data()[c] += step;
            fm.data()[c] -= step;
            const Mat3 dp = (el.piola(fp) - el.piola(fm)) / (2 * step);
            Eigen::Map<const Eigen::Matrix<double, 9, 1>> col(dp.data());
            CHECK((h.col(c) - col).norm() / std::max(1.0, col.norm()) < 1e-4);
        }
    }
}

TEST_CASE("barrier gradient over a contact set matches finite differences") {
    // one deformable point above one scripted triangle
    ContactSet set;
    set.points = {0};
    set.point_body = {0};
    set.tris = {{1, 2, 3}};
    set.tri_body = {1};

    const double dhat = 0.05;
    const double kappa = 3.0;
    std::vector<Vec3> x = {Vec3(0.1, 0.1, 0.02), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(12);
    add_barrier_gradient(set, x, dhat, kappa, grad);

    const auto fd = oracles::central_difference(
        [&](const std::vector<Vec3>& xx) { return barrier_energy(set, xx, dhat, kappa); }, x,
        1e-8);
    CHECK((grad - fd).norm() / std::max(1.0, fd.norm()) < 1e-5);
}

TEST_CASE("filter_max_step blocks approaching contacts and frees separating ones") {
    ContactSet set;
    set.points = {0};
    set.point_body = {0};
    set.tris = {{1, 2, 3}};
    set.tri_body = {1};
    const std::vector<Vec3> x = {Vec3(0.2, 0.2, 0.1), Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};

    SUBCASE("crossing displacement is clipped") {
        const std::vector<Vec3> dx = {Vec3(0, 0, -0.5), Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 0)};
        const double alpha = filter_max_step(set, x, dx);
        CHECK(alpha < 1.0);
        // the filtered step must keep a positive gap
        std::vector<Vec3> moved = x;
        for (size_t i = 0; i < x.size(); ++i) moved[i] += alpha * dx[i];
        CHECK(point_triangle_distance(moved[0], moved[1], moved[2], moved[3]) > 0.0);
    }
    SUBCASE("separating displacement passes in full") {
        const std::vector<Vec3> dx = {Vec3(0, 0, 0.5), Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(0, 0, 0)};
        CHECK(filter_max_step(set, x, dx) == 1.0);
    }
    SUBCASE("tiny starting gap with separating motion still passes") {
        std::vector<Vec3> close = x;
        close[0] = Vec3(0.2, 0.2, 1e-7);
        const std::vector<Vec3> dx = {Vec3(0, 0, 0.01), Vec3(0, 0, -0.01), Vec3(0, 0, -0.01),
                                      Vec3(0, 0, -0.01)};
        CHECK(filter_max_step(set, close, dx) == 1.0);
    }
}

TEST_CASE("scripted-scripted and incident pairs are not admissible") {
    ContactSet set;
    set.points = {0, 1};
    set.point_body = {1, 0};
    set.tris = {{1, 2, 3}, {4, 5, 6}};
    set.tri_body = {2, 0};
    CHECK_FALSE(set.pair_admissible(0, 0));  // scripted point vs scripted tri
    CHECK(set.pair_admissible(0, 1));        // scripted point vs deformable tri
    CHECK_FALSE(set.pair_admissible(1, 0));  // point 1 is a vertex of tri 0
}
