#include "manugrip/mesh.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace manugrip;

TEST_CASE("procedural primitives are watertight with outward normals") {
    for (const ObjectMesh& m : {make_box(Vec3(0.5, 0.4, 0.3)), make_icosphere(0.2, 2),
                                make_cup(0.04, 0.03, 0.10, 0.01, 24),
                                make_wedge(0.15, 0.05, 0.01)}) {
        CHECK_NOTHROW(m.require_watertight());
        CHECK(m.signed_volume() > 0.0);
    }
}

TEST_CASE("box volume is exact") {
    const ObjectMesh box = make_box(Vec3(0.5, 0.4, 0.3));
    CHECK(box.signed_volume() == doctest::Approx(8 * 0.5 * 0.4 * 0.3).epsilon(1e-12));
}

TEST_CASE("cup volume matches the annular solid") {
    const double ro = 0.05, ri = 0.03, h = 0.1, tb = 0.01;
    const int n = 128;
    const ObjectMesh cup = make_cup(ro, ri, h, tb, n);
    // polygonal prism volume: pi r^2 -> (n/2) sin(2pi/n) r^2
    const double disc = 0.5 * n * std::sin(2 * kPi / n);
    const double expected = disc * (ro * ro * h - ri * ri * (h - tb));
    CHECK(cup.signed_volume() == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("OBJ save/load round trip") {
    const ObjectMesh m = make_icosphere(0.1, 1);
    const auto path = std::filesystem::temp_directory_path() / "manugrip_test_sphere.obj";
    save_obj(path.string(), m);
    const ObjectMesh back = load_obj(path.string());
    REQUIRE(back.vertices.size() == m.vertices.size());
    REQUIRE(back.triangles.size() == m.triangles.size());
    for (size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK((back.vertices[i] - m.vertices[i]).norm() < 1e-15);
    }
    std::filesystem::remove(path);
}

TEST_CASE("OBJ parser accepts slash forms and ignores other records") {
    std::stringstream obj;
    obj << "# comment\n"
        << "mtllib foo.mtl\n"
        << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
        << "vn 0 0 1\n"
        << "vt 0 0\n"
        << "f 1/1/1 2/1/1 3/1/1\n"
        << "f 1//1 3//1 4//1\n"
        << "f 1/1 4/1 2/1\n"
        << "f 2 4 3\n";
    const auto path = std::filesystem::temp_directory_path() / "manugrip_test_tet.obj";
    {
        std::ofstream out(path);
        out << obj.str();
    }
    const ObjectMesh m = load_obj(path.string());
    CHECK(m.vertices.size() == 4);
    CHECK(m.triangles.size() == 4);
    CHECK_NOTHROW(m.require_watertight());
    std::filesystem::remove(path);
}

TEST_CASE("OBJ parser rejects bad face indices") {
    const auto path = std::filesystem::temp_directory_path() / "manugrip_test_bad.obj";
    {
        std::ofstream out(path);
        out << "v 0 0 0\nf 1 2 3\n";
    }
    CHECK_THROWS(load_obj(path.string()));
    std::filesystem::remove(path);
}

TEST_CASE("watertight check catches open meshes and bad winding") {
    ObjectMesh open;
    open.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    open.triangles = {{0, 1, 2}};
    std::string reason;
    CHECK_FALSE(open.is_watertight(&reason));
    CHECK_THROWS_AS(open.require_watertight(), std::invalid_argument);

    ObjectMesh box = make_box(Vec3(1, 1, 1));
    std::swap(box.triangles[0][0], box.triangles[0][1]);  // flip one face
    CHECK_FALSE(box.is_watertight(&reason));
}

TEST_CASE("inward-oriented closed mesh is rejected") {
    ObjectMesh box = make_box(Vec3(1, 1, 1));
    for (auto& t : box.triangles) std::swap(t[1], t[2]);
    CHECK(box.is_watertight());
    CHECK(box.signed_volume() < 0.0);
    CHECK_THROWS_AS(box.require_watertight(), std::invalid_argument);
}
