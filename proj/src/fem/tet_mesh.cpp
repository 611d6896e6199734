#include "manugrip/fem/tet_mesh.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace manugrip::fem {

namespace {

double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// Local faces opposite each vertex, wound so the normal points out of the tet
// when the tet is positively oriented.
constexpr int kLocalFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

}  // namespace

void TetMesh::build() {
    rest_volume.assign(tets.size(), 0.0);
    dm_inv.assign(tets.size(), Mat3::Zero());

    for (size_t e = 0; e < tets.size(); ++e) {
        auto& t = tets[e];
        for (int i : t) {
            if (i < 0 || i >= vertex_count()) throw std::invalid_argument("tet index out of range");
        }
        double vol = tet_volume(rest[t[0]], rest[t[1]], rest[t[2]], rest[t[3]]);
        if (vol < 0.0) {
            std::swap(t[2], t[3]);
            vol = -vol;
        }
        if (vol < 1e-18) throw std::invalid_argument("degenerate tetrahedron " + std::to_string(e));
        rest_volume[e] = vol;

        Mat3 dm;
        dm.col(0) = rest[t[1]] - rest[t[0]];
        dm.col(1) = rest[t[2]] - rest[t[0]];
        dm.col(2) = rest[t[3]] - rest[t[0]];
        dm_inv[e] = dm.inverse();
    }

    // Face incidence via sorted vertex keys.
    struct FaceRef {
        std::array<int, 3> oriented;
        int tet;
    };
    std::map<std::array<int, 3>, std::vector<FaceRef>> faces;
    for (size_t e = 0; e < tets.size(); ++e) {
        for (const auto& lf : kLocalFaces) {
            std::array<int, 3> oriented = {tets[e][lf[0]], tets[e][lf[1]], tets[e][lf[2]]};
            std::array<int, 3> key = oriented;
            std::sort(key.begin(), key.end());
            faces[key].push_back({oriented, static_cast<int>(e)});
        }
    }

    interior_faces.clear();
    surface.clear();
    for (const auto& [key, refs] : faces) {
        if (refs.size() == 1) {
            surface.push_back({refs[0].oriented, refs[0].tet});
        } else if (refs.size() == 2) {
            InteriorFace f;
            f.v = refs[0].oriented;
            f.tet0 = refs[0].tet;
            f.tet1 = refs[1].tet;
            interior_faces.push_back(f);
        } else {
            throw std::invalid_argument("face shared by more than two tets (non-manifold mesh)");
        }
    }
}

std::vector<double> TetMesh::lumped_masses(double density) const {
    std::vector<double> m(rest.size(), 0.0);
    for (size_t e = 0; e < tets.size(); ++e) {
        const double share = density * rest_volume[e] / 4.0;
        for (int i : tets[e]) m[i] += share;
    }
    return m;
}

double TetMesh::bounding_diagonal() const {
    if (rest.empty()) return 0.0;
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const Vec3& v : rest) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

// ---------------------------------------------------------------------------
// File I/O
// ---------------------------------------------------------------------------

TetMesh load_tet_mesh(const std::string& nodes_path, const std::string& elements_path) {
    TetMesh mesh;
    {
        std::ifstream in(nodes_path);
        if (!in) throw std::runtime_error("cannot open " + nodes_path);
        int count = 0;
        if (!(in >> count) || count <= 0) throw std::runtime_error(nodes_path + ": bad node count");
        mesh.rest.resize(count);
        std::vector<bool> seen(count, false);
        for (int k = 0; k < count; ++k) {
            int id;
            double x, y, z;
            if (!(in >> id >> x >> y >> z)) throw std::runtime_error(nodes_path + ": truncated node list");
            if (id < 0 || id >= count || seen[id]) throw std::runtime_error(nodes_path + ": bad node id");
            seen[id] = true;
            mesh.rest[id] = Vec3(x, y, z);
        }
    }
    {
        std::ifstream in(elements_path);
        if (!in) throw std::runtime_error("cannot open " + elements_path);
        int count = 0;
        if (!(in >> count) || count <= 0) throw std::runtime_error(elements_path + ": bad element count");
        mesh.tets.resize(count);
        std::vector<bool> seen(count, false);
        for (int k = 0; k < count; ++k) {
            int id, a, b, c, d;
            if (!(in >> id >> a >> b >> c >> d)) {
                throw std::runtime_error(elements_path + ": truncated element list");
            }
            if (id < 0 || id >= count || seen[id]) throw std::runtime_error(elements_path + ": bad element id");
            seen[id] = true;
            mesh.tets[id] = {a, b, c, d};
        }
    }
    mesh.build();
    return mesh;
}

void save_tet_mesh(const std::string& nodes_path, const std::string& elements_path,
                   const TetMesh& mesh) {
    {
        std::ofstream out(nodes_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + nodes_path + " for writing");
        out.precision(17);
        out << mesh.rest.size() << "\n";
        for (size_t i = 0; i < mesh.rest.size(); ++i) {
            out << i << " " << mesh.rest[i].x() << " " << mesh.rest[i].y() << " "
                << mesh.rest[i].z() << "\n";
        }
    }
    {
        std::ofstream out(elements_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + elements_path + " for writing");
        out << mesh.tets.size() << "\n";
        for (size_t e = 0; e < mesh.tets.size(); ++e) {
            const auto& t = mesh.tets[e];
            out << e << " " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
        }
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

TetMesh make_single_tet(double edge) {
    TetMesh m;
    m.rest = {Vec3(0, 0, 0), Vec3(edge, 0, 0), Vec3(0, edge, 0), Vec3(0, 0, edge)};
    m.tets = {{0, 1, 2, 3}};
    m.build();
    return m;
}

TetMesh make_two_tets(double scale) {
    TetMesh m;
    m.rest = {Vec3(0, 0, 0), Vec3(scale, 0, 0), Vec3(0, scale, 0), Vec3(0, 0, scale),
              Vec3(scale, scale, scale)};
    m.tets = {{0, 1, 2, 3}, {1, 2, 3, 4}};
    m.build();
    return m;
}

TetMesh make_tet_strip(int n, double scale) {
    if (n < 1) throw std::invalid_argument("strip needs at least one tet");
    TetMesh m;
    m.rest = {Vec3(0, 0, 0), Vec3(scale, 0, 0), Vec3(0, scale, 0), Vec3(0, 0, scale)};
    m.tets = {{0, 1, 2, 3}};
    // Each new tet keeps the previous three newest vertices and adds one,
    // marching along +x.
    for (int k = 1; k < n; ++k) {
        const auto& prev = m.tets.back();
        const Vec3 apex = (m.rest[prev[1]] + m.rest[prev[2]] + m.rest[prev[3]]) / 3.0 +
                          Vec3(scale, 0, 0);
        m.rest.push_back(apex);
        m.tets.push_back({prev[1], prev[2], prev[3], static_cast<int>(m.rest.size()) - 1});
    }
    m.build();
    return m;
}

TetMesh make_box_tets(const Vec3& size, int nx, int ny, int nz, const Vec3& origin) {
    if (nx < 1 || ny < 1 || nz < 1) throw std::invalid_argument("grid must be at least 1x1x1");
    TetMesh m;
    auto vid = [&](int i, int j, int k) { return (i * (ny + 1) + j) * (nz + 1) + k; };
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j <= ny; ++j) {
            for (int k = 0; k <= nz; ++k) {
                m.rest.push_back(origin + Vec3(size.x() * i / nx, size.y() * j / ny,
                                               size.z() * k / nz));
            }
        }
    }
    // Kuhn subdivision: six tets per cell along the main diagonal; faces of
    // neighbouring cells match without parity flips.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            for (int k = 0; k < nz; ++k) {
                for (const auto& p : perms) {
                    std::array<int, 3> at = {i, j, k};
                    std::array<int, 4> tv{};
                    tv[0] = vid(at[0], at[1], at[2]);
                    for (int s = 0; s < 3; ++s) {
                        at[p[s]] += 1;
                        tv[s + 1] = vid(at[0], at[1], at[2]);
                    }
                    m.tets.push_back(tv);
                }
            }
        }
    }
    m.build();
    return m;
}

TetMesh make_sphere_tets(double radius, int cells_per_axis, const Vec3& center) {
    const int n = cells_per_axis;
    TetMesh grid = make_box_tets(Vec3(2 * radius, 2 * radius, 2 * radius), n, n, n,
                                 center - Vec3(radius, radius, radius));
    // Keep tets whose centroid is inside the sphere, then compact vertices.
    TetMesh m;
    std::vector<int> remap(grid.rest.size(), -1);
    for (const auto& t : grid.tets) {
        const Vec3 c = (grid.rest[t[0]] + grid.rest[t[1]] + grid.rest[t[2]] + grid.rest[t[3]]) / 4.0;
        if ((c - center).norm() > radius) continue;
        std::array<int, 4> nt{};
        for (int s = 0; s < 4; ++s) {
            if (remap[t[s]] < 0) {
                remap[t[s]] = static_cast<int>(m.rest.size());
                m.rest.push_back(grid.rest[t[s]]);
            }
            nt[s] = remap[t[s]];
        }
        m.tets.push_back(nt);
    }
    if (m.tets.empty()) throw std::invalid_argument("sphere radius too small for the grid");
    m.build();
    return m;
}

}  // namespace manugrip::fem
