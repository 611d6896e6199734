#include "manugrip/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace manugrip {

void ObjectMesh::local_bounds(Vec3& lo, Vec3& hi) const {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const Vec3& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
}

double ObjectMesh::bounding_diagonal() const {
    if (vertices.empty()) return 0.0;
    Vec3 lo, hi;
    local_bounds(lo, hi);
    return (hi - lo).norm();
}

double ObjectMesh::signed_volume() const {
    double vol = 0.0;
    for (const auto& t : triangles) {
        const Vec3& a = vertices[t[0]];
        const Vec3& b = vertices[t[1]];
        const Vec3& c = vertices[t[2]];
        vol += a.dot(b.cross(c));
    }
    return vol / 6.0;
}

bool ObjectMesh::is_watertight(std::string* reason) const {
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : triangles) {
        for (int e = 0; e < 3; ++e) {
            const int a = t[e];
            const int b = t[(e + 1) % 3];
            if (a == b) {
                if (reason) *reason = "degenerate triangle (repeated vertex)";
                return false;
            }
            if (++directed[{a, b}] > 1) {
                if (reason) *reason = "edge used twice in the same direction (inconsistent winding)";
                return false;
            }
        }
    }
    for (const auto& [edge, count] : directed) {
        if (!directed.count({edge.second, edge.first})) {
            if (reason) {
                *reason = "open edge " + std::to_string(edge.first) + "-" + std::to_string(edge.second);
            }
            return false;
        }
    }
    return true;
}

void ObjectMesh::require_watertight() const {
    if (triangles.empty()) throw std::invalid_argument("mesh has no triangles");
    std::string reason;
    if (!is_watertight(&reason)) {
        throw std::invalid_argument("mesh is not watertight: " + reason);
    }
    for (const auto& t : triangles) {
        const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
        if (n.norm() < 1e-16) throw std::invalid_argument("mesh has a degenerate (zero-area) triangle");
    }
    if (signed_volume() <= 0.0) {
        throw std::invalid_argument("mesh normals are not outward-oriented");
    }
}

// ---------------------------------------------------------------------------
// OBJ I/O
// ---------------------------------------------------------------------------

ObjectMesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    ObjectMesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed vertex");
            }
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<int> idx;
            std::string tok;
            while (ss >> tok) {
                // accept v, v/vt, v//vn, v/vt/vn
                const size_t slash = tok.find('/');
                const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int i = 0;
                try {
                    i = std::stoi(head);
                } catch (...) {
                    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed face index");
                }
                if (i <= 0 || i > static_cast<int>(mesh.vertices.size())) {
                    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": face index out of range");
                }
                idx.push_back(i - 1);
            }
            if (idx.size() < 3) {
                throw std::runtime_error(path + ":" + std::to_string(line_no) + ": face needs >= 3 vertices");
            }
            for (size_t k = 2; k < idx.size(); ++k) {
                mesh.triangles.push_back({idx[0], idx[k - 1], idx[k]});
            }
        }
        // all other records ignored
    }
    return mesh;
}

void write_obj(std::ostream& out, const ObjectMesh& mesh) {
    out.precision(17);
    for (const Vec3& v : mesh.vertices) {
        out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
    }
    for (const auto& t : mesh.triangles) {
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    }
}

void save_obj(const std::string& path, const ObjectMesh& mesh) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_obj(out, mesh);
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

ObjectMesh make_box(const Vec3& h) {
    ObjectMesh m;
    for (int i = 0; i < 8; ++i) {
        m.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                                (i & 4) ? h.z() : -h.z());
    }
    // 12 triangles, outward normals
    const int f[12][3] = {
        {0, 2, 3}, {0, 3, 1},  // -z
        {4, 5, 7}, {4, 7, 6},  // +z
        {0, 1, 5}, {0, 5, 4},  // -y
        {2, 6, 7}, {2, 7, 3},  // +y
        {0, 4, 6}, {0, 6, 2},  // -x
        {1, 3, 7}, {1, 7, 5},  // +x
    };
    for (const auto& tri : f) m.triangles.push_back({tri[0], tri[1], tri[2]});
    return m;
}

ObjectMesh make_icosphere(double radius, int subdivisions) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    std::vector<std::array<int, 3>> tris = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back((verts[a] + verts[b]).normalized() * verts[a].norm());
            midpoint[key] = static_cast<int>(verts.size()) - 1;
            return midpoint[key];
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(tris.size() * 4);
        for (const auto& t : tris) {
            const int ab = mid(t[0], t[1]);
            const int bc = mid(t[1], t[2]);
            const int ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }

    ObjectMesh m;
    for (const Vec3& v : verts) m.vertices.push_back(v.normalized() * radius);
    m.triangles = tris;
    return m;
}

ObjectMesh make_cup(double outer_radius, double inner_radius, double height,
                    double bottom_thickness, int segments) {
    if (!(inner_radius < outer_radius) || !(bottom_thickness < height) || segments < 3) {
        throw std::invalid_argument("invalid cup parameters");
    }
    // Closed profile in the (r, z) half-plane, revolved about z. The first
    // and last profile points sit on the axis and become pole vertices.
    struct P {
        double r, z;
    };
    const std::vector<P> profile = {
        {0.0, 0.0},                         // bottom pole
        {outer_radius, 0.0},                // bottom rim
        {outer_radius, height},             // outer wall top
        {inner_radius, height},             // rim
        {inner_radius, bottom_thickness},   // inner wall bottom
        {0.0, bottom_thickness},            // inner pole
    };

    ObjectMesh m;
    std::vector<std::vector<int>> rings;
    for (const P& p : profile) {
        if (p.r == 0.0) {
            m.vertices.emplace_back(0.0, 0.0, p.z);
            rings.push_back({static_cast<int>(m.vertices.size()) - 1});
        } else {
            std::vector<int> ring;
            for (int s = 0; s < segments; ++s) {
                const double a = 2.0 * kPi * s / segments;
                m.vertices.emplace_back(p.r * std::cos(a), p.r * std::sin(a), p.z);
                ring.push_back(static_cast<int>(m.vertices.size()) - 1);
            }
            rings.push_back(ring);
        }
    }

    const size_t n = rings.size();
    for (size_t i = 0; i < n; ++i) {
        const auto& ra = rings[i];
        const auto& rb = rings[(i + 1) % n];
        for (int s = 0; s < segments; ++s) {
            const int s1 = (s + 1) % segments;
            if (ra.size() == 1 && rb.size() == 1) continue;
            if (ra.size() == 1) {
                m.triangles.push_back({ra[0], rb[s], rb[s1]});
            } else if (rb.size() == 1) {
                m.triangles.push_back({ra[s], rb[0], ra[s1]});
            } else {
                m.triangles.push_back({ra[s], rb[s], rb[s1]});
                m.triangles.push_back({ra[s], rb[s1], ra[s1]});
            }
        }
    }
    // Orientation of the revolve depends on the profile winding; fix to outward.
    if (m.signed_volume() < 0.0) {
        for (auto& t : m.triangles) std::swap(t[1], t[2]);
    }
    return m;
}

ObjectMesh make_wedge(double length, double height, double thickness) {
    ObjectMesh m;
    const double hl = length / 2.0;
    const double ht = thickness / 2.0;
    // Triangular cross-section in (x, z): flat top edge at +z, blade at -z.
    m.vertices = {
        {-ht, -hl, height / 2.0}, {ht, -hl, height / 2.0}, {0.0, -hl, -height / 2.0},
        {-ht, hl, height / 2.0},  {ht, hl, height / 2.0},  {0.0, hl, -height / 2.0},
    };
    m.triangles = {
        {0, 2, 1},            // -y cap
        {3, 4, 5},            // +y cap
        {0, 1, 4}, {0, 4, 3}, // top
        {1, 2, 5}, {1, 5, 4}, // +x slope
        {2, 0, 3}, {2, 3, 5}, // -x slope
    };
    if (m.signed_volume() < 0.0) {
        for (auto& t : m.triangles) std::swap(t[1], t[2]);
    }
    return m;
}

}  // namespace manugrip
