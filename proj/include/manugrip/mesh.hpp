#pragma once

#include "manugrip/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace manugrip {

/// Triangle surface mesh with a rigid pose. Vertices are stored in the local
/// frame; pose maps local to world.
struct ObjectMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    Pose pose;

    Vec3 world_vertex(int i) const { return pose * vertices[i]; }

    /// Axis-aligned bounds of the local-frame vertices.
    void local_bounds(Vec3& lo, Vec3& hi) const;
    double bounding_diagonal() const;

    /// Signed volume; positive for closed meshes with outward normals.
    double signed_volume() const;

    /// True when every edge is shared by exactly two oppositely-directed
    /// triangles. `reason` (optional) describes the first defect found.
    bool is_watertight(std::string* reason = nullptr) const;

    /// Throws unless watertight with outward orientation and no degenerate
    /// triangles.
    void require_watertight() const;
};

// OBJ I/O: `v` and `f` records only, everything else ignored.
ObjectMesh load_obj(const std::string& path);
void save_obj(const std::string& path, const ObjectMesh& mesh);
void write_obj(std::ostream& out, const ObjectMesh& mesh);

// Procedural primitives (watertight by construction).
ObjectMesh make_box(const Vec3& half_extents);
ObjectMesh make_icosphere(double radius, int subdivisions);
/// Open cup: annular wall around a blind bore, closed rim and bottom.
ObjectMesh make_cup(double outer_radius, double inner_radius, double height,
                    double bottom_thickness, int segments);
/// Thin triangular prism along y; blade edge runs along the -z face.
ObjectMesh make_wedge(double length, double height, double thickness);

}  // namespace manugrip
