#pragma once

#include "manugrip/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace manugrip::fem {

/// Interior face shared by two tetrahedra. Vertex ids change when the mesh
/// is split, so faces are keyed by their (stable) tet pair.
struct InteriorFace {
    std::array<int, 3> v{};
    int tet0 = -1;
    int tet1 = -1;
};

struct SurfaceTriangle {
    std::array<int, 3> v{};  // outward-oriented
    int tet = -1;
};

/// Tetrahedral volume mesh with rest configuration and face incidence.
struct TetMesh {
    std::vector<Vec3> rest;
    std::vector<std::array<int, 4>> tets;

    // Derived by build():
    std::vector<double> rest_volume;
    std::vector<Mat3> dm_inv;
    std::vector<InteriorFace> interior_faces;
    std::vector<SurfaceTriangle> surface;

    int vertex_count() const { return static_cast<int>(rest.size()); }
    int tet_count() const { return static_cast<int>(tets.size()); }

    /// Computes rest volumes (fixing inverted tets by swapping two indices),
    /// dm_inv and the face incidence tables. Throws on degenerate tets or
    /// faces shared by more than two tets.
    void build();

    /// Lumped vertex masses for a uniform density.
    std::vector<double> lumped_masses(double density) const;

    double bounding_diagonal() const;
};

// ASCII files: a nodes file (count header, then `id x y z` per line) and an
// elements file (count header, then `id v1 v2 v3 v4` per line), 0-based ids.
TetMesh load_tet_mesh(const std::string& nodes_path, const std::string& elements_path);
void save_tet_mesh(const std::string& nodes_path, const std::string& elements_path,
                   const TetMesh& mesh);

// Procedural generators.
TetMesh make_single_tet(double edge = 0.1);
/// Two unit-ish tets sharing one face.
TetMesh make_two_tets(double scale = 0.01);
/// Chain of n tets, each glued to the previous by a shared face.
TetMesh make_tet_strip(int n, double scale = 0.01);
/// Box subdivided into nx*ny*nz cells of six tets each (Kuhn split).
TetMesh make_box_tets(const Vec3& size, int nx, int ny, int nz, const Vec3& origin = Vec3::Zero());
/// Sphere-ish blob carved from a Kuhn-split grid; keeps tets whose centroid
/// lies within the radius.
TetMesh make_sphere_tets(double radius, int cells_per_axis, const Vec3& center = Vec3::Zero());

}  // namespace manugrip::fem
