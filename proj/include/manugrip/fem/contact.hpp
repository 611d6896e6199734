#pragma once

#include "manugrip/geometry.hpp"

#include <Eigen/Sparse>

#include <array>
#include <span>
#include <vector>

namespace manugrip::fem {

/// Smoothly clamped log barrier on a point-triangle distance:
///   b(d) = -(d - dhat)^2 * ln(d / dhat)   for 0 < d < dhat,
///   b(d) = 0                              for d >= dhat;
/// diverges as d -> 0+.
double barrier_value(double d, double dhat);
double barrier_gradient(double d, double dhat);
double barrier_hessian(double d, double dhat);

/// Surface primitives of the coupled system, indexed into one shared
/// position vector. Body 0 is the deformable target; higher ids are scripted.
struct ContactSet {
    std::vector<int> points;                  // vertex ids
    std::vector<int> point_body;
    std::vector<std::array<int, 3>> tris;     // vertex ids
    std::vector<int> tri_body;

    /// Pairs between both scripted bodies are boundary conditions and are
    /// skipped, as are pairs where the point is a vertex of the triangle.
    bool pair_admissible(int point_idx, int tri_idx) const;
};

struct ActivePair {
    int point = -1;                // vertex id
    std::array<int, 3> tri{};      // vertex ids
    int tri_index = -1;            // index into ContactSet::tris
    double distance = 0.0;
};

std::vector<ActivePair> collect_active_pairs(const ContactSet& set, std::span<const Vec3> x,
                                             double dhat);

/// Total barrier energy kappa * sum b(d) over admissible pairs.
double barrier_energy(const ContactSet& set, std::span<const Vec3> x, double dhat, double kappa);

void add_barrier_gradient(const ContactSet& set, std::span<const Vec3> x, double dhat,
                          double kappa, Eigen::VectorXd& grad);

void add_barrier_hessian(const ContactSet& set, std::span<const Vec3> x, double dhat, double kappa,
                         std::vector<Eigen::Triplet<double>>& triplets);

/// Minimum admissible pair distance; +inf when the set is empty.
double min_pair_distance(const ContactSet& set, std::span<const Vec3> x);

/// Conservative step-length filter: the largest alpha in (0, 1] such that no
/// admissible pair's distance can be consumed along x + alpha * dx, from the
/// bound |delta d| <= |dx_p| + max_i |dx_vi|.
double filter_max_step(const ContactSet& set, std::span<const Vec3> x,
                       std::span<const Vec3> dx, double slack = 0.9);

}  // namespace manugrip::fem
