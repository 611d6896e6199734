#pragma once

#include "manugrip/fem/material.hpp"
#include "manugrip/fem/tet_mesh.hpp"

#include <Eigen/Sparse>

#include <span>
#include <vector>

namespace manugrip::fem {

/// Stable Neo-Hookean solid. The Lame parameters are reparameterized
/// (mu_s = mu, lambda_s = lambda + mu) so the model agrees with linear
/// elasticity in the small-strain limit; the energy is shifted to vanish in
/// the rest configuration and stays finite under element inversion.
class Elasticity {
public:
    Elasticity(const MaterialParams& material);

    double mu() const { return mu_; }
    double lambda() const { return lambda_; }

    /// Energy density and derivatives w.r.t. the deformation gradient.
    double psi(const Mat3& f) const;
    Mat3 piola(const Mat3& f) const;
    Eigen::Matrix<double, 9, 9> psi_hessian(const Mat3& f) const;

    /// Total energy of the mesh at positions x.
    double energy(const TetMesh& mesh, std::span<const Vec3> x) const;

    /// Accumulates dE/dx into grad (3*n entries).
    void add_gradient(const TetMesh& mesh, std::span<const Vec3> x, Eigen::VectorXd& grad) const;

    /// Appends PSD-projected 12x12 element Hessians as triplets.
    void add_hessian(const TetMesh& mesh, std::span<const Vec3> x,
                     std::vector<Eigen::Triplet<double>>& triplets) const;

    Mat3 deformation_gradient(const TetMesh& mesh, std::span<const Vec3> x, int tet) const;

private:
    double mu_ = 0.0;
    double lambda_ = 0.0;
    double alpha_ = 1.0;        // 1 + mu/lambda
    double rest_shift_ = 0.0;   // energy density at F = I before shifting
};

}  // namespace manugrip::fem
