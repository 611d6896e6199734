#include "manugrip/fem/elasticity.hpp"

#include <Eigen/Eigenvalues>

namespace manugrip::fem {

namespace {

Mat3 cofactor(const Mat3& f) {
    Mat3 c;
    c.col(0) = f.col(1).cross(f.col(2));
    c.col(1) = f.col(2).cross(f.col(0));
    c.col(2) = f.col(0).cross(f.col(1));
    return c;
}

Mat3 cross_matrix(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

/// d vec(cof F) / d vec(F), column-major, symmetric.
Eigen::Matrix<double, 9, 9> cofactor_jacobian(const Mat3& f) {
    Eigen::Matrix<double, 9, 9> h = Eigen::Matrix<double, 9, 9>::Zero();
    const Mat3 x0 = cross_matrix(f.col(0));
    const Mat3 x1 = cross_matrix(f.col(1));
    const Mat3 x2 = cross_matrix(f.col(2));
    // c0 = f1 x f2, c1 = f2 x f0, c2 = f0 x f1
    h.block<3, 3>(0, 3) = -x2;
    h.block<3, 3>(0, 6) = x1;
    h.block<3, 3>(3, 0) = x2;
    h.block<3, 3>(3, 6) = -x0;
    h.block<3, 3>(6, 0) = -x1;
    h.block<3, 3>(6, 3) = x0;
    return h;
}

}  // namespace

Elasticity::Elasticity(const MaterialParams& material) {
    material.validate();
    mu_ = material.mu();
    lambda_ = material.lambda() + material.mu();
    alpha_ = 1.0 + mu_ / lambda_;
    // psi(I) before shifting: lambda/2 * (1 - alpha)^2 = mu^2 / (2 lambda)
    rest_shift_ = mu_ * mu_ / (2.0 * lambda_);
}

double Elasticity::psi(const Mat3& f) const {
    const double ic = f.squaredNorm();
    const double j = f.determinant();
    return 0.5 * mu_ * (ic - 3.0) + 0.5 * lambda_ * (j - alpha_) * (j - alpha_) - rest_shift_;
}

Mat3 Elasticity::piola(const Mat3& f) const {
    const double j = f.determinant();
    return mu_ * f + lambda_ * (j - alpha_) * cofactor(f);
}

Eigen::Matrix<double, 9, 9> Elasticity::psi_hessian(const Mat3& f) const {
    const double j = f.determinant();
    const Mat3 cof = cofactor(f);
    Eigen::Map<const Eigen::Matrix<double, 9, 1>> g(cof.data());

    Eigen::Matrix<double, 9, 9> h = Eigen::Matrix<double, 9, 9>::Identity() * mu_;
    h += lambda_ * (g * g.transpose());
    h += lambda_ * (j - alpha_) * cofactor_jacobian(f);
    return h;
}

Mat3 Elasticity::deformation_gradient(const TetMesh& mesh, std::span<const Vec3> x, int tet) const {
    const auto& t = mesh.tets[tet];
    Mat3 ds;
    ds.col(0) = x[t[1]] - x[t[0]];
    ds.col(1) = x[t[2]] - x[t[0]];
    ds.col(2) = x[t[3]] - x[t[0]];
    return ds * mesh.dm_inv[tet];
}

double Elasticity::energy(const TetMesh& mesh, std::span<const Vec3> x) const {
    double e = 0.0;
    for (int t = 0; t < mesh.tet_count(); ++t) {
        e += mesh.rest_volume[t] * psi(deformation_gradient(mesh, x, t));
    }
    return e;
}

void Elasticity::add_gradient(const TetMesh& mesh, std::span<const Vec3> x,
                              Eigen::VectorXd& grad) const {
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const auto& tv = mesh.tets[t];
        const Mat3 f = deformation_gradient(mesh, x, t);
        // dE/dDs = V * P * Dm^-T
        const Mat3 g = mesh.rest_volume[t] * piola(f) * mesh.dm_inv[t].transpose();
        for (int c = 0; c < 3; ++c) {
            grad.segment<3>(3 * tv[c + 1]) += g.col(c);
            grad.segment<3>(3 * tv[0]) -= g.col(c);
        }
    }
}

void Elasticity::add_hessian(const TetMesh& mesh, std::span<const Vec3> x,
                             std::vector<Eigen::Triplet<double>>& triplets) const {
    for (int t = 0; t < mesh.tet_count(); ++t) {
        const auto& tv = mesh.tets[t];
        const Mat3 f = deformation_gradient(mesh, x, t);
        const Eigen::Matrix<double, 9, 9> hf = mesh.rest_volume[t] * psi_hessian(f);
        const Mat3& bi = mesh.dm_inv[t];

        // J = d vec(F) / d x, 9x12: column block c of Ds depends on x_{c+1}
        // and x_0; vec(F) = vec(Ds * Bi).
        Eigen::Matrix<double, 9, 12> jac = Eigen::Matrix<double, 9, 12>::Zero();
        for (int c = 0; c < 3; ++c) {      // Ds column
            for (int fc = 0; fc < 3; ++fc) {  // F column
                const double w = bi(c, fc);
                for (int r = 0; r < 3; ++r) {
                    jac(3 * fc + r, 3 * (c + 1) + r) += w;
                    jac(3 * fc + r, r) -= w;
                }
            }
        }

        Eigen::Matrix<double, 12, 12> k = jac.transpose() * hf * jac;

        // Project to PSD for Newton.
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(k);
        Eigen::Matrix<double, 12, 12> proj = Eigen::Matrix<double, 12, 12>::Zero();
        for (int i = 0; i < 12; ++i) {
            const double ev = eig.eigenvalues()(i);
            if (ev > 0.0) {
                proj += ev * eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose();
            }
        }

        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) {
                        const double v = proj(3 * a + r, 3 * b + c);
                        if (v != 0.0) {
                            triplets.emplace_back(3 * tv[a] + r, 3 * tv[b] + c, v);
                        }
                    }
                }
            }
        }
    }
}

}  // namespace manugrip::fem
