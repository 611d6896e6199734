#include "manugrip/fem/contact.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace manugrip::fem {

double barrier_value(double d, double dhat) {
    if (d >= dhat) return 0.0;
    if (!(d > 0.0)) throw std::domain_error("barrier evaluated at non-positive distance");
    const double g = d - dhat;
    return -g * g * std::log(d / dhat);
}

double barrier_gradient(double d, double dhat) {
    if (d >= dhat) return 0.0;
    if (!(d > 0.0)) throw std::domain_error("barrier evaluated at non-positive distance");
    const double g = d - dhat;
    return -2.0 * g * std::log(d / dhat) - g * g / d;
}

double barrier_hessian(double d, double dhat) {
    if (d >= dhat) return 0.0;
    if (!(d > 0.0)) throw std::domain_error("barrier evaluated at non-positive distance");
    const double g = d - dhat;
    return -2.0 * std::log(d / dhat) - 4.0 * g / d + g * g / (d * d);
}

bool ContactSet::pair_admissible(int point_idx, int tri_idx) const {
    if (point_body[point_idx] != 0 && tri_body[tri_idx] != 0) return false;
    const int p = points[point_idx];
    const auto& t = tris[tri_idx];
    return p != t[0] && p != t[1] && p != t[2];
}

namespace {

struct TriBound {
    Vec3 lo, hi;
};

std::vector<TriBound> tri_bounds(const ContactSet& set, std::span<const Vec3> x) {
    std::vector<TriBound> b(set.tris.size());
    for (size_t j = 0; j < set.tris.size(); ++j) {
        const auto& t = set.tris[j];
        b[j].lo = x[t[0]].cwiseMin(x[t[1]]).cwiseMin(x[t[2]]);
        b[j].hi = x[t[0]].cwiseMax(x[t[1]]).cwiseMax(x[t[2]]);
    }
    return b;
}

double aabb_distance(const Vec3& p, const TriBound& b) {
    const Vec3 d = (b.lo - p).cwiseMax(p - b.hi).cwiseMax(0.0);
    return d.norm();
}

}  // namespace

std::vector<ActivePair> collect_active_pairs(const ContactSet& set, std::span<const Vec3> x,
                                             double dhat) {
    const auto bounds = tri_bounds(set, x);
    std::vector<ActivePair> out;
    for (size_t i = 0; i < set.points.size(); ++i) {
        const Vec3& p = x[set.points[i]];
        for (size_t j = 0; j < set.tris.size(); ++j) {
            if (!set.pair_admissible(static_cast<int>(i), static_cast<int>(j))) continue;
            if (aabb_distance(p, bounds[j]) >= dhat) continue;
            const auto& t = set.tris[j];
            const double d = point_triangle_distance(p, x[t[0]], x[t[1]], x[t[2]]);
            if (d < dhat) {
                out.push_back({set.points[i], t, static_cast<int>(j), d});
            }
        }
    }
    return out;
}

double barrier_energy(const ContactSet& set, std::span<const Vec3> x, double dhat, double kappa) {
    double e = 0.0;
    for (const ActivePair& pair : collect_active_pairs(set, x, dhat)) {
        e += barrier_value(pair.distance, dhat);
    }
    return kappa * e;
}

void add_barrier_gradient(const ContactSet& set, std::span<const Vec3> x, double dhat,
                          double kappa, Eigen::VectorXd& grad) {
    for (const ActivePair& pair : collect_active_pairs(set, x, dhat)) {
        const Vec3& p = x[pair.point];
        Vec3 bary;
        const Vec3 c =
            closest_point_on_triangle(p, x[pair.tri[0]], x[pair.tri[1]], x[pair.tri[2]], &bary);
        const double d = (p - c).norm();
        if (d < 1e-30) throw std::domain_error("contact pair at zero distance");
        const Vec3 u = (p - c) / d;
        const double scale = kappa * barrier_gradient(d, dhat);

        grad.segment<3>(3 * pair.point) += scale * u;
        for (int k = 0; k < 3; ++k) {
            grad.segment<3>(3 * pair.tri[k]) -= scale * bary[k] * u;
        }
    }
}

void add_barrier_hessian(const ContactSet& set, std::span<const Vec3> x, double dhat, double kappa,
                         std::vector<Eigen::Triplet<double>>& triplets) {
    for (const ActivePair& pair : collect_active_pairs(set, x, dhat)) {
        const Vec3& p = x[pair.point];
        Vec3 bary;
        const Vec3 c =
            closest_point_on_triangle(p, x[pair.tri[0]], x[pair.tri[1]], x[pair.tri[2]], &bary);
        const double d = (p - c).norm();
        if (d < 1e-30) throw std::domain_error("contact pair at zero distance");
        const Vec3 u = (p - c) / d;

        const double b1 = kappa * barrier_gradient(d, dhat);
        const double b2 = kappa * barrier_hessian(d, dhat);

        // Local kinematics map: d(p - c) = B * dxi with B = [I, -w0 I, -w1 I, -w2 I]
        const double w[4] = {1.0, -bary[0], -bary[1], -bary[2]};
        const Mat3 uu = u * u.transpose();
        const Mat3 perp = (Mat3::Identity() - uu) / d;

        Eigen::Matrix<double, 12, 12> h;
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                h.block<3, 3>(3 * a, 3 * b) = w[a] * w[b] * (b2 * uu + b1 * perp);
            }
        }

        Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 12, 12>> eig(h);
        Eigen::Matrix<double, 12, 12> proj = Eigen::Matrix<double, 12, 12>::Zero();
        for (int i = 0; i < 12; ++i) {
            const double ev = eig.eigenvalues()(i);
            if (ev > 0.0) {
                proj += ev * eig.eigenvectors().col(i) * eig.eigenvectors().col(i).transpose();
            }
        }

        const int ids[4] = {pair.point, pair.tri[0], pair.tri[1], pair.tri[2]};
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                for (int r = 0; r < 3; ++r) {
                    for (int s = 0; s < 3; ++s) {
                        const double v = proj(3 * a + r, 3 * b + s);
                        if (v != 0.0) triplets.emplace_back(3 * ids[a] + r, 3 * ids[b] + s, v);
                    }
                }
            }
        }
    }
}

double min_pair_distance(const ContactSet& set, std::span<const Vec3> x) {
    double best = std::numeric_limits<double>::infinity();
    const auto bounds = tri_bounds(set, x);
    for (size_t i = 0; i < set.points.size(); ++i) {
        const Vec3& p = x[set.points[i]];
        for (size_t j = 0; j < set.tris.size(); ++j) {
            if (!set.pair_admissible(static_cast<int>(i), static_cast<int>(j))) continue;
            if (aabb_distance(p, bounds[j]) >= best) continue;
            const auto& t = set.tris[j];
            best = std::min(best, point_triangle_distance(p, x[t[0]], x[t[1]], x[t[2]]));
        }
    }
    return best;
}

namespace {

/// Additive conservative advancement for one point-triangle pair: largest
/// alpha in (0, 1] along the linear motion such that the pair keeps a gap of
/// `keep` times its starting distance. Handles separating motion (alpha = 1)
/// without the stall a worst-case straight bound would cause.
double accd_pair(Vec3 p, Vec3 a, Vec3 b, Vec3 c, Vec3 dp, Vec3 da, Vec3 db, Vec3 dc,
                 double keep) {
    const Vec3 mean = (dp + da + db + dc) / 4.0;
    dp -= mean;
    da -= mean;
    db -= mean;
    dc -= mean;
    const double rate = dp.norm() + std::max({da.norm(), db.norm(), dc.norm()});
    if (rate <= 0.0) return 1.0;

    double d = point_triangle_distance(p, a, b, c);
    const double gap = keep * d;
    double alpha = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
        const double step = (d - gap) / rate;
        if (alpha + step >= 1.0) return 1.0;
        if (step < 1e-12) break;
        alpha += step;
        p += step * dp;
        a += step * da;
        b += step * db;
        c += step * dc;
        d = point_triangle_distance(p, a, b, c);
    }
    return alpha;
}

}  // namespace

double filter_max_step(const ContactSet& set, std::span<const Vec3> x,
                       std::span<const Vec3> dx, double slack) {
    const double keep = 1.0 - slack;  // fraction of the starting gap preserved
    const auto bounds = tri_bounds(set, x);

    std::vector<double> tri_disp(set.tris.size(), 0.0);
    for (size_t j = 0; j < set.tris.size(); ++j) {
        const auto& t = set.tris[j];
        tri_disp[j] = std::max({dx[t[0]].norm(), dx[t[1]].norm(), dx[t[2]].norm()});
    }

    double alpha = 1.0;
    for (size_t i = 0; i < set.points.size(); ++i) {
        const Vec3& p = x[set.points[i]];
        const double pd = dx[set.points[i]].norm();
        for (size_t j = 0; j < set.tris.size(); ++j) {
            if (!set.pair_admissible(static_cast<int>(i), static_cast<int>(j))) continue;
            const double rate = pd + tri_disp[j];
            if (rate <= 0.0) continue;
            // worst-case straight bound as a cheap reject
            if ((1.0 - keep) * aabb_distance(p, bounds[j]) >= alpha * rate) continue;
            const auto& t = set.tris[j];
            alpha = std::min(alpha, accd_pair(p, x[t[0]], x[t[1]], x[t[2]], dx[set.points[i]],
                                              dx[t[0]], dx[t[1]], dx[t[2]], keep));
        }
    }
    return alpha;
}

}  // namespace manugrip::fem
