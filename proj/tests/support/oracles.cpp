#include "support/oracles.hpp"

#include <cmath>

namespace oracles {

Mat4 dh_matrix_reference(double alpha_prev, double a_prev, double theta, double d) {
    const double ca = std::cos(alpha_prev), sa = std::sin(alpha_prev);
    const double ct = std::cos(theta), st = std::sin(theta);
    Mat4 m = Mat4::Identity();
    m(0, 0) = ct;
    m(0, 1) = -st;
    m(0, 2) = 0.0;
    m(0, 3) = a_prev;
    m(1, 0) = st * ca;
    m(1, 1) = ct * ca;
    m(1, 2) = -sa;
    m(1, 3) = -sa * d;
    m(2, 0) = st * sa;
    m(2, 1) = ct * sa;
    m(2, 2) = ca;
    m(2, 3) = ca * d;
    return m;
}

std::array<Mat4, 3> finger_chain_reference(const manugrip::hand::FingerGeometry& g,
                                           const manugrip::hand::FingerAngles& a) {
    const double half_pi = std::acos(0.0);
    Mat4 base = Mat4::Identity();
    base(0, 3) = g.dx;
    base(1, 3) = g.dy;

    const Mat4 t1 = dh_matrix_reference(0.0, 0.0, a.beta, 0.0);
    const Mat4 t2 = dh_matrix_reference(half_pi, g.l1, a.theta1, 0.0);
    const Mat4 t3 = dh_matrix_reference(0.0, g.l2, a.theta2, 0.0);
    const Mat4 t4 = dh_matrix_reference(0.0, g.l3, a.theta3, 0.0);

    const Mat4 proximal = base * t1 * t2;
    const Mat4 middle = proximal * t3;
    const Mat4 distal = middle * t4;
    return {proximal, middle, distal};
}

double winding_number(const Vec3& p, const manugrip::ObjectMesh& mesh) {
    double total = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]] - p;
        const Vec3 b = mesh.vertices[t[1]] - p;
        const Vec3 c = mesh.vertices[t[2]] - p;
        const double la = a.norm(), lb = b.norm(), lc = c.norm();
        const double num = a.dot(b.cross(c));
        const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        total += 2.0 * std::atan2(num, den);
    }
    return total / (4.0 * manugrip::kPi);
}

bool inside_by_winding(const Vec3& p_world, const manugrip::ObjectMesh& mesh) {
    const Vec3 p = mesh.pose.inverse() * p_world;
    const double boundary_eps = 1e-9 * std::max(mesh.bounding_diagonal(), 1e-12);
    for (const auto& t : mesh.triangles) {
        if (manugrip::point_triangle_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                              mesh.vertices[t[2]]) <= boundary_eps) {
            return true;
        }
    }
    return winding_number(p, mesh) > 0.5;
}

Eigen::VectorXd central_difference(const std::function<double(const std::vector<Vec3>&)>& f,
                                   std::vector<Vec3> x, double h) {
    Eigen::VectorXd g(3 * x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const double saved = x[i][c];
            x[i][c] = saved + h;
            const double fp = f(x);
            x[i][c] = saved - h;
            const double fm = f(x);
            x[i][c] = saved;
            g(3 * i + c) = (fp - fm) / (2.0 * h);
        }
    }
    return g;
}

}  // namespace oracles
