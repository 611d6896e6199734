#pragma once

// Independent reference implementations used to cross-check the library.
// These deliberately avoid the production code paths they validate.

#include "manugrip/geometry.hpp"
#include "manugrip/hand_kinematics.hpp"
#include "manugrip/mesh.hpp"

#include <array>
#include <functional>

namespace oracles {

using manugrip::Mat4;
using manugrip::Vec3;

/// Entrywise modified-D-H matrix, written out independently of the library.
Mat4 dh_matrix_reference(double alpha_prev, double a_prev, double theta, double d);

/// Finger chain as the explicit product of the four reference matrices plus
/// the palm offset; returns the three phalanx frames.
std::array<Mat4, 3> finger_chain_reference(const manugrip::hand::FingerGeometry& g,
                                           const manugrip::hand::FingerAngles& a);

/// Signed winding number of a closed mesh around p (local frame), from the
/// Van Oosterom-Strackee solid angle of every triangle. ~1 inside, ~0 outside.
double winding_number(const Vec3& p, const manugrip::ObjectMesh& mesh);

/// Inside test from the winding number, with the same boundary-inside rule
/// the production parity test uses.
bool inside_by_winding(const Vec3& p_world, const manugrip::ObjectMesh& mesh);

/// Central-difference gradient of a scalar function of n 3-vectors.
Eigen::VectorXd central_difference(const std::function<double(const std::vector<Vec3>&)>& f,
                                   std::vector<Vec3> x, double h);

}  // namespace oracles
