#include "manugrip/hand_kinematics.hpp"

#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace manugrip;
using namespace manugrip::hand;

namespace {

std::mt19937_64 rng(20240921);

FingerAngles random_clamped_angles() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FingerAngles a;
    a.theta1 = u(rng) * kTheta1Max;
    a.beta = kBetaMin + u(rng) * (kBetaMax - kBetaMin);
    a.theta2 = u(rng) * kTheta2Max;
    a.theta3 = u(rng) * kTheta3Max;
    return a;
}

Quat random_quat() {
    std::normal_distribution<double> n;
    return Quat(n(rng), n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST_CASE("dh_transform: all-zero parameters give the identity") {
    CHECK((dh_transform(0, 0, 0, 0) - Mat4::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("dh_transform: pure link offset") {
    const Mat4 t = dh_transform(0, 0.04, 0, 0);
    CHECK((t.block<3, 3>(0, 0) - Mat3::Identity()).norm() == doctest::Approx(0.0));
    CHECK((t.block<3, 1>(0, 3) - Vec3(0.04, 0, 0)).norm() == doctest::Approx(0.0));
}

TEST_CASE("dh_transform matches the entrywise reference") {
    const Mat4 got = dh_transform(kPi / 2, 0.03, kPi / 4, 0);
    const Mat4 want = oracles::dh_matrix_reference(kPi / 2, 0.03, kPi / 4, 0);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);

    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        const double al = u(rng), a = u(rng), th = u(rng), d = u(rng);
        CHECK((dh_transform(al, a, th, d) - oracles::dh_matrix_reference(al, a, th, d))
                  .cwiseAbs()
                  .maxCoeff() < 1e-14);
    }
}

TEST_CASE("dh_transform rotation block stays orthonormal with unit determinant") {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 500; ++k) {
        const Mat4 t = dh_transform(u(rng), u(rng), u(rng), u(rng));
        const Mat3 r = t.block<3, 3>(0, 0);
        CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(t(3, 0) == 0.0);
        CHECK(t(3, 1) == 0.0);
        CHECK(t(3, 2) == 0.0);
        CHECK(t(3, 3) == 1.0);
    }
}

TEST_CASE("dh_transform rejects non-finite input") {
    CHECK_THROWS_AS(dh_transform(std::nan(""), 0, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(dh_transform(0, 0, std::numeric_limits<double>::infinity(), 0),
                    std::invalid_argument);
}

TEST_CASE("finger_fk: extended chain is collinear") {
    FingerGeometry g{0.045, 0.025, 0.020, 0.04, 0.01};
    const auto poses = finger_fk(g, FingerAngles{});
    const Vec3 mcp(g.dx, g.dy, 0.0);
    CHECK((poses[2].translation - mcp).norm() ==
          doctest::Approx(g.l1 + g.l2 + g.l3).epsilon(1e-9));
}

TEST_CASE("finger_fk matches the matrix-chain reference at 90/90/90") {
    FingerGeometry g{0.045, 0.025, 0.020, 0.0, 0.0};
    FingerAngles a;
    a.theta1 = a.theta3 = kPi / 2;
    a.theta2 = kPi / 2;
    const auto got = finger_fk(g, a);
    const auto want = oracles::finger_chain_reference(g, a);
    for (int i = 0; i < 3; ++i) {
        CHECK((got[i].translation - want[i].block<3, 1>(0, 3)).norm() < 1e-12);
        const Mat3 rw = want[i].block<3, 3>(0, 0);
        CHECK(rotation_angle(got[i].rotation, Quat(rw)) < 1e-12);
    }
}

TEST_CASE("finger_fk agrees with the four-matrix product on random clamped angles") {
    FingerGeometry g{0.045, 0.025, 0.020, 0.04, -0.01};
    for (int k = 0; k < 1000; ++k) {
        const FingerAngles a = random_clamped_angles();
        const auto got = finger_fk(g, a);
        const auto want = oracles::finger_chain_reference(g, a);
        for (int i = 0; i < 3; ++i) {
            CHECK((got[i].translation - want[i].block<3, 1>(0, 3)).norm() < 1e-12);
        }
    }
}

TEST_CASE("finger_fk fingertip never overreaches the chain length") {
    FingerGeometry g{0.045, 0.025, 0.020, 0.04, 0.0};
    const Vec3 mcp(g.dx, g.dy, 0.0);
    for (int k = 0; k < 1000; ++k) {
        const auto poses = finger_fk(g, random_clamped_angles());
        CHECK((poses[2].translation - mcp).norm() <= g.l1 + g.l2 + g.l3 + 1e-9);
    }
}

TEST_CASE("thumb_fk: extended 3-DoF chain is collinear") {
    ThumbGeometry g{0.035, 0.030, -0.01, 0.045};
    const auto poses = thumb_fk(g, ThumbAngles{});
    const Vec3 mcp(g.dx, g.dy, 0.0);
    CHECK((poses[1].translation - mcp).norm() == doctest::Approx(g.l1 + g.l2).epsilon(1e-9));
}

TEST_CASE("clamp_joint_limits enforces the published bounds") {
    FingerAngles a;
    a.theta2 = deg_to_rad(120.0);
    CHECK(clamp_joint_limits(a).theta2 == doctest::Approx(deg_to_rad(110.0)));

    a = FingerAngles{};
    a.beta = deg_to_rad(-20.0);
    CHECK(clamp_joint_limits(a).beta == doctest::Approx(deg_to_rad(-15.0)));

    a = FingerAngles{};
    a.theta1 = deg_to_rad(45.0);
    a.theta2 = deg_to_rad(50.0);
    a.theta3 = deg_to_rad(30.0);
    a.beta = deg_to_rad(5.0);
    const FingerAngles c = clamp_joint_limits(a);
    CHECK(c.theta1 == a.theta1);
    CHECK(c.theta2 == a.theta2);
    CHECK(c.theta3 == a.theta3);
    CHECK(c.beta == a.beta);
}

TEST_CASE("clamp_joint_limits is exactly idempotent") {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int k = 0; k < 2000; ++k) {
        FingerAngles a{u(rng), u(rng), u(rng), u(rng)};
        const FingerAngles once = clamp_joint_limits(a);
        const FingerAngles twice = clamp_joint_limits(once);
        CHECK(once.theta1 == twice.theta1);
        CHECK(once.theta2 == twice.theta2);
        CHECK(once.theta3 == twice.theta3);
        CHECK(once.beta == twice.beta);
    }
}

TEST_CASE("relative_joint_angle base cases") {
    const Quat q = random_quat();
    const JointAngle same = relative_joint_angle(q, q);
    CHECK(std::abs(same.flexion) < 1e-12);
    CHECK(std::abs(same.abduction) < 1e-12);

    const Quat child = q * quat_from_axis_angle(Vec3(0, 0, 1), kPi / 2);
    CHECK(relative_joint_angle(q, child).flexion == doctest::Approx(kPi / 2).epsilon(1e-12));
}

TEST_CASE("relative_joint_angle recovers abduction-then-flexion composition") {
    const Quat parent = random_quat();
    const Quat child = parent * quat_from_axis_angle(Vec3(0, 1, 0), deg_to_rad(10.0)) *
                       quat_from_axis_angle(Vec3(0, 0, 1), deg_to_rad(30.0));
    const JointAngle j = relative_joint_angle(parent, child);
    CHECK(j.flexion == doctest::Approx(deg_to_rad(30.0)).epsilon(1e-6));
    CHECK(j.abduction == doctest::Approx(deg_to_rad(10.0)).epsilon(1e-6));
}

TEST_CASE("relative_joint_angle flexion sweep property") {
    std::uniform_real_distribution<double> u(0.0, kPi / 2);
    for (int k = 0; k < 500; ++k) {
        const double angle = u(rng);
        const Quat parent = random_quat();
        const Quat child = parent * quat_from_axis_angle(Vec3(0, 0, 1), angle);
        CHECK(std::abs(relative_joint_angle(parent, child).flexion - angle) < 1e-6);
    }
}

TEST_CASE("angles_to_imus and frame_to_angles are inverse") {
    for (int k = 0; k < 200; ++k) {
        HandAngles a;
        a.thumb.theta1 = random_clamped_angles().theta1;
        a.thumb.theta2 = random_clamped_angles().theta2;
        a.thumb.beta = random_clamped_angles().beta;
        for (int f = 0; f < 4; ++f) a.fingers[f] = random_clamped_angles();

        GloveFrame frame;
        frame.imu = angles_to_imus(a);
        const HandAngles got = frame_to_angles(frame);
        CHECK(std::abs(got.thumb.theta1 - a.thumb.theta1) < 1e-9);
        CHECK(std::abs(got.thumb.theta2 - a.thumb.theta2) < 1e-9);
        CHECK(std::abs(got.thumb.beta - a.thumb.beta) < 1e-9);
        for (int f = 0; f < 4; ++f) {
            CHECK(std::abs(got.fingers[f].theta1 - a.fingers[f].theta1) < 1e-9);
            CHECK(std::abs(got.fingers[f].beta - a.fingers[f].beta) < 1e-9);
            CHECK(std::abs(got.fingers[f].theta2 - a.fingers[f].theta2) < 1e-9);
            CHECK(std::abs(got.fingers[f].theta3 - a.fingers[f].theta3) < 1e-9);
        }
    }
}

TEST_CASE("calibration: flat frame at canonical orientation gives identity corrections") {
    GloveFrame flat;  // all IMUs identity
    const CalibrationReference ref = build_calibration(flat);
    for (const Quat& c : ref.correction) {
        CHECK(rotation_angle(c, Quat::Identity()) < 1e-12);
    }
}

TEST_CASE("calibration: offset IMU yields its inverse as correction") {
    GloveFrame flat;
    const Quat q = random_quat();
    flat.imu[5] = q;
    const CalibrationReference ref = build_calibration(flat);
    CHECK(rotation_angle(ref.correction[5], q.conjugate()) < 1e-12);
}

TEST_CASE("calibration cancels a constant drift offset") {
    GloveFrame drifted;  // flat gesture, each IMU drifted by its own offset
    for (int k = 0; k < kNumImus; ++k) drifted.imu[k] = random_quat();

    const CalibrationReference ref = build_calibration(drifted);
    const GloveFrame corrected = apply_calibration(ref, drifted);
    const HandAngles a = frame_to_angles(corrected);

    CHECK(std::abs(a.thumb.theta1) < 1e-6);
    CHECK(std::abs(a.thumb.theta2) < 1e-6);
    for (int f = 0; f < 4; ++f) {
        CHECK(std::abs(a.fingers[f].theta1) < 1e-6);
        CHECK(std::abs(a.fingers[f].beta) < 1e-6);
        CHECK(std::abs(a.fingers[f].theta2) < 1e-6);
        CHECK(std::abs(a.fingers[f].theta3) < 1e-6);
    }
}

TEST_CASE("apply_calibration round trip recovers the raw frame") {
    GloveFrame raw;
    for (int k = 0; k < kNumImus; ++k) raw.imu[k] = random_quat();
    CalibrationReference ref;
    for (int k = 0; k < kNumImus; ++k) ref.correction[k] = random_quat();

    CalibrationReference inverse;
    for (int k = 0; k < kNumImus; ++k) inverse.correction[k] = ref.correction[k].conjugate();

    const GloveFrame round = apply_calibration(inverse, apply_calibration(ref, raw));
    for (int k = 0; k < kNumImus; ++k) {
        CHECK(rotation_angle(round.imu[k], raw.imu[k]) < 1e-9);
    }
}

TEST_CASE("apply_calibration passes voltages and poses through") {
    GloveFrame raw;
    raw.taxel[3] = 0.7;
    raw.wrist.p = Vec3(1, 2, 3);
    CalibrationReference ref;
    ref.correction[0] = random_quat();
    const GloveFrame out = apply_calibration(ref, raw);
    CHECK(out.taxel[3] == 0.7);
    CHECK((out.wrist.p - Vec3(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("build_calibration rejects an incomplete frame") {
    GloveFrame flat;
    flat.imu[7] = Quat(0, 0, 0, 0);
    CHECK_THROWS_AS(build_calibration(flat), std::invalid_argument);
}
