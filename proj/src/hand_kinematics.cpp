#include "manugrip/hand_kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manugrip::hand {

namespace {

void check_length(double v, const char* what) {
    if (!(v > 0.0) || v >= 0.2) {
        throw std::invalid_argument(std::string(what) + " must be in (0, 0.2) m");
    }
}

PhalanxPose pose_from_matrix(const Mat4& m) {
    PhalanxPose out;
    out.rotation = Quat(Mat3(m.block<3, 3>(0, 0))).normalized();
    out.translation = m.block<3, 1>(0, 3);
    return out;
}

Mat4 translation(double x, double y, double z) {
    Mat4 m = Mat4::Identity();
    m(0, 3) = x;
    m(1, 3) = y;
    m(2, 3) = z;
    return m;
}

/// Signed rotation angle about `axis` of a rotation known to be (close to) a
/// pure rotation about that axis.
double twist_angle(const Quat& q, int axis) {
    double comp = axis == 0 ? q.x() : (axis == 1 ? q.y() : q.z());
    double w = q.w();
    if (w < 0.0) {
        w = -w;
        comp = -comp;
    }
    const double n = std::sqrt(w * w + comp * comp);
    if (n < 1e-12) return 0.0;  // 180-degree swing, twist undefined
    return 2.0 * std::atan2(comp / n, w / n);
}

}  // namespace

void FingerGeometry::validate() const {
    check_length(l1, "l1");
    check_length(l2, "l2");
    check_length(l3, "l3");
}

void ThumbGeometry::validate() const {
    check_length(l1, "thumb l1");
    check_length(l2, "thumb l2");
}

HandGeometry HandGeometry::defaults() {
    HandGeometry g;
    g.thumb = ThumbGeometry{0.035, 0.030, -0.010, 0.045};
    g.fingers[0] = FingerGeometry{0.045, 0.025, 0.020, 0.040, 0.030};   // index
    g.fingers[1] = FingerGeometry{0.045, 0.025, 0.020, 0.040, 0.010};   // middle
    g.fingers[2] = FingerGeometry{0.045, 0.025, 0.020, 0.040, -0.010};  // ring
    g.fingers[3] = FingerGeometry{0.045, 0.025, 0.020, 0.040, -0.030};  // little
    return g;
}

void HandGeometry::validate() const {
    thumb.validate();
    for (const auto& f : fingers) f.validate();
    check_length(palm_width, "palm_width");
    check_length(palm_length, "palm_length");
    check_length(palm_thickness, "palm_thickness");
}

Mat4 dh_transform(double alpha_prev, double a_prev, double theta, double d) {
    require_finite(alpha_prev, "alpha_prev");
    require_finite(a_prev, "a_prev");
    require_finite(theta, "theta");
    require_finite(d, "d");

    const double ca = std::cos(alpha_prev);
    const double sa = std::sin(alpha_prev);
    const double ct = std::cos(theta);
    const double st = std::sin(theta);

    Mat4 t;
    t << ct, -st, 0.0, a_prev,
        st * ca, ct * ca, -sa, -sa * d,
        st * sa, ct * sa, ca, ca * d,
        0.0, 0.0, 0.0, 1.0;
    return t;
}

FingerAngles clamp_joint_limits(const FingerAngles& a) {
    FingerAngles out;
    out.theta1 = std::clamp(a.theta1, kTheta1Min, kTheta1Max);
    out.beta = std::clamp(a.beta, kBetaMin, kBetaMax);
    out.theta2 = std::clamp(a.theta2, kTheta2Min, kTheta2Max);
    out.theta3 = std::clamp(a.theta3, kTheta3Min, kTheta3Max);
    return out;
}

ThumbAngles clamp_joint_limits(const ThumbAngles& a) {
    // Thumb chain reuses the finger table rows, so its two flexions take the
    // MCP and PIP bounds.
    ThumbAngles out;
    out.theta1 = std::clamp(a.theta1, kTheta1Min, kTheta1Max);
    out.theta2 = std::clamp(a.theta2, kTheta2Min, kTheta2Max);
    out.beta = std::clamp(a.beta, kBetaMin, kBetaMax);
    return out;
}

HandAngles clamp_joint_limits(const HandAngles& a) {
    HandAngles out;
    out.thumb = clamp_joint_limits(a.thumb);
    for (int i = 0; i < 4; ++i) out.fingers[i] = clamp_joint_limits(a.fingers[i]);
    return out;
}

std::array<PhalanxPose, 3> finger_fk(const FingerGeometry& g, const FingerAngles& a) {
    g.validate();
    const Mat4 base = translation(g.dx, g.dy, 0.0);
    const Mat4 t1 = dh_transform(0.0, 0.0, a.beta, 0.0);
    const Mat4 t2 = dh_transform(kPi / 2.0, g.l1, a.theta1, 0.0);
    const Mat4 t3 = dh_transform(0.0, g.l2, a.theta2, 0.0);
    const Mat4 t4 = dh_transform(0.0, g.l3, a.theta3, 0.0);

    const Mat4 proximal = base * t1 * t2;
    const Mat4 middle = proximal * t3;
    const Mat4 distal = middle * t4;
    return {pose_from_matrix(proximal), pose_from_matrix(middle), pose_from_matrix(distal)};
}

std::array<PhalanxPose, 2> thumb_fk(const ThumbGeometry& g, const ThumbAngles& a) {
    g.validate();
    const Mat4 base = translation(g.dx, g.dy, 0.0);
    const Mat4 t1 = dh_transform(0.0, 0.0, a.beta, 0.0);
    const Mat4 t2 = dh_transform(kPi / 2.0, g.l1, a.theta1, 0.0);
    const Mat4 t3 = dh_transform(0.0, g.l2, a.theta2, 0.0);

    const Mat4 proximal = base * t1 * t2;
    const Mat4 distal = proximal * t3;
    return {pose_from_matrix(proximal), pose_from_matrix(distal)};
}

HandState hand_fk(const HandGeometry& g, const HandAngles& a) {
    HandState s;
    s.angles = a;

    for (int i = 0; i < 4; ++i) {
        s.finger_poses[i] = finger_fk(g.fingers[i], a.fingers[i]);
        s.fingertips[i] = s.finger_poses[i][2].translation;
    }

    auto thumb = thumb_fk(g.thumb, a.thumb);
    // Thumb mounts rotated in the palm plane about its MCP.
    const Quat yaw = quat_from_axis_angle(Vec3(0, 0, 1), g.thumb_mount_yaw);
    const Vec3 mcp(g.thumb.dx, g.thumb.dy, 0.0);
    for (auto& pose : thumb) {
        pose.translation = mcp + yaw * (pose.translation - mcp);
        pose.rotation = (yaw * pose.rotation).normalized();
    }
    s.thumb_poses = thumb;
    s.thumb_tip = thumb[1].translation;
    return s;
}

JointAngle relative_joint_angle(const Quat& parent, const Quat& child) {
    const Quat r = (parent.conjugate() * child).normalized();

    // Twist about z is the flexion; the remaining swing carries abduction
    // about y.
    double tw = r.w(), tz = r.z();
    const double tn = std::sqrt(tw * tw + tz * tz);
    Quat twist = Quat::Identity();
    if (tn > 1e-12) twist = Quat(tw / tn, 0.0, 0.0, tz / tn);

    JointAngle out;
    out.flexion = twist_angle(twist, 2);
    const Quat swing = (r * twist.conjugate()).normalized();
    out.abduction = twist_angle(swing, 1);
    return out;
}

HandAngles frame_to_angles(const GloveFrame& frame) {
    HandAngles a;

    auto mcp = [&](int parent, int child) { return relative_joint_angle(frame.imu[parent], frame.imu[child]); };
    auto hinge = [&](int parent, int child) {
        return relative_joint_angle(frame.imu[parent], frame.imu[child]).flexion;
    };

    const JointAngle tm = mcp(kImuPalm, kImuThumbProximal);
    a.thumb.theta1 = tm.flexion;
    a.thumb.beta = tm.abduction;
    a.thumb.theta2 = hinge(kImuThumbProximal, kImuThumbDistal);

    const int base[4] = {kImuIndexProximal, kImuMiddleProximal, kImuRingProximal, kImuLittleProximal};
    for (int f = 0; f < 4; ++f) {
        const JointAngle m = mcp(kImuPalm, base[f]);
        a.fingers[f].theta1 = m.flexion;
        a.fingers[f].beta = m.abduction;
        a.fingers[f].theta2 = hinge(base[f], base[f] + 1);
        a.fingers[f].theta3 = hinge(base[f] + 1, base[f] + 2);
    }
    return a;
}

std::array<Quat, kNumImus> angles_to_imus(const HandAngles& a) {
    std::array<Quat, kNumImus> imu;
    imu.fill(Quat::Identity());

    auto joint = [](double flexion, double abduction) {
        return quat_from_axis_angle(Vec3(0, 1, 0), abduction) *
               quat_from_axis_angle(Vec3(0, 0, 1), flexion);
    };

    imu[kImuPalm] = Quat::Identity();
    imu[kImuThumbProximal] = joint(a.thumb.theta1, a.thumb.beta);
    imu[kImuThumbDistal] = (imu[kImuThumbProximal] * joint(a.thumb.theta2, 0.0)).normalized();

    const int base[4] = {kImuIndexProximal, kImuMiddleProximal, kImuRingProximal, kImuLittleProximal};
    for (int f = 0; f < 4; ++f) {
        imu[base[f]] = joint(a.fingers[f].theta1, a.fingers[f].beta);
        imu[base[f] + 1] = (imu[base[f]] * joint(a.fingers[f].theta2, 0.0)).normalized();
        imu[base[f] + 2] = (imu[base[f] + 1] * joint(a.fingers[f].theta3, 0.0)).normalized();
    }
    return imu;
}

CalibrationReference build_calibration(const GloveFrame& flat_frame) {
    CalibrationReference ref;
    for (int k = 0; k < kNumImus; ++k) {
        if (flat_frame.imu[k].norm() < 1e-6) {
            throw std::invalid_argument("incomplete frame: missing IMU sample " + std::to_string(k));
        }
        ref.correction[k] = flat_frame.imu[k].normalized().conjugate();
    }
    return ref;
}

GloveFrame apply_calibration(const CalibrationReference& ref, const GloveFrame& raw) {
    GloveFrame out = raw;
    for (int k = 0; k < kNumImus; ++k) {
        out.imu[k] = (ref.correction[k] * raw.imu[k]).normalized();
    }
    return out;
}

}  // namespace manugrip::hand
