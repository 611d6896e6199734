#pragma once

#include "manugrip/geometry.hpp"
#include "manugrip/glove_frame.hpp"

#include <array>

namespace manugrip::hand {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Phalanx lengths and palm-center-to-MCP offsets for one finger, in metres.
struct FingerGeometry {
    double l1 = 0.045;
    double l2 = 0.025;
    double l3 = 0.020;
    double dx = 0.0;
    double dy = 0.0;

    void validate() const;
};

/// Thumb uses a shorter 2-segment chain; offsets as for fingers.
struct ThumbGeometry {
    double l1 = 0.035;
    double l2 = 0.030;
    double dx = 0.0;
    double dy = 0.0;

    void validate() const;
};

/// Flexion angles for MCP/PIP/DIP plus MCP abduction, radians.
struct FingerAngles {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double theta3 = 0.0;
    double beta = 0.0;
};

/// Thumb carries two flexion joints plus abduction.
struct ThumbAngles {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double beta = 0.0;
};

enum class Finger : int { Index = 0, Middle = 1, Ring = 2, Little = 3 };

/// Full 5-finger geometry. 14 phalanx segments: 4 fingers x 3 + thumb x 2.
struct HandGeometry {
    ThumbGeometry thumb;
    std::array<FingerGeometry, 4> fingers;  // index, middle, ring, little
    double palm_width = 0.080;
    double palm_length = 0.080;
    double palm_thickness = 0.020;
    // In-palm-plane rotation of the thumb chain at its MCP; the four fingers
    // mount parallel to +x.
    double thumb_mount_yaw = -kPi / 4.0;

    static HandGeometry defaults();
    void validate() const;
};

struct HandAngles {
    ThumbAngles thumb;
    std::array<FingerAngles, 4> fingers;
};

/// Pose of one phalanx frame, expressed in the palm frame.
struct PhalanxPose {
    Quat rotation{1, 0, 0, 0};
    Vec3 translation{0, 0, 0};
};

/// Per-IMU corrections that map raw orientations to the canonical flat-hand
/// frame (identity for every IMU when the hand is held flat).
struct CalibrationReference {
    std::array<Quat, kNumImus> correction;

    CalibrationReference() { correction.fill(Quat::Identity()); }
};

/// Joint decomposition result; abduction is meaningful for MCP pairs only.
struct JointAngle {
    double flexion = 0.0;
    double abduction = 0.0;
};

/// Angles plus the derived phalanx poses and fingertip positions.
struct HandState {
    HandAngles angles;
    std::array<PhalanxPose, 2> thumb_poses;             // proximal, distal
    std::array<std::array<PhalanxPose, 3>, 4> finger_poses;  // per finger: proximal, middle, distal
    Vec3 thumb_tip{0, 0, 0};
    std::array<Vec3, 4> fingertips{};
};

// ---------------------------------------------------------------------------
// Joint limits (flexion/extension and abduction/adduction bounds, radians)
// ---------------------------------------------------------------------------

inline constexpr double kTheta1Min = 0.0;
inline constexpr double kTheta1Max = 90.0 * kPi / 180.0;
inline constexpr double kBetaMin = -15.0 * kPi / 180.0;
inline constexpr double kBetaMax = 15.0 * kPi / 180.0;
inline constexpr double kTheta2Min = 0.0;
inline constexpr double kTheta2Max = 110.0 * kPi / 180.0;
inline constexpr double kTheta3Min = 0.0;
inline constexpr double kTheta3Max = 90.0 * kPi / 180.0;

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// General homogeneous transform between consecutive joint frames from the
/// modified D-H parameters (alpha_{i-1}, a_{i-1}, theta_i, d_i).
Mat4 dh_transform(double alpha_prev, double a_prev, double theta, double d);

FingerAngles clamp_joint_limits(const FingerAngles& a);
ThumbAngles clamp_joint_limits(const ThumbAngles& a);
HandAngles clamp_joint_limits(const HandAngles& a);

/// Poses of the proximal, middle and distal phalanx frames in the palm frame.
/// The distal frame origin is the fingertip.
std::array<PhalanxPose, 3> finger_fk(const FingerGeometry& g, const FingerAngles& a);

/// Thumb variant: proximal and distal frames; the distal origin is the tip.
std::array<PhalanxPose, 2> thumb_fk(const ThumbGeometry& g, const ThumbAngles& a);

/// Full-hand forward kinematics from clamped angles.
HandState hand_fk(const HandGeometry& g, const HandAngles& a);

/// Decomposes parent^-1 * child as abduction-about-y followed by
/// flexion-about-z (swing-twist about the flexion axis).
JointAngle relative_joint_angle(const Quat& parent, const Quat& child);

/// Joint angles for the whole hand from the (calibrated) IMU orientations.
/// Not clamped; feed through clamp_joint_limits before FK.
HandAngles frame_to_angles(const GloveFrame& frame);

/// Inverse of frame_to_angles: IMU orientations for a given gesture, palm at
/// identity. Used by the synthetic stream generator.
std::array<Quat, kNumImus> angles_to_imus(const HandAngles& a);

/// Per-IMU corrections from a frame captured in the flat-hand gesture.
CalibrationReference build_calibration(const GloveFrame& flat_frame);

/// Applies corrections to the orientations; voltages and poses pass through.
GloveFrame apply_calibration(const CalibrationReference& ref, const GloveFrame& raw);

}  // namespace manugrip::hand
