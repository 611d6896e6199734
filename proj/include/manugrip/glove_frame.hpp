#pragma once

#include "manugrip/geometry.hpp"

#include <array>
#include <optional>

namespace manugrip {

inline constexpr int kNumImus = 15;
inline constexpr int kNumTaxels = 26;

/// IMU slots in stream order: palm first, then thumb (proximal, distal),
/// then index/middle/ring/little as (proximal, middle, distal).
enum ImuIndex : int {
    kImuPalm = 0,
    kImuThumbProximal = 1,
    kImuThumbDistal = 2,
    kImuIndexProximal = 3,
    kImuIndexMiddle = 4,
    kImuIndexDistal = 5,
    kImuMiddleProximal = 6,
    kImuMiddleMiddle = 7,
    kImuMiddleDistal = 8,
    kImuRingProximal = 9,
    kImuRingMiddle = 10,
    kImuRingDistal = 11,
    kImuLittleProximal = 12,
    kImuLittleMiddle = 13,
    kImuLittleDistal = 14,
};

/// One timestamped glove sample: orientations, taxel voltages, wrist pose
/// and (optionally) a tracked tool pose.
struct GloveFrame {
    double t = 0.0;
    std::array<Quat, kNumImus> imu{};
    std::array<double, kNumTaxels> taxel{};
    Pose wrist;
    std::optional<Pose> tool;

    GloveFrame() {
        imu.fill(Quat::Identity());
        taxel.fill(0.0);
    }
};

}  // namespace manugrip
