#include "manugrip/pipeline/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace manugrip::pipeline {

namespace {

double ramp(double t, double t0, double t1) {
    if (t <= t0) return 0.0;
    if (t >= t1) return 1.0;
    return (t - t0) / (t1 - t0);
}

hand::HandAngles scaled_grip(const hand::HandAngles& grip, double s) {
    hand::HandAngles a;
    a.thumb.theta1 = s * grip.thumb.theta1;
    a.thumb.theta2 = s * grip.thumb.theta2;
    a.thumb.beta = s * grip.thumb.beta;
    for (int f = 0; f < 4; ++f) {
        a.fingers[f].theta1 = s * grip.fingers[f].theta1;
        a.fingers[f].theta2 = s * grip.fingers[f].theta2;
        a.fingers[f].theta3 = s * grip.fingers[f].theta3;
        a.fingers[f].beta = s * grip.fingers[f].beta;
    }
    return a;
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"flat-hand", "twist-lid", "press-lid", "pinch-lid", "pick-place"};
}

PickPlaceLayout pick_place_layout() { return PickPlaceLayout{}; }

double twist_plateau_deg() { return 50.0; }

std::vector<sensor::GestureSample> scenario_frames(const PipelineConfig& config,
                                                   const std::string& name) {
    const double rate = config.rate_hz;
    const double dt = 1.0 / rate;
    const double v0 = sensor::force_to_voltage(0.0, config.force);  // zero-force level

    auto taxels_at = [&](double volts) {
        std::array<double, kNumTaxels> t;
        t.fill(volts);
        return t;
    };

    std::vector<sensor::GestureSample> out;
    auto emit = [&](double duration, auto&& fill) {
        const int frames = static_cast<int>(std::llround(duration * rate));
        const double t_base = out.empty() ? 0.0 : out.back().t + dt;
        for (int k = 0; k < frames; ++k) {
            sensor::GestureSample s;
            s.t = t_base + k * dt;
            s.taxel = taxels_at(v0);
            fill(s);
            out.push_back(std::move(s));
        }
    };

    if (name == "flat-hand") {
        emit(3.0, [&](sensor::GestureSample&) {});
        return out;
    }

    if (name == "press-lid") {
        // Palm pressed on the lid, fingers stretched flat.
        const double press_n = 3.0;
        const double press_v = sensor::force_to_voltage(press_n, config.force);
        emit(5.0, [&](sensor::GestureSample& s) {
            const double w = ramp(s.t, 1.0, 1.4) * (1.0 - ramp(s.t, 4.0, 4.4));
            for (int id : config.layout.palm_ids) {
                s.taxel[id] = v0 + w * (press_v - v0);
            }
            for (int f = 0; f < 4; ++f) {
                s.angles.fingers[f].theta1 = deg_to_rad(5.0) * w;
            }
            s.wrist.p = Vec3(0, 0, -0.01 * w);
        });
        return out;
    }

    if (name == "twist-lid" || name == "pinch-lid") {
        // Twist grip: index MCP flexion plateaus near the paper-scale value;
        // pinch adds a strong thumb/index fingertip response.
        const double grip_deg = twist_plateau_deg();
        const double grip_n = name == "pinch-lid" ? 3.0 : 2.0;
        const double grip_v = sensor::force_to_voltage(grip_n, config.force);
        emit(6.0, [&](sensor::GestureSample& s) {
            const double w = ramp(s.t, 1.0, 1.5) * (1.0 - ramp(s.t, 5.0, 5.5));
            for (int f = 0; f < 4; ++f) {
                s.angles.fingers[f].theta1 = deg_to_rad(grip_deg) * w;
                s.angles.fingers[f].theta2 = deg_to_rad(30.0) * w;
            }
            s.angles.thumb.theta1 = deg_to_rad(30.0) * w;
            s.angles.thumb.theta2 = deg_to_rad(20.0) * w;
            // fingertip pads engaged while twisting
            s.taxel[config.layout.finger_ids[0][1]] = v0 + w * (grip_v - v0);   // thumb distal
            s.taxel[config.layout.finger_ids[1][1]] = v0 + w * (grip_v - v0);   // index distal
            // twist motion about the lid axis
            const double yaw = deg_to_rad(60.0) * std::sin(2.0 * kPi * 0.5 * s.t) * w;
            s.wrist.q = quat_from_axis_angle(Vec3(0, 0, 1), yaw);
        });
        return out;
    }

    if (name == "pick-place") {
        const PickPlaceLayout layout = pick_place_layout();
        const Vec3 grip_pos = layout.wrist_grip_position();
        const Vec3 start = grip_pos - Vec3(0, 0, 0.15);

        hand::HandAngles grip;
        for (int f = 0; f < 4; ++f) {
            grip.fingers[f].theta1 = deg_to_rad(60.0);
            grip.fingers[f].theta2 = deg_to_rad(60.0);
            grip.fingers[f].theta3 = deg_to_rad(30.0);
        }
        grip.thumb.theta1 = deg_to_rad(20.0);
        grip.thumb.theta2 = deg_to_rad(30.0);

        emit(5.0, [&](sensor::GestureSample& s) {
            const double rise = ramp(s.t, 0.0, 1.0);
            const double close = ramp(s.t, 1.0, 1.5);
            const double carry = ramp(s.t, 1.5, 3.5);
            const double open = ramp(s.t, 3.5, 4.0);
            const double retreat = ramp(s.t, 4.0, 5.0);

            s.angles = scaled_grip(grip, close * (1.0 - open));
            s.wrist.p = start + rise * (grip_pos - start) + carry * layout.carry_delta -
                        retreat * Vec3(0, 0, 0.15);
            const double grip_w = close * (1.0 - open);
            for (int f = 0; f < 5; ++f) {
                s.taxel[config.layout.finger_ids[f][1]] =
                    v0 + grip_w * (sensor::force_to_voltage(1.5, config.force) - v0);
            }
        });
        return out;
    }

    throw std::invalid_argument("unknown scenario: " + name);
}

}  // namespace manugrip::pipeline
