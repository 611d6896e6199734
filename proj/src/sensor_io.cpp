#include "manugrip/sensor_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using nlohmann::json;

namespace manugrip::sensor {

// ---------------------------------------------------------------------------
// TaxelLayout
// ---------------------------------------------------------------------------

TaxelLayout TaxelLayout::defaults() {
    TaxelLayout l;
    for (int i = 0; i < 16; ++i) l.palm_ids[i] = i;
    for (int f = 0; f < 5; ++f) l.finger_ids[f] = {16 + 2 * f, 16 + 2 * f + 1};
    return l;
}

void TaxelLayout::validate() const {
    std::set<int> ids(palm_ids.begin(), palm_ids.end());
    for (const auto& pair : finger_ids) {
        ids.insert(pair[0]);
        ids.insert(pair[1]);
    }
    if (ids.size() != kNumTaxels || *ids.begin() < 0 || *ids.rbegin() >= kNumTaxels) {
        throw std::invalid_argument("taxel layout must cover 26 unique ids in [0, 26)");
    }
}

HandRegion TaxelLayout::region_of(int taxel_id) const {
    for (int i = 0; i < 16; ++i) {
        if (palm_ids[i] == taxel_id) return HandRegion::Palm;
    }
    for (int f = 0; f < 5; ++f) {
        if (finger_ids[f][0] == taxel_id || finger_ids[f][1] == taxel_id) {
            return static_cast<HandRegion>(static_cast<int>(HandRegion::Thumb) + f);
        }
    }
    throw std::invalid_argument("unknown taxel id " + std::to_string(taxel_id));
}

// ---------------------------------------------------------------------------
// Force laws
// ---------------------------------------------------------------------------

void ForceCalibration::validate() const {
    if (!(c1 > 0.0) || !(c2 > 0.0)) {
        throw std::invalid_argument("logarithmic coefficients must be positive");
    }
}

double raw_law_force(double volts, const ForceCalibration& cal) {
    if (cal.law == ForceLaw::Logarithmic) {
        return cal.c1 * std::log(cal.c2 * volts);
    }
    return cal.p1 * std::pow(volts, cal.p2) + cal.p3;
}

ForceReading voltage_to_force(double volts, const ForceCalibration& cal) {
    cal.validate();
    if (!(volts > 0.0)) {
        return {0.0, true};  // dead taxel reading
    }
    const double f = raw_law_force(volts, cal);
    if (f <= 0.0) return {0.0, true};
    return {f, false};
}

double force_to_voltage(double newtons, const ForceCalibration& cal) {
    cal.validate();
    if (cal.law != ForceLaw::Logarithmic) {
        throw std::invalid_argument("force_to_voltage: power law has no closed inverse");
    }
    if (newtons < 0.0) {
        throw std::invalid_argument("force_to_voltage: force must be >= 0");
    }
    return std::exp(newtons / cal.c1) / cal.c2;
}

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

double Rng::uniform() {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::gauss() {
    // Marsaglia polar method, no spare caching so draw order is obvious
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

Vec3 Rng::unit_vector() {
    for (;;) {
        const Vec3 v(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
        const double n = v.norm();
        if (n > 1e-6 && n <= 1.0) return v / n;
    }
}

// ---------------------------------------------------------------------------
// Synthetic streams
// ---------------------------------------------------------------------------

void ImuNoiseModel::validate() const {
    if (std_deg < 0.0) throw std::invalid_argument("noise std must be >= 0");
}

double sample_angle_error(const ImuNoiseModel& m, Rng& rng) {
    return deg_to_rad(m.bias_deg) + deg_to_rad(m.std_deg) * rng.gauss();
}

std::vector<GloveFrame> synth_imu_stream(const std::vector<GestureSample>& truth,
                                         const ImuNoiseModel& noise, std::uint64_t seed) {
    noise.validate();
    Rng rng(seed);

    // Fixed draw order: drift axes first, then per frame one error per
    // flexion joint (thumb 2, then each finger 3).
    std::array<Vec3, kNumImus> drift_axis;
    for (int k = 0; k < kNumImus; ++k) drift_axis[k] = rng.unit_vector();
    const double drift_rate = deg_to_rad(noise.drift_rate_deg_s);

    const bool noiseless = noise.bias_deg == 0.0 && noise.std_deg == 0.0;
    const double t0 = truth.empty() ? 0.0 : truth.front().t;

    std::vector<GloveFrame> frames;
    frames.reserve(truth.size());
    for (const GestureSample& s : truth) {
        hand::HandAngles noisy = s.angles;
        if (!noiseless) {
            noisy.thumb.theta1 += sample_angle_error(noise, rng);
            noisy.thumb.theta2 += sample_angle_error(noise, rng);
            for (auto& f : noisy.fingers) {
                f.theta1 += sample_angle_error(noise, rng);
                f.theta2 += sample_angle_error(noise, rng);
                f.theta3 += sample_angle_error(noise, rng);
            }
        }

        GloveFrame frame;
        frame.t = s.t;
        frame.imu = hand::angles_to_imus(noisy);
        if (drift_rate != 0.0) {
            const double angle = drift_rate * (s.t - t0);
            for (int k = 0; k < kNumImus; ++k) {
                frame.imu[k] = (quat_from_axis_angle(drift_axis[k], angle) * frame.imu[k]).normalized();
            }
        }
        frame.taxel = s.taxel;
        frame.wrist = s.wrist;
        frame.tool = s.tool;
        frames.push_back(frame);
    }
    return frames;
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

AnalysisChannels extract_channels(const std::vector<GloveFrame>& frames,
                                  const TaxelLayout& layout, const ForceCalibration& cal) {
    layout.validate();
    AnalysisChannels ch;
    ch.t.reserve(frames.size());

    for (const GloveFrame& f : frames) {
        double palm_sum = 0.0;
        for (int id : layout.palm_ids) palm_sum += voltage_to_force(f.taxel[id], cal).newtons;

        const double thumb = voltage_to_force(f.taxel[layout.thumb_distal_id()], cal).newtons;

        double flex = hand::relative_joint_angle(f.imu[kImuPalm], f.imu[kImuIndexProximal]).flexion;
        flex = std::clamp(flex, hand::kTheta1Min, hand::kTheta1Max);

        ch.t.push_back(f.t);
        ch.palm_force_n.push_back(palm_sum / 16.0);
        ch.thumb_tip_force_n.push_back(thumb);
        ch.index_mcp_flexion_deg.push_back(rad_to_deg(flex));
    }
    return ch;
}

// ---------------------------------------------------------------------------
// Stream I/O
// ---------------------------------------------------------------------------

namespace {

json quat_to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

json pose_to_json(const Pose& p) {
    return json::array({p.q.w(), p.q.x(), p.q.y(), p.q.z(), p.p.x(), p.p.y(), p.p.z()});
}

Quat quat_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw std::runtime_error("quaternion must be [w,x,y,z]");
    Quat q(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
    if (q.norm() < 1e-9) throw std::runtime_error("zero quaternion");
    return q.normalized();
}

Pose pose_from_json(const json& j) {
    if (!j.is_array() || j.size() != 7) throw std::runtime_error("pose must be [w,x,y,z,px,py,pz]");
    Pose p;
    p.q = Quat(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()).normalized();
    p.p = Vec3(j[4].get<double>(), j[5].get<double>(), j[6].get<double>());
    return p;
}

}  // namespace

void write_stream(std::ostream& out, const std::vector<GloveFrame>& frames) {
    for (const GloveFrame& f : frames) {
        json rec;
        rec["t"] = f.t;
        json imus = json::array();
        for (const Quat& q : f.imu) imus.push_back(quat_to_json(q));
        rec["imu"] = imus;
        rec["taxel"] = f.taxel;
        rec["wrist"] = pose_to_json(f.wrist);
        if (f.tool) rec["tool"] = pose_to_json(*f.tool);
        out << rec.dump() << "\n";
    }
}

void write_stream_file(const std::string& path, const std::vector<GloveFrame>& frames) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_stream(out, frames);
}

std::vector<GloveFrame> read_stream(std::istream& in) {
    std::vector<GloveFrame> frames;
    std::string line;
    int line_no = 0;
    double last_t = -std::numeric_limits<double>::infinity();

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
        }
        try {
            GloveFrame f;
            if (!rec.contains("t")) throw std::runtime_error("missing field 't'");
            f.t = rec.at("t").get<double>();

            if (!rec.contains("imu")) throw std::runtime_error("missing field 'imu'");
            const json& imus = rec.at("imu");
            if (!imus.is_array() || imus.size() != kNumImus) {
                throw std::runtime_error("field 'imu' must hold 15 quaternions");
            }
            for (int k = 0; k < kNumImus; ++k) f.imu[k] = quat_from_json(imus[k]);

            if (!rec.contains("taxel")) throw std::runtime_error("missing field 'taxel'");
            const json& tax = rec.at("taxel");
            if (!tax.is_array() || tax.size() != kNumTaxels) {
                throw std::runtime_error("field 'taxel' must hold 26 voltages");
            }
            for (int i = 0; i < kNumTaxels; ++i) {
                f.taxel[i] = tax[i].get<double>();
                if (f.taxel[i] < 0.0) throw std::runtime_error("negative voltage in 'taxel'");
            }

            if (!rec.contains("wrist")) throw std::runtime_error("missing field 'wrist'");
            f.wrist = pose_from_json(rec.at("wrist"));
            if (rec.contains("tool")) f.tool = pose_from_json(rec.at("tool"));

            if (f.t <= last_t) throw std::runtime_error("timestamps must be strictly increasing");
            last_t = f.t;
            frames.push_back(std::move(f));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(line_no, e.what());
        }
    }
    return frames;
}

std::vector<GloveFrame> read_stream_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_stream(in);
}

}  // namespace manugrip::sensor
