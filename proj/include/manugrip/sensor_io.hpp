#pragma once

#include "manugrip/geometry.hpp"
#include "manugrip/glove_frame.hpp"
#include "manugrip/hand_kinematics.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace manugrip::sensor {

// ---------------------------------------------------------------------------
// Taxel layout
// ---------------------------------------------------------------------------

enum class HandRegion : int { Palm = 0, Thumb, Index, Middle, Ring, Little };

/// 16 palm-grid taxels (4x4) plus a proximal/distal pair per finger.
struct TaxelLayout {
    std::array<int, 16> palm_ids{};
    // per digit (thumb, index, middle, ring, little): {proximal, distal}
    std::array<std::array<int, 2>, 5> finger_ids{};

    static TaxelLayout defaults();
    void validate() const;

    HandRegion region_of(int taxel_id) const;
    int thumb_distal_id() const { return finger_ids[0][1]; }
};

// ---------------------------------------------------------------------------
// Force calibration laws
// ---------------------------------------------------------------------------

enum class ForceLaw : int { Logarithmic = 0, Power = 1 };

/// Fitted force-voltage laws for a Velostat taxel (volts in, newtons out).
/// Logarithmic: F = c1 * ln(c2 * V).  Power: F = p1 * V^p2 + p3.
struct ForceCalibration {
    ForceLaw law = ForceLaw::Logarithmic;
    double c1 = 0.569;
    double c2 = 44.98;
    double p1 = -1.067;
    double p2 = -0.4798;
    double p3 = 3.244;

    void validate() const;
};

struct ForceReading {
    double newtons = 0.0;
    bool below_threshold = false;  // input at or below the law's zero crossing
};

ForceReading voltage_to_force(double volts, const ForceCalibration& cal);

/// Exact inverse of the logarithmic law. The power law has no closed inverse
/// over the full force range and is rejected.
double force_to_voltage(double newtons, const ForceCalibration& cal);

/// Raw law evaluation without the zero clamp; used for monotonicity checks.
double raw_law_force(double volts, const ForceCalibration& cal);

// ---------------------------------------------------------------------------
// Synthetic IMU streams
// ---------------------------------------------------------------------------

/// Per-measurement angular error statistics of one IMU, plus an optional
/// constant-rate drift about a random fixed axis per IMU.
struct ImuNoiseModel {
    double bias_deg = 2.5;
    double std_deg = 1.7;
    double drift_rate_deg_s = 0.0;

    void validate() const;
};

/// Deterministic RNG with fully specified output; all stochastic synthesis
/// goes through this so runs are reproducible bit-for-bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform();                       // [0, 1)
    double gauss();                         // standard normal (polar method)
    Vec3 unit_vector();                     // uniform on the sphere

private:
    std::mt19937_64 gen_;
};

/// One signed angular measurement error in radians: bias + N(0, std).
double sample_angle_error(const ImuNoiseModel& m, Rng& rng);

/// Ground-truth sample for the synthetic generator. Taxel voltages and the
/// wrist/tool poses are passed through unchanged.
struct GestureSample {
    double t = 0.0;
    hand::HandAngles angles;
    Pose wrist;
    std::array<double, kNumTaxels> taxel{};
    std::optional<Pose> tool;
};

/// Builds a glove stream whose IMU orientations carry per-joint flexion bias
/// and Gaussian noise plus per-IMU drift. Deterministic for a fixed seed.
std::vector<GloveFrame> synth_imu_stream(const std::vector<GestureSample>& truth,
                                         const ImuNoiseModel& noise, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Analysis channels
// ---------------------------------------------------------------------------

/// Time series extracted from a calibrated stream: palm mean force, thumb
/// fingertip force and the index MCP flexion angle.
struct AnalysisChannels {
    std::vector<double> t;
    std::vector<double> palm_force_n;
    std::vector<double> thumb_tip_force_n;
    std::vector<double> index_mcp_flexion_deg;
};

AnalysisChannels extract_channels(const std::vector<GloveFrame>& frames,
                                  const TaxelLayout& layout, const ForceCalibration& cal);

// ---------------------------------------------------------------------------
// Stream file I/O (one JSON record per line)
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

void write_stream(std::ostream& out, const std::vector<GloveFrame>& frames);
void write_stream_file(const std::string& path, const std::vector<GloveFrame>& frames);

/// Rejects malformed records (with their line number), negative voltages and
/// non-increasing timestamps.
std::vector<GloveFrame> read_stream(std::istream& in);
std::vector<GloveFrame> read_stream_file(const std::string& path);

}  // namespace manugrip::sensor
