#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsqp/detector.hpp"
#include "tsqp/polarization.hpp"
#include "tsqp/protocol.hpp"
#include "tsqp/rng.hpp"

namespace tsqp {

/// Tabletop free-space setup constants plus the current plate angles.
/// Alice's two plates sit at (x, -x) and Bob's at (y, -y) by construction,
/// so the inverse-pair invariant cannot be violated.
struct BenchConfig {
    double wavelength_nm = 632.8;
    double source_power_mw = 0.8;
    double source_extinction = 500.0;
    double shutter_max_rate_hz = 25.0;
    double shutter_min_on_ms = 10.0;
    double rotator_max_speed_deg_per_s = 25.0;
    double alice_plate_deg = 0.0;  // x; second Alice plate at -x
    double bob_plate_deg = 0.0;    // y; second Bob plate at -y
    double slot_ms = 40.0;
    std::uint32_t photons_per_pulse = 1;

    void validate() const;  // throws std::invalid_argument on bad limits

    /// Minimum spacing between open events of the same shutter.
    double min_shutter_gap_ms() const { return 1000.0 / shutter_max_rate_hz; }
};

/// Flat key=value file, one entry per line, '#' comments. Keys match the
/// BenchConfig field names; unknown keys are rejected. Units are fixed:
/// nm, mW, Hz, ms, deg, deg/s.
BenchConfig parse_bench_config(const std::string& path);

/// A mechanical limit was exceeded. `constraint()` names the limit:
/// "shutter_min_on", "shutter_max_rate" or "rotator_max_speed".
class ConstraintViolation : public std::runtime_error {
public:
    ConstraintViolation(std::string constraint, const std::string& detail)
        : std::runtime_error(constraint + ": " + detail),
          constraint_(std::move(constraint)) {}
    const std::string& constraint() const { return constraint_; }

private:
    std::string constraint_;
};

enum class BenchElement {
    Source,
    Splitter,
    ShutterUpper,
    PolarizerUpper90,
    ShutterLower,
    PolarizerLower0,
    Combiner,
    PlateAliceX,
    PlateBobY,
    Mirror1,
    PlateAliceNegX,
    Mirror2,
    PlateBobNegY,
    OutputSplitter,
    AnalyzerPolarizer90,
    AnalyzerPolarizer0,
};

const char* bench_element_name(BenchElement e);

/// Canonical element order of the beam line, source to analyzers.
const std::vector<BenchElement>& beam_path_order();

/// Stokes state after each element, in beam order.
using BenchTrace = std::vector<std::pair<BenchElement, StokesVector>>;

/// Composed Mueller matrix of the four wave plates in physical beam order
/// (Alice x, Bob y, Alice -x, Bob -y; column convention, rightmost applied
/// first). Equals the identity for every (x, y).
MuellerMatrix four_plate_chain(double x_deg, double y_deg);

struct TimingEvent {
    std::string event_type;
    double t_start_ms = 0.0;
    double t_end_ms = 0.0;
    std::string detail;
};

struct TimingReport {
    std::vector<TimingEvent> events;
    std::vector<double> bit_slot_ms;            // one entry per transmitted bit
    std::vector<double> block_rotator_travel_ms;  // one entry per block rekey
    double total_duration_ms = 0.0;
    double bits_per_second = 0.0;

    /// CSV with header: event_type,t_start_ms,t_end_ms,detail
    std::string to_csv() const;
};

/// MSB-first bit expansion of a byte string.
std::vector<int> encode_message(const std::string& bytes);
/// Inverse of encode_message; bit count must be a multiple of 8.
std::string decode_message(const std::vector<int>& bits);

/// Schedule shutter open events for the bit sequence at the given slot
/// duration. Throws ConstraintViolation when the slot is shorter than the
/// minimum on time or when a shutter would reopen faster than the maximum
/// rate (consecutive same-valued bits at short slots).
TimingReport shutter_plan(const std::vector<int>& bits, double slot_ms,
                          const BenchConfig& config);

/// Travel time for one plate between two angles along the shortest arc, at
/// the maximum rotator speed.
double rotator_travel_ms(double from_deg, double to_deg, const BenchConfig& config);

/// Check a requested move against the speed limit; throws
/// ConstraintViolation("rotator_max_speed") if it cannot finish in time.
void validate_rotator_move(double from_deg, double to_deg, double duration_ms,
                           const BenchConfig& config);

/// Push one bit through every element of the beam line. The returned trace
/// (if requested) holds the Stokes state after each element; the outcome is
/// the detector decision. Opening both shutters at once is a configuration
/// error (std::invalid_argument).
DetectorOutcome bench_transmit_bit(int bit, const BenchConfig& config,
                                   const DetectorModel& detector, Rng& rng,
                                   BenchTrace* trace = nullptr);

struct BenchRunResult {
    std::string decoded;
    TimingReport timing;
    SessionTranscript transcript;
    std::size_t erasures = 0;
};

/// Full message run: per-8-bit-block random plate rekeying (rotator moves
/// scheduled at the speed limit), one slot per bit, detector decode.
BenchRunResult bench_run(const std::string& message, const BenchConfig& config,
                         const DetectorModel& detector, std::uint64_t seed);

}  // namespace tsqp
