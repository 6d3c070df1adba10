#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tsqp/detector.hpp"
#include "tsqp/protocol.hpp"
#include "tsqp/rng.hpp"
#include "tsqp/stats.hpp"
#include "tsqp/transforms.hpp"

namespace tsqp {

/// Eve does nothing; her guesses are coin flips.
struct NoStrategy {};

/// Measure the pulse at one stage in the {basis, basis+90} linear basis and
/// resend the collapsed state in that basis.
struct InterceptResend {
    double basis_deg = 0.0;
    int stage = 1;
};

/// Passively siphon k photons of the pulse at each tapped stage; the rest
/// travel on untouched.
struct BeamSplit {
    std::uint32_t k = 1;
    std::vector<int> stages{1};
};

/// Attach a fresh ancilla qubit at one stage, apply a joint unitary, keep
/// the ancilla and forward the (possibly disturbed) system.
struct UnitaryProbe {
    UnitaryTransform probe = UnitaryTransform::identity(4);
    int stage = 1;
};

using EveStrategy = std::variant<NoStrategy, InterceptResend, BeamSplit, UnitaryProbe>;

std::string strategy_name(const EveStrategy& strategy);

/// Quantified outcome of a Monte Carlo attack run. Rates are per
/// transmitted bit; intervals are 95% Wilson scores.
struct AttackReport {
    std::string strategy;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint32_t photons_per_pulse = 1;
    double eve_bit_accuracy = 0.0;
    WilsonInterval eve_accuracy_ci{};
    double bob_error_rate = 0.0;
    WilsonInterval bob_error_ci{};
    double erasure_rate = 0.0;
    double mutual_information_bits = 0.0;

    std::string to_json() const;
    static std::string csv_header();
    std::string to_csv_row() const;
};

/// Born-rule measurement of the whole pulse in the {basis, basis+90} linear
/// basis. Returns the outcome index (0 = aligned with basis) and the
/// collapsed pulse.
std::pair<int, PhotonPulse> intercept_resend(const PhotonPulse& pulse, double basis_deg,
                                             Rng& rng);

/// Split k photons off the pulse without touching the polarization.
/// Requires 1 <= k < photon_count.
std::pair<PhotonPulse, PhotonPulse> beam_split_siphon(const PhotonPulse& pulse,
                                                      std::uint32_t k, Rng& rng);

/// Measure `count` identical photons of the pulse in the {basis, basis+90}
/// basis; returns how many came out on the basis-aligned arm.
std::uint32_t measure_photons(const PhotonPulse& pulse, double basis_deg,
                              std::uint32_t count, Rng& rng);

/// Eve's per-block haul: photons[stage-1][bit] lists the polarizations she
/// siphoned for that stage and bit position. Stages she did not tap stay
/// empty.
struct SiphonedBlock {
    std::array<std::vector<std::vector<JonesVector>>, 3> photons;

    std::size_t bit_count() const;
    std::size_t total_photons() const;
};

struct BlockEstimate {
    bool informative = false;   // false when nothing was tapped
    double theta_a_deg = -1.0;  // estimates mod 180; -1 when uninformative
    double theta_b_deg = -1.0;
    std::vector<int> bit_guesses;
};

/// Maximum-likelihood estimate of (theta_a, theta_b, bits) from Eve's
/// siphoned photons. She measures each photon in alternating 0/45 degree
/// bases and grid-searches the angle pair jointly with the bit pattern.
/// Exactly degenerate likelihood ties (any strict subset of the three
/// stages) are broken uniformly, so single- and two-stage taps guess at
/// chance level.
BlockEstimate multi_stage_estimate(const SiphonedBlock& block, Rng& rng);

/// Accuracy of multi_stage_estimate over `trials` independent blocks of 8
/// random bits with fresh uniform angles, tapping `photons_per_stage`
/// photons at each listed stage. Photon measurement streams are derived per
/// (trial, stage, bit, photon), so larger photon counts reuse the smaller
/// counts' outcomes (paired-seed comparisons are meaningful).
double estimate_attack_accuracy(const std::vector<int>& stages,
                                std::uint32_t photons_per_stage, std::uint64_t trials,
                                std::uint64_t seed);

/// States for the probe argument: system pair (psi, phi) and Eve's initial
/// ancilla v.
struct ProbeStates {
    JonesVector psi;
    JonesVector phi;
    StateVector ancilla{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
};

struct ProbeReport {
    /// | <U(psi x v), U(phi x v)> - <psi|phi> |
    double preserved_residual = 0.0;
    /// |<psi|phi>| below tolerance: distinguishable pair, the ancilla
    /// identity imposes no constraint.
    bool orthogonal_inputs = false;
    bool fixes_psi = false;  // U(psi x v) factors as psi x (something)
    bool fixes_phi = false;
    cplx ancilla_overlap{0.0, 0.0};       // <a|b> of the two output ancillas
    cplx input_output_overlap{0.0, 0.0};  // <v|b>: original vs phi-branch ancilla
};

/// Evaluate the inner-product-preservation argument for one probe and state
/// pair: unitarity of the probe, preservation of the joint inner product,
/// and, when the probe leaves both system states unchanged, the forced
/// equality of Eve's ancilla outputs.
ProbeReport probe_inner_product_check(const UnitaryTransform& probe,
                                      const ProbeStates& states);

/// Construct a joint unitary that maps psi x v -> psi x w and
/// phi x v -> phi x w exactly (random on the orthogonal complement).
/// Requires psi and phi not parallel. With w = v this is a probe that
/// fixes both product states.
UnitaryTransform probe_fixing_states(const JonesVector& psi, const JonesVector& phi,
                                     const StateVector& v, const StateVector& w, Rng& rng);

struct ExperimentConfig {
    std::uint64_t trials = 100000;
    std::uint32_t photons_per_pulse = 1;
    DetectorModel detector = DetectorModel::ideal();
    std::uint64_t seed = 0;
};

/// Monte Carlo attack run: each trial sends one random bit through a full
/// three-stage session with fresh secret angles, the strategy spliced into
/// the channel. Deterministic given the seed; trials derive their streams
/// from (seed, trial index) so they can fan out across workers.
AttackReport run_attack_experiment(const EveStrategy& strategy,
                                   const ExperimentConfig& config);

}  // namespace tsqp
