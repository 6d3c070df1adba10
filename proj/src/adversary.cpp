#include "tsqp/adversary.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tsqp/polarization.hpp"

namespace tsqp {

std::string strategy_name(const EveStrategy& strategy) {
    std::ostringstream os;
    if (std::holds_alternative<NoStrategy>(strategy)) {
        os << "none";
    } else if (const auto* ir = std::get_if<InterceptResend>(&strategy)) {
        os << "intercept_resend:stage=" << ir->stage << ",basis=" << ir->basis_deg;
    } else if (const auto* bs = std::get_if<BeamSplit>(&strategy)) {
        os << "beam_split:k=" << bs->k << ",stages=";
        for (std::size_t i = 0; i < bs->stages.size(); ++i)
            os << (i ? "+" : "") << bs->stages[i];
    } else if (const auto* up = std::get_if<UnitaryProbe>(&strategy)) {
        os << "unitary_probe:stage=" << up->stage;
    }
    return os.str();
}

std::pair<int, PhotonPulse> intercept_resend(const PhotonPulse& pulse, double basis_deg,
                                             Rng& rng) {
    if (pulse.state.dim() != 2)
        throw std::invalid_argument("intercept_resend needs a polarization pulse");
    JonesVector state = pulse.polarization().normalized();
    JonesVector aligned = JonesVector::linear(basis_deg);
    double p0 = std::norm(inner(aligned, state));
    int outcome = (rng.uniform() < p0) ? 0 : 1;
    JonesVector collapsed = JonesVector::linear(basis_deg + 90.0 * outcome);
    PhotonPulse out = pulse;
    out.state = StateVector::from_jones(collapsed);
    return {outcome, out};
}

std::pair<PhotonPulse, PhotonPulse> beam_split_siphon(const PhotonPulse& pulse,
                                                      std::uint32_t k, Rng&) {
    if (k < 1 || k >= pulse.photon_count)
        throw std::invalid_argument("beam split requires 1 <= k < photon_count");
    PhotonPulse eve = pulse;
    eve.photon_count = k;
    PhotonPulse forward = pulse;
    forward.photon_count = pulse.photon_count - k;
    return {eve, forward};
}

std::uint32_t measure_photons(const PhotonPulse& pulse, double basis_deg,
                              std::uint32_t count, Rng& rng) {
    if (pulse.state.dim() != 2)
        throw std::invalid_argument("measure_photons needs a polarization pulse");
    JonesVector state = pulse.polarization().normalized();
    double p0 = std::norm(inner(JonesVector::linear(basis_deg), state));
    std::uint32_t hits = 0;
    for (std::uint32_t i = 0; i < count; ++i)
        if (rng.uniform() < p0) ++hits;
    return hits;
}

std::size_t SiphonedBlock::bit_count() const {
    std::size_t n = 0;
    for (const auto& stage : photons) n = std::max(n, stage.size());
    return n;
}

std::size_t SiphonedBlock::total_photons() const {
    std::size_t n = 0;
    for (const auto& stage : photons)
        for (const auto& bit : stage) n += bit.size();
    return n;
}

namespace {

// The estimator's angle grid: 9 degree steps over [0, 180). Both shifts it
// must represent exactly (90 degrees between bit values, 45 degrees between
// measurement bases) are multiples of the step, so degenerate key shifts
// land on grid points and produce exact likelihood ties.
constexpr int kGridN = 20;
constexpr double kGridStepDeg = 180.0 / kGridN;

struct BasisCounts {
    std::uint32_t total = 0;
    std::uint32_t outcome0 = 0;
};

}  // namespace

BlockEstimate multi_stage_estimate(const SiphonedBlock& block, Rng& rng) {
    BlockEstimate est;
    std::size_t bits = block.bit_count();
    Rng tie_rng = rng.fork(0x7469650aULL);

    if (block.total_photons() == 0) {
        for (std::size_t i = 0; i < bits; ++i)
            est.bit_guesses.push_back(static_cast<int>(tie_rng.below(2)));
        return est;
    }
    est.informative = true;

    // Born-rule measurements, alternating 0/45 degree bases per photon.
    // Streams are derived per (stage, bit, photon) so enlarging the photon
    // set keeps earlier outcomes fixed.
    std::vector<std::array<std::array<BasisCounts, 2>, 3>> counts(bits);
    bool stage_tapped[3] = {false, false, false};
    for (int s = 0; s < 3; ++s) {
        for (std::size_t i = 0; i < block.photons[s].size(); ++i) {
            for (std::size_t j = 0; j < block.photons[s][i].size(); ++j) {
                stage_tapped[s] = true;
                int basis = static_cast<int>(j % 2);
                double basis_deg = basis ? 45.0 : 0.0;
                const JonesVector& photon = block.photons[s][i][j];
                double p0 = std::norm(inner(JonesVector::linear(basis_deg),
                                            photon.normalized()));
                Rng photon_rng =
                    rng.fork((static_cast<std::uint64_t>(s + 1) * 256 + i) * 4096 + j);
                BasisCounts& c = counts[i][static_cast<std::size_t>(s)]
                                       [static_cast<std::size_t>(basis)];
                ++c.total;
                if (photon_rng.uniform() < p0) ++c.outcome0;
            }
        }
    }

    // log cos^2 / log sin^2 over the grid, clamped away from -inf: real
    // angles are continuous, so an exactly-impossible outcome only means
    // the grid point is a poor fit, not a contradiction.
    double lp0[kGridN], lp1[kGridN];
    for (int i = 0; i < kGridN; ++i) {
        double c = std::cos(deg_to_rad(kGridStepDeg * i));
        double c2 = c * c;
        lp0[i] = std::log(std::max(c2, 1e-9));
        lp1[i] = std::log(std::max(1.0 - c2, 1e-9));
    }

    struct Candidate {
        int ia, ib;
        std::vector<int> guesses;
    };
    double best_ll = -1e300;
    std::vector<Candidate> ties;
    const int b_shift = kGridN / 2;       // 90 degrees
    const int basis_shift = kGridN / 4;   // 45 degrees

    for (int ia = 0; ia < kGridN; ++ia) {
        for (int ib = 0; ib < kGridN; ++ib) {
            int offset[3] = {ia, (ia + ib) % kGridN, ib};
            double ll = 0.0;
            Candidate cand{ia, ib, {}};
            cand.guesses.reserve(bits);
            for (std::size_t i = 0; i < bits; ++i) {
                double llb[2] = {0.0, 0.0};
                for (int b = 0; b < 2; ++b) {
                    for (int s = 0; s < 3; ++s) {
                        if (!stage_tapped[s]) continue;
                        for (int basis = 0; basis < 2; ++basis) {
                            const BasisCounts& c =
                                counts[i][static_cast<std::size_t>(s)]
                                      [static_cast<std::size_t>(basis)];
                            if (c.total == 0) continue;
                            int idx = (offset[s] + b * b_shift - basis * basis_shift +
                                       2 * kGridN) %
                                      kGridN;
                            llb[b] += c.outcome0 * lp0[idx] +
                                      (c.total - c.outcome0) * lp1[idx];
                        }
                    }
                }
                if (llb[0] == llb[1])
                    cand.guesses.push_back(-1);  // per-bit coin, resolved later
                else
                    cand.guesses.push_back(llb[1] > llb[0] ? 1 : 0);
                ll += std::max(llb[0], llb[1]);
            }
            if (ll > best_ll + 1e-9) {
                best_ll = ll;
                ties.clear();
                ties.push_back(std::move(cand));
            } else if (ll >= best_ll - 1e-9) {
                ties.push_back(std::move(cand));
            }
        }
    }

    const Candidate& chosen = ties[tie_rng.below(ties.size())];
    est.theta_a_deg = kGridStepDeg * chosen.ia;
    est.theta_b_deg = kGridStepDeg * chosen.ib;
    for (int g : chosen.guesses)
        est.bit_guesses.push_back(g < 0 ? static_cast<int>(tie_rng.below(2)) : g);
    return est;
}

double estimate_attack_accuracy(const std::vector<int>& stages,
                                std::uint32_t photons_per_stage, std::uint64_t trials,
                                std::uint64_t seed) {
    for (int s : stages)
        if (s < 1 || s > 3) throw std::invalid_argument("stages must be in 1..3");
    const std::size_t kBits = 8;
    Rng master(seed);
    std::uint64_t correct = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        Rng trial = master.fork(t);
        double theta_a = trial.angle_deg();
        double theta_b = trial.angle_deg();
        std::vector<int> bits(kBits);
        for (std::size_t i = 0; i < kBits; ++i) bits[i] = static_cast<int>(trial.below(2));

        SiphonedBlock block;
        for (int s : stages) {
            auto& stage_photons = block.photons[static_cast<std::size_t>(s - 1)];
            stage_photons.resize(kBits);
            for (std::size_t i = 0; i < kBits; ++i) {
                double base = 90.0 * bits[i];
                double angle = s == 1   ? base + theta_a
                               : s == 2 ? base + theta_a + theta_b
                                        : base + theta_b;
                stage_photons[i].assign(photons_per_stage, JonesVector::linear(angle));
            }
        }
        BlockEstimate est = multi_stage_estimate(block, trial);
        for (std::size_t i = 0; i < kBits; ++i)
            if (est.bit_guesses[i] == bits[i]) ++correct;
    }
    return static_cast<double>(correct) / (static_cast<double>(trials) * kBits);
}

namespace {

StateVector kron(const JonesVector& sys, const StateVector& anc) {
    if (anc.dim() != 2) throw std::invalid_argument("ancilla must be 2-dimensional");
    StateVector out(4);
    out.a[0] = sys.c0 * anc.a[0];
    out.a[1] = sys.c0 * anc.a[1];
    out.a[2] = sys.c1 * anc.a[0];
    out.a[3] = sys.c1 * anc.a[1];
    return out;
}

/// Project the system part onto `sys` to recover the ancilla component:
/// a_j = sum_s conj(sys_s) joint[2s + j].
StateVector extract_ancilla(const JonesVector& sys, const StateVector& joint) {
    StateVector a(2);
    a.a[0] = std::conj(sys.c0) * joint.a[0] + std::conj(sys.c1) * joint.a[2];
    a.a[1] = std::conj(sys.c0) * joint.a[1] + std::conj(sys.c1) * joint.a[3];
    return a;
}

double product_residual(const JonesVector& sys, const StateVector& ancilla,
                        const StateVector& joint) {
    StateVector rebuilt = kron(sys, ancilla);
    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) acc += std::norm(joint.a[i] - rebuilt.a[i]);
    return std::sqrt(acc);
}

}  // namespace

ProbeReport probe_inner_product_check(const UnitaryTransform& probe,
                                      const ProbeStates& states) {
    if (probe.n != 4) throw std::invalid_argument("probe must act on the 4-dim joint space");
    if (!probe.is_unitary(kTolAlgebra))
        throw std::invalid_argument("probe is not unitary within 1e-12");

    JonesVector psi = states.psi.normalized();
    JonesVector phi = states.phi.normalized();
    StateVector v = states.ancilla.normalized();

    StateVector j1 = probe.apply(kron(psi, v));
    StateVector j2 = probe.apply(kron(phi, v));

    ProbeReport report;
    cplx ip_in = inner(psi, phi);
    report.preserved_residual = std::abs(inner(j1, j2) - ip_in);
    report.orthogonal_inputs = std::abs(ip_in) <= 1e-9;

    StateVector a = extract_ancilla(psi, j1);
    StateVector b = extract_ancilla(phi, j2);
    report.fixes_psi = product_residual(psi, a, j1) <= 1e-9;
    report.fixes_phi = product_residual(phi, b, j2) <= 1e-9;
    report.ancilla_overlap = inner(a, b);
    report.input_output_overlap = inner(v, b);
    return report;
}

UnitaryTransform probe_fixing_states(const JonesVector& psi, const JonesVector& phi,
                                     const StateVector& v, const StateVector& w, Rng& rng) {
    JonesVector np = psi.normalized();
    JonesVector nq = phi.normalized();
    if (std::abs(std::abs(inner(np, nq)) - 1.0) < 1e-9)
        throw std::invalid_argument("system states must not be parallel");
    StateVector nv = v.normalized();
    StateVector nw = w.normalized();

    StateVector s1 = kron(np, nv);
    StateVector s2 = kron(nq, nv);
    StateVector t1 = kron(np, nw);
    StateVector t2 = kron(nq, nw);

    auto orthonormal_pair = [](const StateVector& first, const StateVector& second) {
        std::vector<StateVector> basis;
        basis.push_back(first.normalized());
        StateVector r = second;
        cplx c = inner(basis[0], second);
        for (std::size_t i = 0; i < 4; ++i) r.a[i] -= c * basis[0].a[i];
        basis.push_back(r.normalized());
        return basis;
    };

    std::vector<StateVector> u = orthonormal_pair(s1, s2);
    std::vector<StateVector> t = orthonormal_pair(t1, t2);

    auto complete = [&rng](std::vector<StateVector>& basis) {
        while (basis.size() < 4) {
            StateVector r(4);
            for (std::size_t i = 0; i < 4; ++i) r.a[i] = cplx{rng.gaussian(), rng.gaussian()};
            for (const StateVector& prev : basis) {
                cplx c = inner(prev, r);
                for (std::size_t i = 0; i < 4; ++i) r.a[i] -= c * prev.a[i];
            }
            if (r.norm() < 1e-6) continue;  // unlucky draw, retry
            basis.push_back(r.normalized());
        }
    };
    complete(u);
    complete(t);

    UnitaryTransform probe(4);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                probe(i, j) += t[k].a[i] * std::conj(u[k].a[j]);
    return probe;
}

namespace {

int bob_outcome_to_bit(DetectorOutcome o) {
    return o == DetectorOutcome::Bit1 ? 1 : 0;
}

struct TrialResult {
    int bit = 0;
    int eve_guess = 0;
    bool bob_erased = false;
    bool bob_error = false;
};

TrialResult run_attack_trial(const EveStrategy& strategy, const ExperimentConfig& config,
                             Rng& trial) {
    TrialResult result;
    BlockKey key;
    key.theta_a_deg = trial.angle_deg();
    key.theta_b_deg = trial.angle_deg();
    result.bit = static_cast<int>(trial.below(2));

    StageMessage msg =
        alice_stage1(ProtocolBit{result.bit}, key, 0, config.photons_per_pulse);

    bool eve_guess_set = false;
    std::array<PhotonPulse, 3> siphoned;
    std::array<bool, 3> siphoned_present{false, false, false};

    auto apply_strategy = [&](StageMessage& m, int stage) {
        if (const auto* ir = std::get_if<InterceptResend>(&strategy)) {
            if (ir->stage == stage) {
                auto [outcome, collapsed] = intercept_resend(m.pulse, ir->basis_deg, trial);
                m.pulse = collapsed;
                result.eve_guess = outcome;
                eve_guess_set = true;
            }
        } else if (const auto* bs = std::get_if<BeamSplit>(&strategy)) {
            if (std::find(bs->stages.begin(), bs->stages.end(), stage) != bs->stages.end()) {
                auto [eve, forward] = beam_split_siphon(m.pulse, bs->k, trial);
                m.pulse = forward;
                siphoned[static_cast<std::size_t>(stage - 1)] = eve;
                siphoned_present[static_cast<std::size_t>(stage - 1)] = true;
            }
        } else if (const auto* up = std::get_if<UnitaryProbe>(&strategy)) {
            if (up->stage == stage) {
                StateVector anc = StateVector::basis(2, 0);
                StateVector joint = up->probe.apply(kron(m.pulse.polarization(), anc));
                double p1 = std::norm(joint.a[1]) + std::norm(joint.a[3]);
                int anc_outcome = trial.uniform() < 1.0 - p1 ? 0 : 1;
                StateVector collapsed(2);
                collapsed.a[0] = joint.a[0 + static_cast<std::size_t>(anc_outcome)];
                collapsed.a[1] = joint.a[2 + static_cast<std::size_t>(anc_outcome)];
                m.pulse.state = collapsed.normalized();
                result.eve_guess = anc_outcome;
                eve_guess_set = true;
            }
        }
    };

    apply_strategy(msg, 1);
    msg = bob_stage2(msg, key);
    apply_strategy(msg, 2);
    msg = alice_stage3(msg, key);
    apply_strategy(msg, 3);
    DetectorOutcome outcome = bob_stage4(msg, key, config.detector, trial);

    if (const auto* bs = std::get_if<BeamSplit>(&strategy)) {
        int tapped = 0;
        for (bool p : siphoned_present) tapped += p ? 1 : 0;
        if (tapped == 1) {
            // Single-stage tap: measure every siphoned photon in H/V and
            // vote by majority.
            for (std::size_t s = 0; s < 3; ++s) {
                if (!siphoned_present[s]) continue;
                std::uint32_t hits = measure_photons(siphoned[s], 0.0, bs->k, trial);
                if (2 * hits == bs->k)
                    result.eve_guess = static_cast<int>(trial.below(2));
                else
                    result.eve_guess = (2 * hits > bs->k) ? 0 : 1;
                eve_guess_set = true;
            }
        } else if (tapped > 1) {
            SiphonedBlock block;
            for (std::size_t s = 0; s < 3; ++s) {
                if (!siphoned_present[s]) continue;
                block.photons[s].resize(1);
                block.photons[s][0].assign(bs->k,
                                           siphoned[s].polarization().normalized());
            }
            BlockEstimate est = multi_stage_estimate(block, trial);
            result.eve_guess = est.bit_guesses[0];
            eve_guess_set = true;
        }
    }
    if (!eve_guess_set) result.eve_guess = static_cast<int>(trial.below(2));

    if (outcome == DetectorOutcome::Erasure) {
        result.bob_erased = true;
    } else {
        result.bob_error = bob_outcome_to_bit(outcome) != result.bit;
    }
    return result;
}

}  // namespace

AttackReport run_attack_experiment(const EveStrategy& strategy,
                                   const ExperimentConfig& config) {
    if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (const auto* bs = std::get_if<BeamSplit>(&strategy)) {
        if (bs->k >= config.photons_per_pulse)
            throw std::invalid_argument(
                "beam split k must be below photons_per_pulse");
        for (int s : bs->stages)
            if (s < 1 || s > 3) throw std::invalid_argument("stages must be in 1..3");
    }
    if (const auto* ir = std::get_if<InterceptResend>(&strategy)) {
        if (ir->stage < 1 || ir->stage > 3)
            throw std::invalid_argument("stage must be in 1..3");
    }

    Rng master(config.seed);
    std::uint64_t eve_correct = 0;
    std::uint64_t bob_errors = 0;
    std::uint64_t erasures = 0;
    std::uint64_t joint[2][2] = {{0, 0}, {0, 0}};

    for (std::uint64_t t = 0; t < config.trials; ++t) {
        Rng trial = master.fork(t);
        TrialResult r = run_attack_trial(strategy, config, trial);
        if (r.eve_guess == r.bit) ++eve_correct;
        joint[r.bit][r.eve_guess] += 1;
        if (r.bob_erased)
            ++erasures;
        else if (r.bob_error)
            ++bob_errors;
    }

    AttackReport report;
    report.strategy = strategy_name(strategy);
    report.trials = config.trials;
    report.seed = config.seed;
    report.photons_per_pulse = config.photons_per_pulse;
    report.eve_bit_accuracy = static_cast<double>(eve_correct) /
                              static_cast<double>(config.trials);
    report.eve_accuracy_ci = wilson_interval_95(eve_correct, config.trials);
    std::uint64_t decoded = config.trials - erasures;
    report.bob_error_rate =
        decoded > 0 ? static_cast<double>(bob_errors) / static_cast<double>(decoded) : 0.0;
    report.bob_error_ci = wilson_interval_95(bob_errors, std::max<std::uint64_t>(decoded, 1));
    report.erasure_rate =
        static_cast<double>(erasures) / static_cast<double>(config.trials);
    report.mutual_information_bits = mutual_information_bits(joint);
    return report;
}

std::string AttackReport::to_json() const {
    nlohmann::json j;
    j["strategy"] = strategy;
    j["trials"] = trials;
    j["seed"] = seed;
    j["photons_per_pulse"] = photons_per_pulse;
    j["eve_bit_accuracy"] = eve_bit_accuracy;
    j["eve_accuracy_ci"] = {eve_accuracy_ci.lo(), eve_accuracy_ci.hi()};
    j["bob_error_rate"] = bob_error_rate;
    j["bob_error_ci"] = {bob_error_ci.lo(), bob_error_ci.hi()};
    j["erasure_rate"] = erasure_rate;
    j["mutual_information_bits"] = mutual_information_bits;
    return j.dump(2);
}

std::string AttackReport::csv_header() {
    return "strategy,trials,seed,photons_per_pulse,eve_bit_accuracy,eve_ci_lo,eve_ci_hi,"
           "bob_error_rate,bob_ci_lo,bob_ci_hi,erasure_rate,mutual_information_bits";
}

namespace {

// RFC 4180: quote a field when it holds a separator, quote, or newline.
std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char ch : value) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace

std::string AttackReport::to_csv_row() const {
    std::ostringstream os;
    os << csv_field(strategy) << ',' << trials << ',' << seed << ',' << photons_per_pulse << ','
       << eve_bit_accuracy << ',' << eve_accuracy_ci.lo() << ',' << eve_accuracy_ci.hi()
       << ',' << bob_error_rate << ',' << bob_error_ci.lo() << ',' << bob_error_ci.hi()
       << ',' << erasure_rate << ',' << mutual_information_bits;
    return os.str();
}

}  // namespace tsqp
