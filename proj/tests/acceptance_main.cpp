// Acceptance gate: one self-timed check per criterion, one PASS/FAIL line
// each. Exit 0 only when every executed criterion passes inside its budget.
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tsqp/adversary.hpp"
#include "tsqp/bench.hpp"
#include "tsqp/detector.hpp"
#include "tsqp/frame.hpp"
#include "tsqp/net.hpp"
#include "tsqp/polarization.hpp"
#include "tsqp/protocol.hpp"
#include "tsqp/rng.hpp"
#include "tsqp/stats.hpp"
#include "tsqp/transforms.hpp"

using namespace tsqp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// --------------------------------------------------------------------------
// 1. Four-plate bench identity, instance and grid.

Outcome criterion1() {
    const StokesVector s{1.0, 1.0, 0.0, 0.0};
    StokesVector out = apply_mueller(four_plate_chain(30.0, 40.0), s);
    double instance_residual = std::max({std::abs(out.s0 - s.s0), std::abs(out.s1 - s.s1),
                                         std::abs(out.s2 - s.s2), std::abs(out.s3 - s.s3)});

    double grid_residual = 0.0;
    for (int xi = 0; xi < 24; ++xi)
        for (int yi = 0; yi < 24; ++yi) {
            MuellerMatrix chain = four_plate_chain(15.0 * xi, 15.0 * yi);
            grid_residual =
                std::max(grid_residual, max_abs_diff(chain, MuellerMatrix::identity()));
        }

    std::ostringstream os;
    os << "instance residual " << instance_residual << ", 24x24 grid residual "
       << grid_residual;
    return {instance_residual <= 1e-12 && grid_residual <= 1e-12, os.str()};
}

// --------------------------------------------------------------------------
// 2. Exact protocol round trip on a 5 degree key grid.

Outcome criterion2() {
    Rng rng(2);
    DetectorModel detector = DetectorModel::ideal();
    int runs = 0, errors = 0;
    for (int ai = 0; ai < 72; ++ai)
        for (int bi = 0; bi < 72; ++bi)
            for (int bit = 0; bit < 2; ++bit) {
                BlockKey key;
                key.theta_a_deg = 5.0 * ai;
                key.theta_b_deg = 5.0 * bi;
                StageMessage m1 = alice_stage1(ProtocolBit{bit}, key);
                StageMessage m2 = bob_stage2(m1, key);
                StageMessage m3 = alice_stage3(m2, key);
                DetectorOutcome outcome = bob_stage4(m3, key, detector, rng);
                ++runs;
                if (outcome != (bit ? DetectorOutcome::Bit1 : DetectorOutcome::Bit0))
                    ++errors;
            }
    std::ostringstream os;
    os << errors << " errors out of " << runs << " runs";
    return {runs == 10368 && errors == 0, os.str()};
}

// --------------------------------------------------------------------------
// 3. Transformation catalog: literal construction, unitarity, commutation
//    table, Pauli masking.

UnitaryTransform lit2(std::initializer_list<cplx> entries) {
    UnitaryTransform u(2);
    std::size_t i = 0;
    for (cplx c : entries) u.m[i++] = c;
    return u;
}

UnitaryTransform lit4_real(const double (&rows)[4][4]) {
    UnitaryTransform u(4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) u(r, c) = cplx{rows[r][c], 0.0};
    return u;
}

bool set_matches(const std::vector<UnitaryTransform>& got,
                 const std::vector<UnitaryTransform>& want, double tol) {
    if (got.size() != want.size()) return false;
    std::vector<bool> used(got.size(), false);
    for (const auto& w : want) {
        bool found = false;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (used[i] || got[i].n != w.n) continue;
            if (max_abs_diff(got[i], w) <= tol) {
                used[i] = found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

Outcome criterion3() {
    std::vector<std::string> failures;
    const cplx one{1, 0}, zero{0, 0}, im{0, 1};

    // Literal matrices, integer or half-integer entries: zero tolerance.
    if (!set_matches(pauli_elements(),
                     {lit2({one, zero, zero, one}), lit2({zero, one, one, zero}),
                      lit2({zero, -im, im, zero}), lit2({one, zero, zero, -one})},
                     0.0))
        failures.push_back("pauli entries");

    const double hs = 1.0 / std::sqrt(2.0);
    if (!set_matches(hadamard_pair_elements(),
                     {lit2({one, zero, zero, one}),
                      lit2({cplx{hs, 0}, cplx{hs, 0}, cplx{hs, 0}, cplx{-hs, 0}})},
                     1e-15))
        failures.push_back("hadamard entries");

    const double ua[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}};
    const double ub[4][4] = {{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    if (!set_matches(two_qubit_permutation_elements(), {lit4_real(ua), lit4_real(ub)}, 0.0))
        failures.push_back("permutation entries");

    UnitaryTransform dft(4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            switch ((r * c) % 4) {
                case 0: dft(r, c) = cplx{0.5, 0.0}; break;
                case 1: dft(r, c) = cplx{0.0, 0.5}; break;
                case 2: dft(r, c) = cplx{-0.5, 0.0}; break;
                default: dft(r, c) = cplx{0.0, -0.5}; break;
            }
        }
    if (!set_matches(two_qubit_dft_elements(), {UnitaryTransform::identity(4), dft}, 0.0))
        failures.push_back("dft entries");

    const double q1[4][4] = {{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
    const double q2[4][4] = {{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}};
    const double q3[4][4] = {{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}};
    if (!set_matches(quaternion_elements(),
                     {lit4_real(q1), lit4_real(q2), lit4_real(q3),
                      UnitaryTransform::identity(4)},
                     0.0))
        failures.push_back("quaternion entries");

    // Unitarity of every catalog element.
    Rng rng(3);
    for (FamilyKind kind :
         {FamilyKind::Rotation, FamilyKind::Pauli, FamilyKind::HadamardPair,
          FamilyKind::TwoQubitPermutation, FamilyKind::TwoQubitDft,
          FamilyKind::QuaternionSet}) {
        TransformFamily family = TransformFamily::make(kind);
        for (const auto& u : family.elements)
            if (!u.is_unitary(1e-12))
                failures.push_back(family_kind_name(kind) + " unitarity");
        for (int i = 0; i < 8; ++i)
            if (!family.sample(rng).is_unitary(1e-12))
                failures.push_back(family_kind_name(kind) + " sample unitarity");
    }

    // Commutation table. Exact families: every pair commutes with zero
    // phase. Pauli and quaternions: lambda is +1 when either factor is the
    // identity and -1 for distinct non-identity pairs.
    for (FamilyKind kind : {FamilyKind::TwoQubitPermutation, FamilyKind::TwoQubitDft}) {
        TransformFamily family = TransformFamily::make(kind);
        for (const auto& a : family.elements)
            for (const auto& b : family.elements)
                if (!commutes(a, b, 1e-12))
                    failures.push_back(family_kind_name(kind) + " exact commutation");
    }
    for (int i = 0; i < 40; ++i) {
        TransformFamily family = TransformFamily::make(FamilyKind::Rotation);
        UnitaryTransform a = family.sample(rng), b = family.sample(rng);
        if (!commutes(a, b, 1e-12)) failures.push_back("rotation exact commutation");
    }
    for (FamilyKind kind : {FamilyKind::Pauli, FamilyKind::QuaternionSet}) {
        TransformFamily family = TransformFamily::make(kind);
        const auto& els = family.elements;
        UnitaryTransform id = UnitaryTransform::identity(family.dim);
        for (std::size_t i = 0; i < els.size(); ++i)
            for (std::size_t j = 0; j < els.size(); ++j) {
                cplx lambda;
                if (!commutes_up_to_phase(els[i], els[j], &lambda, 1e-12)) {
                    failures.push_back(family_kind_name(kind) + " phase commutation");
                    continue;
                }
                bool i_id = max_abs_diff(els[i], id) == 0.0;
                bool j_id = max_abs_diff(els[j], id) == 0.0;
                double expected = (i == j || i_id || j_id) ? 1.0 : -1.0;
                if (std::abs(lambda.real() - expected) > 1e-12 ||
                    std::abs(lambda.imag()) > 1e-12)
                    failures.push_back(family_kind_name(kind) + " lambda value");
            }
    }

    // Masking: a basis state is moved off its component by half of the
    // Pauli draws, exactly.
    double masking = masking_probability(TransformFamily::make(FamilyKind::Pauli),
                                         StateVector::basis(2, 0));
    if (masking != 0.5) failures.push_back("pauli masking");

    if (failures.empty())
        return {true, "catalog construction, unitarity, commutation and masking checks"};
    std::ostringstream os;
    os << failures.size() << " failing checks, first: " << failures.front();
    return {false, os.str()};
}

// --------------------------------------------------------------------------
// 4. Probe inner-product preservation and the forced ancilla identity.

JonesVector random_polarized(Rng& rng) {
    StateVector s{cplx{rng.gaussian(), rng.gaussian()}, cplx{rng.gaussian(), rng.gaussian()}};
    if (s.norm() < 1e-6) return JonesVector{cplx{1, 0}, cplx{0, 0}};
    return s.normalized().to_jones();
}

Outcome criterion4() {
    Rng rng(4);
    double worst_residual = 0.0;
    for (int i = 0; i < 1000; ++i) {
        UnitaryTransform probe = random_unitary(4, rng);
        ProbeStates states;
        states.psi = random_polarized(rng);
        states.phi = random_polarized(rng);
        ProbeReport report = probe_inner_product_check(probe, states);
        worst_residual = std::max(worst_residual, report.preserved_residual);
    }

    double worst_overlap = 0.0;
    int fixing_checked = 0;
    StateVector v = StateVector::basis(2, 0);
    while (fixing_checked < 500) {
        JonesVector psi = random_polarized(rng);
        JonesVector phi = random_polarized(rng);
        if (std::abs(inner(StateVector::from_jones(psi), StateVector::from_jones(phi))) <
            0.05)
            continue;  // the identity only binds non-orthogonal pairs
        UnitaryTransform probe = probe_fixing_states(psi, phi, v, v, rng);
        ProbeStates states;
        states.psi = psi;
        states.phi = phi;
        states.ancilla = v;
        ProbeReport report = probe_inner_product_check(probe, states);
        if (!report.fixes_psi || !report.fixes_phi)
            return {false, "constructed probe failed to fix both states"};
        worst_overlap =
            std::max(worst_overlap, std::abs(report.ancilla_overlap - cplx{1.0, 0.0}));
        worst_overlap =
            std::max(worst_overlap, std::abs(report.input_output_overlap - cplx{1.0, 0.0}));
        ++fixing_checked;
    }

    std::ostringstream os;
    os << "1000 probes, worst joint inner-product residual " << worst_residual << "; "
       << fixing_checked << " fixing probes, worst |<v|v'> - 1| " << worst_overlap;
    return {worst_residual <= 1e-12 && worst_overlap <= 1e-9, os.str()};
}

// --------------------------------------------------------------------------
// 5. Intercept-resend disturbance rate.

Outcome criterion5() {
    ExperimentConfig config;
    config.trials = 100000;
    config.seed = 20250814;
    AttackReport report = run_attack_experiment(InterceptResend{0.0, 1}, config);
    std::ostringstream os;
    os << "bob error rate " << report.bob_error_rate << " over " << report.trials
       << " bits (target 0.25 +/- 0.01)";
    return {std::abs(report.bob_error_rate - 0.25) <= 0.01, os.str()};
}

// --------------------------------------------------------------------------
// 6. Beam-split immunity: zero disturbance, chance-level accuracy.

Outcome criterion6() {
    double worst_gap = 0.0;
    for (std::uint32_t n : {2u, 4u, 10u})
        for (int stage = 1; stage <= 3; ++stage) {
            ExperimentConfig config;
            config.trials = 100000;
            config.photons_per_pulse = n;
            config.seed = 600 + 10 * n + static_cast<std::uint64_t>(stage);
            AttackReport report =
                run_attack_experiment(BeamSplit{n - 1, {stage}}, config);
            if (report.bob_error_rate != 0.0) {
                std::ostringstream os;
                os << "n=" << n << " stage " << stage << ": bob error rate "
                   << report.bob_error_rate << " (expected exactly 0)";
                return {false, os.str()};
            }
            auto successes = static_cast<std::uint64_t>(
                std::llround(report.eve_bit_accuracy * double(report.trials)));
            if (binomial_test_rejects(successes, report.trials, 0.5, 0.01)) {
                std::ostringstream os;
                os << "n=" << n << " stage " << stage << ": eve accuracy "
                   << report.eve_bit_accuracy << " rejected against 0.5 at 1%";
                return {false, os.str()};
            }
            worst_gap = std::max(worst_gap, std::abs(report.eve_bit_accuracy - 0.5));
        }
    std::ostringstream os;
    os << "9 configurations, bob error exactly 0, worst |eve accuracy - 0.5| = "
       << worst_gap;
    return {true, os.str()};
}

// --------------------------------------------------------------------------
// 7. Wire codec goldens, decode fuzz, full loopback chain.

Outcome criterion7() {
    // Golden byte vector.
    Frame stage;
    stage.msg_type = MsgType::Stage;
    stage.session_id = 0x0102030405060708ULL;
    stage.stage = 2;
    stage.block_index = 42;
    stage.bit_index = 5;
    stage.photon_count = 1;
    stage.stokes = {1.0, 0.5, 0.8660254037844386, 0.0};
    const std::uint8_t golden[kFrameSize] = {
        0x33, 0x53, 0x51, 0x50, 0x01, 0x03,
        0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08,
        0x02, 0x00, 0x00, 0x00, 0x2A, 0x05, 0x00, 0x00, 0x00, 0x01,
        0x3F, 0xF0, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x3F, 0xE0, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x3F, 0xEB, 0xB6, 0x7A, 0xE8, 0x58, 0x4C, 0xAA,
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    };
    std::vector<std::uint8_t> encoded = encode_frame(stage);
    if (encoded.size() != kFrameSize ||
        std::memcmp(encoded.data(), golden, kFrameSize) != 0)
        return {false, "golden byte vector mismatch"};
    auto round = decode_frame(encoded);
    if (!std::holds_alternative<Frame>(round) || !(std::get<Frame>(round) == stage))
        return {false, "golden round trip mismatch"};

    // Decode fuzz: a million random buffers, no crash, every result classified.
    Rng rng(7);
    std::uint64_t classified = 0;
    std::vector<std::uint8_t> buf(kFrameSize);
    for (int i = 0; i < 1000000; ++i) {
        for (auto& b : buf) b = static_cast<std::uint8_t>(rng.below(256));
        auto decoded = decode_frame(buf);
        classified +=
            std::holds_alternative<Frame>(decoded) || std::holds_alternative<DecodeError>(decoded);
    }
    if (classified != 1000000) return {false, "fuzz produced an unclassified result"};

    // Loopback chain: serve / proxy / send over real sockets, 1 KiB message.
    std::string message(1024, '\0');
    for (std::size_t i = 0; i < message.size(); ++i)
        message[i] = static_cast<char>('A' + i % 23);
    const std::size_t nbits = 8 * message.size();

    TcpListener bob_listener("127.0.0.1", 0);
    TcpListener proxy_listener("127.0.0.1", 0);
    NetSessionResult bob, alice;
    ProxyResult proxy;
    std::thread bob_thread([&] {
        auto conn = bob_listener.accept();
        if (conn) bob = bob_endpoint(*conn, 71);
    });
    std::thread proxy_thread([&] {
        auto alice_side = proxy_listener.accept();
        if (!alice_side) return;
        auto bob_side = TcpStream::connect("127.0.0.1", bob_listener.port());
        if (!bob_side) return;
        proxy = eve_proxy(*alice_side, *bob_side, NoStrategy{}, 7);
    });
    auto stream = TcpStream::connect("127.0.0.1", proxy_listener.port());
    if (!stream) {
        bob_thread.detach();
        proxy_thread.detach();
        return {false, "loopback connect failed"};
    }
    alice = alice_endpoint(*stream, message, 72);
    proxy_thread.join();
    bob_thread.join();

    if (!alice.ok || !bob.ok) return {false, "loopback session failed: " + alice.error};
    if (bob.decoded != message) return {false, "loopback decode mismatch"};
    // 3 STAGE frames per bit: Alice emits stages 1 and 3, Bob stage 2.
    if (alice.frames_sent != 1 + 2 * nbits || bob.frames_sent != 2 + nbits) {
        std::ostringstream os;
        os << "frame split off: alice sent " << alice.frames_sent << ", bob sent "
           << bob.frames_sent;
        return {false, os.str()};
    }
    if (proxy.frames_forwarded != 3 + 3 * nbits)
        return {false, "proxy forwarded an unexpected frame count"};

    std::ostringstream os;
    os << "goldens exact, 1e6 fuzz decodes classified, 1 KiB loopback exact with "
       << 3 * nbits << " stage frames";
    return {true, os.str()};
}

// --------------------------------------------------------------------------
// 8. Mechanical timing constraints.

Outcome criterion8() {
    BenchConfig config;
    std::vector<std::string> failures;

    auto expect_violation = [&](const char* label, const char* name, auto&& fn) {
        try {
            fn();
            failures.push_back(std::string(label) + " not rejected");
        } catch (const ConstraintViolation& e) {
            if (e.constraint() != name)
                failures.push_back(std::string(label) + " wrong constraint " +
                                   e.constraint());
        }
    };

    expect_violation("5 ms slot", "shutter_min_on",
                     [&] { shutter_plan({1, 0, 1}, 5.0, config); });
    expect_violation("20 ms repeat slot", "shutter_max_rate",
                     [&] { shutter_plan({1, 1, 1, 1}, 20.0, config); });
    expect_violation("180 deg in 1 s", "rotator_max_speed",
                     [&] { validate_rotator_move(0.0, 180.0, 1000.0, config); });

    BenchRunResult run = bench_run("0123456789", config, DetectorModel::ideal(), 88);
    if (run.transcript.message_length_bits != 80) failures.push_back("bit count");
    if (run.timing.bits_per_second > 25.0 + 1e-9) failures.push_back("throughput cap");
    if (run.decoded != "0123456789") failures.push_back("decode");

    if (failures.empty()) {
        std::ostringstream os;
        os << "3 named rejections, 80-bit run at " << run.timing.bits_per_second
           << " bits/s (cap 25)";
        return {true, os.str()};
    }
    std::ostringstream os;
    os << failures.size() << " failing checks, first: " << failures.front();
    return {false, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--help") {
            std::cout << "usage: tsqp_acceptance [--only N]\n";
            return 0;
        } else {
            std::cerr << "unknown argument: " << arg << "\n";
            return 2;
        }
    }
    if (only < 0 || only > 8) {
        std::cerr << "criterion index must be 1..8\n";
        return 2;
    }

    struct Criterion {
        int index;
        double budget_s;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, 1.0, criterion1},  {2, 5.0, criterion2},  {3, 1.0, criterion3},
        {4, 5.0, criterion4},  {5, 30.0, criterion5}, {6, 60.0, criterion6},
        {7, 60.0, criterion7}, {8, 1.0, criterion8},
    };

    bool all_pass = true;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.index != only) continue;
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("unhandled exception: ") + e.what()};
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool in_budget = elapsed < c.budget_s;
        bool pass = outcome.pass && in_budget;
        all_pass = all_pass && pass;
        std::cout << "criterion " << c.index << ": " << (pass ? "PASS" : "FAIL") << " ["
                  << outcome.detail;
        if (!in_budget) std::cout << "; over budget";
        std::cout << "] (elapsed " << elapsed << " s, budget " << c.budget_s << " s)"
                  << std::endl;
    }
    return all_pass ? 0 : 1;
}
