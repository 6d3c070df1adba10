#include "tsqp/protocol.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "tsqp/polarization.hpp"

namespace tsqp {

namespace {

void require_stage(const StageMessage& msg, int expected) {
    if (msg.stage != expected) {
        std::ostringstream os;
        os << "expected stage " << expected << " message, got stage " << msg.stage;
        throw ProtocolError(ProtocolErrorCode::OutOfOrderStage, os.str());
    }
}

void require_block(const StageMessage& msg, const BlockKey& key) {
    if (msg.block_index != key.block_index) {
        std::ostringstream os;
        os << "message block " << msg.block_index << " does not match key block "
           << key.block_index;
        throw ProtocolError(ProtocolErrorCode::BlockMismatch, os.str());
    }
}

StateVector rotate(const StateVector& s, double deg) {
    return UnitaryTransform::from_jones(rotation_operator(deg)).apply(s);
}

}  // namespace

StageMessage alice_stage1(ProtocolBit bit, const BlockKey& key, int bit_index,
                          std::uint32_t photon_count) {
    if (bit.value != 0 && bit.value != 1)
        throw ProtocolError(ProtocolErrorCode::BadConfig, "bit value must be 0 or 1");
    if (photon_count < 1)
        throw ProtocolError(ProtocolErrorCode::BadConfig, "pulse needs at least one photon");
    JonesVector encoded = JonesVector::linear(bit.base_angle_deg());
    StageMessage msg;
    msg.stage = 1;
    msg.block_index = key.block_index;
    msg.bit_index = bit_index;
    msg.pulse = PhotonPulse(rotate(StateVector::from_jones(encoded), key.theta_a_deg),
                            photon_count);
    return msg;
}

StageMessage bob_stage2(const StageMessage& msg, const BlockKey& key) {
    require_stage(msg, 1);
    require_block(msg, key);
    StageMessage out = msg;
    out.stage = 2;
    out.pulse.state = rotate(msg.pulse.state, key.theta_b_deg);
    return out;
}

StageMessage alice_stage3(const StageMessage& msg, const BlockKey& key) {
    require_stage(msg, 2);
    require_block(msg, key);
    StageMessage out = msg;
    out.stage = 3;
    out.pulse.state = rotate(msg.pulse.state, -key.theta_a_deg);
    return out;
}

DetectorOutcome bob_stage4(const StageMessage& msg, const BlockKey& key,
                           const DetectorModel& detector, Rng& rng) {
    require_stage(msg, 3);
    require_block(msg, key);
    StateVector final_state = rotate(msg.pulse.state, -key.theta_b_deg);
    double scale = msg.pulse.intensity * msg.pulse.photon_count;
    double i0 = scale * std::norm(final_state.a[0]);
    double i1 = scale * std::norm(final_state.a[1]);
    return detector_click(i0, i1, detector, rng);
}

std::string protocol_mode_name(ProtocolMode mode) {
    return mode == ProtocolMode::Rotation ? "rotation" : "abstract";
}

BlockKey draw_block_key(const SessionConfig& config, std::uint32_t block_index,
                        std::size_t family_size) {
    // Alice's and Bob's draws come from separate forked streams: neither
    // secret is derivable from the other.
    Rng alice = Rng(config.seed).fork(2ULL * block_index);
    Rng bob = Rng(config.seed).fork(2ULL * block_index + 1);
    BlockKey key;
    key.block_index = block_index;
    key.theta_a_deg = alice.angle_deg();
    key.theta_b_deg = bob.angle_deg();
    if (family_size > 0) {
        key.alice_index = alice.below(family_size);
        key.bob_index = bob.below(family_size);
    }
    return key;
}

namespace {

/// Born-rule readout of a pulse state in the computational basis. For
/// 2-dim states this runs through the detector model; 4-dim states use an
/// ideal projective measurement (the two-qubit families are in-memory
/// constructs with no bench realization).
std::vector<int> measure_symbol(const StateVector& state, const PhotonPulse& pulse,
                                const DetectorModel& detector, Rng& rng,
                                DetectorOutcome& outcome) {
    if (state.dim() == 2) {
        double scale = pulse.intensity * pulse.photon_count;
        outcome = detector_click(scale * std::norm(state.a[0]),
                                 scale * std::norm(state.a[1]), detector, rng);
        if (outcome == DetectorOutcome::Erasure) return {-1};
        return {outcome == DetectorOutcome::Bit1 ? 1 : 0};
    }
    double total = 0.0;
    for (const cplx& c : state.a) total += std::norm(c);
    if (total == 0.0) {
        outcome = DetectorOutcome::Erasure;
        return {-1, -1};
    }
    double u = rng.uniform() * total;
    std::size_t index = state.dim() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        acc += std::norm(state.a[i]);
        if (u < acc) {
            index = i;
            break;
        }
    }
    int hi = static_cast<int>(index >> 1);
    int lo = static_cast<int>(index & 1);
    outcome = lo ? DetectorOutcome::Bit1 : DetectorOutcome::Bit0;
    return {hi, lo};
}

}  // namespace

SessionTranscript run_session(const std::vector<int>& bits, const SessionConfig& config) {
    if (config.block_size == 0)
        throw ProtocolError(ProtocolErrorCode::BadConfig, "block_size must be positive");
    if (config.photons_per_pulse < 1)
        throw ProtocolError(ProtocolErrorCode::BadConfig, "photons_per_pulse must be >= 1");

    SessionTranscript transcript;
    transcript.message_length_bits = bits.size();
    transcript.block_size = config.block_size;
    transcript.seed = config.seed;
    transcript.mode = protocol_mode_name(config.mode);
    if (bits.empty()) return transcript;

    TransformFamily family;
    std::size_t bits_per_symbol = 1;
    if (config.mode == ProtocolMode::Abstract) {
        family = TransformFamily::make(config.family);
        bits_per_symbol = family.dim == 4 ? 2 : 1;
        transcript.mode += ":" + family_kind_name(config.family);
        if (config.block_size % bits_per_symbol != 0)
            throw ProtocolError(ProtocolErrorCode::BadConfig,
                                "block_size must be a multiple of the symbol width");
    }

    std::vector<int> padded = bits;
    while (padded.size() % config.block_size != 0) padded.push_back(0);
    if (bits_per_symbol == 2 && padded.size() % 2 != 0) padded.push_back(0);

    Rng measure_rng = Rng(config.seed).fork(0x4d454153);  // measurement stream

    const std::size_t block_count = (padded.size() + config.block_size - 1) / config.block_size;
    for (std::size_t block = 0; block < block_count; ++block) {
        BlockKey key = draw_block_key(config, static_cast<std::uint32_t>(block),
                                      config.mode == ProtocolMode::Abstract
                                          ? family.elements.size()
                                          : 0);
        UnitaryTransform ua, ub;
        if (config.mode == ProtocolMode::Abstract) {
            if (config.family == FamilyKind::Rotation) {
                ua = UnitaryTransform::from_jones(rotation_operator(key.theta_a_deg));
                ub = UnitaryTransform::from_jones(rotation_operator(key.theta_b_deg));
            } else {
                ua = family.elements[key.alice_index];
                ub = family.elements[key.bob_index];
            }
        }

        std::size_t begin = block * config.block_size;
        std::size_t end = std::min(padded.size(), begin + config.block_size);
        for (std::size_t i = begin; i < end; i += bits_per_symbol) {
            int bit_index = static_cast<int>(i - begin);
            StageMessage m1, m2, m3;
            if (config.mode == ProtocolMode::Rotation) {
                m1 = alice_stage1(ProtocolBit{padded[i]}, key, bit_index,
                                  config.photons_per_pulse);
            } else {
                std::size_t symbol = static_cast<std::size_t>(padded[i]);
                if (bits_per_symbol == 2)
                    symbol = (symbol << 1) | static_cast<std::size_t>(padded[i + 1]);
                m1.stage = 1;
                m1.block_index = key.block_index;
                m1.bit_index = bit_index;
                m1.pulse = PhotonPulse(ua.apply(StateVector::basis(family.dim, symbol)),
                                       config.photons_per_pulse);
            }
            transcript.entries.push_back({Direction::AliceToBob, m1});

            if (config.mode == ProtocolMode::Rotation) {
                m2 = bob_stage2(m1, key);
            } else {
                m2 = m1;
                m2.stage = 2;
                m2.pulse.state = ub.apply(m1.pulse.state);
            }
            transcript.entries.push_back({Direction::BobToAlice, m2});
            if (config.turnaround_rotation_deg != 0.0 && m2.pulse.state.dim() == 2)
                m2.pulse.state =
                    UnitaryTransform::from_jones(rotation_operator(config.turnaround_rotation_deg))
                        .apply(m2.pulse.state);

            if (config.mode == ProtocolMode::Rotation) {
                m3 = alice_stage3(m2, key);
            } else {
                m3 = m2;
                m3.stage = 3;
                m3.pulse.state = ua.dagger().apply(m2.pulse.state);
            }
            transcript.entries.push_back({Direction::AliceToBob, m3});
            if (config.turnaround_rotation_deg != 0.0 && m3.pulse.state.dim() == 2)
                m3.pulse.state =
                    UnitaryTransform::from_jones(rotation_operator(config.turnaround_rotation_deg))
                        .apply(m3.pulse.state);

            DetectorOutcome outcome = DetectorOutcome::Erasure;
            std::vector<int> decoded;
            if (config.mode == ProtocolMode::Rotation) {
                outcome = bob_stage4(m3, key, config.detector, measure_rng);
                decoded = {outcome == DetectorOutcome::Erasure
                               ? -1
                               : (outcome == DetectorOutcome::Bit1 ? 1 : 0)};
            } else {
                StateVector final_state = ub.dagger().apply(m3.pulse.state);
                decoded = measure_symbol(final_state, m3.pulse, config.detector, measure_rng,
                                         outcome);
            }
            for (int b : decoded) {
                transcript.decoded_bits.push_back(b);
                transcript.outcomes.push_back(
                    b < 0 ? DetectorOutcome::Erasure
                          : (b ? DetectorOutcome::Bit1 : DetectorOutcome::Bit0));
            }
        }
    }
    return transcript;
}

std::string SessionTranscript::to_jsonl() const {
    std::ostringstream os;
    for (const TranscriptEntry& e : entries) {
        nlohmann::json rec;
        rec["dir"] = e.direction == Direction::AliceToBob ? "alice_to_bob" : "bob_to_alice";
        rec["stage"] = e.message.stage;
        rec["block"] = e.message.block_index;
        rec["bit"] = e.message.bit_index;
        rec["photons"] = e.message.pulse.photon_count;
        if (e.message.pulse.state.dim() == 2) {
            StokesVector s = jones_to_stokes(e.message.pulse.polarization().normalized(),
                                             e.message.pulse.intensity);
            rec["stokes"] = {s.s0, s.s1, s.s2, s.s3};
        } else {
            nlohmann::json amps = nlohmann::json::array();
            for (const cplx& c : e.message.pulse.state.a) amps.push_back({c.real(), c.imag()});
            rec["amplitudes"] = amps;
        }
        os << rec.dump() << "\n";
    }
    nlohmann::json tail;
    tail["mode"] = mode;
    tail["block_size"] = block_size;
    tail["message_length_bits"] = message_length_bits;
    tail["decoded_bits"] = decoded_bits;
    std::vector<std::string> names;
    names.reserve(outcomes.size());
    for (DetectorOutcome o : outcomes) names.emplace_back(detector_outcome_name(o));
    tail["outcomes"] = names;
    os << tail.dump() << "\n";
    return os.str();
}

}  // namespace tsqp
