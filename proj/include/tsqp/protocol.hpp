#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsqp/detector.hpp"
#include "tsqp/rng.hpp"
#include "tsqp/transforms.hpp"

namespace tsqp {

/// One plaintext bit with its fixed polarization encoding: 0 at 0 degrees,
/// 1 at 90 degrees.
struct ProtocolBit {
    int value = 0;

    double base_angle_deg() const { return value ? 90.0 : 0.0; }
};

/// Secret per-block state. In rotation mode theta_a/theta_b drive the
/// polarization rotations; in abstract mode alice_index/bob_index select
/// family elements. Keys never appear in any transmitted message.
struct BlockKey {
    double theta_a_deg = 0.0;
    double theta_b_deg = 0.0;
    std::uint32_t block_index = 0;
    std::size_t alice_index = 0;
    std::size_t bob_index = 0;
};

/// Light pulse in flight: photon_count identical photons sharing one
/// polarization state. The state is 2-dimensional for rotation/bench runs
/// (a Jones vector) and may be 4-dimensional for the two-qubit abstract
/// families, which exist only in memory.
struct PhotonPulse {
    StateVector state;
    std::uint32_t photon_count = 1;
    double intensity = 1.0;

    PhotonPulse() : state{cplx{1.0, 0.0}, cplx{0.0, 0.0}} {}
    PhotonPulse(StateVector s, std::uint32_t n, double i = 1.0)
        : state(std::move(s)), photon_count(n), intensity(i) {}

    JonesVector polarization() const { return state.to_jones(); }
};

/// One of the three transmissions of a bit. Carries no key material.
struct StageMessage {
    int stage = 1;  // 1, 2 or 3
    std::uint32_t block_index = 0;
    int bit_index = 0;  // position within the block
    PhotonPulse pulse;
};

enum class ProtocolErrorCode { OutOfOrderStage, BlockMismatch, BadConfig };

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(ProtocolErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ProtocolErrorCode code() const { return code_; }

private:
    ProtocolErrorCode code_;
};

enum class Direction { AliceToBob, BobToAlice };

struct TranscriptEntry {
    Direction direction;
    StageMessage message;
};

/// Evidence object for a full session: every transmission in order, plus
/// Bob's outcomes. Decoded bits use -1 for erasures.
struct SessionTranscript {
    std::vector<TranscriptEntry> entries;
    std::vector<DetectorOutcome> outcomes;
    std::vector<int> decoded_bits;
    std::size_t message_length_bits = 0;  // before padding
    std::size_t block_size = 8;
    std::uint64_t seed = 0;
    std::string mode;

    /// One structured-text record per stage message, line-delimited.
    std::string to_jsonl() const;
};

// Rotation-mode stage operations. Each validates stage ordering and block
// identity and throws ProtocolError on violation.

/// Step 1: encode the bit at its base angle and rotate by theta_a.
StageMessage alice_stage1(ProtocolBit bit, const BlockKey& key, int bit_index = 0,
                          std::uint32_t photon_count = 1);
/// Step 2: rotate the received pulse by theta_b.
StageMessage bob_stage2(const StageMessage& msg, const BlockKey& key);
/// Step 3: undo Alice's rotation (-theta_a).
StageMessage alice_stage3(const StageMessage& msg, const BlockKey& key);
/// Step 4: undo Bob's rotation (-theta_b), then measure horizontal/vertical
/// through the detector model. Erasures surface as an outcome, not a bit.
DetectorOutcome bob_stage4(const StageMessage& msg, const BlockKey& key,
                           const DetectorModel& detector, Rng& rng);

enum class ProtocolMode { Rotation, Abstract };

std::string protocol_mode_name(ProtocolMode mode);

struct SessionConfig {
    ProtocolMode mode = ProtocolMode::Rotation;
    FamilyKind family = FamilyKind::Rotation;  // Abstract mode only
    std::size_t block_size = 8;
    std::uint32_t photons_per_pulse = 1;
    DetectorModel detector = DetectorModel::ideal();
    /// Extra fixed rotation applied at each retransmission turnaround
    /// (after stages 2 and 3). Models an imperfect mirror; 0 keeps the
    /// mirrors polarization-neutral.
    double turnaround_rotation_deg = 0.0;
    std::uint64_t seed = 0;
};

/// Draw the secret key for one block from the session seed. Deterministic
/// in (seed, block_index); angles uniform on [0, 360).
BlockKey draw_block_key(const SessionConfig& config, std::uint32_t block_index,
                        std::size_t family_size);

/// Run a full in-memory session over the given bits: fresh key per block,
/// three transmissions per bit (abstract 4-dim families carry two bits per
/// transmission), Bob's outcomes appended. Deterministic given the seed.
SessionTranscript run_session(const std::vector<int>& bits, const SessionConfig& config);

}  // namespace tsqp
