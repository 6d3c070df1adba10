#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace tsqp {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic{0x33, 0x53, 0x51, 0x50};  // "3SQP"
inline constexpr std::uint8_t kWireVersion = 1;
/// 4 magic + 1 version + 1 msg_type + 8 session + 1 stage + 4 block +
/// 1 bit + 4 photons + 32 stokes.
inline constexpr std::size_t kFrameSize = 56;

enum class MsgType : std::uint8_t {
    Hello = 1,
    HelloAck = 2,
    Stage = 3,
    Done = 4,
    Error = 5,
};

/// Session parameter encoding used by HELLO/HELLO_ACK.
enum class WireMode : std::uint8_t { Rotation = 1 };

/// Error codes carried in the stage byte of ERROR frames.
enum class WireError : std::uint8_t {
    OutOfOrderStage = 1,
    BadHandshake = 2,
    Internal = 3,
};

/// One wire message. All frames are 56 bytes; fields outside a type's use
/// stay zero. Reuse by type:
///   STAGE:     stage 1-3, block_index, bit_index 0-7, photon_count, stokes
///   HELLO/ACK: stage = WireMode, block_index = message length in bits,
///              bit_index = block size, photon_count = photons per pulse
///   DONE:      block_index = decoded byte count
///   ERROR:     stage = WireError code
struct Frame {
    MsgType msg_type = MsgType::Stage;
    std::uint64_t session_id = 0;
    std::uint8_t stage = 0;
    std::uint32_t block_index = 0;
    std::uint8_t bit_index = 0;
    std::uint32_t photon_count = 0;
    std::array<double, 4> stokes{0.0, 0.0, 0.0, 0.0};

    bool operator==(const Frame&) const = default;
};

/// Serialize to exactly 56 big-endian bytes. Throws std::invalid_argument
/// when the frame violates its type's invariants (bad stage, bit index out
/// of range, non-finite or unphysical Stokes vector).
std::vector<std::uint8_t> encode_frame(const Frame& f);

enum class DecodeErrorCode {
    BadMagic,
    BadVersion,
    BadMsgType,
    Truncated,
    MalformedPayload,
};

const char* decode_error_name(DecodeErrorCode code);

struct DecodeError {
    DecodeErrorCode code;
    std::string detail;
};

/// Parse one frame from the byte buffer. Never throws and never reads more
/// than kFrameSize bytes; all malformed inputs map to a DecodeError.
std::variant<Frame, DecodeError> decode_frame(const std::uint8_t* data, std::size_t size);

inline std::variant<Frame, DecodeError> decode_frame(const std::vector<std::uint8_t>& bytes) {
    return decode_frame(bytes.data(), bytes.size());
}

}  // namespace tsqp
