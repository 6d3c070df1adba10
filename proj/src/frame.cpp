#include "tsqp/frame.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

namespace tsqp {

namespace {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return v;
}

double get_f64(const std::uint8_t* p) { return std::bit_cast<double>(get_u64(p)); }

bool stokes_physical(const std::array<double, 4>& s) {
    for (double v : s)
        if (!std::isfinite(v)) return false;
    if (s[0] < 0.0) return false;
    double pol = std::sqrt(s[1] * s[1] + s[2] * s[2] + s[3] * s[3]);
    return pol <= s[0] * (1.0 + 1e-6) + 1e-9;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
    switch (f.msg_type) {
        case MsgType::Stage:
            if (f.stage < 1 || f.stage > 3)
                throw std::invalid_argument("STAGE frame needs stage in 1..3");
            if (f.bit_index > 7)
                throw std::invalid_argument("STAGE frame needs bit_index in 0..7");
            if (f.photon_count < 1)
                throw std::invalid_argument("STAGE frame needs photon_count >= 1");
            if (!stokes_physical(f.stokes))
                throw std::invalid_argument("STAGE frame needs a physical Stokes vector");
            break;
        case MsgType::Hello:
        case MsgType::HelloAck:
            if (f.stage != static_cast<std::uint8_t>(WireMode::Rotation))
                throw std::invalid_argument("unsupported session mode");
            if (f.bit_index < 1) throw std::invalid_argument("block size must be >= 1");
            if (f.photon_count < 1)
                throw std::invalid_argument("photons per pulse must be >= 1");
            break;
        case MsgType::Done:
            break;
        case MsgType::Error:
            if (f.stage == 0) throw std::invalid_argument("ERROR frame needs a code");
            break;
        default:
            throw std::invalid_argument("unknown msg_type");
    }

    std::vector<std::uint8_t> out;
    out.reserve(kFrameSize);
    for (std::uint8_t b : kFrameMagic) put_u8(out, b);
    put_u8(out, kWireVersion);
    put_u8(out, static_cast<std::uint8_t>(f.msg_type));
    put_u64(out, f.session_id);
    put_u8(out, f.stage);
    put_u32(out, f.block_index);
    put_u8(out, f.bit_index);
    put_u32(out, f.photon_count);
    for (double v : f.stokes) put_f64(out, v);
    return out;
}

const char* decode_error_name(DecodeErrorCode code) {
    switch (code) {
        case DecodeErrorCode::BadMagic: return "bad_magic";
        case DecodeErrorCode::BadVersion: return "bad_version";
        case DecodeErrorCode::BadMsgType: return "bad_msg_type";
        case DecodeErrorCode::Truncated: return "truncated";
        case DecodeErrorCode::MalformedPayload: return "malformed_payload";
    }
    return "?";
}

std::variant<Frame, DecodeError> decode_frame(const std::uint8_t* data, std::size_t size) {
    auto fail = [](DecodeErrorCode code, const std::string& detail) {
        return std::variant<Frame, DecodeError>(DecodeError{code, detail});
    };
    if (size < 6) return fail(DecodeErrorCode::Truncated, "need at least 6 header bytes");
    if (std::memcmp(data, kFrameMagic.data(), 4) != 0)
        return fail(DecodeErrorCode::BadMagic, "magic mismatch");
    if (data[4] != kWireVersion) {
        std::ostringstream os;
        os << "unsupported version " << int{data[4]};
        return fail(DecodeErrorCode::BadVersion, os.str());
    }
    if (data[5] < 1 || data[5] > 5) {
        std::ostringstream os;
        os << "unknown msg_type " << int{data[5]};
        return fail(DecodeErrorCode::BadMsgType, os.str());
    }
    if (size < kFrameSize) {
        std::ostringstream os;
        os << "frame needs " << kFrameSize << " bytes, got " << size;
        return fail(DecodeErrorCode::Truncated, os.str());
    }

    Frame f;
    f.msg_type = static_cast<MsgType>(data[5]);
    f.session_id = get_u64(data + 6);
    f.stage = data[14];
    f.block_index = get_u32(data + 15);
    f.bit_index = data[19];
    f.photon_count = get_u32(data + 20);
    for (std::size_t i = 0; i < 4; ++i) f.stokes[i] = get_f64(data + 24 + 8 * i);

    switch (f.msg_type) {
        case MsgType::Stage:
            if (f.stage < 1 || f.stage > 3)
                return fail(DecodeErrorCode::MalformedPayload, "stage out of range");
            if (f.bit_index > 7)
                return fail(DecodeErrorCode::MalformedPayload, "bit_index out of range");
            if (f.photon_count < 1)
                return fail(DecodeErrorCode::MalformedPayload, "photon_count must be >= 1");
            for (double v : f.stokes)
                if (!std::isfinite(v))
                    return fail(DecodeErrorCode::MalformedPayload,
                                "non-finite Stokes component");
            if (!stokes_physical(f.stokes))
                return fail(DecodeErrorCode::MalformedPayload, "unphysical Stokes vector");
            break;
        case MsgType::Hello:
        case MsgType::HelloAck:
            if (f.stage != static_cast<std::uint8_t>(WireMode::Rotation))
                return fail(DecodeErrorCode::MalformedPayload, "unsupported session mode");
            if (f.bit_index < 1)
                return fail(DecodeErrorCode::MalformedPayload, "block size must be >= 1");
            if (f.photon_count < 1)
                return fail(DecodeErrorCode::MalformedPayload,
                            "photons per pulse must be >= 1");
            break;
        case MsgType::Error:
            if (f.stage == 0)
                return fail(DecodeErrorCode::MalformedPayload, "ERROR frame needs a code");
            break;
        case MsgType::Done:
            break;
    }
    return f;
}

}  // namespace tsqp
