#include "tsqp/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "tsqp/bench.hpp"
#include "tsqp/polarization.hpp"

namespace tsqp {

namespace {

class PipeBuffer {
public:
    void write(const std::uint8_t* data, std::size_t n) {
        std::lock_guard<std::mutex> lock(mu_);
        buf_.insert(buf_.end(), data, data + n);
        cv_.notify_all();
    }

    bool read_exact(std::uint8_t* data, std::size_t n) {
        std::unique_lock<std::mutex> lock(mu_);
        cv_.wait(lock, [&] { return buf_.size() >= n || closed_; });
        if (buf_.size() < n) return false;
        for (std::size_t i = 0; i < n; ++i) {
            data[i] = buf_.front();
            buf_.pop_front();
        }
        return true;
    }

    void close() {
        std::lock_guard<std::mutex> lock(mu_);
        closed_ = true;
        cv_.notify_all();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::uint8_t> buf_;
    bool closed_ = false;
};

class PipeStream : public ByteStream {
public:
    PipeStream(std::shared_ptr<PipeBuffer> out, std::shared_ptr<PipeBuffer> in)
        : out_(std::move(out)), in_(std::move(in)) {}
    ~PipeStream() override { out_->close(); }

    bool send_all(const std::uint8_t* data, std::size_t n) override {
        out_->write(data, n);
        return true;
    }
    bool recv_all(std::uint8_t* data, std::size_t n) override {
        return in_->read_exact(data, n);
    }
    void close_send() override { out_->close(); }

private:
    std::shared_ptr<PipeBuffer> out_;
    std::shared_ptr<PipeBuffer> in_;
};

}  // namespace

std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe_pair() {
    auto ab = std::make_shared<PipeBuffer>();
    auto ba = std::make_shared<PipeBuffer>();
    return {std::make_unique<PipeStream>(ab, ba), std::make_unique<PipeStream>(ba, ab)};
}

namespace {

/// Frames are tiny and strictly turn-based; Nagle would hold the second of
/// two consecutive sends until the peer ACKs, stalling every protocol turn.
void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

TcpStream::~TcpStream() {
    if (fd_ >= 0) ::close(fd_);
}

bool TcpStream::send_all(const std::uint8_t* data, std::size_t n) {
    std::size_t sent = 0;
    while (sent < n) {
        ssize_t r = ::send(fd_, data + sent, n - sent, MSG_NOSIGNAL);
        if (r <= 0) return false;
        sent += static_cast<std::size_t>(r);
    }
    return true;
}

bool TcpStream::recv_all(std::uint8_t* data, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        ssize_t r = ::recv(fd_, data + got, n - got, 0);
        if (r <= 0) return false;
        got += static_cast<std::size_t>(r);
    }
    return true;
}

void TcpStream::close_send() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_WR);
}

std::unique_ptr<TcpStream> TcpStream::connect(const std::string& host, std::uint16_t port,
                                              std::string* error) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string port_str = std::to_string(port);
    int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res);
    if (rc != 0) {
        if (error) *error = std::string("resolve failed: ") + gai_strerror(rc);
        return nullptr;
    }
    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) {
        if (error) *error = "connect failed: " + std::string(std::strerror(errno));
        return nullptr;
    }
    set_nodelay(fd);
    return std::make_unique<TcpStream>(fd);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (host.empty() || host == "0.0.0.0") {
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
    } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw std::runtime_error("bad listen address: " + host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int e = errno;
        ::close(fd_);
        throw std::runtime_error("bind: " + std::string(std::strerror(e)));
    }
    if (::listen(fd_, 8) != 0) {
        int e = errno;
        ::close(fd_);
        throw std::runtime_error("listen: " + std::string(std::strerror(e)));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len) == 0)
        port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<TcpStream> TcpListener::accept() {
    int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) return nullptr;
    set_nodelay(fd);
    return std::make_unique<TcpStream>(fd);
}

namespace {

bool send_frame(ByteStream& stream, const Frame& f, std::uint64_t& counter) {
    std::vector<std::uint8_t> bytes = encode_frame(f);
    if (!stream.send_all(bytes.data(), bytes.size())) return false;
    ++counter;
    return true;
}

/// Reads one frame. Returns false on EOF/transport error; a decode error
/// surfaces in *err.
bool recv_frame(ByteStream& stream, Frame& out, std::optional<DecodeError>& err,
                std::uint64_t& counter) {
    std::uint8_t buf[kFrameSize];
    if (!stream.recv_all(buf, kFrameSize)) return false;
    ++counter;
    auto decoded = decode_frame(buf, kFrameSize);
    if (const auto* e = std::get_if<DecodeError>(&decoded)) {
        err = *e;
        return true;
    }
    err.reset();
    out = std::get<Frame>(decoded);
    return true;
}

Frame stage_to_frame(std::uint64_t session_id, const StageMessage& m) {
    Frame f;
    f.msg_type = MsgType::Stage;
    f.session_id = session_id;
    f.stage = static_cast<std::uint8_t>(m.stage);
    f.block_index = m.block_index;
    f.bit_index = static_cast<std::uint8_t>(m.bit_index);
    f.photon_count = m.pulse.photon_count;
    StokesVector s = jones_to_stokes(m.pulse.polarization().normalized(), m.pulse.intensity);
    f.stokes = {s.s0, s.s1, s.s2, s.s3};
    return f;
}

StageMessage frame_to_stage(const Frame& f) {
    StageMessage m;
    m.stage = f.stage;
    m.block_index = f.block_index;
    m.bit_index = f.bit_index;
    StokesVector s{f.stokes[0], f.stokes[1], f.stokes[2], f.stokes[3]};
    m.pulse = PhotonPulse(StateVector::from_jones(stokes_to_jones(s)), f.photon_count,
                          s.s0);
    return m;
}

bool send_error(ByteStream& stream, std::uint64_t session_id, WireError code,
                std::uint64_t& counter) {
    Frame f;
    f.msg_type = MsgType::Error;
    f.session_id = session_id;
    f.stage = static_cast<std::uint8_t>(code);
    return send_frame(stream, f, counter);
}

std::uint64_t derive_session_id(std::uint64_t seed) {
    // One engine output, not the seed itself: transcripts must not hand out
    // the value the secret angles derive from.
    return Rng(seed).fork(0x53455353ULL).next_u64();
}

}  // namespace

NetSessionResult alice_endpoint(ByteStream& stream, const std::string& message,
                                std::uint64_t seed, std::size_t block_size,
                                std::uint32_t photons_per_pulse) {
    NetSessionResult result;
    if (block_size < 1 || block_size > 8) {
        result.error = "block size must be in 1..8 (wire field is 3 bits wide)";
        return result;
    }
    std::vector<int> bits = encode_message(message);
    result.session_id = derive_session_id(seed);
    result.transcript.message_length_bits = bits.size();
    result.transcript.block_size = block_size;
    result.transcript.seed = seed;
    result.transcript.mode = "rotation";

    SessionConfig key_source;
    key_source.seed = seed;

    Frame hello;
    hello.msg_type = MsgType::Hello;
    hello.session_id = result.session_id;
    hello.stage = static_cast<std::uint8_t>(WireMode::Rotation);
    hello.block_index = static_cast<std::uint32_t>(bits.size());
    hello.bit_index = static_cast<std::uint8_t>(block_size);
    hello.photon_count = photons_per_pulse;
    if (!send_frame(stream, hello, result.frames_sent)) {
        result.error = "connection lost sending HELLO";
        return result;
    }

    Frame reply;
    std::optional<DecodeError> derr;
    if (!recv_frame(stream, reply, derr, result.frames_received)) {
        result.error = "connection lost waiting for HELLO_ACK";
        return result;
    }
    if (derr) {
        result.error = std::string("bad HELLO_ACK: ") + decode_error_name(derr->code);
        return result;
    }
    if (reply.msg_type == MsgType::Error) {
        result.error = "receiver rejected handshake";
        return result;
    }
    if (reply.msg_type != MsgType::HelloAck || reply.session_id != result.session_id) {
        send_error(stream, result.session_id, WireError::BadHandshake, result.frames_sent);
        result.error = "handshake mismatch";
        return result;
    }

    for (std::size_t i = 0; i < bits.size(); ++i) {
        std::uint32_t block = static_cast<std::uint32_t>(i / block_size);
        int bit_index = static_cast<int>(i % block_size);
        BlockKey key = draw_block_key(key_source, block, 0);

        StageMessage m1 = alice_stage1(ProtocolBit{bits[i]}, key, bit_index,
                                       photons_per_pulse);
        if (!send_frame(stream, stage_to_frame(result.session_id, m1), result.frames_sent)) {
            result.error = "connection lost mid-bit (stage 1)";
            return result;
        }
        result.transcript.entries.push_back({Direction::AliceToBob, m1});

        Frame f2;
        if (!recv_frame(stream, f2, derr, result.frames_received)) {
            result.error = "connection lost mid-bit (awaiting stage 2)";
            return result;
        }
        if (derr) {
            result.error = std::string("bad frame: ") + decode_error_name(derr->code);
            return result;
        }
        if (f2.msg_type == MsgType::Error) {
            result.error = "receiver aborted session";
            return result;
        }
        if (f2.msg_type != MsgType::Stage || f2.stage != 2 || f2.block_index != block ||
            f2.bit_index != static_cast<std::uint8_t>(bit_index)) {
            send_error(stream, result.session_id, WireError::OutOfOrderStage,
                       result.frames_sent);
            result.error = "out-of-order stage from receiver";
            return result;
        }
        StageMessage m2 = frame_to_stage(f2);
        result.transcript.entries.push_back({Direction::BobToAlice, m2});

        StageMessage m3 = alice_stage3(m2, key);
        if (!send_frame(stream, stage_to_frame(result.session_id, m3), result.frames_sent)) {
            result.error = "connection lost mid-bit (stage 3)";
            return result;
        }
        result.transcript.entries.push_back({Direction::AliceToBob, m3});
    }

    Frame done;
    if (!recv_frame(stream, done, derr, result.frames_received)) {
        result.error = "connection lost waiting for DONE";
        return result;
    }
    if (derr || done.msg_type != MsgType::Done) {
        result.error = "expected DONE";
        return result;
    }
    result.ok = true;
    stream.close_send();
    return result;
}

NetSessionResult bob_endpoint(ByteStream& stream, std::uint64_t seed,
                              const DetectorModel& detector) {
    NetSessionResult result;
    SessionConfig key_source;
    key_source.seed = seed;
    Rng detector_rng = Rng(seed).fork(0x44455432ULL);

    Frame hello;
    std::optional<DecodeError> derr;
    if (!recv_frame(stream, hello, derr, result.frames_received)) {
        result.error = "connection lost waiting for HELLO";
        return result;
    }
    if (derr) {
        result.error = std::string("bad HELLO: ") + decode_error_name(derr->code);
        send_error(stream, 0, WireError::BadHandshake, result.frames_sent);
        return result;
    }
    if (hello.msg_type != MsgType::Hello) {
        send_error(stream, hello.session_id, WireError::BadHandshake, result.frames_sent);
        result.error = "expected HELLO";
        return result;
    }
    result.session_id = hello.session_id;
    const std::size_t total_bits = hello.block_index;
    const std::size_t block_size = hello.bit_index;
    result.transcript.message_length_bits = total_bits;
    result.transcript.block_size = block_size;
    result.transcript.seed = seed;
    result.transcript.mode = "rotation";

    Frame ack = hello;
    ack.msg_type = MsgType::HelloAck;
    if (!send_frame(stream, ack, result.frames_sent)) {
        result.error = "connection lost sending HELLO_ACK";
        return result;
    }

    std::vector<int> decoded_bits;
    for (std::size_t i = 0; i < total_bits; ++i) {
        std::uint32_t block = static_cast<std::uint32_t>(i / block_size);
        int bit_index = static_cast<int>(i % block_size);
        BlockKey key = draw_block_key(key_source, block, 0);

        Frame f1;
        if (!recv_frame(stream, f1, derr, result.frames_received)) {
            result.error = "connection lost mid-bit (awaiting stage 1)";
            return result;
        }
        if (derr) {
            send_error(stream, result.session_id, WireError::OutOfOrderStage,
                       result.frames_sent);
            result.error = std::string("bad frame: ") + decode_error_name(derr->code);
            return result;
        }
        if (f1.msg_type == MsgType::Error) {
            result.error = "sender aborted session";
            return result;
        }
        if (f1.msg_type != MsgType::Stage || f1.stage != 1 || f1.block_index != block ||
            f1.bit_index != static_cast<std::uint8_t>(bit_index)) {
            send_error(stream, result.session_id, WireError::OutOfOrderStage,
                       result.frames_sent);
            result.error = "out-of-order stage frame";
            return result;
        }
        StageMessage m1 = frame_to_stage(f1);
        result.transcript.entries.push_back({Direction::AliceToBob, m1});

        StageMessage m2 = bob_stage2(m1, key);
        if (!send_frame(stream, stage_to_frame(result.session_id, m2), result.frames_sent)) {
            result.error = "connection lost mid-bit (stage 2)";
            return result;
        }
        result.transcript.entries.push_back({Direction::BobToAlice, m2});

        Frame f3;
        if (!recv_frame(stream, f3, derr, result.frames_received)) {
            result.error = "connection lost mid-bit (awaiting stage 3)";
            return result;
        }
        if (derr) {
            send_error(stream, result.session_id, WireError::OutOfOrderStage,
                       result.frames_sent);
            result.error = std::string("bad frame: ") + decode_error_name(derr->code);
            return result;
        }
        if (f3.msg_type == MsgType::Error) {
            result.error = "sender aborted session";
            return result;
        }
        if (f3.msg_type != MsgType::Stage || f3.stage != 3 || f3.block_index != block ||
            f3.bit_index != static_cast<std::uint8_t>(bit_index)) {
            send_error(stream, result.session_id, WireError::OutOfOrderStage,
                       result.frames_sent);
            result.error = "out-of-order stage frame";
            return result;
        }
        StageMessage m3 = frame_to_stage(f3);
        result.transcript.entries.push_back({Direction::AliceToBob, m3});

        DetectorOutcome outcome = bob_stage4(m3, key, detector, detector_rng);
        result.transcript.outcomes.push_back(outcome);
        decoded_bits.push_back(outcome == DetectorOutcome::Erasure
                                   ? -1
                                   : (outcome == DetectorOutcome::Bit1 ? 1 : 0));
        result.transcript.decoded_bits.push_back(decoded_bits.back());
    }

    std::vector<int> clean;
    clean.reserve(decoded_bits.size());
    for (int b : decoded_bits) clean.push_back(b < 0 ? 0 : b);
    result.decoded = decode_message(clean);

    Frame done;
    done.msg_type = MsgType::Done;
    done.session_id = result.session_id;
    done.block_index = static_cast<std::uint32_t>(result.decoded.size());
    if (!send_frame(stream, done, result.frames_sent)) {
        result.error = "connection lost sending DONE";
        return result;
    }
    result.ok = true;
    stream.close_send();
    return result;
}

namespace {

struct EveState {
    std::mutex mu;
    Rng rng;
    std::size_t block_size = 8;
    std::uint64_t frames_modified = 0;
    std::map<std::uint64_t, int> guesses;  // global bit index -> guess
    // BeamSplit haul: (block, bit, stage) -> polarization
    std::map<std::tuple<std::uint32_t, std::uint8_t, std::uint8_t>, JonesVector> haul;
    std::uint32_t haul_k = 0;

    explicit EveState(std::uint64_t seed) : rng(seed) {}
};

/// Apply the strategy to one STAGE frame in flight. Returns true if the
/// frame bytes were rewritten.
bool apply_to_frame(Frame& f, const EveStrategy& strategy, EveState& state) {
    std::lock_guard<std::mutex> lock(state.mu);
    std::uint64_t global_bit =
        static_cast<std::uint64_t>(f.block_index) * state.block_size + f.bit_index;

    if (const auto* ir = std::get_if<InterceptResend>(&strategy)) {
        if (f.stage != ir->stage) return false;
        StageMessage m = frame_to_stage(f);
        auto [outcome, collapsed] = intercept_resend(m.pulse, ir->basis_deg, state.rng);
        state.guesses[global_bit] = outcome;
        m.pulse = collapsed;
        Frame rewritten = stage_to_frame(f.session_id, m);
        rewritten.stage = f.stage;
        f = rewritten;
        ++state.frames_modified;
        return true;
    }
    if (const auto* bs = std::get_if<BeamSplit>(&strategy)) {
        if (std::find(bs->stages.begin(), bs->stages.end(), int{f.stage}) ==
            bs->stages.end())
            return false;
        if (f.photon_count <= bs->k) return false;  // nothing safe to take
        StageMessage m = frame_to_stage(f);
        JonesVector pol = m.pulse.polarization().normalized();
        state.haul_k = bs->k;
        if (bs->stages.size() == 1) {
            PhotonPulse eve_pulse(StateVector::from_jones(pol), bs->k);
            std::uint32_t hits = measure_photons(eve_pulse, 0.0, bs->k, state.rng);
            int guess;
            if (2 * hits == bs->k)
                guess = static_cast<int>(state.rng.below(2));
            else
                guess = (2 * hits > bs->k) ? 0 : 1;
            state.guesses[global_bit] = guess;
        } else {
            state.haul[{f.block_index, f.bit_index, f.stage}] = pol;
        }
        f.photon_count -= bs->k;
        ++state.frames_modified;
        return true;
    }
    if (const auto* up = std::get_if<UnitaryProbe>(&strategy)) {
        if (f.stage != up->stage) return false;
        StageMessage m = frame_to_stage(f);
        StateVector joint(4);
        JonesVector sys = m.pulse.polarization().normalized();
        joint.a[0] = sys.c0;
        joint.a[2] = sys.c1;
        joint = up->probe.apply(joint);
        double p1 = std::norm(joint.a[1]) + std::norm(joint.a[3]);
        int outcome = state.rng.uniform() < 1.0 - p1 ? 0 : 1;
        StateVector collapsed(2);
        collapsed.a[0] = joint.a[static_cast<std::size_t>(outcome)];
        collapsed.a[1] = joint.a[2 + static_cast<std::size_t>(outcome)];
        state.guesses[global_bit] = outcome;
        m.pulse.state = collapsed.normalized();
        Frame rewritten = stage_to_frame(f.session_id, m);
        rewritten.stage = f.stage;
        f = rewritten;
        ++state.frames_modified;
        return true;
    }
    return false;
}

void pump(ByteStream& in, ByteStream& out, const EveStrategy& strategy, EveState& state,
          std::uint64_t& forwarded) {
    std::uint8_t buf[kFrameSize];
    while (in.recv_all(buf, kFrameSize)) {
        auto decoded = decode_frame(buf, kFrameSize);
        if (Frame* f = std::get_if<Frame>(&decoded)) {
            if (f->msg_type == MsgType::Hello) {
                std::lock_guard<std::mutex> lock(state.mu);
                state.block_size = std::max<std::size_t>(1, f->bit_index);
            }
            if (f->msg_type == MsgType::Stage) {
                bool rewritten = false;
                std::vector<std::uint8_t> bytes;
                try {
                    if (apply_to_frame(*f, strategy, state)) {
                        bytes = encode_frame(*f);
                        rewritten = true;
                    }
                } catch (const std::exception&) {
                    rewritten = false;  // pass the original through untouched
                }
                if (rewritten) {
                    if (!out.send_all(bytes.data(), bytes.size())) break;
                    ++forwarded;
                    continue;
                }
            }
        }
        // Unmodified (or undecodable) frames pass through verbatim.
        if (!out.send_all(buf, kFrameSize)) break;
        ++forwarded;
    }
    out.close_send();
}

}  // namespace

ProxyResult eve_proxy(ByteStream& alice_side, ByteStream& bob_side,
                      const EveStrategy& strategy, std::uint64_t seed,
                      const std::string* expected_message) {
    ProxyResult result;
    EveState state(seed);
    std::uint64_t fwd_ab = 0;
    std::uint64_t fwd_ba = 0;

    std::thread ab([&] { pump(alice_side, bob_side, strategy, state, fwd_ab); });
    std::thread ba([&] { pump(bob_side, alice_side, strategy, state, fwd_ba); });
    ab.join();
    ba.join();

    result.frames_forwarded = fwd_ab + fwd_ba;
    result.frames_modified = state.frames_modified;

    // Multi-stage beam-split hauls are scored per block once the session is
    // over; measurement streams derive from (seed, block) only.
    if (const auto* bs = std::get_if<BeamSplit>(&strategy); bs && bs->stages.size() > 1) {
        std::map<std::uint32_t, SiphonedBlock> blocks;
        for (const auto& [key, pol] : state.haul) {
            auto [block, bit, stage] = key;
            SiphonedBlock& sb = blocks[block];
            auto& stage_photons = sb.photons[static_cast<std::size_t>(stage - 1)];
            if (stage_photons.size() <= bit) stage_photons.resize(bit + 1U);
            stage_photons[bit].assign(state.haul_k, pol);
        }
        for (auto& [block, sb] : blocks) {
            Rng block_rng = Rng(seed).fork(0xe5700000ULL + block);
            BlockEstimate est = multi_stage_estimate(sb, block_rng);
            for (std::size_t i = 0; i < est.bit_guesses.size(); ++i)
                state.guesses[static_cast<std::uint64_t>(block) * state.block_size + i] =
                    est.bit_guesses[i];
        }
    }

    if (!state.guesses.empty()) {
        std::uint64_t max_bit = state.guesses.rbegin()->first;
        result.eve_guesses.assign(max_bit + 1, -1);
        for (const auto& [bit, guess] : state.guesses)
            result.eve_guesses[bit] = guess;
    }
    Rng coin = Rng(seed).fork(0xc011f1e5ULL);
    for (int& g : result.eve_guesses)
        if (g < 0) g = static_cast<int>(coin.below(2));

    if (expected_message) {
        std::vector<int> truth = encode_message(*expected_message);
        std::uint64_t n = std::min<std::uint64_t>(truth.size(), result.eve_guesses.size());
        std::uint64_t correct = 0;
        std::uint64_t joint[2][2] = {{0, 0}, {0, 0}};
        for (std::uint64_t i = 0; i < n; ++i) {
            int g = result.eve_guesses[i];
            if (g == truth[i]) ++correct;
            joint[truth[i]][g] += 1;
        }
        result.report.strategy = strategy_name(strategy);
        result.report.trials = n;
        result.report.seed = seed;
        result.report.eve_bit_accuracy =
            n > 0 ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
        result.report.eve_accuracy_ci = wilson_interval_95(correct, std::max<std::uint64_t>(n, 1));
        result.report.mutual_information_bits = mutual_information_bits(joint);
        result.report_valid = n > 0;
    }
    return result;
}

}  // namespace tsqp
