#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsqp/adversary.hpp"
#include "tsqp/frame.hpp"
#include "tsqp/protocol.hpp"

namespace tsqp {

/// Reliable ordered byte stream; the transport contract both endpoints and
/// the proxy are written against.
class ByteStream {
public:
    virtual ~ByteStream() = default;
    /// Write all n bytes; false on a broken connection.
    virtual bool send_all(const std::uint8_t* data, std::size_t n) = 0;
    /// Read exactly n bytes; false on EOF or error.
    virtual bool recv_all(std::uint8_t* data, std::size_t n) = 0;
    /// Signal end of writes (receiver sees EOF after buffered data).
    virtual void close_send() = 0;
};

/// In-memory stream pair for tests: bytes written to one end are read from
/// the other. Thread-safe.
std::pair<std::unique_ptr<ByteStream>, std::unique_ptr<ByteStream>> make_pipe_pair();

class TcpStream : public ByteStream {
public:
    explicit TcpStream(int fd) : fd_(fd) {}
    ~TcpStream() override;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    bool send_all(const std::uint8_t* data, std::size_t n) override;
    bool recv_all(std::uint8_t* data, std::size_t n) override;
    void close_send() override;

    /// Connect to host:port; null on failure (diagnostic in *error).
    static std::unique_ptr<TcpStream> connect(const std::string& host, std::uint16_t port,
                                              std::string* error = nullptr);

private:
    int fd_ = -1;
};

class TcpListener {
public:
    /// Bind and listen; port 0 picks an ephemeral port. Throws
    /// std::runtime_error on failure.
    TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    /// Block until one connection arrives; null on listener failure.
    std::unique_ptr<TcpStream> accept();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

struct NetSessionResult {
    bool ok = false;
    std::string error;  // diagnostic when !ok
    std::string decoded;
    SessionTranscript transcript;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_received = 0;
    std::uint64_t session_id = 0;
};

/// Drive the sender side of one session: handshake, three STAGE frames per
/// bit, final DONE from the receiver. The seed feeds Alice's secret angles;
/// no key material is ever written to the stream.
NetSessionResult alice_endpoint(ByteStream& stream, const std::string& message,
                                std::uint64_t seed, std::size_t block_size = 8,
                                std::uint32_t photons_per_pulse = 1);

/// Drive the receiver side of one session. The seed feeds Bob's secret
/// angles and his detector stream. Replies ERROR and aborts on any
/// out-of-order stage.
NetSessionResult bob_endpoint(ByteStream& stream, std::uint64_t seed,
                              const DetectorModel& detector = DetectorModel::ideal());

struct ProxyResult {
    std::uint64_t frames_forwarded = 0;
    std::uint64_t frames_modified = 0;
    /// Eve's per-bit guesses in transmission order (global bit index).
    std::vector<int> eve_guesses;
    /// Filled when the caller supplied the plaintext for scoring.
    bool report_valid = false;
    AttackReport report;
};

/// Transparent man-in-the-middle: forwards every frame between the two
/// streams (one in-flight frame per direction), applying the strategy to
/// STAGE frames. Malformed frames pass through verbatim. If
/// expected_message is given, Eve's guesses are scored against it.
ProxyResult eve_proxy(ByteStream& alice_side, ByteStream& bob_side,
                      const EveStrategy& strategy, std::uint64_t seed,
                      const std::string* expected_message = nullptr);

}  // namespace tsqp
