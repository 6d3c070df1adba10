#include <doctest.h>

#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "tsqp/bench.hpp"
#include "tsqp/net.hpp"

using namespace tsqp;

namespace {

bool send_raw(ByteStream& s, const Frame& f) {
    auto bytes = encode_frame(f);
    return s.send_all(bytes.data(), bytes.size());
}

bool recv_raw(ByteStream& s, Frame& out) {
    std::vector<std::uint8_t> buf(kFrameSize);
    if (!s.recv_all(buf.data(), buf.size())) return false;
    auto decoded = decode_frame(buf);
    if (!std::holds_alternative<Frame>(decoded)) return false;
    out = std::get<Frame>(decoded);
    return true;
}

}  // namespace

TEST_SUITE("net") {

TEST_CASE("pipe loopback session decodes the message") {
    auto [alice_side, bob_side] = make_pipe_pair();
    NetSessionResult alice, bob;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_side, 99); });
    alice = alice_endpoint(*alice_side, "hello", 99);
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    CHECK(bob.decoded == "hello");
    CHECK(alice.frames_sent == 81);      // HELLO + 2 stage frames per bit
    CHECK(alice.frames_received == 42);  // ACK + stage-2 per bit + DONE
    CHECK(bob.frames_sent == 42);
    CHECK(bob.frames_received == 81);
    CHECK(alice.frames_sent + bob.frames_sent == 123);

    CHECK(alice.session_id == bob.session_id);
    CHECK(alice.session_id != 0);
    CHECK(alice.session_id != 99);  // derived through the generator, not the seed

    // Three transcript entries per bit on both sides.
    CHECK(alice.transcript.entries.size() == 3 * 40);
    CHECK(bob.transcript.entries.size() == 3 * 40);
    CHECK(bob.transcript.decoded_bits.size() == 40);
    CHECK(alice.transcript.entries[0].message.stage == 1);
    CHECK(alice.transcript.entries[1].message.stage == 2);
    CHECK(alice.transcript.entries[2].message.stage == 3);
}

TEST_CASE("endpoints with unrelated seeds still agree") {
    auto [alice_side, bob_side] = make_pipe_pair();
    NetSessionResult bob;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_side, 7777); });
    NetSessionResult alice = alice_endpoint(*alice_side, "seeds differ", 41);
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    CHECK(bob.decoded == "seeds differ");
}

TEST_CASE("block size and photon count are honoured") {
    auto [alice_side, bob_side] = make_pipe_pair();
    NetSessionResult bob;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_side, 3); });
    NetSessionResult alice = alice_endpoint(*alice_side, "Q", 3, 4, 5);
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    CHECK(bob.decoded == "Q");
    for (const auto& e : bob.transcript.entries) CHECK(e.message.pulse.photon_count == 5);
    CHECK(bob.transcript.block_size == 4);
}

TEST_CASE("receiver rejects a session that skips stage 1") {
    auto [probe_side, bob_side] = make_pipe_pair();
    NetSessionResult bob;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_side, 11); });

    Frame hello;
    hello.msg_type = MsgType::Hello;
    hello.session_id = 0xDEADBEEF;
    hello.stage = static_cast<std::uint8_t>(WireMode::Rotation);
    hello.block_index = 8;  // one byte
    hello.bit_index = 8;
    hello.photon_count = 1;
    REQUIRE(send_raw(*probe_side, hello));

    Frame ack;
    REQUIRE(recv_raw(*probe_side, ack));
    CHECK(ack.msg_type == MsgType::HelloAck);
    CHECK(ack.session_id == hello.session_id);

    Frame rogue;
    rogue.msg_type = MsgType::Stage;
    rogue.session_id = hello.session_id;
    rogue.stage = 3;  // out of order: stage 1 never happened
    rogue.block_index = 0;
    rogue.bit_index = 0;
    rogue.photon_count = 1;
    rogue.stokes = {1.0, 1.0, 0.0, 0.0};
    REQUIRE(send_raw(*probe_side, rogue));

    Frame reply;
    REQUIRE(recv_raw(*probe_side, reply));
    CHECK(reply.msg_type == MsgType::Error);
    CHECK(reply.stage == static_cast<std::uint8_t>(WireError::OutOfOrderStage));

    probe_side->close_send();
    bob_thread.join();
    CHECK_FALSE(bob.ok);
}

TEST_CASE("receiver rejects a stream that never says hello") {
    auto [probe_side, bob_side] = make_pipe_pair();
    NetSessionResult bob;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_side, 11); });

    Frame rogue;
    rogue.msg_type = MsgType::Stage;
    rogue.session_id = 5;
    rogue.stage = 1;
    rogue.photon_count = 1;
    rogue.stokes = {1.0, 1.0, 0.0, 0.0};
    REQUIRE(send_raw(*probe_side, rogue));

    Frame reply;
    REQUIRE(recv_raw(*probe_side, reply));
    CHECK(reply.msg_type == MsgType::Error);
    CHECK(reply.stage == static_cast<std::uint8_t>(WireError::BadHandshake));

    probe_side->close_send();
    bob_thread.join();
    CHECK_FALSE(bob.ok);
}

TEST_CASE("tcp loopback session") {
    TcpListener listener("127.0.0.1", 0);
    REQUIRE(listener.port() != 0);

    NetSessionResult bob;
    std::thread bob_thread([&] {
        auto conn = listener.accept();
        REQUIRE(conn != nullptr);
        bob = bob_endpoint(*conn, 2025);
    });

    std::string error;
    auto stream = TcpStream::connect("127.0.0.1", listener.port(), &error);
    REQUIRE_MESSAGE(stream != nullptr, error);
    NetSessionResult alice = alice_endpoint(*stream, "quantum", 2025);
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    CHECK(bob.decoded == "quantum");
}

TEST_CASE("tcp connect to a dead port fails with a diagnostic") {
    std::uint16_t dead_port;
    {
        TcpListener listener("127.0.0.1", 0);
        dead_port = listener.port();
    }
    std::string error;
    auto stream = TcpStream::connect("127.0.0.1", dead_port, &error);
    CHECK(stream == nullptr);
    CHECK_FALSE(error.empty());
}

TEST_CASE("passive proxy is transparent") {
    auto [alice_end, proxy_alice] = make_pipe_pair();
    auto [proxy_bob, bob_end] = make_pipe_pair();

    NetSessionResult alice, bob;
    ProxyResult proxy;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_end, 55); });
    std::thread proxy_thread(
        [&] { proxy = eve_proxy(*proxy_alice, *proxy_bob, NoStrategy{}, 1); });
    alice = alice_endpoint(*alice_end, "hello", 55);
    proxy_thread.join();
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    CHECK(bob.decoded == "hello");
    CHECK(proxy.frames_forwarded == 123);
    CHECK(proxy.frames_modified == 0);
    CHECK_FALSE(proxy.report_valid);
}

TEST_CASE("intercepting proxy disturbs a quarter of the bits") {
    // 1250 bytes = 10000 bits: enough for a tight rate check, still fast.
    std::string message(1250, '\0');
    Rng msg_rng(8);
    for (auto& c : message) c = static_cast<char>(msg_rng.below(256));

    auto [alice_end, proxy_alice] = make_pipe_pair();
    auto [proxy_bob, bob_end] = make_pipe_pair();

    NetSessionResult alice, bob;
    ProxyResult proxy;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_end, 90); });
    std::thread proxy_thread([&] {
        proxy = eve_proxy(*proxy_alice, *proxy_bob, InterceptResend{0.0, 1}, 17, &message);
    });
    alice = alice_endpoint(*alice_end, message, 90);
    proxy_thread.join();
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    REQUIRE(bob.decoded.size() == message.size());

    const std::size_t nbits = 8 * message.size();
    CHECK(proxy.frames_modified == nbits);

    std::vector<int> sent = encode_message(message);
    std::vector<int> got = encode_message(bob.decoded);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < nbits; ++i) wrong += sent[i] != got[i];
    double bob_error = double(wrong) / double(nbits);
    // Mean 1/4, sigma ~ 0.0043 over 10000 bits; 4 sigma gate.
    CHECK(bob_error > 0.25 - 0.018);
    CHECK(bob_error < 0.25 + 0.018);

    REQUIRE(proxy.report_valid);
    CHECK(proxy.report.trials == nbits);
    CHECK(proxy.report.strategy == "intercept_resend:stage=1,basis=0");
    // The tapped states carry no bit information without the keys.
    CHECK(proxy.report.eve_bit_accuracy > 0.5 - 0.02);
    CHECK(proxy.report.eve_bit_accuracy < 0.5 + 0.02);
    CHECK(proxy.report.mutual_information_bits < 0.005);
}

TEST_CASE("beam-splitting proxy skims photons without disturbing the data") {
    auto [alice_end, proxy_alice] = make_pipe_pair();
    auto [proxy_bob, bob_end] = make_pipe_pair();

    NetSessionResult alice, bob;
    ProxyResult proxy;
    std::thread bob_thread([&] { bob = bob_endpoint(*bob_end, 61); });
    std::thread proxy_thread([&] {
        proxy = eve_proxy(*proxy_alice, *proxy_bob, BeamSplit{1, {1}}, 13);
    });
    alice = alice_endpoint(*alice_end, "hello", 61, 8, 3);
    proxy_thread.join();
    bob_thread.join();

    REQUIRE(alice.ok);
    REQUIRE(bob.ok);
    CHECK(bob.decoded == "hello");  // passive tap: zero disturbance
    CHECK(proxy.frames_modified == 40);
    CHECK(proxy.eve_guesses.size() == 40);

    // The tap happens at stage 1, so every later leg carries one photon
    // fewer; Alice's own stage-1 send is the only full pulse.
    for (const auto& e : bob.transcript.entries)
        CHECK(e.message.pulse.photon_count == 2);
    CHECK(alice.transcript.entries[0].message.stage == 1);
    CHECK(alice.transcript.entries[0].message.pulse.photon_count == 3);
    CHECK(alice.transcript.entries[1].message.pulse.photon_count == 2);
}

TEST_CASE("proxy runs are reproducible") {
    std::string message = "determinism";
    auto run = [&](std::uint64_t proxy_seed) {
        auto [alice_end, proxy_alice] = make_pipe_pair();
        auto [proxy_bob, bob_end] = make_pipe_pair();
        NetSessionResult bob;
        ProxyResult proxy;
        std::thread bob_thread([&] { bob = bob_endpoint(*bob_end, 4); });
        std::thread proxy_thread([&] {
            proxy = eve_proxy(*proxy_alice, *proxy_bob, InterceptResend{0.0, 2},
                              proxy_seed, &message);
        });
        NetSessionResult alice = alice_endpoint(*alice_end, message, 4);
        proxy_thread.join();
        bob_thread.join();
        REQUIRE(alice.ok);
        REQUIRE(bob.ok);
        return proxy;
    };

    ProxyResult a = run(300);
    ProxyResult b = run(300);
    ProxyResult c = run(301);
    CHECK(a.eve_guesses == b.eve_guesses);
    CHECK(a.report.eve_bit_accuracy == b.report.eve_bit_accuracy);
    CHECK(a.eve_guesses.size() == c.eve_guesses.size());
    CHECK(a.eve_guesses != c.eve_guesses);  // different eve entropy
}

}  // TEST_SUITE
