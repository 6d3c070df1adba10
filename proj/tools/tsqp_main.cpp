// Operator entry point: bench simulations, networked sessions, attack
// sweeps and the invariant verification suites.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tsqp/adversary.hpp"
#include "tsqp/bench.hpp"
#include "tsqp/net.hpp"
#include "tsqp/polarization.hpp"
#include "tsqp/protocol.hpp"
#include "tsqp/transforms.hpp"
#include "tsqp/version.hpp"

namespace {

using nlohmann::json;
using namespace tsqp;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr int kExitTransport = 3;

std::uint64_t draw_entropy_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

/// Metadata block embedded in every output document.
json meta_json(const std::string& subcommand, std::uint64_t seed, json config) {
    return json{{"tool", kToolName},
                {"version", kToolVersion},
                {"subcommand", subcommand},
                {"seed", seed},
                {"config", std::move(config)}};
}

std::string meta_human(const std::string& subcommand, std::uint64_t seed) {
    std::ostringstream os;
    os << kToolName << " " << kToolVersion << " " << subcommand << "\n"
       << "seed: " << seed << "\n";
    return os.str();
}

/// Serializes with invalid UTF-8 replaced by U+FFFD: a garbled session can
/// hand back arbitrary bytes and the document must stay parseable.
std::string json_dump(const json& doc) {
    return doc.dump(2, ' ', false, json::error_handler_t::replace);
}

std::string to_hex(const std::string& bytes) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out += digits[c >> 4];
        out += digits[c & 0xF];
    }
    return out;
}

/// Writes the rendered document to `path` or stdout.
int emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << "\n";
        return kExitOk;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return kExitDomain;
    }
    out << text;
    return kExitOk;
}

bool write_file(const std::string& path, const std::string& text, std::string& err) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        err = "cannot write " + path;
        return false;
    }
    out << text;
    return true;
}

/// Loads a flat key=value file into `cmd`'s options. CLI11's built-in config
/// support only runs on the top-level app, so subcommands apply their file
/// after parsing; options given explicitly on the command line win.
void apply_flat_config(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not readable: " + path);
    auto trim = [](const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        std::size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#' || entry[0] == ';') continue;
        std::string where = path + ":" + std::to_string(lineno);
        std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(where + ": expected key=value");
        std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw std::invalid_argument(where + ": unknown option '" + key + "'");
        if (opt->count() > 0) continue;  // explicit flags win
        opt->add_result(value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// strategy spec parsing: name[:k=v,k=v,...]

std::map<std::string, std::string> parse_spec_fields(const std::string& body) {
    std::map<std::string, std::string> fields;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw std::invalid_argument("bad strategy field '" + item +
                                        "' (expected key=value)");
        fields[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return fields;
}

double spec_double(std::map<std::string, std::string>& f, const std::string& key,
                   double fallback) {
    auto it = f.find(key);
    if (it == f.end()) return fallback;
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size())
        throw std::invalid_argument("bad numeric value for " + key + ": " + it->second);
    f.erase(it);
    return v;
}

long spec_long(std::map<std::string, std::string>& f, const std::string& key,
               long fallback) {
    auto it = f.find(key);
    if (it == f.end()) return fallback;
    std::size_t used = 0;
    long v = std::stol(it->second, &used);
    if (used != it->second.size())
        throw std::invalid_argument("bad integer value for " + key + ": " + it->second);
    f.erase(it);
    return v;
}

int checked_stage(long stage) {
    if (stage < 1 || stage > 3)
        throw std::invalid_argument("stage must be 1, 2 or 3");
    return static_cast<int>(stage);
}

/// Grammar: none | intercept[:stage=N,basis=D] | beamsplit[:k=K,n=N,stage=S]
/// (multi-stage: stages=1+2+3) | probe[:stage=N] (random joint unitary from
/// the seed). beamsplit's n= sets photons_per_pulse.
EveStrategy parse_strategy(const std::string& spec, std::uint32_t& photons_per_pulse,
                           std::uint64_t seed) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    auto fields = parse_spec_fields(colon == std::string::npos ? "" : spec.substr(colon + 1));

    EveStrategy strategy;
    if (name == "none") {
        strategy = NoStrategy{};
    } else if (name == "intercept") {
        InterceptResend ir;
        ir.stage = checked_stage(spec_long(fields, "stage", 1));
        ir.basis_deg = spec_double(fields, "basis", 0.0);
        strategy = ir;
    } else if (name == "beamsplit") {
        BeamSplit bs;
        long k = spec_long(fields, "k", 1);
        if (k < 1) throw std::invalid_argument("beamsplit k must be >= 1");
        bs.k = static_cast<std::uint32_t>(k);
        long n = spec_long(fields, "n", static_cast<long>(photons_per_pulse));
        if (n < 2) throw std::invalid_argument("beamsplit n (photons per pulse) must be >= 2");
        photons_per_pulse = static_cast<std::uint32_t>(n);
        auto it = fields.find("stages");
        if (it != fields.end()) {
            bs.stages.clear();
            std::stringstream ss(it->second);
            std::string part;
            while (std::getline(ss, part, '+'))
                bs.stages.push_back(checked_stage(std::stol(part)));
            fields.erase(it);
        } else {
            bs.stages = {checked_stage(spec_long(fields, "stage", 1))};
        }
        strategy = bs;
    } else if (name == "probe") {
        UnitaryProbe up;
        up.stage = checked_stage(spec_long(fields, "stage", 1));
        Rng probe_rng = Rng(seed).fork(0x50524f42ULL);
        up.probe = random_unitary(4, probe_rng);
        strategy = up;
    } else {
        throw std::invalid_argument("unknown strategy '" + name +
                                    "' (expected none, intercept, beamsplit or probe)");
    }
    if (!fields.empty())
        throw std::invalid_argument("unknown strategy field '" + fields.begin()->first + "'");
    return strategy;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string message = "hello";
    BenchConfig config;
    std::string bench_config_path;
    double extinction = 0.0;  // 0 = ideal detector
    double dark = 0.0;
    std::uint64_t seed = 0;
    bool json_mode = false;
    std::string out_path;
    std::string timing_csv_path;
    std::string transcript_path;
    CLI::Option* slot_opt = nullptr;
    CLI::Option* photons_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

json bench_config_json(const BenchConfig& c, double extinction, double dark) {
    return json{{"wavelength_nm", c.wavelength_nm},
                {"source_power_mw", c.source_power_mw},
                {"source_extinction", c.source_extinction},
                {"shutter_max_rate_hz", c.shutter_max_rate_hz},
                {"shutter_min_on_ms", c.shutter_min_on_ms},
                {"rotator_max_speed_deg_per_s", c.rotator_max_speed_deg_per_s},
                {"slot_ms", c.slot_ms},
                {"photons_per_pulse", c.photons_per_pulse},
                {"detector_extinction", extinction},
                {"detector_dark_click_probability", dark}};
}

int cmd_bench(BenchArgs& a) {
    if (!*a.seed_opt) a.seed = draw_entropy_seed();
    if (!a.bench_config_path.empty()) {
        double slot = a.config.slot_ms;
        std::uint32_t photons = a.config.photons_per_pulse;
        a.config = parse_bench_config(a.bench_config_path);
        if (*a.slot_opt) a.config.slot_ms = slot;
        if (*a.photons_opt) a.config.photons_per_pulse = photons;
    }

    DetectorModel detector = DetectorModel::ideal();
    if (a.extinction > 0.0) detector.extinction_ratio = a.extinction;
    detector.dark_click_probability = a.dark;

    BenchRunResult result = bench_run(a.message, a.config, detector, a.seed);
    const bool match = result.decoded == a.message;

    std::string err;
    if (!a.timing_csv_path.empty() &&
        !write_file(a.timing_csv_path, result.timing.to_csv(), err)) {
        std::cerr << "error: " << err << "\n";
        return kExitDomain;
    }
    if (!a.transcript_path.empty() &&
        !write_file(a.transcript_path, result.transcript.to_jsonl(), err)) {
        std::cerr << "error: " << err << "\n";
        return kExitDomain;
    }

    if (a.json_mode) {
        json doc = meta_json("bench", a.seed,
                             bench_config_json(a.config, a.extinction, a.dark));
        doc["message"] = a.message;
        doc["decoded"] = result.decoded;
        doc["match"] = match;
        doc["erasures"] = result.erasures;
        doc["bits"] = result.transcript.message_length_bits;
        doc["total_duration_ms"] = result.timing.total_duration_ms;
        doc["bits_per_second"] = result.timing.bits_per_second;
        emit(json_dump(doc), a.out_path);
    } else {
        std::ostringstream os;
        os << meta_human("bench", a.seed);
        os << "message: " << a.message << "\n";
        os << "decoded: " << result.decoded << "\n";
        os << "match: " << (match ? "yes" : "no") << "\n";
        os << "bits: " << result.transcript.message_length_bits
           << "  erasures: " << result.erasures << "\n";
        os << "duration: " << result.timing.total_duration_ms << " ms"
           << "  throughput: " << result.timing.bits_per_second << " bits/s\n";
        emit(os.str(), a.out_path);
    }
    return match ? kExitOk : kExitDomain;
}

// ---------------------------------------------------------------------------
// attack

struct AttackArgs {
    std::string strategy_spec = "none";
    std::uint64_t trials = 100000;
    std::uint32_t photons = 1;
    double extinction = 0.0;
    double dark = 0.0;
    std::uint64_t seed = 0;
    bool json_mode = false;
    bool csv_mode = false;
    std::string out_path;
    CLI::Option* seed_opt = nullptr;
};

int cmd_attack(AttackArgs& a) {
    if (!*a.seed_opt) a.seed = draw_entropy_seed();

    ExperimentConfig config;
    config.trials = a.trials;
    config.photons_per_pulse = a.photons;
    config.seed = a.seed;
    config.detector = DetectorModel::ideal();
    if (a.extinction > 0.0) config.detector.extinction_ratio = a.extinction;
    config.detector.dark_click_probability = a.dark;

    EveStrategy strategy = parse_strategy(a.strategy_spec, config.photons_per_pulse, a.seed);
    AttackReport report = run_attack_experiment(strategy, config);

    json config_json{{"strategy", a.strategy_spec},
                     {"trials", a.trials},
                     {"photons_per_pulse", config.photons_per_pulse},
                     {"detector_extinction", a.extinction},
                     {"detector_dark_click_probability", a.dark}};

    if (a.csv_mode) {
        std::ostringstream os;
        os << "# " << kToolName << " " << kToolVersion << " attack seed=" << a.seed
           << " strategy=" << a.strategy_spec << "\n";
        os << AttackReport::csv_header() << "\n" << report.to_csv_row() << "\n";
        return emit(os.str(), a.out_path);
    }
    if (a.json_mode) {
        json doc = meta_json("attack", a.seed, config_json);
        doc["report"] = json::parse(report.to_json());
        return emit(json_dump(doc), a.out_path);
    }
    std::ostringstream os;
    os << meta_human("attack", a.seed);
    os << "strategy: " << report.strategy << "\n";
    os << "trials: " << report.trials
       << "  photons per pulse: " << report.photons_per_pulse << "\n";
    os << "eve bit accuracy: " << report.eve_bit_accuracy << "  [ "
       << report.eve_accuracy_ci.lo() << ", " << report.eve_accuracy_ci.hi() << " ]\n";
    os << "bob error rate: " << report.bob_error_rate << "  [ "
       << report.bob_error_ci.lo() << ", " << report.bob_error_ci.hi() << " ]\n";
    os << "erasure rate: " << report.erasure_rate << "\n";
    os << "mutual information: " << report.mutual_information_bits << " bits\n";
    return emit(os.str(), a.out_path);
}

// ---------------------------------------------------------------------------
// serve / send / proxy

int classify_net_error(const std::string& error) {
    return error.rfind("connection", 0) == 0 ? kExitTransport : kExitDomain;
}

struct ServeArgs {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7413;
    double extinction = 0.0;
    double dark = 0.0;
    std::uint64_t seed = 0;
    bool json_mode = false;
    std::string out_path;
    std::string transcript_path;
    CLI::Option* seed_opt = nullptr;
};

int cmd_serve(ServeArgs& a) {
    if (!*a.seed_opt) a.seed = draw_entropy_seed();
    DetectorModel detector = DetectorModel::ideal();
    if (a.extinction > 0.0) detector.extinction_ratio = a.extinction;
    detector.dark_click_probability = a.dark;

    std::unique_ptr<TcpListener> listener;
    try {
        listener = std::make_unique<TcpListener>(a.host, a.port);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    }
    std::cerr << "listening on " << a.host << ":" << listener->port() << std::endl;

    auto stream = listener->accept();
    if (!stream) {
        std::cerr << "error: accept failed\n";
        return kExitTransport;
    }
    NetSessionResult result = bob_endpoint(*stream, a.seed, detector);

    std::string err;
    if (!a.transcript_path.empty() &&
        !write_file(a.transcript_path, result.transcript.to_jsonl(), err)) {
        std::cerr << "error: " << err << "\n";
        return kExitDomain;
    }

    if (a.json_mode) {
        json doc = meta_json("serve", a.seed,
                             json{{"host", a.host},
                                  {"port", listener->port()},
                                  {"detector_extinction", a.extinction},
                                  {"detector_dark_click_probability", a.dark}});
        doc["ok"] = result.ok;
        doc["error"] = result.error;
        doc["decoded"] = result.decoded;
        doc["decoded_hex"] = to_hex(result.decoded);  // lossless, decoded may be garbled
        doc["frames_sent"] = result.frames_sent;
        doc["frames_received"] = result.frames_received;
        doc["session_id"] = result.session_id;
        emit(json_dump(doc), a.out_path);
    } else {
        std::ostringstream os;
        os << meta_human("serve", a.seed);
        os << "session: " << (result.ok ? "ok" : ("failed: " + result.error)) << "\n";
        os << "decoded: " << result.decoded << "\n";
        os << "frames: sent " << result.frames_sent << ", received "
           << result.frames_received << "\n";
        emit(os.str(), a.out_path);
    }
    return result.ok ? kExitOk : classify_net_error(result.error);
}

struct SendArgs {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7413;
    std::string message = "hello";
    std::size_t block_size = 8;
    std::uint32_t photons = 1;
    std::uint64_t seed = 0;
    bool json_mode = false;
    std::string out_path;
    std::string transcript_path;
    CLI::Option* seed_opt = nullptr;
};

int cmd_send(SendArgs& a) {
    if (!*a.seed_opt) a.seed = draw_entropy_seed();
    std::string conn_error;
    auto stream = TcpStream::connect(a.host, a.port, &conn_error);
    if (!stream) {
        std::cerr << "error: connection to " << a.host << ":" << a.port << " failed ("
                  << conn_error << ")\n";
        return kExitTransport;
    }
    NetSessionResult result =
        alice_endpoint(*stream, a.message, a.seed, a.block_size, a.photons);

    std::string err;
    if (!a.transcript_path.empty() &&
        !write_file(a.transcript_path, result.transcript.to_jsonl(), err)) {
        std::cerr << "error: " << err << "\n";
        return kExitDomain;
    }

    if (a.json_mode) {
        json doc = meta_json("send", a.seed,
                             json{{"host", a.host},
                                  {"port", a.port},
                                  {"message", a.message},
                                  {"block_size", a.block_size},
                                  {"photons_per_pulse", a.photons}});
        doc["ok"] = result.ok;
        doc["error"] = result.error;
        doc["frames_sent"] = result.frames_sent;
        doc["frames_received"] = result.frames_received;
        doc["session_id"] = result.session_id;
        emit(json_dump(doc), a.out_path);
    } else {
        std::ostringstream os;
        os << meta_human("send", a.seed);
        os << "message: " << a.message << "\n";
        os << "session: " << (result.ok ? "ok" : ("failed: " + result.error)) << "\n";
        os << "frames: sent " << result.frames_sent << ", received "
           << result.frames_received << "\n";
        emit(os.str(), a.out_path);
    }
    return result.ok ? kExitOk : classify_net_error(result.error);
}

struct ProxyArgs {
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 0;
    std::string upstream_host = "127.0.0.1";
    std::uint16_t upstream_port = 7413;
    std::string strategy_spec = "none";
    std::string expect;
    std::uint64_t seed = 0;
    bool json_mode = false;
    std::string out_path;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* expect_opt = nullptr;
};

int cmd_proxy(ProxyArgs& a) {
    if (!*a.seed_opt) a.seed = draw_entropy_seed();
    std::uint32_t photons_hint = 2;  // proxy cannot change photon counts; hint only
    EveStrategy strategy = parse_strategy(a.strategy_spec, photons_hint, a.seed);

    std::unique_ptr<TcpListener> listener;
    try {
        listener = std::make_unique<TcpListener>(a.listen_host, a.listen_port);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTransport;
    }
    std::cerr << "listening on " << a.listen_host << ":" << listener->port() << std::endl;

    auto alice_side = listener->accept();
    if (!alice_side) {
        std::cerr << "error: accept failed\n";
        return kExitTransport;
    }
    std::string conn_error;
    auto bob_side = TcpStream::connect(a.upstream_host, a.upstream_port, &conn_error);
    if (!bob_side) {
        std::cerr << "error: connection to " << a.upstream_host << ":" << a.upstream_port
                  << " failed (" << conn_error << ")\n";
        return kExitTransport;
    }

    ProxyResult result = eve_proxy(*alice_side, *bob_side, strategy, a.seed,
                                   *a.expect_opt ? &a.expect : nullptr);

    if (a.json_mode) {
        json doc = meta_json("proxy", a.seed,
                             json{{"listen_host", a.listen_host},
                                  {"listen_port", listener->port()},
                                  {"upstream_host", a.upstream_host},
                                  {"upstream_port", a.upstream_port},
                                  {"strategy", a.strategy_spec}});
        doc["frames_forwarded"] = result.frames_forwarded;
        doc["frames_modified"] = result.frames_modified;
        doc["guessed_bits"] = result.eve_guesses.size();
        if (result.report_valid) doc["report"] = json::parse(result.report.to_json());
        emit(json_dump(doc), a.out_path);
    } else {
        std::ostringstream os;
        os << meta_human("proxy", a.seed);
        os << "strategy: " << a.strategy_spec << "\n";
        os << "frames forwarded: " << result.frames_forwarded << "  modified: "
           << result.frames_modified << "\n";
        os << "guessed bits: " << result.eve_guesses.size() << "\n";
        if (result.report_valid) {
            os << "eve bit accuracy: " << result.report.eve_bit_accuracy << "  [ "
               << result.report.eve_accuracy_ci.lo() << ", "
               << result.report.eve_accuracy_ci.hi() << " ]\n";
            os << "mutual information: " << result.report.mutual_information_bits
               << " bits\n";
        }
        emit(os.str(), a.out_path);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct CheckRow {
    std::string suite;
    std::string name;
    bool pass = false;
    std::string detail;
};

void suite_platechain(std::vector<CheckRow>& rows) {
    double worst = 0.0;
    const MuellerMatrix ident = MuellerMatrix::identity();
    for (int ix = 0; ix < 24; ++ix)
        for (int iy = 0; iy < 24; ++iy) {
            double dev = max_abs_diff(four_plate_chain(15.0 * ix, 15.0 * iy), ident);
            worst = std::max(worst, dev);
        }
    std::ostringstream d1;
    d1 << "max deviation from identity " << worst << " over 24x24 angle grid";
    rows.push_back({"platechain", "plate chain collapses to identity", worst <= 1e-12, d1.str()});

    StokesVector s{1.0, 1.0, 0.0, 0.0};
    StokesVector o = apply_mueller(four_plate_chain(30.0, 40.0), s);
    double dev = std::max(std::max(std::abs(o.s0 - s.s0), std::abs(o.s1 - s.s1)),
                          std::max(std::abs(o.s2 - s.s2), std::abs(o.s3 - s.s3)));
    std::ostringstream d2;
    d2 << "x=30 y=40 input (1,1,0,0) -> (" << o.s0 << "," << o.s1 << "," << o.s2 << ","
       << o.s3 << ")";
    rows.push_back({"platechain", "horizontal output at x=30 y=40", dev <= 1e-12, d2.str()});
}

void suite_groups(std::vector<CheckRow>& rows, std::uint64_t seed) {
    const FamilyKind kinds[] = {FamilyKind::Pauli, FamilyKind::HadamardPair,
                                FamilyKind::TwoQubitPermutation, FamilyKind::TwoQubitDft,
                                FamilyKind::QuaternionSet, FamilyKind::Rotation};
    for (FamilyKind kind : kinds) {
        TransformFamily family = TransformFamily::make(kind);
        bool unitary_ok = true;
        for (const auto& u : family.elements)
            unitary_ok = unitary_ok && u.is_unitary(1e-12);

        bool pairs_ok = true;
        bool exact_everywhere = true;
        for (const auto& x : family.elements)
            for (const auto& y : family.elements) {
                cplx lambda;
                if (!commutes_up_to_phase(x, y, &lambda, 1e-12)) pairs_ok = false;
                if (!commutes(x, y, 1e-12)) exact_everywhere = false;
            }
        bool class_ok = (family.commutation == CommutationClass::Exact)
                            ? exact_everywhere
                            : (pairs_ok && !exact_everywhere);
        std::ostringstream d;
        d << family.elements.size() << " elements, commutation "
          << (exact_everywhere ? "exact" : "up to phase");
        rows.push_back({"groups", family_kind_name(kind) + " unitarity", unitary_ok,
                        "all elements unitary within 1e-12"});
        rows.push_back(
            {"groups", family_kind_name(kind) + " commutation", pairs_ok && class_ok, d.str()});
    }

    // Fresh random rotation pairs commute exactly: the continuous family is
    // abelian, not just abelian on its representatives.
    Rng rng(seed ^ 0x726f74ULL);
    bool rot_ok = true;
    for (int i = 0; i < 32; ++i) {
        UnitaryTransform a = UnitaryTransform::from_jones(rotation_operator(rng.angle_deg()));
        UnitaryTransform b = UnitaryTransform::from_jones(rotation_operator(rng.angle_deg()));
        rot_ok = rot_ok && commutes(a, b, 1e-12);
    }
    rows.push_back({"groups", "random rotation pairs commute", rot_ok,
                    "32 uniformly drawn angle pairs"});
}

void suite_masking(std::vector<CheckRow>& rows) {
    StateVector basis0 = StateVector::basis(2, 0);
    struct Case {
        FamilyKind kind;
        double expected;
        double tol;
    } cases[] = {{FamilyKind::Pauli, 0.5, 1e-12},
                 {FamilyKind::HadamardPair, 0.25, 1e-12},
                 {FamilyKind::Rotation, 0.5, 1e-9}};
    for (const Case& c : cases) {
        TransformFamily family = TransformFamily::make(c.kind);
        double p = masking_probability(family, basis0);
        std::ostringstream d;
        d << "measured " << p << ", expected " << c.expected;
        rows.push_back({"masking", family_kind_name(c.kind) + " on basis state",
                        std::abs(p - c.expected) <= c.tol, d.str()});
    }
}

void suite_roundtrip(std::vector<CheckRow>& rows) {
    // Exhaustive 5-degree angle grid, both bit values, ideal detector.
    Rng rng(1);
    DetectorModel ideal = DetectorModel::ideal();
    std::size_t errors = 0;
    std::size_t total = 0;
    for (int bit = 0; bit < 2; ++bit)
        for (int ia = 0; ia < 72; ++ia)
            for (int ib = 0; ib < 72; ++ib) {
                BlockKey key{5.0 * ia, 5.0 * ib, 0, 0, 0};
                StageMessage m1 = alice_stage1(ProtocolBit{bit}, key);
                StageMessage m2 = bob_stage2(m1, key);
                StageMessage m3 = alice_stage3(m2, key);
                DetectorOutcome out = bob_stage4(m3, key, ideal, rng);
                ++total;
                if (static_cast<int>(out) != bit) ++errors;
            }
    std::ostringstream d;
    d << errors << "/" << total << " decode errors on the 5-degree angle grid";
    rows.push_back({"roundtrip", "rotation stages decode exactly", errors == 0, d.str()});

    const FamilyKind kinds[] = {FamilyKind::Pauli, FamilyKind::HadamardPair,
                                FamilyKind::TwoQubitPermutation, FamilyKind::TwoQubitDft,
                                FamilyKind::QuaternionSet};
    bool abstract_ok = true;
    std::vector<int> bits;
    Rng bit_rng(7);
    for (int i = 0; i < 16; ++i) bits.push_back(static_cast<int>(bit_rng.below(2)));
    for (FamilyKind kind : kinds) {
        SessionConfig config;
        config.mode = ProtocolMode::Abstract;
        config.family = kind;
        config.seed = 99;
        SessionTranscript t = run_session(bits, config);
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (t.decoded_bits[i] != bits[i]) abstract_ok = false;
    }
    rows.push_back({"roundtrip", "abstract families decode exactly", abstract_ok,
                    "16 random bits through each discrete family"});
}

struct VerifyArgs {
    std::string suite = "all";
    std::uint64_t seed = 0;
    bool json_mode = false;
    std::string out_path;
};

int cmd_verify(VerifyArgs& a) {
    std::vector<CheckRow> rows;
    bool known = false;
    if (a.suite == "platechain" || a.suite == "all") suite_platechain(rows), known = true;
    if (a.suite == "groups" || a.suite == "all") suite_groups(rows, a.seed), known = true;
    if (a.suite == "masking" || a.suite == "all") suite_masking(rows), known = true;
    if (a.suite == "roundtrip" || a.suite == "all") suite_roundtrip(rows), known = true;
    if (!known)
        throw std::invalid_argument("unknown suite '" + a.suite +
                                    "' (expected platechain, groups, masking, roundtrip or all)");

    bool all_pass = true;
    for (const CheckRow& r : rows) all_pass = all_pass && r.pass;

    if (a.json_mode) {
        json doc = meta_json("verify", a.seed, json{{"suite", a.suite}});
        doc["checks"] = json::array();
        for (const CheckRow& r : rows)
            doc["checks"].push_back(json{{"suite", r.suite},
                                         {"name", r.name},
                                         {"pass", r.pass},
                                         {"detail", r.detail}});
        doc["pass"] = all_pass;
        emit(json_dump(doc), a.out_path);
    } else {
        std::ostringstream os;
        os << meta_human("verify", a.seed);
        for (const CheckRow& r : rows)
            os << (r.pass ? "PASS" : "FAIL") << "  " << r.suite << ": " << r.name << " ("
               << r.detail << ")\n";
        os << "result: " << (all_pass ? "PASS" : "FAIL") << "\n";
        emit(os.str(), a.out_path);
    }
    return all_pass ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kToolName) + ": three-stage polarization protocol workbench"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    // One optional flat config file per subcommand; node-stable map so the
    // bound option references stay valid.
    std::map<CLI::App*, std::string> config_paths;

    BenchArgs bench;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "Run the tabletop optical simulation end-to-end");
    bench_cmd->add_option("--config", config_paths[bench_cmd],
    "flat key=value config file (flags win)");
    bench_cmd->add_option("--message", bench.message, "message to transmit")
        ->capture_default_str();
    bench.slot_opt = bench_cmd->add_option("--slot-ms", bench.config.slot_ms,
                                           "per-bit shutter slot in ms")
                         ->capture_default_str();
    bench.photons_opt = bench_cmd->add_option("--photons", bench.config.photons_per_pulse,
                                              "photons per pulse")
                            ->capture_default_str();
    bench_cmd->add_option("--bench-config", bench.bench_config_path,
                          "bench constants file (key=value, explicit flags win)");
    bench_cmd->add_option("--extinction", bench.extinction,
                          "detector extinction ratio (0 = ideal detector)")
        ->capture_default_str();
    bench_cmd->add_option("--dark", bench.dark, "dark click probability per slot")
        ->capture_default_str();
    bench.seed_opt = bench_cmd->add_option("--seed", bench.seed,
                                           "random seed (drawn and printed if omitted)");
    bench_cmd->add_flag("--json", bench.json_mode, "emit JSON");
    bench_cmd->add_option("--out", bench.out_path, "write output document to file");
    bench_cmd->add_option("--timing-csv", bench.timing_csv_path,
                          "write the timing report CSV to file");
    bench_cmd->add_option("--transcript", bench.transcript_path,
                          "write the session transcript log to file");

    AttackArgs attack;
    CLI::App* attack_cmd =
        app.add_subcommand("attack", "Monte Carlo eavesdropping experiment");
    attack_cmd->add_option("--config", config_paths[attack_cmd],
    "flat key=value config file (flags win)");
    attack_cmd
        ->add_option("--strategy", attack.strategy_spec,
                     "none | intercept:stage=1,basis=0 | beamsplit:k=1,n=2,stage=1 "
                     "(multi-stage: stages=1+2+3) | probe:stage=1")
        ->capture_default_str();
    attack_cmd->add_option("--trials", attack.trials, "transmitted bits to simulate")
        ->capture_default_str();
    attack_cmd->add_option("--photons", attack.photons, "photons per pulse")
        ->capture_default_str();
    attack_cmd->add_option("--extinction", attack.extinction,
                           "detector extinction ratio (0 = ideal detector)")
        ->capture_default_str();
    attack_cmd->add_option("--dark", attack.dark, "dark click probability per slot")
        ->capture_default_str();
    attack.seed_opt = attack_cmd->add_option("--seed", attack.seed,
                                             "random seed (drawn and printed if omitted)");
    attack_cmd->add_flag("--json", attack.json_mode, "emit JSON");
    attack_cmd->add_flag("--csv", attack.csv_mode, "emit CSV");
    attack_cmd->add_option("--out", attack.out_path, "write output document to file");

    ServeArgs serve;
    CLI::App* serve_cmd =
        app.add_subcommand("serve", "Listen for one session as the receiver");
    serve_cmd->add_option("--config", config_paths[serve_cmd],
    "flat key=value config file (flags win)");
    serve_cmd->add_option("--host", serve.host, "listen address")->capture_default_str();
    serve_cmd->add_option("--port", serve.port, "listen port (0 = ephemeral, printed)")
        ->capture_default_str();
    serve_cmd->add_option("--extinction", serve.extinction,
                          "detector extinction ratio (0 = ideal detector)")
        ->capture_default_str();
    serve_cmd->add_option("--dark", serve.dark, "dark click probability per slot")
        ->capture_default_str();
    serve.seed_opt = serve_cmd->add_option("--seed", serve.seed,
                                           "random seed (drawn and printed if omitted)");
    serve_cmd->add_flag("--json", serve.json_mode, "emit JSON");
    serve_cmd->add_option("--out", serve.out_path, "write output document to file");
    serve_cmd->add_option("--transcript", serve.transcript_path,
                          "write the session transcript log to file");

    SendArgs send;
    CLI::App* send_cmd = app.add_subcommand("send", "Connect and transmit as the sender");
    send_cmd->add_option("--config", config_paths[send_cmd],
    "flat key=value config file (flags win)");
    send_cmd->add_option("--host", send.host, "receiver address")->capture_default_str();
    send_cmd->add_option("--port", send.port, "receiver port")->capture_default_str();
    send_cmd->add_option("--message", send.message, "message to transmit")
        ->capture_default_str();
    send_cmd->add_option("--block-size", send.block_size, "bits per rekeying block (1-8)")
        ->capture_default_str();
    send_cmd->add_option("--photons", send.photons, "photons per pulse")
        ->capture_default_str();
    send.seed_opt = send_cmd->add_option("--seed", send.seed,
                                         "random seed (drawn and printed if omitted)");
    send_cmd->add_flag("--json", send.json_mode, "emit JSON");
    send_cmd->add_option("--out", send.out_path, "write output document to file");
    send_cmd->add_option("--transcript", send.transcript_path,
                         "write the session transcript log to file");

    ProxyArgs proxy;
    CLI::App* proxy_cmd =
        app.add_subcommand("proxy", "Interpose an eavesdropping proxy between endpoints");
    proxy_cmd->add_option("--config", config_paths[proxy_cmd],
    "flat key=value config file (flags win)");
    proxy_cmd->add_option("--listen-host", proxy.listen_host, "proxy listen address")
        ->capture_default_str();
    proxy_cmd
        ->add_option("--listen-port", proxy.listen_port, "proxy listen port (0 = ephemeral)")
        ->capture_default_str();
    proxy_cmd->add_option("--upstream-host", proxy.upstream_host, "receiver address")
        ->capture_default_str();
    proxy_cmd->add_option("--upstream-port", proxy.upstream_port, "receiver port")
        ->capture_default_str();
    proxy_cmd->add_option("--strategy", proxy.strategy_spec, "eavesdropping strategy spec")
        ->capture_default_str();
    proxy_cmd->add_option("--expect", proxy.expect,
                          "plaintext to score the eavesdropper's guesses against");
    proxy.expect_opt = proxy_cmd->get_option("--expect");
    proxy.seed_opt = proxy_cmd->add_option("--seed", proxy.seed,
                                           "random seed (drawn and printed if omitted)");
    proxy_cmd->add_flag("--json", proxy.json_mode, "emit JSON");
    proxy_cmd->add_option("--out", proxy.out_path, "write output document to file");

    VerifyArgs verify;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Run the invariant verification suites");
    verify_cmd->add_option("--config", config_paths[verify_cmd],
    "flat key=value config file (flags win)");
    verify_cmd->add_option("--suite", verify.suite,
                           "platechain | groups | masking | roundtrip | all")
        ->capture_default_str();
    verify_cmd->add_option("--seed", verify.seed, "seed for the randomized spot checks")
        ->capture_default_str();
    verify_cmd->add_flag("--json", verify.json_mode, "emit JSON");
    verify_cmd->add_option("--out", verify.out_path, "write output document to file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        for (const auto& [cmd, path] : config_paths)
            if (cmd->parsed() && !path.empty()) apply_flat_config(cmd, path);
        if (app.got_subcommand(bench_cmd)) return cmd_bench(bench);
        if (app.got_subcommand(attack_cmd)) return cmd_attack(attack);
        if (app.got_subcommand(serve_cmd)) return cmd_serve(serve);
        if (app.got_subcommand(send_cmd)) return cmd_send(send);
        if (app.got_subcommand(proxy_cmd)) return cmd_proxy(proxy);
        if (app.got_subcommand(verify_cmd)) return cmd_verify(verify);
    } catch (const ConstraintViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitUsage;
}
