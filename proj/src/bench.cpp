#include "tsqp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tsqp {

void BenchConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(wavelength_nm, "wavelength_nm");
    positive(source_power_mw, "source_power_mw");
    positive(source_extinction, "source_extinction");
    positive(shutter_max_rate_hz, "shutter_max_rate_hz");
    positive(shutter_min_on_ms, "shutter_min_on_ms");
    positive(rotator_max_speed_deg_per_s, "rotator_max_speed_deg_per_s");
    positive(slot_ms, "slot_ms");
    if (photons_per_pulse < 1)
        throw std::invalid_argument("photons_per_pulse must be at least 1");
}

BenchConfig parse_bench_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open bench config: " + path);
    BenchConfig config;
    std::map<std::string, double*> fields{
        {"wavelength_nm", &config.wavelength_nm},
        {"source_power_mw", &config.source_power_mw},
        {"source_extinction", &config.source_extinction},
        {"shutter_max_rate_hz", &config.shutter_max_rate_hz},
        {"shutter_min_on_ms", &config.shutter_min_on_ms},
        {"rotator_max_speed_deg_per_s", &config.rotator_max_speed_deg_per_s},
        {"alice_plate_deg", &config.alice_plate_deg},
        {"bob_plate_deg", &config.bob_plate_deg},
        {"slot_ms", &config.slot_ms},
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bench config line " + std::to_string(lineno) +
                                        ": expected key=value");
        auto trim = [](std::string s) {
            std::size_t b = s.find_first_not_of(" \t\r");
            std::size_t e = s.find_last_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            return s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::size_t consumed = 0;
        if (key == "photons_per_pulse") {
            config.photons_per_pulse = static_cast<std::uint32_t>(std::stoul(value, &consumed));
            if (consumed != value.size())
                throw std::invalid_argument("bench config line " + std::to_string(lineno) +
                                            ": bad integer for " + key);
            continue;
        }
        auto it = fields.find(key);
        if (it == fields.end())
            throw std::invalid_argument("bench config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        double parsed = std::stod(value, &consumed);
        if (consumed != value.size())
            throw std::invalid_argument("bench config line " + std::to_string(lineno) +
                                        ": bad number for " + key);
        *it->second = parsed;
    }
    config.validate();
    return config;
}

const char* bench_element_name(BenchElement e) {
    switch (e) {
        case BenchElement::Source: return "source";
        case BenchElement::Splitter: return "splitter";
        case BenchElement::ShutterUpper: return "shutter_upper";
        case BenchElement::PolarizerUpper90: return "polarizer_upper_90";
        case BenchElement::ShutterLower: return "shutter_lower";
        case BenchElement::PolarizerLower0: return "polarizer_lower_0";
        case BenchElement::Combiner: return "combiner";
        case BenchElement::PlateAliceX: return "hwp_alice_x";
        case BenchElement::PlateBobY: return "hwp_bob_y";
        case BenchElement::Mirror1: return "mirror_1";
        case BenchElement::PlateAliceNegX: return "hwp_alice_neg_x";
        case BenchElement::Mirror2: return "mirror_2";
        case BenchElement::PlateBobNegY: return "hwp_bob_neg_y";
        case BenchElement::OutputSplitter: return "output_splitter";
        case BenchElement::AnalyzerPolarizer90: return "analyzer_polarizer_90";
        case BenchElement::AnalyzerPolarizer0: return "analyzer_polarizer_0";
    }
    return "?";
}

const std::vector<BenchElement>& beam_path_order() {
    static const std::vector<BenchElement> order{
        BenchElement::Source,          BenchElement::Splitter,
        BenchElement::ShutterUpper,    BenchElement::PolarizerUpper90,
        BenchElement::ShutterLower,    BenchElement::PolarizerLower0,
        BenchElement::Combiner,        BenchElement::PlateAliceX,
        BenchElement::PlateBobY,       BenchElement::Mirror1,
        BenchElement::PlateAliceNegX,  BenchElement::Mirror2,
        BenchElement::PlateBobNegY,    BenchElement::OutputSplitter,
        BenchElement::AnalyzerPolarizer90, BenchElement::AnalyzerPolarizer0,
    };
    return order;
}

MuellerMatrix four_plate_chain(double x_deg, double y_deg) {
    // Column convention: the beam meets x first, so its matrix sits
    // rightmost in the product.
    return half_wave_plate_mueller(-y_deg) * half_wave_plate_mueller(-x_deg) *
           half_wave_plate_mueller(y_deg) * half_wave_plate_mueller(x_deg);
}

std::string TimingReport::to_csv() const {
    std::ostringstream os;
    os << "event_type,t_start_ms,t_end_ms,detail\n";
    for (const TimingEvent& e : events) {
        std::string quoted = e.detail;
        // Details are generated without commas or quotes; keep them bare.
        os << e.event_type << ',' << e.t_start_ms << ',' << e.t_end_ms << ',' << quoted
           << "\n";
    }
    return os.str();
}

std::vector<int> encode_message(const std::string& bytes) {
    std::vector<int> bits;
    bits.reserve(bytes.size() * 8);
    for (unsigned char c : bytes)
        for (int i = 7; i >= 0; --i) bits.push_back((c >> i) & 1);
    return bits;
}

std::string decode_message(const std::vector<int>& bits) {
    if (bits.size() % 8 != 0)
        throw std::invalid_argument("bit count must be a multiple of 8");
    std::string out;
    out.reserve(bits.size() / 8);
    for (std::size_t i = 0; i < bits.size(); i += 8) {
        unsigned char c = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            int b = bits[i + j];
            if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
            c = static_cast<unsigned char>((c << 1) | static_cast<unsigned char>(b));
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

TimingReport shutter_plan(const std::vector<int>& bits, double slot_ms,
                          const BenchConfig& config) {
    if (!(slot_ms > 0.0)) throw std::invalid_argument("slot duration must be positive");
    if (slot_ms < config.shutter_min_on_ms) {
        std::ostringstream os;
        os << "slot " << slot_ms << " ms is below the " << config.shutter_min_on_ms
           << " ms minimum on time";
        throw ConstraintViolation("shutter_min_on", os.str());
    }
    double min_gap = config.min_shutter_gap_ms();
    double last_open[2] = {-1.0, -1.0};  // per shutter: lower=0, upper=1
    TimingReport report;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        int b = bits[i];
        if (b != 0 && b != 1) throw std::invalid_argument("bits must be 0 or 1");
        double t = static_cast<double>(i) * slot_ms;
        if (last_open[b] >= 0.0 && t - last_open[b] < min_gap - 1e-9) {
            std::ostringstream os;
            os << "shutter " << (b ? "upper" : "lower") << " would reopen after "
               << (t - last_open[b]) << " ms; " << min_gap << " ms required ("
               << config.shutter_max_rate_hz << " Hz)";
            throw ConstraintViolation("shutter_max_rate", os.str());
        }
        last_open[b] = t;
        TimingEvent e;
        e.event_type = "shutter_open";
        e.t_start_ms = t;
        e.t_end_ms = t + slot_ms;
        e.detail = std::string("shutter=") + (b ? "upper" : "lower") +
                   " bit=" + std::to_string(b);
        report.events.push_back(e);
        report.bit_slot_ms.push_back(slot_ms);
    }
    report.total_duration_ms = static_cast<double>(bits.size()) * slot_ms;
    report.bits_per_second = report.total_duration_ms > 0.0
                                 ? 1000.0 * static_cast<double>(bits.size()) /
                                       report.total_duration_ms
                                 : 0.0;
    return report;
}

double rotator_travel_ms(double from_deg, double to_deg, const BenchConfig& config) {
    double arc = std::abs(shortest_arc_deg(from_deg, to_deg));
    return 1000.0 * arc / config.rotator_max_speed_deg_per_s;
}

void validate_rotator_move(double from_deg, double to_deg, double duration_ms,
                           const BenchConfig& config) {
    double needed = rotator_travel_ms(from_deg, to_deg, config);
    if (duration_ms + 1e-9 < needed) {
        std::ostringstream os;
        os << "move " << from_deg << " -> " << to_deg << " deg needs " << needed
           << " ms at " << config.rotator_max_speed_deg_per_s << " deg/s; got "
           << duration_ms << " ms";
        throw ConstraintViolation("rotator_max_speed", os.str());
    }
}

namespace {

StokesVector scaled(const StokesVector& s, double k) {
    return {k * s.s0, k * s.s1, k * s.s2, k * s.s3};
}

struct BenchPropagation {
    StokesVector output;     // state entering the output splitter
    double intensity_arm0;   // after the 0 degree analyzer
    double intensity_arm1;   // after the 90 degree analyzer
    StageMessage stage_msgs[3];
};

BenchPropagation propagate(bool upper_open, bool lower_open, const BenchConfig& config,
                           BenchTrace* trace) {
    if (upper_open && lower_open)
        throw std::invalid_argument("both shutters open in one bit slot");
    auto record = [trace](BenchElement e, const StokesVector& s) {
        if (trace) trace->emplace_back(e, s);
    };

    // The source is linearly polarized at 45 degrees so both arm polarizers
    // see equal intensity; per-pulse intensity is normalized to 1.
    StokesVector source = StokesVector::linear(45.0, 1.0);
    record(BenchElement::Source, source);

    StokesVector upper = scaled(source, 0.5);
    StokesVector lower = scaled(source, 0.5);
    record(BenchElement::Splitter, upper);

    if (!upper_open) upper = {};
    record(BenchElement::ShutterUpper, upper);
    upper = apply_mueller(linear_polarizer_mueller(90.0), upper);
    record(BenchElement::PolarizerUpper90, upper);

    if (!lower_open) lower = {};
    record(BenchElement::ShutterLower, lower);
    lower = apply_mueller(linear_polarizer_mueller(0.0), lower);
    record(BenchElement::PolarizerLower0, lower);

    StokesVector beam{upper.s0 + lower.s0, upper.s1 + lower.s1, upper.s2 + lower.s2,
                      upper.s3 + lower.s3};
    record(BenchElement::Combiner, beam);

    double x = config.alice_plate_deg;
    double y = config.bob_plate_deg;
    BenchPropagation result;

    beam = apply_mueller(half_wave_plate_mueller(x), beam);
    record(BenchElement::PlateAliceX, beam);
    result.stage_msgs[0].stage = 1;
    result.stage_msgs[0].pulse =
        PhotonPulse(StateVector::from_jones(stokes_to_jones(beam)), config.photons_per_pulse,
                    beam.s0);

    beam = apply_mueller(half_wave_plate_mueller(y), beam);
    record(BenchElement::PlateBobY, beam);
    result.stage_msgs[1].stage = 2;
    result.stage_msgs[1].pulse =
        PhotonPulse(StateVector::from_jones(stokes_to_jones(beam)), config.photons_per_pulse,
                    beam.s0);

    record(BenchElement::Mirror1, beam);  // polarization-neutral
    beam = apply_mueller(half_wave_plate_mueller(-x), beam);
    record(BenchElement::PlateAliceNegX, beam);
    result.stage_msgs[2].stage = 3;
    result.stage_msgs[2].pulse =
        PhotonPulse(StateVector::from_jones(stokes_to_jones(beam)), config.photons_per_pulse,
                    beam.s0);

    record(BenchElement::Mirror2, beam);
    beam = apply_mueller(half_wave_plate_mueller(-y), beam);
    record(BenchElement::PlateBobNegY, beam);

    result.output = beam;
    StokesVector half = scaled(beam, 0.5);
    record(BenchElement::OutputSplitter, half);
    StokesVector arm90 = apply_mueller(linear_polarizer_mueller(90.0), half);
    record(BenchElement::AnalyzerPolarizer90, arm90);
    StokesVector arm0 = apply_mueller(linear_polarizer_mueller(0.0), half);
    record(BenchElement::AnalyzerPolarizer0, arm0);

    // The polarizer chain can round an extinguished arm to a tiny negative.
    double photons = static_cast<double>(config.photons_per_pulse);
    result.intensity_arm0 = photons * std::max(0.0, arm0.s0);
    result.intensity_arm1 = photons * std::max(0.0, arm90.s0);
    return result;
}

}  // namespace

DetectorOutcome bench_transmit_bit(int bit, const BenchConfig& config,
                                   const DetectorModel& detector, Rng& rng,
                                   BenchTrace* trace) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("bit must be 0 or 1");
    config.validate();
    BenchPropagation p = propagate(bit == 1, bit == 0, config, trace);
    return detector_click(p.intensity_arm0, p.intensity_arm1, detector, rng);
}

BenchRunResult bench_run(const std::string& message, const BenchConfig& config,
                         const DetectorModel& detector, std::uint64_t seed) {
    if (message.empty()) throw std::invalid_argument("message must not be empty");
    config.validate();
    if (config.slot_ms < config.shutter_min_on_ms) {
        std::ostringstream os;
        os << "slot " << config.slot_ms << " ms is below the " << config.shutter_min_on_ms
           << " ms minimum on time";
        throw ConstraintViolation("shutter_min_on", os.str());
    }

    std::vector<int> bits = encode_message(message);
    const std::size_t block_size = 8;

    BenchRunResult result;
    result.transcript.message_length_bits = bits.size();
    result.transcript.block_size = block_size;
    result.transcript.seed = seed;
    result.transcript.mode = "bench";

    SessionConfig key_source;
    key_source.seed = seed;

    Rng detector_rng = Rng(seed).fork(0x44455431);  // detector stream

    BenchConfig plates = config;
    double prev_x = config.alice_plate_deg;
    double prev_y = config.bob_plate_deg;
    double t = 0.0;
    double min_gap = config.min_shutter_gap_ms();
    double last_open[2] = {-1.0, -1.0};

    const std::size_t block_count = (bits.size() + block_size - 1) / block_size;
    for (std::size_t block = 0; block < block_count; ++block) {
        BlockKey key = draw_block_key(key_source, static_cast<std::uint32_t>(block), 0);
        double x = key.theta_a_deg;
        double y = key.theta_b_deg;

        // All four plates swing in parallel; the block waits for the
        // slowest. Each plate pair moves by the same arc magnitude.
        double travel_a = rotator_travel_ms(prev_x, x, config);
        double travel_b = rotator_travel_ms(prev_y, y, config);
        double travel = std::max(travel_a, travel_b);
        if (travel > 0.0) {
            TimingEvent ea{"rotator_move", t, t + travel_a, ""};
            std::ostringstream da;
            da << "plates=alice from=" << prev_x << " to=" << x;
            ea.detail = da.str();
            TimingEvent eb{"rotator_move", t, t + travel_b, ""};
            std::ostringstream db;
            db << "plates=bob from=" << prev_y << " to=" << y;
            eb.detail = db.str();
            result.timing.events.push_back(ea);
            result.timing.events.push_back(eb);
        }
        result.timing.block_rotator_travel_ms.push_back(travel);
        t += travel;
        prev_x = x;
        prev_y = y;
        plates.alice_plate_deg = x;
        plates.bob_plate_deg = y;

        std::size_t begin = block * block_size;
        std::size_t end = std::min(bits.size(), begin + block_size);
        for (std::size_t i = begin; i < end; ++i) {
            int b = bits[i];
            if (last_open[b] >= 0.0 && t - last_open[b] < min_gap - 1e-9)
                throw ConstraintViolation("shutter_max_rate",
                                          "slot too short for repeated same-bit values");
            last_open[b] = t;
            TimingEvent slot{"shutter_open", t, t + config.slot_ms,
                             std::string("shutter=") + (b ? "upper" : "lower") +
                                 " bit=" + std::to_string(b)};
            result.timing.events.push_back(slot);
            result.timing.bit_slot_ms.push_back(config.slot_ms);

            BenchPropagation p = propagate(b == 1, b == 0, plates, nullptr);
            for (StageMessage& m : p.stage_msgs) {
                m.block_index = static_cast<std::uint32_t>(block);
                m.bit_index = static_cast<int>(i - begin);
            }
            result.transcript.entries.push_back({Direction::AliceToBob, p.stage_msgs[0]});
            result.transcript.entries.push_back({Direction::BobToAlice, p.stage_msgs[1]});
            result.transcript.entries.push_back({Direction::AliceToBob, p.stage_msgs[2]});

            DetectorOutcome outcome =
                detector_click(p.intensity_arm0, p.intensity_arm1, detector, detector_rng);
            result.transcript.outcomes.push_back(outcome);
            int decoded = outcome == DetectorOutcome::Bit1 ? 1 : 0;
            if (outcome == DetectorOutcome::Erasure) {
                ++result.erasures;
                decoded = 0;  // placeholder; erasure stays visible in outcomes
                result.transcript.decoded_bits.push_back(-1);
            } else {
                result.transcript.decoded_bits.push_back(decoded);
            }
            t += config.slot_ms;
        }
    }

    result.timing.total_duration_ms = t;
    result.timing.bits_per_second =
        t > 0.0 ? 1000.0 * static_cast<double>(bits.size()) / t : 0.0;

    std::vector<int> decode_bits;
    decode_bits.reserve(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        int b = result.transcript.decoded_bits[i];
        decode_bits.push_back(b < 0 ? 0 : b);
    }
    result.decoded = decode_message(decode_bits);
    return result;
}

}  // namespace tsqp
