#include "plmodem/harness.hpp"

#include "plmodem/detail/fft.hpp"
#include "plmodem/error.hpp"
#include "plmodem/framing.hpp"
#include "plmodem/rx.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace plmodem::harness {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t mix_seeds(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

std::string fmt_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string plan_oneline(const modplan::ModulationPlan& plan) {
    std::string cfg = plan.to_config();
    for (char& c : cfg)
        if (c == '\n')
            c = ' ';
    while (!cfg.empty() && cfg.back() == ' ')
        cfg.pop_back();
    return cfg;
}

} // namespace

int default_workers() {
    if (const char* env = std::getenv("PLMODEM_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string BerReport::to_json(bool include_timing) const {
    json j;
    j["plan"] = plan_summary;
    j["profile"] = profile_summary;
    j["label"] = label;
    j["bit_rate_bps"] = bit_rate_bps;
    j["bits_sent"] = bits_sent;
    j["bit_errors"] = bit_errors;
    j["ber"] = ber;
    j["frames_sent"] = frames_sent;
    j["frames_accepted"] = frames_accepted;
    j["crc_failed"] = crc_failed;
    j["seed"] = seed;
    if (include_timing)
        j["wall_time_s"] = wall_time;
    return j.dump(2);
}

BerReport ber_trial(const modplan::ModulationPlan& plan,
                    const channel::ChannelProfile& profile,
                    std::uint64_t n_bits, std::uint64_t seed,
                    const TrialOptions& opts) {
    if (n_bits == 0)
        fail("InvalidBitCount", "n_bits must be positive");
    if (n_bits < 1000)
        std::fprintf(stderr,
                     "warning: n_bits=%llu is low for BER statistics\n",
                     static_cast<unsigned long long>(n_bits));
    auto t_start = std::chrono::steady_clock::now();

    std::mt19937_64 rng(seed);
    BitStream payload_bits(n_bits);
    for (auto& b : payload_bits)
        b = static_cast<Bit>(rng() & 1u);

    std::uint64_t n_frames = (n_bits + framing::kPayloadBits - 1) / framing::kPayloadBits;
    BitStream tx_bits;
    tx_bits.reserve(n_frames * framing::kFrameBits);
    for (std::uint64_t f = 0; f < n_frames; ++f) {
        BitStream payload(framing::kPayloadBits, 0);
        for (int j = 0; j < framing::kPayloadBits; ++j) {
            std::uint64_t idx = f * framing::kPayloadBits + j;
            if (idx < n_bits)
                payload[j] = payload_bits[idx];
        }
        BitStream ser = framing::encode_frame(payload).serialize();
        tx_bits.insert(tx_bits.end(), ser.begin(), ser.end());
    }

    BitStream rx_bits;
    if (opts.inject_bit_flips) {
        std::uint64_t k = *opts.inject_bit_flips;
        if (k > n_bits)
            fail("InvalidBitCount", "cannot flip more bits than were sent");
        rx_bits = tx_bits;
        for (std::uint64_t i = 0; i < k; ++i) {
            std::uint64_t f = i / framing::kPayloadBits;
            std::uint64_t j = i % framing::kPayloadBits;
            std::size_t pos = f * framing::kFrameBits + framing::kPreambleBits + j;
            rx_bits[pos] ^= 1u;
        }
    } else {
        // run the channel in frame-sized chunks so slow plans (seconds per
        // symbol) never materialize the whole transmission in memory
        std::uint64_t base_seed = mix_seeds(profile.rng_seed, seed);
        std::size_t ns = static_cast<std::size_t>(plan.samples_per_symbol());
        int bps = plan.bits_per_symbol();
        std::size_t frame_symbols =
            (framing::kFrameBits + static_cast<std::size_t>(bps) - 1) /
            static_cast<std::size_t>(bps);
        std::uint64_t frames_per_chunk = std::max<std::uint64_t>(
            1, (std::uint64_t{1} << 21) / (frame_symbols * ns));

        channel::ChannelProfile p = profile;
        rx_bits.reserve(tx_bits.size());
        std::uint64_t chunk = 0;
        for (std::uint64_t f = 0; f < n_frames; f += frames_per_chunk, ++chunk) {
            std::uint64_t last = std::min(n_frames, f + frames_per_chunk);
            BitStream chunk_bits(
                tx_bits.begin() + static_cast<std::ptrdiff_t>(f * framing::kFrameBits),
                tx_bits.begin() + static_cast<std::ptrdiff_t>(last * framing::kFrameBits));
            auto symbols = modplan::bits_to_symbols(chunk_bits, plan.order);
            p.rng_seed = mix_seeds(base_seed, chunk);
            auto wave = channel::apply_channel(symbols, plan, p, opts.cores);
            // transmit timing is known in a trial
            auto demod = rx::demodulate(wave, plan, {0, 1.0}, symbols.symbols.size());
            BitStream decoded = modplan::symbols_to_bits(demod.symbols);
            decoded.resize(chunk_bits.size());
            rx_bits.insert(rx_bits.end(), decoded.begin(), decoded.end());
        }
    }

    std::uint64_t errors = 0;
    for (std::uint64_t f = 0; f < n_frames; ++f) {
        for (int j = 0; j < framing::kPayloadBits; ++j) {
            std::uint64_t idx = f * framing::kPayloadBits + j;
            if (idx >= n_bits)
                break;
            std::size_t pos = f * framing::kFrameBits + framing::kPreambleBits + j;
            if (tx_bits[pos] != rx_bits[pos])
                ++errors;
        }
    }

    rx::RecoverStats stats;
    rx::recover_frames(rx_bits, &stats);

    BerReport report;
    report.plan_summary = plan_oneline(plan);
    report.profile_summary = profile.to_json();
    report.bit_rate_bps = modplan::bit_rate(plan);
    report.bits_sent = n_bits;
    report.bit_errors = errors;
    report.ber = static_cast<double>(errors) / static_cast<double>(n_bits);
    report.frames_sent = n_frames;
    report.frames_accepted = stats.frames_found;
    report.crc_failed = stats.crc_failures;
    report.seed = seed;
    report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return report;
}

std::vector<BerReport> ber_sweep(const std::vector<SweepPoint>& points,
                                 std::uint64_t n_bits, std::uint64_t seed,
                                 int workers) {
    std::vector<BerReport> reports(points.size());
    if (points.empty())
        return reports;
    if (workers <= 0)
        workers = default_workers();
    workers = std::min<int>(workers, static_cast<int>(points.size()));

    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= points.size())
                return;
            TrialOptions opts;
            opts.cores = points[i].cores;
            reports[i] = ber_trial(points[i].plan, points[i].profile, n_bits,
                                   mix_seeds(seed, i), opts);
            reports[i].label = points[i].label;
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < workers; ++t)
        pool.emplace_back(run);
    run();
    for (auto& th : pool)
        th.join();
    return reports;
}

std::string sweep_csv(const std::vector<BerReport>& reports) {
    std::string out =
        "label,bit_rate_bps,bits_sent,bit_errors,ber,frames_sent,"
        "frames_accepted,crc_failed,seed\n";
    for (const BerReport& r : reports) {
        out += r.label + "," + fmt_double(r.bit_rate_bps) + "," +
               std::to_string(r.bits_sent) + "," + std::to_string(r.bit_errors) +
               "," + fmt_double(r.ber) + "," + std::to_string(r.frames_sent) +
               "," + std::to_string(r.frames_accepted) + "," +
               std::to_string(r.crc_failed) + "," + std::to_string(r.seed) + "\n";
    }
    return out;
}

std::vector<SweepPoint> rate_sweep_points(const std::vector<double>& rates_bps,
                                          double f0, double f1,
                                          double sample_rate,
                                          const channel::ChannelProfile& profile,
                                          int cores) {
    std::vector<SweepPoint> points;
    modplan::PlanOptions opts;
    opts.ignore_band = true; // callers pick carriers; rates drive T only
    for (double rate : rates_bps) {
        if (rate <= 0.0)
            fail("InvalidRate", "bit rate must be positive");
        SweepPoint p;
        p.plan = modplan::plan_bfsk(1.0 / rate, f0, f1, sample_rate, opts);
        p.profile = profile;
        p.label = fmt_double(rate) + "bps";
        p.cores = cores;
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<SweepPoint> margin_sweep_points(const modplan::ModulationPlan& plan,
                                            const std::vector<double>& margins_db,
                                            double amplitude_ma) {
    std::vector<SweepPoint> points;
    for (double m : margins_db) {
        SweepPoint p;
        p.plan = plan;
        p.profile = channel::ChannelProfile::for_noise_margin(plan, amplitude_ma, m);
        p.label = fmt_double(m) + "dB";
        p.cores = 1;
        points.push_back(std::move(p));
    }
    return points;
}

SpectrumData psd(const channel::Waveform& w, std::size_t segment, double overlap) {
    if (segment < 2 || segment > w.samples.size())
        fail("TooShort", "waveform shorter than one PSD segment");
    if (overlap < 0.0 || overlap >= 1.0)
        fail("InvalidOverlap", "overlap must be in [0, 1)");
    std::size_t hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(segment * (1.0 - overlap))));

    std::vector<double> window(segment);
    double u = 0.0;
    for (std::size_t i = 0; i < segment; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / segment));
        u += window[i] * window[i];
    }

    std::size_t bins = segment / 2 + 1;
    std::vector<double> acc(bins, 0.0);
    std::size_t count = 0;
    std::vector<double> buf(segment);
    for (std::size_t start = 0; start + segment <= w.samples.size(); start += hop) {
        for (std::size_t i = 0; i < segment; ++i)
            buf[i] = w.samples[start + i] * window[i];
        auto spec = detail::rfft(buf);
        for (std::size_t k = 0; k < bins; ++k)
            acc[k] += std::norm(spec[k]);
        ++count;
    }

    SpectrumData out;
    out.frequencies.resize(bins);
    out.values.resize(bins);
    double scale = 1.0 / (w.sample_rate * u * static_cast<double>(count));
    for (std::size_t k = 0; k < bins; ++k) {
        out.frequencies[k] = static_cast<double>(k) * w.sample_rate / segment;
        double p = acc[k] * scale;
        if (k != 0 && !(segment % 2 == 0 && k == bins - 1))
            p *= 2.0; // one-sided
        out.values[k] = 10.0 * std::log10(p + 1e-30);
    }
    return out;
}

SpectrumData spectrogram(const channel::Waveform& w, std::size_t window_len,
                         std::size_t hop) {
    if (window_len < 2 || window_len > w.samples.size())
        fail("TooShort", "waveform shorter than one STFT window");
    if (hop == 0 || hop > window_len)
        fail("InvalidHop", "hop must be in [1, window]");

    std::vector<double> window(window_len);
    double u = 0.0;
    for (std::size_t i = 0; i < window_len; ++i) {
        window[i] =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / window_len));
        u += window[i] * window[i];
    }

    std::size_t bins = window_len / 2 + 1;
    SpectrumData out;
    out.frequencies.resize(bins);
    for (std::size_t k = 0; k < bins; ++k)
        out.frequencies[k] = static_cast<double>(k) * w.sample_rate / window_len;

    std::vector<double> buf(window_len);
    for (std::size_t start = 0; start + window_len <= w.samples.size();
         start += hop) {
        for (std::size_t i = 0; i < window_len; ++i)
            buf[i] = w.samples[start + i] * window[i];
        auto spec = detail::rfft(buf);
        out.times.push_back((start + window_len / 2.0) / w.sample_rate);
        for (std::size_t k = 0; k < bins; ++k) {
            double p = std::norm(spec[k]) / (w.sample_rate * u);
            if (k != 0 && !(window_len % 2 == 0 && k == bins - 1))
                p *= 2.0;
            out.values.push_back(10.0 * std::log10(p + 1e-30));
        }
    }
    return out;
}

std::string spectrum_csv(const SpectrumData& s) {
    std::string out;
    if (s.times.empty()) {
        out = "frequency_hz,psd_db\n";
        for (std::size_t k = 0; k < s.frequencies.size(); ++k)
            out += fmt_double(s.frequencies[k]) + "," + fmt_double(s.values[k]) +
                   "\n";
    } else {
        out = "time_s,frequency_hz,power_db\n";
        std::size_t bins = s.frequencies.size();
        for (std::size_t t = 0; t < s.times.size(); ++t)
            for (std::size_t k = 0; k < bins; ++k)
                out += fmt_double(s.times[t]) + "," + fmt_double(s.frequencies[k]) +
                       "," + fmt_double(s.values[t * bins + k]) + "\n";
    }
    return out;
}

} // namespace plmodem::harness
