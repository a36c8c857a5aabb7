#pragma once

#include "plmodem/channel.hpp"
#include "plmodem/modplan.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace plmodem::harness {

struct BerReport {
    std::string plan_summary;
    std::string profile_summary;
    std::string label;
    double bit_rate_bps = 0.0;
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    std::uint64_t frames_sent = 0;
    std::uint64_t frames_accepted = 0;
    std::uint64_t crc_failed = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;

    // Canonical form excludes wall_time so identical seeds produce
    // byte-identical reports.
    std::string to_json(bool include_timing = false) const;
};

struct TrialOptions {
    int cores = 8;
    // Bypass the channel and flip this many payload bits instead; used to
    // validate the BER accounting itself.
    std::optional<std::uint64_t> inject_bit_flips;
};

// Random payload bits -> frames -> channel -> receiver -> bitwise compare.
// Deterministic for a given seed.
BerReport ber_trial(const modplan::ModulationPlan& plan,
                    const channel::ChannelProfile& profile,
                    std::uint64_t n_bits, std::uint64_t seed,
                    const TrialOptions& opts = {});

struct SweepPoint {
    modplan::ModulationPlan plan;
    channel::ChannelProfile profile;
    std::string label;
    int cores = 8;
};

// Runs points concurrently; each point's RNG stream derives from
// (seed, point index) so worker count never changes results.
std::vector<BerReport> ber_sweep(const std::vector<SweepPoint>& points,
                                 std::uint64_t n_bits, std::uint64_t seed,
                                 int workers = 0); // 0 -> env or hw default

std::string sweep_csv(const std::vector<BerReport>& reports);

// B-FSK plan family at the given bit rates (T = 1/rate).
std::vector<SweepPoint> rate_sweep_points(const std::vector<double>& rates_bps,
                                          double f0, double f1,
                                          double sample_rate,
                                          const channel::ChannelProfile& profile,
                                          int cores = 8);

// White-noise profiles pinned to the given per-symbol detection margins.
std::vector<SweepPoint> margin_sweep_points(const modplan::ModulationPlan& plan,
                                            const std::vector<double>& margins_db,
                                            double amplitude_ma);

struct SpectrumData {
    std::vector<double> frequencies; // Hz, ascending
    std::vector<double> times;       // seconds; empty for a plain PSD
    std::vector<double> values;      // dB; row-major [time][frequency]
};

// Averaged periodogram (Hann window), one-sided, dB re mA^2/Hz.
SpectrumData psd(const channel::Waveform& w, std::size_t segment,
                 double overlap = 0.5);

// STFT magnitude in dB.
SpectrumData spectrogram(const channel::Waveform& w, std::size_t window,
                         std::size_t hop);

std::string spectrum_csv(const SpectrumData& s);

int default_workers(); // PLMODEM_WORKERS env var, else hardware concurrency

} // namespace plmodem::harness
