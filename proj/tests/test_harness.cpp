#include "plmodem/channel.hpp"
#include "plmodem/error.hpp"
#include "plmodem/harness.hpp"
#include "plmodem/wav.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace plmodem;
using namespace plmodem::harness;

namespace {

channel::Waveform tone(double amp, double f, double fs, std::size_t n) {
    channel::Waveform w;
    w.sample_rate = fs;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amp * std::sin(2.0 * std::numbers::pi * f * i / fs);
    return w;
}

std::filesystem::path temp_wav(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("ber_trial is deterministic for a fixed seed") {
    auto plan = modplan::plan_bfsk(0.001, 10000.0, 14000.0, 48000.0);
    auto profile = channel::ChannelProfile::for_noise_margin(plan, 9.5, 9.0);
    auto a = ber_trial(plan, profile, 2000, 555);
    auto b = ber_trial(plan, profile, 2000, 555);
    CHECK(a.to_json() == b.to_json());
    CHECK(a.bits_sent == b.bits_sent);
    CHECK(a.bit_errors == b.bit_errors);
}

TEST_CASE("ber_trial over a noiseless channel is error free") {
    auto plan = modplan::plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    auto profile = channel::ChannelProfile::line_level_default();
    profile.noise_floor.clear();
    auto r = ber_trial(plan, profile, 1024, 1);
    CHECK(r.bits_sent == 1024);
    CHECK(r.bit_errors == 0);
    CHECK(r.ber == 0.0);
    CHECK(r.frames_sent == 32);
    CHECK(r.frames_accepted == 32);
    CHECK(r.crc_failed == 0);
    CHECK(r.bit_rate_bps == doctest::Approx(200.0));
}

TEST_CASE("injected bit flips are accounted exactly") {
    auto plan = modplan::plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    auto profile = channel::ChannelProfile::line_level_default();
    TrialOptions opts;
    opts.inject_bit_flips = 7;
    auto r = ber_trial(plan, profile, 1000, 3, opts);
    CHECK(r.bit_errors == 7);
    CHECK(r.ber == doctest::Approx(7.0 / 1000.0).epsilon(1e-12));
}

TEST_CASE("BER grows as the noise margin shrinks") {
    auto plan = modplan::plan_bfsk(0.001, 10000.0, 14000.0, 48000.0);
    double prev = -1.0;
    for (double margin : {12.0, 8.0, 4.0, 0.0}) {
        auto profile = channel::ChannelProfile::for_noise_margin(plan, 9.5, margin);
        profile.rng_seed = 17; // common random numbers across margins
        auto r = ber_trial(plan, profile, 20000, 17);
        CHECK(r.ber >= prev);
        prev = r.ber;
    }
    CHECK(prev > 0.1); // 0 dB margin is unusable
}

TEST_CASE("BER grows with bit rate under a fixed noise floor") {
    auto profile = channel::ChannelProfile::line_level_default();
    profile.noise_floor = {{0.0, 24000.0, 2.0e-3}};
    profile.rng_seed = 29;
    auto points = rate_sweep_points({100.0, 500.0, 2000.0}, 10000.0, 20000.0,
                                    48000.0, profile);
    auto reports = ber_sweep(points, 10000, 29, 1);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].ber <= reports[1].ber);
    CHECK(reports[1].ber <= reports[2].ber);
}

TEST_CASE("sweep results do not depend on the worker count") {
    auto plan = modplan::plan_bfsk(0.001, 10000.0, 14000.0, 48000.0);
    auto points = margin_sweep_points(plan, {6.0, 8.0, 10.0, 12.0}, 9.5);
    auto serial = ber_sweep(points, 5000, 99, 1);
    auto parallel = ber_sweep(points, 5000, 99, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(serial[i].to_json() == parallel[i].to_json());
    CHECK(sweep_csv(serial) == sweep_csv(parallel));
}

TEST_CASE("sweep_csv layout") {
    auto empty = sweep_csv({});
    CHECK(empty ==
          "label,bit_rate_bps,bits_sent,bit_errors,ber,frames_sent,"
          "frames_accepted,crc_failed,seed\n");

    auto plan = modplan::plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    auto profile = channel::ChannelProfile::line_level_default();
    profile.noise_floor.clear();
    auto r = ber_trial(plan, profile, 128, 2);
    r.label = "demo";
    std::string csv = sweep_csv({r});
    std::istringstream lines(csv);
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(row.rfind("demo,", 0) == 0);
    CHECK(row.find(",128,0,0,") != std::string::npos);
}

TEST_CASE("psd localizes a pure tone and integrates to its power") {
    auto w = tone(2.0, 6000.0, 48000.0, 48000 * 2);
    auto s = psd(w, 4096, 0.5);
    CHECK(s.times.empty());
    std::size_t peak = 0;
    for (std::size_t k = 1; k < s.frequencies.size(); ++k)
        if (s.values[k] > s.values[peak])
            peak = k;
    CHECK(std::abs(s.frequencies[peak] - 6000.0) < 48000.0 / 4096.0 * 2.0);

    // integral of the one-sided PSD ~ A^2/2
    double df = s.frequencies[1] - s.frequencies[0];
    double power = 0.0;
    for (double v : s.values)
        power += std::pow(10.0, v / 10.0) * df;
    CHECK(power == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("psd of white noise is flat within 3 dB") {
    channel::ChannelProfile p;
    p.noise_floor = {{0.0, 24000.0, 1.0e-3}};
    p.rng_seed = 31;
    channel::Waveform silent;
    silent.sample_rate = 48000.0;
    silent.samples.assign(48000 * 10, 0.0);
    auto noisy = channel::add_noise(silent, p);
    auto s = psd(noisy, 2048, 0.5);
    double expected = 10.0 * std::log10(1.0e-3);
    for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
        if (s.frequencies[k] < 500.0 || s.frequencies[k] > 23500.0)
            continue; // window skirts at the edges
        CHECK(std::abs(s.values[k] - expected) < 3.0);
    }
}

TEST_CASE("psd argument validation") {
    auto w = tone(1.0, 6000.0, 48000.0, 100);
    CHECK_THROWS_WITH_AS(psd(w, 256, 0.5), doctest::Contains("TooShort"), Error);
    auto w2 = tone(1.0, 6000.0, 48000.0, 4096);
    CHECK_THROWS_WITH_AS(psd(w2, 1024, 1.0), doctest::Contains("InvalidOverlap"),
                         Error);
}

TEST_CASE("spectrogram shows the B-FSK carrier alternation") {
    auto plan = modplan::plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    BitStream bits = bits_from_string("0101000111");
    auto profile = channel::ChannelProfile::line_level_default();
    profile.noise_floor.clear();
    auto w = channel::synthesize_waveform(modplan::bits_to_symbols(bits, 2), plan,
                                          profile, 8);
    std::size_t win = static_cast<std::size_t>(plan.samples_per_symbol());
    auto s = spectrogram(w, win, win);
    REQUIRE(s.times.size() == bits.size());
    for (std::size_t row = 0; row < s.times.size(); ++row) {
        std::size_t peak = 0;
        for (std::size_t k = 1; k < s.frequencies.size(); ++k)
            if (s.values[row * s.frequencies.size() + k] >
                s.values[row * s.frequencies.size() + peak])
                peak = k;
        double expected = bits[row] ? 18000.0 : 10000.0;
        CHECK(std::abs(s.frequencies[peak] - expected) < 48000.0 / win * 2.0);
    }
}

TEST_CASE("spectrogram of a constant tone has a stable ridge") {
    auto w = tone(1.0, 12000.0, 48000.0, 48000);
    auto s = spectrogram(w, 1024, 512);
    for (std::size_t row = 0; row < s.times.size(); ++row) {
        std::size_t peak = 0;
        for (std::size_t k = 1; k < s.frequencies.size(); ++k)
            if (s.values[row * s.frequencies.size() + k] >
                s.values[row * s.frequencies.size() + peak])
                peak = k;
        CHECK(std::abs(s.frequencies[peak] - 12000.0) < 94.0);
    }
    CHECK_THROWS_WITH_AS(spectrogram(w, 1024, 0), doctest::Contains("InvalidHop"),
                         Error);
    channel::Waveform tiny = tone(1.0, 12000.0, 48000.0, 16);
    CHECK_THROWS_WITH_AS(spectrogram(tiny, 1024, 512), doctest::Contains("TooShort"),
                         Error);
}

TEST_CASE("spectrum_csv is long-format with one row per cell") {
    auto w = tone(1.0, 12000.0, 48000.0, 4096);
    auto s = spectrogram(w, 1024, 1024);
    std::istringstream lines(spectrum_csv(s));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "time_s,frequency_hz,power_db");
    std::size_t rows = 0;
    while (std::getline(lines, line))
        ++rows;
    CHECK(rows == s.times.size() * s.frequencies.size());
}

TEST_CASE("wav round trip is within one LSB") {
    auto w = tone(10.0, 7000.0, 48000.0, 4800);
    auto path = temp_wav("plmodem_roundtrip.wav");
    wav::write(path.string(), w);
    auto back = wav::read(path.string());
    REQUIRE(back.samples.size() == w.samples.size());
    CHECK(back.sample_rate == 48000.0);
    double lsb = wav::kFullScaleMa / 32767.0;
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - w.samples[i]) <= lsb);
    std::filesystem::remove(path);
}

TEST_CASE("wav writer clamps beyond full scale") {
    channel::Waveform w;
    w.sample_rate = 48000.0;
    w.samples = {1000.0, -1000.0, 0.0};
    auto path = temp_wav("plmodem_clamp.wav");
    wav::write(path.string(), w);
    auto back = wav::read(path.string());
    CHECK(back.samples[0] == doctest::Approx(wav::kFullScaleMa).epsilon(1e-3));
    CHECK(back.samples[1] == doctest::Approx(-wav::kFullScaleMa).epsilon(1e-3));
    CHECK(back.samples[2] == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("wav reader rejects stereo and honors stored sample rates") {
    // hand-built stereo header
    auto path = temp_wav("plmodem_stereo.wav");
    {
        std::ofstream f(path, std::ios::binary);
        auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<char*>(&v), 4); };
        auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<char*>(&v), 2); };
        f.write("RIFF", 4);
        u32(36 + 8);
        f.write("WAVE", 4);
        f.write("fmt ", 4);
        u32(16);
        u16(1);     // PCM
        u16(2);     // stereo
        u32(48000);
        u32(48000 * 4);
        u16(4);
        u16(16);
        f.write("data", 4);
        u32(8);
        u32(0);
        u32(0);
    }
    CHECK_THROWS_WITH_AS(wav::read(path.string()),
                         doctest::Contains("UnsupportedFormat"), Error);
    std::filesystem::remove(path);

    auto w = tone(1.0, 7000.0, 44100.0, 441);
    auto path2 = temp_wav("plmodem_441.wav");
    wav::write(path2.string(), w);
    CHECK(wav::read(path2.string()).sample_rate == 44100.0);
    std::filesystem::remove(path2);
}

TEST_CASE("default_workers honors the environment override") {
    CHECK(default_workers() >= 1);
}
