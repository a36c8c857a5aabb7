#include "plmodem/channel.hpp"
#include "plmodem/error.hpp"
#include "plmodem/framing.hpp"
#include "plmodem/harness.hpp"
#include "plmodem/modplan.hpp"
#include "plmodem/rx.hpp"
#include "plmodem/txload.hpp"
#include "plmodem/wav.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

using namespace plmodem;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail("FileNotFound", "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> gather_data(const std::string& data_path,
                                      const std::string& hex,
                                      std::optional<std::uint64_t> random_bytes,
                                      std::uint64_t seed) {
    if (!data_path.empty())
        return read_file_bytes(data_path);
    if (!hex.empty())
        return bytes_from_bits(bits_from_hex(hex));
    if (random_bytes) {
        std::vector<std::uint8_t> out(*random_bytes);
        std::mt19937_64 rng(seed);
        for (auto& b : out)
            b = static_cast<std::uint8_t>(rng() & 0xff);
        return out;
    }
    fail("NoInput", "provide --data, --hex, or --random");
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out)
        fail("FileWriteError", "cannot write " + path);
    out << content;
}

channel::ChannelProfile load_profile(const std::string& spec) {
    if (spec.empty() || spec == "line_level")
        return channel::ChannelProfile::line_level_default();
    if (spec == "phase_level")
        return channel::ChannelProfile::phase_level_default();
    return channel::ChannelProfile::load(spec);
}

int run(int argc, char** argv) {
    CLI::App app{"Power-line covert channel modem and simulation harness"};
    app.require_subcommand(1);

    // tx: drive the CPU-load transmitter
    auto* tx = app.add_subcommand("tx", "transmit bits as CPU load keying");
    std::string tx_plan, tx_data, tx_hex, tx_mode = "bfsk";
    std::vector<int> tx_cores{0};
    std::uint64_t tx_seed = 1;
    std::optional<std::uint64_t> tx_random;
    tx->add_option("--plan", tx_plan, "plan config file")->required();
    tx->add_option("--data", tx_data, "raw data file");
    tx->add_option("--hex", tx_hex, "payload as hex");
    tx->add_option("--random", tx_random, "send N random bytes");
    tx->add_option("--seed", tx_seed, "seed for --random");
    tx->add_option("--cores", tx_cores, "core ids, e.g. --cores 2 3")
        ->delimiter(',');
    tx->add_option("--mode", tx_mode, "bfsk|alg1")
        ->check(CLI::IsMember({"bfsk", "alg1"}));

    // simulate: data -> frames -> channel -> WAV
    auto* sim = app.add_subcommand("simulate",
                                   "synthesize a probe capture for a transmission");
    std::string sim_plan, sim_profile, sim_data, sim_hex, sim_out;
    std::uint64_t sim_seed = 1;
    std::optional<std::uint64_t> sim_random;
    int sim_cores = 8;
    sim->add_option("--plan", sim_plan)->required();
    sim->add_option("--profile", sim_profile,
                    "profile JSON file, or line_level/phase_level");
    sim->add_option("--data", sim_data, "raw data file");
    sim->add_option("--hex", sim_hex, "payload as hex");
    sim->add_option("--random", sim_random, "send N random bytes");
    sim->add_option("--seed", sim_seed, "noise / --random seed");
    sim->add_option("--cores", sim_cores, "transmitting core count");
    sim->add_option("--out", sim_out, "output WAV path")->required();

    // rx: demodulate a capture
    auto* rxc = app.add_subcommand("rx", "demodulate a WAV capture");
    std::string rx_plan, rx_wav, rx_bits_out, rx_energies_out;
    double rx_threshold = 0.5;
    std::optional<std::size_t> rx_offset;
    rxc->add_option("--plan", rx_plan)->required();
    rxc->add_option("--wav", rx_wav)->required();
    rxc->add_option("--raw-bits", rx_bits_out, "write decoded bits to file");
    rxc->add_option("--energies", rx_energies_out, "write energy matrix CSV");
    rxc->add_option("--sync-threshold", rx_threshold, "preamble confidence gate");
    rxc->add_option("--offset", rx_offset, "skip sync search, use this sample");

    // ber-sweep
    auto* sweep = app.add_subcommand("ber-sweep", "Monte-Carlo BER grid");
    std::string sw_profile, sw_out;
    std::vector<double> sw_rates, sw_margins;
    double sw_f0 = 10000.0, sw_f1 = 14000.0, sw_fs = 48000.0, sw_t_ms = 1.0;
    double sw_amp = 9.5;
    std::uint64_t sw_bits = 100000, sw_seed = 1;
    int sw_workers = 0, sw_cores = 8;
    sweep->add_option("--profile", sw_profile,
                      "profile for --rates mode (file or line_level/phase_level)");
    sweep->add_option("--rates", sw_rates, "bit rates, bit/s")->delimiter(',');
    sweep->add_option("--margins", sw_margins, "detection margins, dB")
        ->delimiter(',');
    sweep->add_option("--f0", sw_f0);
    sweep->add_option("--f1", sw_f1);
    sweep->add_option("--sample-rate", sw_fs);
    sweep->add_option("--t-ms", sw_t_ms, "symbol period for --margins mode");
    sweep->add_option("--amplitude", sw_amp, "carrier peak mA for --margins mode");
    sweep->add_option("--bits", sw_bits);
    sweep->add_option("--seed", sw_seed);
    sweep->add_option("--workers", sw_workers, "0 = PLMODEM_WORKERS or all cores");
    sweep->add_option("--cores", sw_cores);
    sweep->add_option("--out", sw_out, "CSV output (default stdout)");

    // psd
    auto* psdc = app.add_subcommand("psd", "averaged periodogram of a WAV");
    std::string psd_wav, psd_out;
    std::size_t psd_segment = 4096;
    double psd_overlap = 0.5;
    psdc->add_option("--wav", psd_wav)->required();
    psdc->add_option("--segment", psd_segment);
    psdc->add_option("--overlap", psd_overlap);
    psdc->add_option("--out", psd_out);

    // spectrogram
    auto* spec = app.add_subcommand("spectrogram", "STFT of a WAV");
    std::string sg_wav, sg_out;
    std::size_t sg_window = 1024, sg_hop = 0;
    spec->add_option("--wav", sg_wav)->required();
    spec->add_option("--window", sg_window);
    spec->add_option("--hop", sg_hop, "default window/2");
    spec->add_option("--out", sg_out);

    // wav-info
    auto* info = app.add_subcommand("wav-info", "describe a WAV capture");
    std::string info_wav;
    info->add_option("--wav", info_wav)->required();

    CLI11_PARSE(app, argc, argv);

    if (*tx) {
        auto plan = modplan::ModulationPlan::load(tx_plan);
        auto data = gather_data(tx_data, tx_hex, tx_random, tx_seed);
        BitStream bits;
        for (const auto& frame : framing::packetize(data)) {
            auto ser = frame.serialize();
            bits.insert(bits.end(), ser.begin(), ser.end());
        }
        auto mode = tx_mode == "alg1" ? txload::Mode::alg1 : txload::Mode::bfsk;
        auto schedule = txload::build_load_schedule(bits, plan, tx_cores, 0, mode);
        auto report = txload::run_transmission(schedule);
        std::cout << report.to_json() << "\n";
        return 0;
    }

    if (*sim) {
        auto plan = modplan::ModulationPlan::load(sim_plan);
        auto profile = load_profile(sim_profile);
        profile.rng_seed = sim_seed;
        auto data = gather_data(sim_data, sim_hex, sim_random, sim_seed);
        auto frames = framing::packetize(data);
        BitStream bits;
        for (const auto& frame : frames) {
            auto ser = frame.serialize();
            bits.insert(bits.end(), ser.begin(), ser.end());
        }
        auto symbols = modplan::bits_to_symbols(bits, plan.order);
        auto wave = channel::apply_channel(symbols, plan, profile, sim_cores);
        wav::write(sim_out, wave);
        json j;
        j["frames"] = json::array();
        for (const auto& frame : frames)
            j["frames"].push_back(frame.to_hex());
        j["samples"] = wave.samples.size();
        j["duration_s"] = wave.duration();
        j["out"] = sim_out;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (*rxc) {
        auto plan = modplan::ModulationPlan::load(rx_plan);
        auto wave = wav::read(rx_wav);
        rx::SyncEstimate sync;
        if (rx_offset)
            sync = {*rx_offset, 1.0};
        else
            sync = rx::acquire_sync(wave, plan, rx_threshold);
        std::size_t ns = static_cast<std::size_t>(plan.samples_per_symbol());
        if (!rx_offset) {
            // sync may have locked onto a later frame; the symbol grid is
            // shared, so rewind to the first grid-aligned window and let the
            // bit-level frame scan find every frame
            sync.start_offset %= ns;
        }
        std::size_t avail = (wave.samples.size() - sync.start_offset) / ns;
        auto demod = rx::demodulate(wave, plan, sync, avail);
        BitStream bits = modplan::symbols_to_bits(demod.symbols);
        rx::RecoverStats stats;
        auto payloads = rx::recover_frames(bits, &stats);

        if (!rx_bits_out.empty())
            write_output(rx_bits_out, to_string(bits) + "\n");
        if (!rx_energies_out.empty()) {
            std::string csv = "symbol";
            for (int c = 0; c < plan.order; ++c)
                csv += ",carrier_" + std::to_string(c) + "_energy";
            csv += "\n";
            for (std::size_t i = 0; i < demod.energies.energies.size(); ++i) {
                csv += std::to_string(i);
                for (double e : demod.energies.energies[i])
                    csv += "," + std::to_string(e);
                csv += "\n";
            }
            write_output(rx_energies_out, csv);
        }

        json j;
        j["sync_offset"] = sync.start_offset;
        j["sync_confidence"] = sync.confidence;
        j["symbols"] = demod.symbols.symbols.size();
        j["frames_accepted"] = stats.frames_found;
        j["crc_failures"] = stats.crc_failures;
        j["payloads_hex"] = json::array();
        for (const auto& p : payloads)
            j["payloads_hex"].push_back(hex_from_bits(p));
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (*sweep) {
        std::vector<harness::SweepPoint> points;
        if (!sw_margins.empty()) {
            auto plan = modplan::plan_bfsk(sw_t_ms / 1000.0, sw_f0, sw_f1, sw_fs);
            points = harness::margin_sweep_points(plan, sw_margins, sw_amp);
        } else {
            auto profile = load_profile(sw_profile);
            points = harness::rate_sweep_points(sw_rates, sw_f0, sw_f1, sw_fs,
                                                profile, sw_cores);
        }
        auto reports = harness::ber_sweep(points, sw_bits, sw_seed, sw_workers);
        write_output(sw_out, harness::sweep_csv(reports));
        return 0;
    }

    if (*psdc) {
        auto wave = wav::read(psd_wav);
        auto data = harness::psd(wave, psd_segment, psd_overlap);
        write_output(psd_out, harness::spectrum_csv(data));
        return 0;
    }

    if (*spec) {
        auto wave = wav::read(sg_wav);
        if (sg_hop == 0)
            sg_hop = sg_window / 2;
        auto data = harness::spectrogram(wave, sg_window, sg_hop);
        write_output(sg_out, harness::spectrum_csv(data));
        return 0;
    }

    if (*info) {
        auto wave = wav::read(info_wav);
        double peak = 0.0;
        for (double s : wave.samples)
            peak = std::max(peak, std::abs(s));
        json j;
        j["sample_rate_hz"] = wave.sample_rate;
        j["samples"] = wave.samples.size();
        j["duration_s"] = wave.duration();
        j["peak_ma"] = peak;
        j["full_scale_ma"] = wav::kFullScaleMa;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
