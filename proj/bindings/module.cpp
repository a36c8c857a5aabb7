#include "plmodem/channel.hpp"
#include "plmodem/error.hpp"
#include "plmodem/framing.hpp"
#include "plmodem/harness.hpp"
#include "plmodem/modplan.hpp"
#include "plmodem/rx.hpp"
#include "plmodem/txload.hpp"
#include "plmodem/wav.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace plmodem;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Power-line covert channel modem core";

    py::register_exception<Error>(m, "ModemError");

    // framing
    py::class_<framing::Frame>(m, "Frame")
        .def_readonly("preamble", &framing::Frame::preamble)
        .def_readonly("payload", &framing::Frame::payload)
        .def_readonly("crc", &framing::Frame::crc)
        .def("serialize", &framing::Frame::serialize)
        .def("to_hex", &framing::Frame::to_hex);
    m.def("crc8", &framing::crc8, py::arg("payload"));
    m.def("encode_frame", &framing::encode_frame, py::arg("payload"));
    m.def("decode_frame", &framing::decode_frame, py::arg("bits"));
    m.def("packetize", [](py::bytes data) {
        std::string s = data;
        return framing::packetize(
            std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    });
    m.def("bits_from_hex", &bits_from_hex);
    m.def("hex_from_bits", &hex_from_bits);

    // modulation plans
    py::class_<modplan::ModulationPlan>(m, "ModulationPlan")
        .def_readonly("order", &modplan::ModulationPlan::order)
        .def_readonly("symbol_period", &modplan::ModulationPlan::symbol_period)
        .def_readonly("carriers", &modplan::ModulationPlan::carriers)
        .def_readonly("sample_rate", &modplan::ModulationPlan::sample_rate)
        .def("bits_per_symbol", &modplan::ModulationPlan::bits_per_symbol)
        .def("samples_per_symbol", &modplan::ModulationPlan::samples_per_symbol)
        .def("to_config", &modplan::ModulationPlan::to_config)
        .def_static("from_config", &modplan::ModulationPlan::from_config);
    py::class_<modplan::PlanOptions>(m, "PlanOptions")
        .def(py::init<>())
        .def_readwrite("band_lo_hz", &modplan::PlanOptions::band_lo_hz)
        .def_readwrite("band_hi_hz", &modplan::PlanOptions::band_hi_hz)
        .def_readwrite("ignore_band", &modplan::PlanOptions::ignore_band)
        .def_readwrite("spacing_hz", &modplan::PlanOptions::spacing_hz)
        .def_readwrite("allow_tight_spacing",
                       &modplan::PlanOptions::allow_tight_spacing);
    m.def("plan_bfsk", &modplan::plan_bfsk, py::arg("symbol_period"),
          py::arg("f0"), py::arg("f1"), py::arg("sample_rate"),
          py::arg("opts") = modplan::PlanOptions{});
    m.def("plan_mfsk", &modplan::plan_mfsk, py::arg("order"),
          py::arg("symbol_period"), py::arg("base"), py::arg("sample_rate"),
          py::arg("opts") = modplan::PlanOptions{});
    m.def("bandwidth", &modplan::bandwidth);
    m.def("bit_rate", &modplan::bit_rate);
    py::class_<modplan::SymbolStream>(m, "SymbolStream")
        .def(py::init([](std::vector<int> symbols, int bits_per_symbol) {
                 modplan::SymbolStream s;
                 s.symbols = std::move(symbols);
                 s.bits_per_symbol = bits_per_symbol;
                 return s;
             }),
             py::arg("symbols"), py::arg("bits_per_symbol"))
        .def_readonly("symbols", &modplan::SymbolStream::symbols)
        .def_readonly("bits_per_symbol", &modplan::SymbolStream::bits_per_symbol)
        .def_readonly("pad_bits", &modplan::SymbolStream::pad_bits);
    m.def("bits_to_symbols", &modplan::bits_to_symbols, py::arg("bits"),
          py::arg("order"));
    m.def("symbols_to_bits", &modplan::symbols_to_bits);

    // channel
    py::class_<channel::Waveform>(m, "Waveform")
        .def(py::init([](std::vector<double> samples, double sample_rate) {
                 return channel::Waveform{std::move(samples), sample_rate};
             }),
             py::arg("samples"), py::arg("sample_rate") = 48000.0)
        .def_readwrite("samples", &channel::Waveform::samples)
        .def_readwrite("sample_rate", &channel::Waveform::sample_rate)
        .def("duration", &channel::Waveform::duration);
    py::class_<channel::ChannelProfile>(m, "ChannelProfile")
        .def(py::init<>())
        .def_readwrite("distance_km", &channel::ChannelProfile::distance_km)
        .def_readwrite("attenuation_db_per_km",
                       &channel::ChannelProfile::attenuation_db_per_km)
        .def_readwrite("rng_seed", &channel::ChannelProfile::rng_seed)
        .def_readwrite("harmonics", &channel::ChannelProfile::harmonics)
        .def("to_json", &channel::ChannelProfile::to_json)
        .def_static("from_json", &channel::ChannelProfile::from_json)
        .def_static("line_level_default",
                    &channel::ChannelProfile::line_level_default)
        .def_static("phase_level_default",
                    &channel::ChannelProfile::phase_level_default)
        .def_static("for_noise_margin", &channel::ChannelProfile::for_noise_margin,
                    py::arg("plan"), py::arg("amplitude_ma"), py::arg("margin_db"));
    m.def("synthesize_waveform", &channel::synthesize_waveform, py::arg("symbols"),
          py::arg("plan"), py::arg("profile"), py::arg("cores"));
    m.def("add_noise", &channel::add_noise);
    m.def("attenuate", &channel::attenuate);
    m.def("apply_channel", &channel::apply_channel, py::arg("symbols"),
          py::arg("plan"), py::arg("profile"), py::arg("cores"));

    // receiver
    py::class_<rx::SyncEstimate>(m, "SyncEstimate")
        .def(py::init([](std::size_t offset, double confidence) {
                 return rx::SyncEstimate{offset, confidence};
             }),
             py::arg("start_offset"), py::arg("confidence") = 1.0)
        .def_readonly("start_offset", &rx::SyncEstimate::start_offset)
        .def_readonly("confidence", &rx::SyncEstimate::confidence);
    py::class_<rx::EnergyMatrix>(m, "EnergyMatrix")
        .def_readonly("energies", &rx::EnergyMatrix::energies)
        .def_readonly("window", &rx::EnergyMatrix::window);
    py::class_<rx::DemodResult>(m, "DemodResult")
        .def_readonly("symbols", &rx::DemodResult::symbols)
        .def_readonly("energies", &rx::DemodResult::energies)
        .def_readonly("truncated", &rx::DemodResult::truncated);
    m.def("carrier_energy", &rx::carrier_energy, py::arg("waveform"),
          py::arg("f"), py::arg("start"), py::arg("window"));
    m.def("acquire_sync", &rx::acquire_sync, py::arg("waveform"), py::arg("plan"),
          py::arg("threshold") = 0.5, py::arg("step") = 0);
    m.def("demodulate", &rx::demodulate, py::arg("waveform"), py::arg("plan"),
          py::arg("sync"), py::arg("n_symbols"));
    m.def("recover_frames", [](const BitStream& bits) {
        rx::RecoverStats stats;
        auto payloads = rx::recover_frames(bits, &stats);
        return py::make_tuple(payloads, stats.frames_found, stats.crc_failures);
    });

    // harness
    py::class_<harness::BerReport>(m, "BerReport")
        .def_readonly("bits_sent", &harness::BerReport::bits_sent)
        .def_readonly("bit_errors", &harness::BerReport::bit_errors)
        .def_readonly("ber", &harness::BerReport::ber)
        .def_readonly("frames_sent", &harness::BerReport::frames_sent)
        .def_readonly("frames_accepted", &harness::BerReport::frames_accepted)
        .def_readonly("crc_failed", &harness::BerReport::crc_failed)
        .def_readonly("seed", &harness::BerReport::seed)
        .def_readonly("bit_rate_bps", &harness::BerReport::bit_rate_bps)
        .def("to_json", &harness::BerReport::to_json,
             py::arg("include_timing") = false);
    m.def(
        "ber_trial",
        [](const modplan::ModulationPlan& plan,
           const channel::ChannelProfile& profile, std::uint64_t n_bits,
           std::uint64_t seed, int cores) {
            harness::TrialOptions opts;
            opts.cores = cores;
            return harness::ber_trial(plan, profile, n_bits, seed, opts);
        },
        py::arg("plan"), py::arg("profile"), py::arg("n_bits"), py::arg("seed"),
        py::arg("cores") = 8);
    py::class_<harness::SpectrumData>(m, "SpectrumData")
        .def_readonly("frequencies", &harness::SpectrumData::frequencies)
        .def_readonly("times", &harness::SpectrumData::times)
        .def_readonly("values", &harness::SpectrumData::values);
    m.def("psd", &harness::psd, py::arg("waveform"), py::arg("segment"),
          py::arg("overlap") = 0.5);
    m.def("spectrogram", &harness::spectrogram, py::arg("waveform"),
          py::arg("window"), py::arg("hop"));

    // wav io
    m.def("read_wav", &wav::read, py::arg("path"));
    m.def("write_wav", &wav::write, py::arg("path"), py::arg("waveform"));

    // load transmitter (self-measurement path)
    m.def("affinity_supported", &txload::affinity_supported);
}
