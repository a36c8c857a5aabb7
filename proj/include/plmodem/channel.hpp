#pragma once

#include "plmodem/modplan.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace plmodem::channel {

// Sampled probe current, mA.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 48000.0;

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

enum class Tap { line_level, phase_level };

struct NoiseBand {
    double f_lo = 0.0;  // Hz
    double f_hi = 0.0;  // Hz
    double psd = 0.0;   // one-sided, mA^2/Hz
};

struct ChannelProfile {
    Tap tap = Tap::line_level;

    // Load-current swing (peak-to-peak, mA) keyed by transmitting core count.
    std::map<int, double> amplitude_by_cores;

    // Optional per-symbol carrier peak amplitude (mA). When non-empty it
    // overrides the core-count model (phase-level measurements key amplitude
    // on the symbol value).
    std::map<int, double> symbol_amplitudes;

    std::vector<NoiseBand> noise_floor; // must cover 0..Nyquist (or be empty)
    double distance_km = 0.0;
    double attenuation_db_per_km = 10.0;
    std::uint64_t rng_seed = 1;
    bool harmonics = false;         // add odd harmonics of the keyed square wave
    bool interpolate_cores = true;  // interpolate amplitude between table entries

    std::string to_json() const;
    static ChannelProfile from_json(const std::string& text);
    static ChannelProfile load(const std::string& path);
    void save(const std::string& path) const;

    // Calibrated defaults; band PSD levels are configuration, not physics.
    static ChannelProfile line_level_default();
    static ChannelProfile phase_level_default();

    // White-noise profile whose per-symbol detection SNR equals `margin_db`
    // for a tone of peak amplitude `amplitude_ma` and symbol period T.
    static ChannelProfile for_noise_margin(const modplan::ModulationPlan& plan,
                                           double amplitude_ma, double margin_db);

    double amplitude_for_cores(int cores) const;
    double noise_psd_at(double f) const;
};

Waveform synthesize_waveform(const modplan::SymbolStream& symbols,
                             const modplan::ModulationPlan& plan,
                             const ChannelProfile& profile, int cores);

Waveform add_noise(const Waveform& w, const ChannelProfile& profile);

Waveform attenuate(const Waveform& w, const ChannelProfile& profile);

// synthesize -> attenuate -> add_noise
Waveform apply_channel(const modplan::SymbolStream& symbols,
                       const modplan::ModulationPlan& plan,
                       const ChannelProfile& profile, int cores);

} // namespace plmodem::channel
