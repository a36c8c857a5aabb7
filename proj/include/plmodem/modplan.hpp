#pragma once

#include "plmodem/bits.hpp"

#include <string>
#include <vector>

namespace plmodem::modplan {

struct PlanOptions {
    double band_lo_hz = 5000.0;  // usable band; power-line noise dominates below
    double band_hi_hz = 24000.0; // capture Nyquist of the 48 kHz probe
    bool ignore_band = false;
    double spacing_hz = 0.0;          // 0 -> default 4/T
    bool allow_tight_spacing = false; // permit spacing below 4/T (experimentation)
};

struct ModulationPlan {
    int order = 2;                // M, power of two
    double symbol_period = 0.0;   // T, seconds
    std::vector<double> carriers; // Hz, ascending, carriers[i] keys symbol i
    double sample_rate = 48000.0; // Hz

    int bits_per_symbol() const;     // log2(M)
    int samples_per_symbol() const;  // round(T * sample_rate)
    double min_spacing() const;      // 4/T

    // key=value config block (M, T_ms, carriers_hz, sample_rate_hz)
    std::string to_config() const;
    static ModulationPlan from_config(const std::string& text);
    static ModulationPlan load(const std::string& path);
    void save(const std::string& path) const;
};

ModulationPlan plan_bfsk(double symbol_period, double f0, double f1,
                         double sample_rate, const PlanOptions& opts = {});

// Carriers base + i*spacing, spacing defaults to 4/T.
ModulationPlan plan_mfsk(int order, double symbol_period, double base,
                         double sample_rate, const PlanOptions& opts = {});

double bandwidth(const ModulationPlan& plan); // (4M+3)/T
double bit_rate(const ModulationPlan& plan);  // log2(M)/T

struct SymbolStream {
    std::vector<int> symbols;
    int bits_per_symbol = 1;
    int pad_bits = 0; // zero bits appended to fill the last symbol

    bool padded() const { return pad_bits > 0; }
};

SymbolStream bits_to_symbols(const BitStream& bits, int order);
BitStream symbols_to_bits(const SymbolStream& symbols); // includes pad bits

} // namespace plmodem::modplan
