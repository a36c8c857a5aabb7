#pragma once

#include "plmodem/channel.hpp"
#include "plmodem/modplan.hpp"

#include <cstddef>
#include <vector>

namespace plmodem::rx {

struct EnergyMatrix {
    // energies[symbol][carrier], non-negative
    std::vector<std::vector<double>> energies;
    int window = 0; // samples per symbol
};

struct SyncEstimate {
    std::size_t start_offset = 0;
    double confidence = 0.0; // [0, 1]
};

// Single-bin tone correlation over [start, start+window):
// |sum w[n] * exp(-j*2*pi*f*n/fs)|^2 / window.
double carrier_energy(const channel::Waveform& w, double f, std::size_t start,
                      std::size_t window);

// Slides a candidate start position, scores the 4-bit preamble pattern by
// normalized energy contrast against an off-carrier noise-floor estimate,
// returns the best-scoring offset.
SyncEstimate acquire_sync(const channel::Waveform& w,
                          const modplan::ModulationPlan& plan,
                          double threshold = 0.5,
                          std::size_t step = 0); // 0 -> samples_per_symbol/20

struct DemodResult {
    modplan::SymbolStream symbols;
    EnergyMatrix energies;
    bool truncated = false; // fewer than the requested symbols were available
};

// Per-symbol argmax over carrier energies; ties break toward the lowest
// carrier index.
DemodResult demodulate(const channel::Waveform& w,
                       const modplan::ModulationPlan& plan,
                       const SyncEstimate& sync, std::size_t n_symbols);

struct RecoverStats {
    std::size_t frames_found = 0;  // preamble matched and CRC passed
    std::size_t crc_failures = 0;  // preamble matched, CRC did not
};

// Scans a decoded bit stream for valid frames; only CRC-passing frames are
// returned.
std::vector<BitStream> recover_frames(const BitStream& bits,
                                      RecoverStats* stats = nullptr);

} // namespace plmodem::rx
