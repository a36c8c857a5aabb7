#include "plmodem/rx.hpp"

#include "plmodem/error.hpp"
#include "plmodem/framing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace plmodem::rx {

double carrier_energy(const channel::Waveform& w, double f, std::size_t start,
                      std::size_t window) {
    if (window < 8)
        fail("WindowTooSmall", "window must be at least 8 samples");
    if (start + window > w.samples.size())
        fail("OutOfBounds", "window extends past end of waveform");
    if (f <= 0.0 || f >= w.sample_rate / 2.0)
        fail("NyquistViolation", "carrier outside (0, fs/2)");

    double re = 0.0, im = 0.0;
    double dphi = 2.0 * std::numbers::pi * f / w.sample_rate;
    double phi = 0.0;
    for (std::size_t n = 0; n < window; ++n) {
        double s = w.samples[start + n];
        re += s * std::cos(phi);
        im -= s * std::sin(phi);
        phi += dphi;
    }
    return (re * re + im * im) / static_cast<double>(window);
}

namespace {

// Expected preamble symbol pattern for a given order.
std::vector<int> preamble_symbols(const modplan::ModulationPlan& plan) {
    BitStream pre(framing::kPreamble.begin(), framing::kPreamble.end());
    return modplan::bits_to_symbols(pre, plan.order).symbols;
}

struct CandidateScore {
    double contrast = 0.0;
    double min_contrast = 0.0; // worst single preamble window

    double confidence() const {
        // noise rarely keeps every window's contrast high at once, so the
        // worst-window factor is what separates real preambles from chance
        return std::clamp(contrast, 0.0, 1.0) *
               std::clamp(min_contrast, 0.0, 1.0);
    }
};

// Quiet frequencies near the carriers (± 2/T, clear of every carrier) used
// to estimate the local noise floor. A single off-carrier bin is exponential
// and its near-zero tail fakes perfect contrast on pure noise; averaging
// many bins removes that failure mode.
std::vector<double> noise_probe_freqs(const modplan::ModulationPlan& plan) {
    double off = 2.0 / plan.symbol_period;
    std::vector<double> probes;
    for (double c : plan.carriers) {
        for (double f : {c - off, c + off}) {
            if (f <= 0.0 || f >= plan.sample_rate / 2.0)
                continue;
            bool clear = true;
            for (double other : plan.carriers)
                if (std::abs(f - other) < 1.0 / plan.symbol_period)
                    clear = false;
            if (clear)
                probes.push_back(f);
        }
    }
    return probes;
}

CandidateScore score_candidate(const channel::Waveform& w,
                               const modplan::ModulationPlan& plan,
                               const std::vector<int>& pattern,
                               const std::vector<double>& probes,
                               std::size_t offset, std::size_t ns) {
    CandidateScore score;
    score.min_contrast = 1.0;

    double noise_acc = 0.0;
    std::size_t noise_n = 0;
    std::vector<double> e_corr(pattern.size());
    std::vector<double> e_wrong(pattern.size(), 0.0);
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        std::size_t start = offset + i * ns;
        e_corr[i] = carrier_energy(w, plan.carriers[pattern[i]], start, ns);
        for (int c = 0; c < plan.order; ++c) {
            if (c == pattern[i])
                continue;
            double e = carrier_energy(w, plan.carriers[c], start, ns);
            e_wrong[i] = std::max(e_wrong[i], e);
            noise_acc += e;
            ++noise_n;
        }
        for (double f : probes) {
            noise_acc += carrier_energy(w, f, start, ns);
            ++noise_n;
        }
    }
    double noise_est = noise_n > 0 ? noise_acc / static_cast<double>(noise_n) : 0.0;

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        double other = std::max(e_wrong[i], noise_est);
        double wnum = e_corr[i] - other;
        double wden = e_corr[i] + other;
        num += wnum;
        den += wden;
        score.min_contrast =
            std::min(score.min_contrast, wden > 0.0 ? wnum / wden : 0.0);
    }
    score.contrast = den > 0.0 ? num / den : 0.0;
    return score;
}

} // namespace

SyncEstimate acquire_sync(const channel::Waveform& w,
                          const modplan::ModulationPlan& plan,
                          double threshold, std::size_t step) {
    std::size_t ns = static_cast<std::size_t>(plan.samples_per_symbol());
    std::vector<int> pattern = preamble_symbols(plan);
    std::vector<double> probes = noise_probe_freqs(plan);
    std::size_t span = pattern.size() * ns;
    if (w.samples.size() < span)
        fail("NoPreambleFound", "waveform shorter than the preamble");
    if (step == 0)
        step = std::max<std::size_t>(1, ns / 20);

    SyncEstimate best;
    double best_score = -1.0;
    for (std::size_t k = 0; k + span <= w.samples.size(); k += step) {
        double s = score_candidate(w, plan, pattern, probes, k, ns).confidence();
        if (s > best_score + 1e-9) { // prefer the earliest of equal peaks
            best_score = s;
            best.start_offset = k;
            best.confidence = s;
        }
    }
    if (best_score < threshold)
        fail("NoPreambleFound",
             "best preamble confidence " + std::to_string(best_score) +
                 " below threshold " + std::to_string(threshold));
    return best;
}

DemodResult demodulate(const channel::Waveform& w,
                       const modplan::ModulationPlan& plan,
                       const SyncEstimate& sync, std::size_t n_symbols) {
    std::size_t ns = static_cast<std::size_t>(plan.samples_per_symbol());
    DemodResult out;
    out.symbols.bits_per_symbol = plan.bits_per_symbol();
    out.energies.window = static_cast<int>(ns);

    for (std::size_t i = 0; i < n_symbols; ++i) {
        std::size_t start = sync.start_offset + i * ns;
        if (start + ns > w.samples.size()) {
            out.truncated = true;
            break;
        }
        std::vector<double> row(plan.order);
        int best = 0;
        for (int c = 0; c < plan.order; ++c) {
            row[c] = carrier_energy(w, plan.carriers[c], start, ns);
            if (row[c] > row[best]) // strict: ties keep the lowest index
                best = c;
        }
        out.symbols.symbols.push_back(best);
        out.energies.energies.push_back(std::move(row));
    }
    return out;
}

std::vector<BitStream> recover_frames(const BitStream& bits, RecoverStats* stats) {
    check_binary(bits);
    std::vector<BitStream> payloads;
    RecoverStats local;
    std::size_t i = 0;
    bool aligned = false; // after a preamble hit, expect frames back to back
    while (i + framing::kFrameBits <= bits.size()) {
        BitStream payload;
        switch (framing::try_decode_frame(bits, i, payload)) {
        case framing::DecodeStatus::ok:
            payloads.push_back(std::move(payload));
            ++local.frames_found;
            i += framing::kFrameBits;
            aligned = true;
            break;
        case framing::DecodeStatus::crc_mismatch:
            ++local.crc_failures;
            i += framing::kFrameBits; // discard the frame, stay aligned
            break;
        default:
            if (aligned) {
                aligned = false; // lost alignment, fall back to scanning
            }
            ++i;
            break;
        }
    }
    if (stats)
        *stats = local;
    return payloads;
}

} // namespace plmodem::rx
