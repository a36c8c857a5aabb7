#pragma once

#include "plmodem/bits.hpp"
#include "plmodem/modplan.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace plmodem::txload {

enum class Mode {
    alg1, // on-off keying: '1' keys the carrier, '0' is pure idle
    bfsk  // every bit keys the carrier assigned to its symbol value
};

// One busy/idle keying segment executed by every worker.
struct Segment {
    double half_cycle = 0.0; // seconds
    std::int64_t cycles = 0;
    bool keyed = false; // false: idle for the whole segment duration
};

struct LoadSchedule {
    std::vector<int> core_ids;
    double carrier_freq = 0.0;     // Hz (primary carrier)
    std::int64_t cycles_for_zero = 0;
    std::int64_t cycles_for_one = 0;
    BitStream bit_sequence;
    double half_cycle = 0.0;       // 0.5 / carrier_freq
    Mode mode = Mode::bfsk;
    std::vector<Segment> segments; // one per bit

    double nominal_duration() const; // seconds, sum of per-bit durations
};

// symbol_cycles == 0 picks round(T * f) per carrier so every bit lasts one
// symbol period.
LoadSchedule build_load_schedule(const BitStream& bits,
                                 const modplan::ModulationPlan& plan,
                                 const std::vector<int>& cores,
                                 std::int64_t symbol_cycles = 0,
                                 Mode mode = Mode::bfsk);

struct TxReport {
    std::uint64_t bits_sent = 0;
    double wall_time = 0.0;
    std::vector<std::uint64_t> overruns_per_core; // phases over 110% nominal
    std::vector<double> cpu_time_per_core;        // CLOCK_THREAD_CPUTIME_ID
    std::vector<int> observed_cores;              // sched_getcpu at end, -1 unknown
    bool pinned = false;     // affinity applied on every worker
    double keyed_fraction = 0.0; // nominal fraction of time spent in keyed bits

    std::string to_json() const;
};

// Runs one worker per core, synchronized by a barrier. Blocking; a single
// transmission per process at a time.
TxReport run_transmission(const LoadSchedule& schedule);

struct UtilizationTrace {
    std::vector<double> samples; // busy fraction in [0, 1]
    double sample_rate = 0.0;
};

// Samples the busy state of the active transmission's workers. Returns an
// all-baseline trace when no transmission is running. May run concurrently
// with run_transmission from another thread.
UtilizationTrace sample_utilization(double duration, double rate);

bool affinity_supported();

} // namespace plmodem::txload
