#include "plmodem/txload.hpp"

#include "plmodem/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#ifdef __linux__
#include <pthread.h>
#include <sched.h>
#include <time.h>
#endif

namespace plmodem::txload {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

namespace {

constexpr double kOverrunFactor = 1.10;
constexpr double kMinHalfCycle = 10e-6;       // busy-wait resolution floor
constexpr double kHybridThresholdHz = 400.0;  // above this, spin-sleep idle
constexpr auto kSpinReserve = std::chrono::microseconds(150);

// Shared busy flags read by sample_utilization while a transmission runs.
constexpr int kMaxWorkers = 256;
std::atomic<std::uint8_t> g_busy_flags[kMaxWorkers];
std::atomic<int> g_active_workers{0};
std::atomic<bool> g_tx_running{false};

void wait_until(Clock::time_point deadline, bool hybrid) {
    if (hybrid) {
        auto sleep_until = deadline - kSpinReserve;
        if (sleep_until > Clock::now())
            std::this_thread::sleep_until(sleep_until);
        while (Clock::now() < deadline) {
        }
    } else {
        std::this_thread::sleep_until(deadline);
    }
}

void spin_until(Clock::time_point deadline) {
    while (Clock::now() < deadline) {
    }
}

double thread_cpu_seconds() {
#ifdef __linux__
    timespec ts{};
    if (clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts) == 0)
        return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
#endif
    return 0.0;
}

bool pin_current_thread(int core) {
#ifdef __linux__
    cpu_set_t set;
    CPU_ZERO(&set);
    CPU_SET(core, &set);
    return pthread_setaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
    (void)core;
    return false;
#endif
}

} // namespace

bool affinity_supported() {
#ifdef __linux__
    cpu_set_t set;
    CPU_ZERO(&set);
    return pthread_getaffinity_np(pthread_self(), sizeof(set), &set) == 0;
#else
    return false;
#endif
}

double LoadSchedule::nominal_duration() const {
    double total = 0.0;
    for (const Segment& s : segments)
        total += 2.0 * s.half_cycle * static_cast<double>(s.cycles);
    return total;
}

LoadSchedule build_load_schedule(const BitStream& bits,
                                 const modplan::ModulationPlan& plan,
                                 const std::vector<int>& cores,
                                 std::int64_t symbol_cycles, Mode mode) {
    if (cores.empty())
        fail("EmptyCoreSet", "at least one core is required");
    std::set<int> distinct(cores.begin(), cores.end());
    if (distinct.size() != cores.size())
        fail("DuplicateCore", "core ids must be distinct");
    unsigned hw = std::thread::hardware_concurrency();
    for (int c : cores)
        if (c < 0 || (hw > 0 && static_cast<unsigned>(c) >= hw))
            fail("InvalidCore", "core " + std::to_string(c) +
                                    " outside this machine's core count");
    check_binary(bits);

    for (double f : plan.carriers)
        if (0.5 / f < kMinHalfCycle)
            fail("FrequencyTooHigh",
                 "half cycle below achievable busy-wait resolution at " +
                     std::to_string(f) + " Hz");

    LoadSchedule sched;
    sched.core_ids = cores;
    sched.bit_sequence = bits;
    sched.mode = mode;
    sched.carrier_freq =
        mode == Mode::alg1 ? plan.carriers.back() : plan.carriers.front();
    sched.half_cycle = 0.5 / sched.carrier_freq;

    auto cycles_for = [&](double f) {
        return symbol_cycles > 0
                   ? symbol_cycles
                   : std::max<std::int64_t>(
                         1, std::llround(plan.symbol_period * f));
    };

    if (mode == Mode::alg1) {
        double f = sched.carrier_freq;
        sched.cycles_for_one = cycles_for(f);
        sched.cycles_for_zero = sched.cycles_for_one;
        for (Bit b : bits)
            sched.segments.push_back({0.5 / f,
                                      b ? sched.cycles_for_one : sched.cycles_for_zero,
                                      b != 0});
    } else {
        auto symbols = modplan::bits_to_symbols(bits, plan.order);
        for (int sym : symbols.symbols) {
            double f = plan.carriers[sym];
            sched.segments.push_back({0.5 / f, cycles_for(f), true});
        }
        sched.cycles_for_one = cycles_for(plan.carriers.back());
        sched.cycles_for_zero = cycles_for(plan.carriers.front());
    }
    return sched;
}

TxReport run_transmission(const LoadSchedule& schedule) {
    if (schedule.segments.empty())
        fail("EmptySchedule", "nothing to transmit");
    bool expected = false;
    if (!g_tx_running.compare_exchange_strong(expected, true))
        fail("TransmissionInProgress",
             "only one transmission per process at a time");
    struct Release {
        ~Release() {
            g_active_workers.store(0);
            g_tx_running.store(false);
        }
    } release;

    // sanity-check the monotonic clock granularity against the fastest phase
    double min_half = schedule.segments.front().half_cycle;
    for (const Segment& s : schedule.segments)
        min_half = std::min(min_half, s.half_cycle);
    {
        auto t0 = Clock::now();
        auto t1 = t0;
        while (t1 == t0)
            t1 = Clock::now();
        double tick = std::chrono::duration<double>(t1 - t0).count();
        if (tick > min_half / 10.0)
            fail("ClockResolutionTooCoarse",
                 "steady clock granularity too coarse for this carrier");
    }

    int n = static_cast<int>(schedule.core_ids.size());
    if (n > kMaxWorkers)
        fail("EmptyCoreSet", "too many workers");

    TxReport report;
    report.overruns_per_core.assign(n, 0);
    report.cpu_time_per_core.assign(n, 0.0);
    report.observed_cores.assign(n, -1);
    std::atomic<int> pinned_count{0};
    for (int i = 0; i < n; ++i)
        g_busy_flags[i].store(0);
    g_active_workers.store(n);

    std::barrier start_barrier(n + 1);
    std::vector<std::thread> workers;
    workers.reserve(n);
    for (int i = 0; i < n; ++i) {
        workers.emplace_back([&, i] {
            if (pin_current_thread(schedule.core_ids[i]))
                pinned_count.fetch_add(1);
            start_barrier.arrive_and_wait();
            auto t = Clock::now();
            std::uint64_t overruns = 0;
            for (const Segment& seg : schedule.segments) {
                auto half = std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(seg.half_cycle));
                bool hybrid = 0.5 / seg.half_cycle > kHybridThresholdHz;
                if (seg.keyed) {
                    for (std::int64_t c = 0; c < seg.cycles; ++c) {
                        auto phase_start = Clock::now();
                        g_busy_flags[i].store(1, std::memory_order_relaxed);
                        t += half;
                        spin_until(t);
                        g_busy_flags[i].store(0, std::memory_order_relaxed);
                        auto busy_took =
                            std::chrono::duration<double>(Clock::now() - phase_start)
                                .count();
                        if (busy_took > kOverrunFactor * seg.half_cycle)
                            ++overruns;
                        auto idle_start = Clock::now();
                        t += half;
                        wait_until(t, hybrid);
                        auto idle_took =
                            std::chrono::duration<double>(Clock::now() - idle_start)
                                .count();
                        if (idle_took > kOverrunFactor * seg.half_cycle)
                            ++overruns;
                    }
                } else {
                    g_busy_flags[i].store(0, std::memory_order_relaxed);
                    auto idle_start = Clock::now();
                    t += half * (2 * seg.cycles);
                    wait_until(t, hybrid);
                    auto idle_took =
                        std::chrono::duration<double>(Clock::now() - idle_start)
                            .count();
                    if (idle_took >
                        kOverrunFactor * 2.0 * seg.half_cycle *
                            static_cast<double>(seg.cycles))
                        ++overruns;
                }
            }
            g_busy_flags[i].store(0, std::memory_order_relaxed);
            report.overruns_per_core[i] = overruns;
            report.cpu_time_per_core[i] = thread_cpu_seconds();
#ifdef __linux__
            report.observed_cores[i] = sched_getcpu();
#endif
        });
    }

    auto start = Clock::now();
    start_barrier.arrive_and_wait();
    for (auto& th : workers)
        th.join();
    report.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    report.bits_sent = schedule.bit_sequence.size();
    report.pinned = pinned_count.load() == n;
    if (!report.pinned)
        std::fprintf(stderr,
                     "warning: AffinityUnsupported - running unpinned\n");
    double keyed = 0.0;
    for (const Segment& s : schedule.segments)
        if (s.keyed)
            keyed += 2.0 * s.half_cycle * static_cast<double>(s.cycles);
    double total = schedule.nominal_duration();
    report.keyed_fraction = total > 0.0 ? keyed / total : 0.0;
    return report;
}

UtilizationTrace sample_utilization(double duration, double rate) {
    if (duration < 0.0)
        fail("InvalidDuration", "duration must be non-negative");
    if (rate <= 0.0)
        fail("RateTooHigh", "rate must be positive");
    if (rate > 1e5)
        fail("RateTooHigh", "rate exceeds the platform's sampling resolution");
    UtilizationTrace trace;
    trace.sample_rate = rate;
    std::size_t count = static_cast<std::size_t>(std::llround(duration * rate));
    trace.samples.reserve(count);
    auto t = Clock::now();
    auto step = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / rate));
    bool hybrid = rate > kHybridThresholdHz;
    for (std::size_t i = 0; i < count; ++i) {
        int workers = g_active_workers.load();
        double busy = 0.0;
        if (g_tx_running.load() && workers > 0) {
            int on = 0;
            for (int w = 0; w < workers; ++w)
                on += g_busy_flags[w].load(std::memory_order_relaxed);
            busy = static_cast<double>(on) / workers;
        }
        trace.samples.push_back(busy);
        t += step;
        wait_until(t, hybrid);
    }
    return trace;
}

std::string TxReport::to_json() const {
    json j;
    j["bits_sent"] = bits_sent;
    j["wall_time_s"] = wall_time;
    j["overruns_per_core"] = overruns_per_core;
    j["cpu_time_per_core_s"] = cpu_time_per_core;
    j["observed_cores"] = observed_cores;
    j["pinned"] = pinned;
    j["keyed_fraction"] = keyed_fraction;
    return j.dump(2);
}

} // namespace plmodem::txload
