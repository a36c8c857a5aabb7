#include "plmodem/modplan.hpp"

#include "plmodem/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace plmodem::modplan {

namespace {

bool is_power_of_two(int m) { return m >= 1 && (m & (m - 1)) == 0; }

int ilog2(int m) {
    int b = 0;
    while ((1 << b) < m)
        ++b;
    return b;
}

void validate(const ModulationPlan& plan, const PlanOptions& opts) {
    if (!is_power_of_two(plan.order) || plan.order < 2)
        fail("InvalidOrder", "M must be a power of two >= 2, got " +
                                 std::to_string(plan.order));
    if (plan.symbol_period <= 0.0)
        fail("InvalidSymbolPeriod", "T must be positive");
    if (plan.sample_rate <= 0.0)
        fail("InvalidSampleRate", "sample rate must be positive");
    if (static_cast<int>(plan.carriers.size()) != plan.order)
        fail("InvalidOrder", "carrier count must equal M");

    double nyquist = plan.sample_rate / 2.0;
    for (double f : plan.carriers) {
        if (f <= 0.0 || f >= nyquist)
            fail("NyquistViolation", "carrier " + std::to_string(f) +
                                         " Hz outside (0, " +
                                         std::to_string(nyquist) + ") Hz");
    }
    double min_df = plan.min_spacing();
    for (std::size_t i = 0; i + 1 < plan.carriers.size(); ++i) {
        double df = plan.carriers[i + 1] - plan.carriers[i];
        if (df <= 0.0)
            fail("SpacingViolation", "carriers must be strictly ascending");
        if (df < min_df - 1e-9 && !opts.allow_tight_spacing)
            fail("SpacingViolation",
                 "carrier spacing " + std::to_string(df) + " Hz below 4/T = " +
                     std::to_string(min_df) + " Hz");
    }
    if (!opts.ignore_band) {
        double hi = std::min(opts.band_hi_hz, nyquist);
        for (double f : plan.carriers)
            if (f < opts.band_lo_hz || f > hi)
                fail("BandViolation", "carrier " + std::to_string(f) +
                                          " Hz outside usable band [" +
                                          std::to_string(opts.band_lo_hz) + ", " +
                                          std::to_string(hi) + "] Hz");
    }
}

} // namespace

int ModulationPlan::bits_per_symbol() const { return ilog2(order); }

int ModulationPlan::samples_per_symbol() const {
    return static_cast<int>(std::llround(symbol_period * sample_rate));
}

double ModulationPlan::min_spacing() const { return 4.0 / symbol_period; }

ModulationPlan plan_bfsk(double symbol_period, double f0, double f1,
                         double sample_rate, const PlanOptions& opts) {
    if (f0 == f1)
        fail("SpacingViolation", "f0 and f1 must differ");
    if (f0 > f1)
        fail("SpacingViolation", "carriers must be ascending: f0 < f1");
    ModulationPlan plan;
    plan.order = 2;
    plan.symbol_period = symbol_period;
    plan.carriers = {f0, f1};
    plan.sample_rate = sample_rate;
    validate(plan, opts);
    return plan;
}

ModulationPlan plan_mfsk(int order, double symbol_period, double base,
                         double sample_rate, const PlanOptions& opts) {
    if (!is_power_of_two(order) || order < 2)
        fail("InvalidOrder",
             "M must be a power of two >= 2, got " + std::to_string(order));
    ModulationPlan plan;
    plan.order = order;
    plan.symbol_period = symbol_period;
    plan.sample_rate = sample_rate;
    double spacing = opts.spacing_hz > 0.0 ? opts.spacing_hz : 4.0 / symbol_period;
    plan.carriers.resize(order);
    for (int i = 0; i < order; ++i)
        plan.carriers[i] = base + i * spacing;
    validate(plan, opts);
    return plan;
}

double bandwidth(const ModulationPlan& plan) {
    return (4.0 * plan.order + 3.0) / plan.symbol_period;
}

double bit_rate(const ModulationPlan& plan) {
    return plan.bits_per_symbol() / plan.symbol_period;
}

SymbolStream bits_to_symbols(const BitStream& bits, int order) {
    if (!is_power_of_two(order) || order < 2)
        fail("InvalidOrder",
             "M must be a power of two >= 2, got " + std::to_string(order));
    check_binary(bits);
    SymbolStream out;
    out.bits_per_symbol = ilog2(order);
    int bps = out.bits_per_symbol;
    out.pad_bits =
        bits.size() % bps == 0 ? 0 : bps - static_cast<int>(bits.size() % bps);
    out.symbols.reserve((bits.size() + bps - 1) / bps);
    for (std::size_t i = 0; i < bits.size(); i += bps) {
        int sym = 0;
        for (int j = 0; j < bps; ++j) {
            sym <<= 1;
            if (i + j < bits.size() && bits[i + j])
                sym |= 1;
        }
        out.symbols.push_back(sym);
    }
    return out;
}

BitStream symbols_to_bits(const SymbolStream& symbols) {
    BitStream out;
    out.reserve(symbols.symbols.size() * symbols.bits_per_symbol);
    for (int sym : symbols.symbols) {
        if (sym < 0 || sym >= (1 << symbols.bits_per_symbol))
            fail("InvalidSymbol", "symbol out of range for order");
        for (int j = symbols.bits_per_symbol - 1; j >= 0; --j)
            out.push_back(static_cast<Bit>((sym >> j) & 1));
    }
    return out;
}

std::string ModulationPlan::to_config() const {
    std::ostringstream os;
    os.precision(12);
    os << "M=" << order << "\n";
    os << "T_ms=" << symbol_period * 1000.0 << "\n";
    os << "carriers_hz=";
    for (std::size_t i = 0; i < carriers.size(); ++i)
        os << (i ? "," : "") << carriers[i];
    os << "\n";
    os << "sample_rate_hz=" << sample_rate << "\n";
    return os.str();
}

ModulationPlan ModulationPlan::from_config(const std::string& text) {
    ModulationPlan plan;
    plan.carriers.clear();
    bool have_m = false, have_t = false, have_c = false, have_fs = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos || line.empty() || line[0] == '#')
            continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "M") {
            plan.order = std::stoi(val);
            have_m = true;
        } else if (key == "T_ms") {
            plan.symbol_period = std::stod(val) / 1000.0;
            have_t = true;
        } else if (key == "sample_rate_hz") {
            plan.sample_rate = std::stod(val);
            have_fs = true;
        } else if (key == "carriers_hz") {
            std::istringstream cs(val);
            std::string tok;
            while (std::getline(cs, tok, ','))
                plan.carriers.push_back(std::stod(tok));
            have_c = true;
        }
    }
    if (!have_m || !have_t || !have_c || !have_fs)
        fail("InvalidPlanConfig",
             "plan config needs M, T_ms, carriers_hz, sample_rate_hz");
    // stored plans may carry tight spacing or out-of-band carriers on purpose
    PlanOptions opts;
    opts.ignore_band = true;
    opts.allow_tight_spacing = true;
    validate(plan, opts);
    return plan;
}

ModulationPlan ModulationPlan::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail("FileNotFound", "cannot open plan file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_config(buf.str());
}

void ModulationPlan::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        fail("FileWriteError", "cannot write plan file " + path);
    out << to_config();
}

} // namespace plmodem::modplan
