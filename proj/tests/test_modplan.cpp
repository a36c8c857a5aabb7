#include "plmodem/error.hpp"
#include "plmodem/modplan.hpp"

#include <doctest.h>

#include <random>

using namespace plmodem;
using namespace plmodem::modplan;

TEST_CASE("plan_bfsk accepts the 10/18 kHz reference parameters") {
    auto plan = plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    CHECK(plan.order == 2);
    CHECK(plan.carriers == std::vector<double>{10000.0, 18000.0});
    CHECK(plan.samples_per_symbol() == 240);
}

TEST_CASE("plan_bfsk enforces the 4/T spacing rule") {
    // 4/T = 4 kHz but the carriers are 2 Hz apart
    CHECK_THROWS_WITH_AS(plan_bfsk(0.001, 10000.0, 10002.0, 48000.0),
                         doctest::Contains("SpacingViolation"), Error);
}

TEST_CASE("plan_bfsk enforces Nyquist") {
    CHECK_THROWS_WITH_AS(plan_bfsk(0.005, 10000.0, 25000.0, 48000.0),
                         doctest::Contains("NyquistViolation"), Error);
}

TEST_CASE("plan_mfsk default spacing is exactly 4/T") {
    auto plan = plan_mfsk(2, 0.001, 10000.0, 48000.0);
    CHECK(plan.carriers == std::vector<double>{10000.0, 14000.0});

    PlanOptions wide;
    wide.ignore_band = true;
    auto plan8 = plan_mfsk(8, 0.005, 6000.0, 96000.0, wide);
    REQUIRE(plan8.carriers.size() == 8);
    for (std::size_t i = 0; i + 1 < plan8.carriers.size(); ++i)
        CHECK(plan8.carriers[i + 1] - plan8.carriers[i] ==
              doctest::Approx(800.0).epsilon(1e-12));
}

TEST_CASE("plan_mfsk can span the 12-18 kHz band when T allows it") {
    // spacing 6/7 kHz needs T >= 4/857.14 Hz
    double t = 4.0 / (6000.0 / 7.0);
    auto plan = plan_mfsk(8, t, 12000.0, 48000.0);
    CHECK(plan.carriers.front() == 12000.0);
    CHECK(plan.carriers.back() == doctest::Approx(18000.0));
}

TEST_CASE("plan_mfsk rejects degenerate order and out-of-band carriers") {
    CHECK_THROWS_WITH_AS(plan_mfsk(1, 0.001, 10000.0, 48000.0),
                         doctest::Contains("InvalidOrder"), Error);
    CHECK_THROWS_WITH_AS(plan_mfsk(3, 0.001, 10000.0, 48000.0),
                         doctest::Contains("InvalidOrder"), Error);
    // base carrier 4 kHz sits in the noisy sub-5 kHz region
    CHECK_THROWS_WITH_AS(plan_mfsk(2, 0.001, 4000.0, 48000.0),
                         doctest::Contains("BandViolation"), Error);
    PlanOptions opts;
    opts.ignore_band = true;
    CHECK_NOTHROW(plan_mfsk(2, 0.001, 4000.0, 48000.0, opts));
}

TEST_CASE("bandwidth follows (4M+3)/T") {
    auto b2 = plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    CHECK(bandwidth(b2) == doctest::Approx(2200.0));

    PlanOptions wide;
    wide.ignore_band = true;
    auto m8 = plan_mfsk(8, 0.001, 5000.0, 96000.0, wide);
    CHECK(bandwidth(m8) == doctest::Approx(35000.0));

    // a single keyed carrier occupies about 3/T
    CHECK(3.0 / 0.005 == doctest::Approx(600.0));
}

TEST_CASE("bit_rate follows log2(M)/T") {
    CHECK(bit_rate(plan_bfsk(0.001, 10000.0, 14000.0, 48000.0)) ==
          doctest::Approx(1000.0));
    CHECK(bit_rate(plan_bfsk(0.005, 10000.0, 18000.0, 48000.0)) ==
          doctest::Approx(200.0));
    PlanOptions wide;
    wide.ignore_band = true;
    CHECK(bit_rate(plan_mfsk(8, 0.001, 5000.0, 96000.0, wide)) ==
          doctest::Approx(3000.0));
}

TEST_CASE("bandwidth and bit_rate are monotone in M and T") {
    PlanOptions wide;
    wide.ignore_band = true;
    double prev_b = 0.0;
    for (int m : {2, 4, 8, 16}) {
        auto plan = plan_mfsk(m, 0.01, 5000.0, 400000.0, wide);
        CHECK(bandwidth(plan) > prev_b);
        prev_b = bandwidth(plan);
    }
    auto slow = plan_bfsk(0.01, 10000.0, 14000.0, 48000.0);
    auto fast = plan_bfsk(0.001, 10000.0, 14000.0, 48000.0);
    CHECK(bandwidth(fast) > bandwidth(slow));
    CHECK(bit_rate(fast) > bit_rate(slow));
}

TEST_CASE("bits_to_symbols MSB-first grouping") {
    CHECK(bits_to_symbols({1, 0}, 4).symbols == std::vector<int>{2});
    CHECK(bits_to_symbols({0, 1, 0, 1, 0, 0, 0, 1, 1, 1}, 2).symbols ==
          std::vector<int>{0, 1, 0, 1, 0, 0, 0, 1, 1, 1});
    auto padded = bits_to_symbols({1, 1, 1}, 4);
    CHECK(padded.symbols == std::vector<int>{3, 2});
    CHECK(padded.padded());
    CHECK(padded.pad_bits == 1);
}

TEST_CASE("symbol round trip up to declared padding") {
    std::mt19937_64 rng(23);
    for (int m : {2, 4, 8, 16}) {
        for (int trial = 0; trial < 25; ++trial) {
            BitStream bits(1 + rng() % 64);
            for (auto& b : bits)
                b = static_cast<Bit>(rng() & 1u);
            auto symbols = bits_to_symbols(bits, m);
            BitStream back = symbols_to_bits(symbols);
            REQUIRE(back.size() == bits.size() + symbols.pad_bits);
            CHECK(BitStream(back.begin(), back.begin() + bits.size()) == bits);
            for (std::size_t i = bits.size(); i < back.size(); ++i)
                CHECK(back[i] == 0);
        }
    }
}

TEST_CASE("plan config round trip") {
    auto plan = plan_bfsk(0.005, 10000.0, 18000.0, 48000.0);
    auto parsed = ModulationPlan::from_config(plan.to_config());
    CHECK(parsed.order == plan.order);
    CHECK(parsed.symbol_period == doctest::Approx(plan.symbol_period));
    CHECK(parsed.carriers == plan.carriers);
    CHECK(parsed.sample_rate == plan.sample_rate);
}
