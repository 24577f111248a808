#include "doctest.h"

#include <cmath>
#include <set>

#include "noon/error.hpp"
#include "noon/rng.hpp"
#include "noon/simulator.hpp"
#include "oracles.hpp"

using namespace noon;
using namespace noon::sim;

namespace {

SourceConfig ideal_source() {
    SourceConfig c;
    c.pair_prob = 1.0;
    c.seed = 7;
    return c;
}

SourceConfig reference_source(std::uint64_t seed = 11) {
    SourceConfig c;
    c.model = oracle::reference_model();
    c.seed = seed;
    return c;
}

} // namespace

TEST_SUITE("rng") {
    TEST_CASE("substreams are reproducible and distinct") {
        Rng a(5, StreamDomain::ScanRow, 3);
        Rng b(5, StreamDomain::ScanRow, 3);
        Rng c(5, StreamDomain::ScanRow, 4);
        Rng d(5, StreamDomain::PulseChunk, 3);
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
        CHECK(x != d.next());
    }

    TEST_CASE("uniform in [0, 1) with the right mean") {
        Rng r(1);
        double sum = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double u = r.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
            sum += u;
        }
        CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    }

    TEST_CASE("geometric mean is 1/p") {
        Rng r(2);
        for (double p : {0.5, 0.01, 1e-4}) {
            double sum = 0.0;
            const int n = 100000;
            for (int i = 0; i < n; ++i) {
                const double g = r.geometric(p);
                REQUIRE(g >= 1.0);
                sum += g;
            }
            const double sd = std::sqrt((1.0 - p) / (p * p) / n);
            CHECK(std::abs(sum / n - 1.0 / p) < 5.0 * sd);
        }
        CHECK(r.geometric(1.0) == 1.0);
    }

    TEST_CASE("below covers its range uniformly") {
        Rng r(3);
        std::array<int, 7> hist{};
        const int n = 70000;
        for (int i = 0; i < n; ++i) {
            const auto x = r.below(7);
            REQUIRE(x < 7);
            ++hist[x];
        }
        for (int h : hist) {
            CHECK(std::abs(h - n / 7) < 5.0 * std::sqrt(n / 7.0));
        }
    }

    TEST_CASE("normal variates have unit variance") {
        Rng r(4);
        double s1 = 0.0;
        double s2 = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double z = r.normal();
            s1 += z;
            s2 += z * z;
        }
        CHECK(std::abs(s1 / n) < 5.0 / std::sqrt(n));
        CHECK(std::abs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    }
}

TEST_SUITE("source config") {
    TEST_CASE("validation") {
        SourceConfig c;
        CHECK_NOTHROW(c.validate());
        c.pair_prob = -0.1;
        CHECK_THROWS_AS(c.validate(), DomainError);
        c.pair_prob = 0.95;
        c.model.xi = 0.1;
        CHECK_THROWS_AS(c.validate(), DomainError);
        c.model.xi = 0.0;
        c.pair_prob = 1.0;
        CHECK_NOTHROW(c.validate());
        c.rep_rate_hz = 0.0;
        CHECK_THROWS_AS(c.validate(), DomainError);
    }
}

TEST_SUITE("pulse simulation") {
    TEST_CASE("ideal source at zero phase always records a coincidence") {
        const auto cfg = ideal_source();
        Rng rng(cfg.seed);
        for (int i = 0; i < 1000; ++i) {
            const auto e = simulate_pulse(cfg, Phase(0.0), rng);
            REQUIRE(e.has_value());
            CHECK(*e == EventClass::C11);
        }
    }

    TEST_CASE("no pairs and no dark counts record nothing") {
        SourceConfig cfg;
        cfg.pair_prob = 0.0;
        Rng rng(1);
        for (int i = 0; i < 1000; ++i) {
            CHECK_FALSE(simulate_pulse(cfg, Phase(0.5), rng).has_value());
        }
        const auto counts = simulate_pulses(cfg, Phase(0.5), 100000);
        CHECK(counts.recorded() == 0);
        CHECK(counts.pulses == 100000);
        CHECK(counts.pairs_generated == 0);
    }

    TEST_CASE("trials stop at exactly k recorded events") {
        const auto cfg = reference_source();
        Rng rng(cfg.seed, StreamDomain::Generic, 0);
        const auto c = simulate_trials(cfg, Phase(0.9), 10000, rng);
        CHECK(c.recorded() == 10000);
        CHECK(c.pulses >= 10000);
        CHECK(c.pairs_generated >= 10000);

        auto ideal = ideal_source();
        ideal.model = InterferometerModel{};
        Rng rng2(1);
        const auto one = simulate_trials(ideal, Phase(0.0), 1, rng2);
        CHECK(one.c11 == 1);
        CHECK(one.pulses == 1);
        CHECK(one.pairs_generated == 1);
    }

    TEST_CASE("guard limit raises a simulation error") {
        SourceConfig cfg;
        cfg.pair_prob = 0.0;
        Rng rng(1);
        CHECK_THROWS_AS((void)simulate_trials(cfg, Phase(0.3), 10, rng), SimulationError);

        cfg.pair_prob = 1e-9;
        cfg.max_pulses = 1000;
        CHECK_THROWS_AS((void)simulate_trials(cfg, Phase(0.3), 10, rng), SimulationError);
    }

    TEST_CASE("fixed-pulse runs are independent of the thread count") {
        auto cfg = reference_source(99);
        cfg.pair_prob = 0.05;
        const std::uint64_t n = 40'000'000;
        const auto one = simulate_pulses(cfg, Phase(0.8), n, 1);
        const auto four = simulate_pulses(cfg, Phase(0.8), n, 4);
        CHECK(one == four);
        CHECK(one.pulses == n);
    }

    TEST_CASE("scans are independent of the thread count and row order") {
        const auto cfg = reference_source(5);
        const auto phases = oracle::uniform_phases(12);
        const auto a = simulate_scan(cfg, phases, 5000, 1);
        const auto b = simulate_scan(cfg, phases, 5000, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.rows()[i].counts == b.rows()[i].counts);
        }
        // A sub-scan reproduces the matching rows of the full scan.
        const std::vector<double> first{phases[0], phases[1]};
        const auto c = simulate_scan(cfg, first, 5000, 1);
        CHECK(c.rows()[1].counts == a.rows()[1].counts);
    }

    TEST_CASE("different seeds give different scans") {
        const auto phases = oracle::uniform_phases(4);
        const auto a = simulate_scan(reference_source(1), phases, 2000);
        const auto b = simulate_scan(reference_source(2), phases, 2000);
        CHECK_FALSE(a.rows()[0].counts == b.rows()[0].counts);
    }

    TEST_CASE("scan rows hold the requested events") {
        const std::vector<double> phases{0.0};
        const auto scan = simulate_scan(reference_source(), phases, 250000);
        REQUIRE(scan.size() == 1);
        CHECK(scan.rows()[0].counts.recorded() == 250000);
        CHECK(scan.rows()[0].acquisition.target == 250000);
        CHECK(scan.rows()[0].acquisition.duration_s > 0.0);
    }

    TEST_CASE("fringe extremes of the ideal interferometer") {
        auto cfg = ideal_source();
        const std::vector<double> phases{0.0, kPi / 2};
        const auto scan = simulate_scan(cfg, phases, 100000);
        const auto& r0 = scan.rows()[0].counts;
        const auto& r1 = scan.rows()[1].counts;
        CHECK(r0.c11 == r0.recorded());
        CHECK(r1.c11 == 0);
    }

    TEST_CASE("dark clicks alone produce events") {
        SourceConfig cfg;
        cfg.pair_prob = 0.0;
        cfg.model.dark_prob = 1e-3;
        const auto c = simulate_pulses(cfg, Phase(0.2), 1'000'000);
        const double expected = 1.0 - (1.0 - 1e-3) * (1.0 - 1e-3);
        const double sd = std::sqrt(expected * 1e6);
        CHECK(std::abs(static_cast<double>(c.recorded()) - expected * 1e6) < 5.0 * sd);
        CHECK(c.c11 < 20);
    }

    TEST_CASE("invalid scans are rejected") {
        ScanRow a;
        a.phi = Phase(1.0);
        ScanRow b;
        b.phi = Phase(0.5);
        CHECK_THROWS_AS(FringeScan({a, b}), DomainError);
        b.phi = Phase(7.0);
        CHECK_THROWS_AS(FringeScan({a, b}), DomainError);
        ScanRow bad;
        bad.phi = Phase(0.1);
        bad.counts.c11 = 5;
        bad.counts.pulses = 2;
        CHECK_THROWS_AS(FringeScan({bad}), DomainError);
    }
}
