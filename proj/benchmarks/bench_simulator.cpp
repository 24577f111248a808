#include <benchmark/benchmark.h>

#include <vector>

#include "noon/model.hpp"
#include "noon/rng.hpp"
#include "noon/simulator.hpp"

namespace {

noon::sim::SourceConfig reference_source() {
    noon::sim::SourceConfig cfg;
    cfg.model.visibility = 0.989;
    cfg.model.eta_t = noon::TransmissionProfile::constant(0.8026);
    cfg.model.eta_r = noon::TransmissionProfile::constant(0.7941);
    cfg.model.xi = 0.00155;
    return cfg;
}

void BM_SimulateTrials(benchmark::State& state) {
    const auto cfg = reference_source();
    noon::Rng rng(1);
    const auto k = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::sim::simulate_trials(cfg, noon::Phase(1.2), k, rng));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateTrials)->Arg(1000)->Arg(10000);

void BM_SimulatePulses(benchmark::State& state) {
    auto cfg = reference_source();
    cfg.pair_prob = 1.0;
    cfg.model.xi = 0.0;
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::sim::simulate_pulses(cfg, noon::Phase(0.4), n));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePulses)->Arg(100000)->Arg(1000000);

void BM_SimulateScan(benchmark::State& state) {
    const auto cfg = reference_source();
    std::vector<double> phases;
    for (int i = 0; i < 10; ++i) {
        phases.push_back(0.6 * i);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::sim::simulate_scan(cfg, phases, 10000));
    }
}
BENCHMARK(BM_SimulateScan);

} // namespace
