#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "noon/calibration.hpp"
#include "noon/estimation.hpp"
#include "noon/rng.hpp"
#include "noon/simulator.hpp"

namespace {

noon::InterferometerModel reference_model() {
    noon::InterferometerModel m;
    m.visibility = 0.989;
    m.eta_t = noon::TransmissionProfile::constant(0.8026);
    m.eta_r = noon::TransmissionProfile::constant(0.7941);
    m.xi = 0.00155;
    return m;
}

void BM_FisherAnalytic(benchmark::State& state) {
    const auto m = reference_model();
    double phi = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::est::fisher_information_analytic(m, noon::Phase(phi)));
        phi = std::fmod(phi + 0.001, 3.0);
    }
}
BENCHMARK(BM_FisherAnalytic);

void BM_FisherCurve(benchmark::State& state) {
    const auto curves = noon::calib::curves_from_model(reference_model());
    std::vector<double> phases(1000);
    for (std::size_t i = 0; i < phases.size(); ++i) {
        phases[i] = 3.14159 * static_cast<double>(i) / 1000.0;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::est::fisher_curve(curves, phases));
    }
}
BENCHMARK(BM_FisherCurve);

void BM_EstimatePhase(benchmark::State& state) {
    const noon::est::PhaseEstimator estimator(noon::calib::curves_from_model(reference_model()));
    noon::sim::SourceConfig cfg;
    cfg.model = reference_model();
    noon::Rng rng(3);
    const auto counts = noon::sim::simulate_trials(cfg, noon::Phase(1.2), 10000, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(estimator.estimate(counts));
    }
}
BENCHMARK(BM_EstimatePhase);

void BM_Bootstrap(benchmark::State& state) {
    noon::Rng rng(5);
    std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
    for (double& x : xs) {
        x = rng.normal();
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::est::bootstrap_sem(xs, 1000, 7));
    }
}
BENCHMARK(BM_Bootstrap)->Arg(500)->Arg(14520);

void BM_FitModel(benchmark::State& state) {
    noon::sim::SourceConfig cfg;
    cfg.model = reference_model();
    std::vector<double> phases(40);
    for (std::size_t i = 0; i < phases.size(); ++i) {
        phases[i] = 6.28318 * static_cast<double>(i) / 40.0;
    }
    const auto scan = noon::sim::simulate_scan(cfg, phases, 20000);
    noon::calib::FitOptions options;
    options.xi = 0.00155;
    for (auto _ : state) {
        benchmark::DoNotOptimize(noon::calib::fit_model(scan, options));
    }
}
BENCHMARK(BM_FitModel)->Unit(benchmark::kMillisecond);

} // namespace
