#include "noonsim/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "noon/calibration.hpp"
#include "noon/error.hpp"
#include "noon/estimation.hpp"
#include "noon/io.hpp"
#include "noon/parallel.hpp"
#include "noon/report.hpp"
#include "noon/rng.hpp"
#include "noon/simulator.hpp"
#include "noon/version.hpp"

namespace noon::cli {

namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
    std::string config;
    std::string phases;
    std::uint64_t events = 0;
    std::string out;
    std::optional<std::uint64_t> seed;
};

struct CalibrateArgs {
    std::string scan;
    std::string out;
    std::string config;
    std::optional<double> pair_prob;
    std::optional<double> xi;
    double xi_err = 0.0;
    std::string weighting = "unweighted";
};

struct FisherArgs {
    std::string calib;
    std::string phases = "0:pi:1000";
    std::string out;
};

struct EstimateArgs {
    std::string calib;
    std::string config;
    std::string phi_true;
    std::optional<std::uint64_t> k;
    std::optional<std::uint64_t> s;
    std::optional<std::uint64_t> bootstrap;
    std::string out;
    std::string samples_out;
    std::optional<std::uint64_t> seed;
};

struct ReportArgs {
    std::string scan;
    std::string calib;
    std::string fisher;
    std::vector<std::string> estimates;
    std::string config;
    std::string out;
};

io::RunConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    io::RunConfig cfg = io::parse_run_config(io::read_file(path));
    if (seed) {
        cfg.seed = *seed;
    }
    return cfg;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    io::RunConfig cfg = load_config(a.config, a.seed);
    const std::vector<double> phases =
        a.phases.empty() ? cfg.phases : io::parse_phase_spec(a.phases);
    if (!a.phases.empty()) {
        cfg.phases = phases;
    }
    if (a.events > 0) {
        cfg.events_per_phase = a.events;
    }
    sim::FringeScan scan;
    try {
        scan = sim::simulate_scan(cfg.source(), phases, cfg.events_per_phase,
                                  default_thread_count());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    std::ostringstream csv;
    io::write_scan_csv(csv, scan);
    io::write_file(a.out, csv.str());

    const std::string config_json = io::run_config_to_json(cfg);
    nlohmann::json meta = {{"schema_version", io::kSchemaVersion},
                           {"kind", "scan_metadata"},
                           {"scan_file", fs::path(a.out).filename().string()},
                           {"rows", scan.size()},
                           {"events_per_phase", cfg.events_per_phase},
                           {"provenance",
                            {{"seed", cfg.seed},
                             {"rng", Rng::kAlgorithm},
                             {"version", kVersion},
                             {"config_hash", io::content_hash(config_json)}}},
                           {"config", nlohmann::json::parse(config_json)}};
    io::write_file(a.out + ".meta.json", meta.dump(2) + "\n");

    std::uint64_t total = 0;
    for (const auto& r : scan.rows()) {
        total += r.counts.recorded();
    }
    out << "simulate: " << scan.size() << " rows, " << total << " recorded events, seed "
        << cfg.seed << " -> " << a.out << '\n';
    return kOk;
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    std::istringstream in(io::read_file(a.scan));
    std::optional<io::RunConfig> cfg;
    if (!a.config.empty()) {
        cfg = load_config(a.config, std::nullopt);
    }
    const sim::FringeScan scan =
        io::read_scan_csv(in, cfg ? cfg->rep_rate_hz : sim::kDefaultRepRateHz);

    calib::FitOptions options;
    if (a.weighting == "counts") {
        options.weighting = calib::Weighting::CountWeighted;
    } else if (a.weighting != "unweighted") {
        throw ConfigError("--weighting must be 'unweighted' or 'counts'");
    }

    calib::CalibrateOptions copts;
    copts.fit = options;
    copts.pair_prob = a.pair_prob;
    if (!copts.pair_prob && cfg) {
        copts.pair_prob = cfg->pair_prob;
    }
    io::CalibrationDocument doc;
    doc.weighting = options.weighting;
    if (a.xi) {
        if (!(*a.xi >= 0.0 && *a.xi <= kMaxXi) || !(a.xi_err >= 0.0)) {
            throw ConfigError("--xi must lie in [0, 0.1] with a non-negative --xi-err");
        }
        copts.xi = a.xi;
        copts.xi_err = a.xi_err;
        doc.xi_source = "fixed";
    } else if (copts.pair_prob && *copts.pair_prob > 0.0) {
        if (!(*copts.pair_prob < 1.0)) {
            throw ConfigError("pair_prob for the xi estimate must lie in (0, 1)");
        }
        doc.xi_source = "pair_prob";
    }
    doc.curves = calib::calibrate(scan, copts);
    doc.curves.model.validate();

    io::write_file(a.out, io::calibration_to_json(doc));
    out << "calibrate: v = " << doc.curves.model.visibility << " +- "
        << doc.curves.visibility_err << ", eta_t = " << doc.curves.eta_t_global
        << ", eta_r = " << doc.curves.eta_r_global << ", xi = " << doc.curves.model.xi
        << " (" << doc.xi_source << "), variation = " << doc.curves.worst_variation()
        << " -> " << a.out << '\n';
    return kOk;
}

int cmd_fisher(const FisherArgs& a, std::ostream& out) {
    const auto doc = io::calibration_from_json(io::read_file(a.calib));
    const auto phases = io::parse_phase_spec(a.phases);
    const auto curve = est::fisher_curve(doc.curves, phases);
    std::ostringstream csv;
    io::write_fisher_csv(csv, curve);
    io::write_file(a.out, csv.str());

    const auto best = std::max_element(
        curve.points.begin(), curve.points.end(),
        [](const auto& x, const auto& y) { return x.fisher < y.fisher; });
    out << "fisher: " << curve.points.size() << " points, max F = " << best->fisher
        << " at phi = " << best->phi << ", adjusted SNL there = " << best->snl_adjusted
        << " -> " << a.out << '\n';
    return kOk;
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    const auto doc = io::calibration_from_json(io::read_file(a.calib));
    io::RunConfig cfg = load_config(a.config, a.seed);
    if (a.k) {
        cfg.k = *a.k;
    }
    if (a.s) {
        cfg.samples = *a.s;
    }
    if (a.bootstrap) {
        cfg.bootstrap_resamples = *a.bootstrap;
    }
    if (cfg.k == 0 || cfg.samples < 2) {
        throw ConfigError("estimate needs k >= 1 and s >= 2");
    }

    est::BatchRequest request;
    request.phi_true = io::parse_angle(a.phi_true);
    request.k = cfg.k;
    request.samples = cfg.samples;
    request.bootstrap_resamples = cfg.bootstrap_resamples;
    request.threads = default_thread_count();

    est::PhaseEstimateBatch batch;
    try {
        batch = est::run_estimation_batch(cfg.source(), doc.curves, request);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    std::string samples_path = a.samples_out;
    if (samples_path.empty()) {
        fs::path p(a.out);
        samples_path = (p.parent_path() / (p.stem().string() + "_samples.csv")).string();
    }
    std::ostringstream csv;
    io::write_samples_csv(csv, batch.estimates);
    io::write_file(samples_path, csv.str());

    io::EstimateDocument edoc;
    edoc.batch = batch;
    edoc.estimates_file = fs::path(samples_path).filename().string();
    edoc.seed = cfg.seed;
    edoc.config_json = io::run_config_to_json(cfg);
    io::write_file(a.out, io::estimate_to_json(edoc));

    out << "estimate: phi_true = " << request.phi_true << ", mean = " << batch.mean
        << ", sem = " << batch.sem << ", snl_sem = " << batch.snl_sem
        << ", crb_sem = " << batch.crb_sem << ", boundary = " << batch.boundary_samples.size()
        << (batch.sem < batch.snl_sem ? " (below SNL)" : " (not below SNL)") << " -> "
        << a.out << '\n';
    return kOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
    io::ReportInputs in;
    if (!a.scan.empty()) {
        in.scan_csv = io::read_file(a.scan);
    }
    if (!a.calib.empty()) {
        in.calibration_json = io::read_file(a.calib);
    }
    if (!a.fisher.empty()) {
        in.fisher_csv = io::read_file(a.fisher);
    }
    for (const auto& e : a.estimates) {
        in.estimate_jsons.push_back(io::read_file(e));
    }
    if (!a.config.empty()) {
        in.config_json = io::read_file(a.config);
    }
    io::write_file(a.out, io::build_report(in));
    out << "report: " << a.estimates.size() << " estimate batch(es) -> " << a.out << '\n';
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"N=2 NOON-state interferometer simulation and phase-estimation toolkit",
                 "noonsim"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Simulate a fringe scan (CSV)");
    simulate->add_option("--config", sim_args.config, "Run configuration JSON")->required();
    simulate->add_option("--phases", sim_args.phases,
                         "start:stop:steps or comma list; 'pi' factors and 'deg' suffix "
                         "accepted (default: from config)");
    simulate->add_option("--events", sim_args.events, "Recorded events per phase");
    simulate->add_option("--out", sim_args.out, "Output scan CSV")->required();
    simulate->add_option("--seed", sim_args.seed, "Override the config seed");

    CalibrateArgs cal_args;
    auto* calibrate = app.add_subcommand("calibrate", "Fit the model to a scan (JSON)");
    calibrate->add_option("--scan,scan", cal_args.scan, "Scan CSV")->required();
    calibrate->add_option("--out", cal_args.out, "Output calibration JSON")->required();
    calibrate->add_option("--config", cal_args.config,
                          "Config supplying pair_prob for the xi estimate");
    calibrate->add_option("--pair-prob", cal_args.pair_prob,
                          "Independently measured single-pair probability per pulse");
    calibrate->add_option("--xi", cal_args.xi, "Use this xi instead of estimating it");
    calibrate->add_option("--xi-err", cal_args.xi_err, "Uncertainty of --xi");
    calibrate->add_option("--weighting", cal_args.weighting, "unweighted | counts");

    FisherArgs fisher_args;
    auto* fisher = app.add_subcommand("fisher", "Fisher information curve (CSV)");
    fisher->add_option("--calib", fisher_args.calib, "Calibration JSON")->required();
    fisher->add_option("--phases", fisher_args.phases, "Phase grid (default 0:pi:1000)");
    fisher->add_option("--out", fisher_args.out, "Output Fisher CSV")->required();

    EstimateArgs est_args;
    auto* estimate = app.add_subcommand("estimate", "Repeated-sample phase estimation");
    estimate->add_option("--calib", est_args.calib, "Calibration JSON")->required();
    estimate->add_option("--config", est_args.config, "Run configuration JSON (truth)")
        ->required();
    estimate->add_option("--phi-true", est_args.phi_true,
                         "True phase; radians, or with 'pi' factor / 'deg' suffix")
        ->required();
    estimate->add_option("--k", est_args.k, "Recorded trials per sample");
    estimate->add_option("--s", est_args.s, "Number of samples");
    estimate->add_option("--bootstrap", est_args.bootstrap, "Bootstrap resamples (0 = off)");
    estimate->add_option("--out", est_args.out, "Output batch JSON")->required();
    estimate->add_option("--samples-out", est_args.samples_out,
                         "Per-sample CSV (default: <out stem>_samples.csv)");
    estimate->add_option("--seed", est_args.seed, "Override the config seed");

    ReportArgs rep_args;
    auto* report = app.add_subcommand("report", "Bundle pipeline outputs (JSON)");
    report->add_option("--scan", rep_args.scan, "Scan CSV");
    report->add_option("--calib", rep_args.calib, "Calibration JSON");
    report->add_option("--fisher", rep_args.fisher, "Fisher CSV");
    report->add_option("--estimate", rep_args.estimates, "Estimate JSON (repeatable)");
    report->add_option("--config", rep_args.config, "Run configuration JSON");
    report->add_option("--out", rep_args.out, "Output report JSON")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*simulate) {
            return cmd_simulate(sim_args, out);
        }
        if (*calibrate) {
            return cmd_calibrate(cal_args, out);
        }
        if (*fisher) {
            return cmd_fisher(fisher_args, out);
        }
        if (*estimate) {
            return cmd_estimate(est_args, out);
        }
        if (*report) {
            return cmd_report(rep_args, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const SimulationError& e) {
        err << "simulation failed: " << e.what() << '\n';
        return kSimulationError;
    } catch (const CalibrationError& e) {
        err << "calibration failed: " << e.what() << '\n';
        return kFitError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    return kConfigError;
}

} // namespace noon::cli
