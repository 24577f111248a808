#include "noon/report.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"
#include "noon/io.hpp"
#include "noon/rng.hpp"
#include "noon/version.hpp"

namespace noon::io {

using nlohmann::json;

namespace {

json fringe_section(const std::string& scan_csv, const CalibrationDocument& calib) {
    std::istringstream in(scan_csv);
    const auto scan = read_scan_csv(in);
    json rows = json::array();
    for (const auto& r : scan.rows()) {
        const auto n = static_cast<double>(r.counts.recorded());
        const auto model = recorded_probs(calib.curves.model, r.phi);
        json row = {{"phi", r.phi.radians()},
                    {"c11", r.counts.c11},
                    {"c20", r.counts.c20},
                    {"c02", r.counts.c02},
                    {"model", {{"p11", model.p11}, {"p20", model.p20}, {"p02", model.p02}}}};
        if (n > 0.0) {
            row["measured"] = {{"p11", static_cast<double>(r.counts.c11) / n},
                               {"p20", static_cast<double>(r.counts.c20) / n},
                               {"p02", static_cast<double>(r.counts.c02) / n}};
        } else {
            row["measured"] = nullptr;
        }
        rows.push_back(row);
    }
    const auto& c = calib.curves;
    return {{"rows", rows},
            {"calibration",
             {{"visibility", c.model.visibility},
              {"visibility_err", c.visibility_err},
              {"eta_t", c.eta_t_global},
              {"eta_r", c.eta_r_global},
              {"xi", c.model.xi},
              {"xi_err", c.xi_err},
              {"variation", c.worst_variation()}}}};
}

json fisher_section(const std::string& fisher_csv) {
    std::istringstream in(fisher_csv);
    const auto curve = read_fisher_csv(in);
    json points = json::array();
    json intervals = json::array();
    double best = -1.0;
    double best_phi = 0.0;
    bool in_violation = false;
    double open_phi = 0.0;
    double last_phi = 0.0;
    for (const auto& p : curve.points) {
        points.push_back({{"phi", p.phi},
                          {"fisher", p.fisher},
                          {"f_lo", p.f_lo},
                          {"f_hi", p.f_hi},
                          {"snl", p.snl},
                          {"snl_adjusted", p.snl_adjusted}});
        if (p.fisher > best) {
            best = p.fisher;
            best_phi = p.phi;
        }
        const bool above = p.fisher > p.snl_adjusted;
        if (above && !in_violation) {
            in_violation = true;
            open_phi = p.phi;
        } else if (!above && in_violation) {
            intervals.push_back({open_phi, last_phi});
            in_violation = false;
        }
        last_phi = p.phi;
    }
    if (in_violation) {
        intervals.push_back({open_phi, last_phi});
    }
    return {{"points", points},
            {"max_fisher", best},
            {"phi_at_max", best_phi},
            {"violation_intervals", intervals}};
}

} // namespace

std::string build_report(const ReportInputs& inputs) {
    if (!inputs.scan_csv) {
        throw ConfigError("missing section: fringe (no scan CSV given)");
    }
    if (!inputs.calibration_json) {
        throw ConfigError("missing section: calibration (no calibration JSON given)");
    }
    if (!inputs.fisher_csv) {
        throw ConfigError("missing section: fisher (no Fisher CSV given)");
    }
    if (inputs.estimate_jsons.empty()) {
        throw ConfigError("missing section: estimates (no estimate JSON given)");
    }

    const auto calib = calibration_from_json(*inputs.calibration_json);
    json report;
    report["schema_version"] = kSchemaVersion;
    report["kind"] = "report";
    report["fringe"] = fringe_section(*inputs.scan_csv, calib);
    report["fisher"] = fisher_section(*inputs.fisher_csv);

    std::vector<EstimateSummary> summaries;
    for (const auto& text : inputs.estimate_jsons) {
        summaries.push_back(estimate_summary_from_json(text));
    }
    std::stable_sort(summaries.begin(), summaries.end(), [](const auto& a, const auto& b) {
        return a.phi_true.value_or(a.mean) < b.phi_true.value_or(b.mean);
    });
    json estimates = json::array();
    json below_range = nullptr;
    std::size_t below_count = 0;
    for (const auto& s : summaries) {
        const bool below = s.sem < s.snl_sem;
        estimates.push_back(
            {{"phi_true", s.phi_true ? json(*s.phi_true) : json(nullptr)},
             {"mean", s.mean},
             {"sem", s.sem},
             {"sem_ci", s.sem_ci_lo ? json::array({*s.sem_ci_lo, *s.sem_ci_hi}) : json(nullptr)},
             {"snl_sem", s.snl_sem},
             {"crb_sem", std::isfinite(s.crb_sem) ? json(s.crb_sem) : json(nullptr)},
             {"k", s.k},
             {"s", s.s},
             {"k_tilde_ratio", s.k_tilde_ratio},
             {"boundary_count", s.boundary_count},
             {"below_snl", below}});
        if (below) {
            ++below_count;
            const double phi = s.phi_true.value_or(s.mean);
            if (below_range.is_null()) {
                below_range = json::array({phi, phi});
            } else {
                below_range[0] = std::min(below_range[0].get<double>(), phi);
                below_range[1] = std::max(below_range[1].get<double>(), phi);
            }
        }
    }
    report["estimates"] = estimates;
    report["summary"] = {
        {"fisher_violation", !report["fisher"]["violation_intervals"].empty()},
        {"sub_snl_estimates", below_count},
        {"sub_snl_phi_range", below_range}};

    json provenance = {{"version", kVersion},
                       {"rng", Rng::kAlgorithm},
                       {"input_hashes",
                        {{"scan", content_hash(*inputs.scan_csv)},
                         {"calibration", content_hash(*inputs.calibration_json)},
                         {"fisher", content_hash(*inputs.fisher_csv)}}}};
    if (inputs.config_json) {
        const auto cfg = parse_run_config(*inputs.config_json);
        provenance["config_hash"] = content_hash(*inputs.config_json);
        provenance["seed"] = cfg.seed;
    } else {
        provenance["config_hash"] = nullptr;
        provenance["seed"] = nullptr;
    }
    report["provenance"] = provenance;
    return report.dump(2) + "\n";
}

} // namespace noon::io
