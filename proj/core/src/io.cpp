#include "noon/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "noon/rng.hpp"
#include "noon/version.hpp"

namespace noon::io {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double parse_number(std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::uint64_t parse_count(std::string_view text) {
    std::uint64_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("not a non-negative integer: '" + std::string(text) + "'");
    }
    return value;
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
    if (!obj.is_object()) {
        throw ConfigError(std::string(where) + " must be a JSON object");
    }
    const std::set<std::string_view> keys(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (!keys.contains(key)) {
            throw ConfigError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string(where) + "." + key + ": " + e.what());
    }
}

json profile_to_json(const TransmissionProfile& p, const std::vector<double>& errors) {
    json out;
    out["phis"] = std::vector<double>(p.grid().begin(), p.grid().end());
    out["values"] = std::vector<double>(p.values().begin(), p.values().end());
    out["errors"] = errors;
    return out;
}

TransmissionProfile profile_from_json(const json& j, std::string_view where) {
    if (j.is_number()) {
        return TransmissionProfile::constant(j.get<double>());
    }
    reject_unknown_keys(j, {"phis", "values", "errors"}, where);
    const auto phis = get_or<std::vector<double>>(j, "phis", {}, where);
    const auto values = get_or<std::vector<double>>(j, "values", {}, where);
    if (phis.empty()) {
        if (values.size() != 1) {
            throw ConfigError(std::string(where) + ": constant profile needs one value");
        }
        return TransmissionProfile::constant(values.front());
    }
    return TransmissionProfile::tabulated(phis, values);
}

json profile_config_json(const TransmissionProfile& p) {
    if (p.is_constant()) {
        return p.min();
    }
    json out;
    out["phis"] = std::vector<double>(p.grid().begin(), p.grid().end());
    out["values"] = std::vector<double>(p.values().begin(), p.values().end());
    return out;
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + " is not valid JSON: " + e.what());
    }
}

std::vector<std::string> read_data_lines(std::istream& in, std::string_view header,
                                         std::string_view what) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != header) {
        throw ConfigError(std::string(what) + ": expected header '" + std::string(header) +
                          "'");
    }
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double failed");
    }
    return std::string(buf, ptr);
}

double parse_angle(std::string_view raw) {
    std::string text = trim(raw);
    if (text.empty()) {
        throw ConfigError("empty angle");
    }
    auto ends_with = [&](std::string_view suffix) {
        return text.size() >= suffix.size() &&
               text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with("deg")) {
        text.resize(text.size() - 3);
        return parse_number(trim(text)) * kPi / 180.0;
    }
    double divisor = 1.0;
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        divisor = parse_number(trim(std::string_view(text).substr(slash + 1)));
        text.resize(slash);
        text = trim(text);
        if (divisor == 0.0) {
            throw ConfigError("division by zero in angle '" + std::string(raw) + "'");
        }
    }
    double value = 0.0;
    if (ends_with("pi")) {
        text.resize(text.size() - 2);
        text = trim(text);
        value = (text.empty() ? 1.0 : text == "-" ? -1.0 : parse_number(text)) * kPi;
    } else {
        value = parse_number(text);
    }
    value /= divisor;
    if (!std::isfinite(value)) {
        throw ConfigError("angle is not finite: '" + std::string(raw) + "'");
    }
    return value;
}

std::vector<double> parse_phase_spec(std::string_view spec) {
    const std::string text = trim(spec);
    if (text.empty()) {
        throw ConfigError("empty phase specification");
    }
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) {
            throw ConfigError("phase range must be start:stop:steps, got '" + text + "'");
        }
        const double start = parse_angle(parts[0]);
        const double stop = parse_angle(parts[1]);
        const std::uint64_t steps = parse_count(parts[2]);
        if (steps == 0) {
            throw ConfigError("phase range needs at least one step");
        }
        for (std::uint64_t i = 0; i < steps; ++i) {
            out.push_back(start + (stop - start) * static_cast<double>(i) /
                                      static_cast<double>(steps));
        }
        return out;
    }
    for (const auto& part : split(text, ',')) {
        out.push_back(parse_angle(part));
    }
    return out;
}

sim::SourceConfig RunConfig::source() const {
    sim::SourceConfig s;
    s.pair_prob = pair_prob;
    s.model = model;
    s.seed = seed;
    s.rep_rate_hz = rep_rate_hz;
    s.max_pulses = max_pulses;
    return s;
}

InterferometerModel RunConfig::reference_model() {
    InterferometerModel m;
    m.visibility = 0.989;
    m.eta_t = TransmissionProfile::constant(0.8026);
    m.eta_r = TransmissionProfile::constant(0.7941);
    m.xi = 0.00155;
    m.dark_prob = 0.0;
    return m;
}

std::vector<double> RunConfig::default_phases() {
    std::vector<double> out(100);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = kTwoPi * static_cast<double>(i) / 100.0;
    }
    return out;
}

RunConfig parse_run_config(std::string_view json_text) {
    const json root = parse_json(json_text, "config");
    RunConfig cfg;
    try {
        reject_unknown_keys(root, {"schema_version", "model", "source", "experiment"},
                            "config");
        if (root.contains("schema_version") &&
            get_or<int>(root, "schema_version", kSchemaVersion, "config") != kSchemaVersion) {
            throw ConfigError("unsupported schema_version");
        }
        if (root.contains("model")) {
            const json& m = root.at("model");
            reject_unknown_keys(m,
                                {"visibility", "eta_t", "eta_r", "xi", "dark_prob",
                                 "photon_number"},
                                "model");
            cfg.model.visibility = get_or(m, "visibility", cfg.model.visibility, "model");
            if (m.contains("eta_t")) {
                cfg.model.eta_t = profile_from_json(m.at("eta_t"), "model.eta_t");
            }
            if (m.contains("eta_r")) {
                cfg.model.eta_r = profile_from_json(m.at("eta_r"), "model.eta_r");
            }
            cfg.model.xi = get_or(m, "xi", cfg.model.xi, "model");
            cfg.model.dark_prob = get_or(m, "dark_prob", cfg.model.dark_prob, "model");
            cfg.model.photon_number =
                get_or(m, "photon_number", cfg.model.photon_number, "model");
        }
        if (root.contains("source")) {
            const json& s = root.at("source");
            reject_unknown_keys(s, {"pair_prob", "seed", "rep_rate_hz", "max_pulses"},
                                "source");
            cfg.pair_prob = get_or(s, "pair_prob", cfg.pair_prob, "source");
            cfg.seed = get_or(s, "seed", cfg.seed, "source");
            cfg.rep_rate_hz = get_or(s, "rep_rate_hz", cfg.rep_rate_hz, "source");
            if (s.contains("max_pulses")) {
                const double mp = get_or(s, "max_pulses", 0.0, "source");
                if (!(mp >= 1.0 && mp <= 1.8e19)) {
                    throw ConfigError("source.max_pulses must be a positive count");
                }
                cfg.max_pulses = static_cast<std::uint64_t>(mp);
            }
        }
        if (root.contains("experiment")) {
            const json& e = root.at("experiment");
            reject_unknown_keys(
                e, {"k", "s", "phases", "events_per_phase", "bootstrap_resamples"},
                "experiment");
            cfg.k = get_or(e, "k", cfg.k, "experiment");
            cfg.samples = get_or(e, "s", cfg.samples, "experiment");
            cfg.events_per_phase =
                get_or(e, "events_per_phase", cfg.events_per_phase, "experiment");
            cfg.bootstrap_resamples =
                get_or(e, "bootstrap_resamples", cfg.bootstrap_resamples, "experiment");
            if (e.contains("phases")) {
                const json& p = e.at("phases");
                if (p.is_string()) {
                    cfg.phases = parse_phase_spec(p.get<std::string>());
                } else {
                    cfg.phases = get_or<std::vector<double>>(e, "phases", {}, "experiment");
                }
            }
        }
        cfg.source().validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (cfg.k == 0) {
        throw ConfigError("experiment.k must be at least 1");
    }
    if (cfg.events_per_phase == 0) {
        throw ConfigError("experiment.events_per_phase must be at least 1");
    }
    return cfg;
}

std::string run_config_to_json(const RunConfig& c) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["model"] = {{"visibility", c.model.visibility},
                  {"eta_t", profile_config_json(c.model.eta_t)},
                  {"eta_r", profile_config_json(c.model.eta_r)},
                  {"xi", c.model.xi},
                  {"dark_prob", c.model.dark_prob},
                  {"photon_number", c.model.photon_number}};
    j["source"] = {{"pair_prob", c.pair_prob},
                   {"seed", c.seed},
                   {"rep_rate_hz", c.rep_rate_hz},
                   {"max_pulses", c.max_pulses}};
    j["experiment"] = {{"k", c.k},
                       {"s", c.samples},
                       {"phases", c.phases},
                       {"events_per_phase", c.events_per_phase},
                       {"bootstrap_resamples", c.bootstrap_resamples}};
    return j.dump(2) + "\n";
}

std::string content_hash(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out = "fnv1a64:";
    for (int shift = 60; shift >= 0; shift -= 4) {
        out.push_back(kHex[(h >> shift) & 0xF]);
    }
    return out;
}

void write_scan_csv(std::ostream& out, const sim::FringeScan& scan) {
    out << kScanHeader << '\n';
    for (const auto& r : scan.rows()) {
        out << format_double(r.phi.radians()) << ',' << r.counts.c11 << ',' << r.counts.c20
            << ',' << r.counts.c02 << ',' << r.counts.pulses << ','
            << r.counts.pairs_generated << '\n';
    }
}

sim::FringeScan read_scan_csv(std::istream& in, double rep_rate_hz) {
    std::vector<sim::ScanRow> rows;
    std::size_t line_no = 1;
    for (const auto& line : read_data_lines(in, kScanHeader, "scan CSV")) {
        ++line_no;
        const auto cells = split(line, ',');
        if (cells.size() != 6) {
            throw ConfigError("scan CSV line " + std::to_string(line_no) +
                              ": expected 6 columns");
        }
        sim::ScanRow row;
        try {
            row.phi = Phase(parse_number(cells[0]));
        } catch (const DomainError& e) {
            throw ConfigError("scan CSV line " + std::to_string(line_no) + ": " + e.what());
        }
        row.counts.c11 = parse_count(cells[1]);
        row.counts.c20 = parse_count(cells[2]);
        row.counts.c02 = parse_count(cells[3]);
        row.counts.pulses = parse_count(cells[4]);
        row.counts.pairs_generated = parse_count(cells[5]);
        row.acquisition = {sim::Acquisition::Mode::FixedEvents, row.counts.recorded(),
                           static_cast<double>(row.counts.pulses) / rep_rate_hz};
        rows.push_back(row);
    }
    try {
        return sim::FringeScan(std::move(rows));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("scan CSV: ") + e.what());
    }
}

std::string calibration_to_json(const CalibrationDocument& doc) {
    const auto& c = doc.curves;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "calibration";
    j["visibility"] = c.model.visibility;
    j["visibility_err"] = c.visibility_err;
    j["eta_t"] = profile_to_json(c.model.eta_t, c.eta_t_err);
    j["eta_r"] = profile_to_json(c.model.eta_r, c.eta_r_err);
    j["eta_t_global"] = {{"value", c.eta_t_global}, {"err", c.eta_t_global_err}};
    j["eta_r_global"] = {{"value", c.eta_r_global}, {"err", c.eta_r_global_err}};
    j["xi"] = c.model.xi;
    j["xi_err"] = c.xi_err;
    j["xi_source"] = doc.xi_source;
    j["dark_prob"] = c.model.dark_prob;
    json per_phase = json::array();
    for (const auto& p : c.per_phase) {
        per_phase.push_back({{"phi", p.phi},
                             {"eta_t", p.eta_t},
                             {"eta_t_err", p.eta_t_err},
                             {"eta_r", p.eta_r},
                             {"eta_r_err", p.eta_r_err},
                             {"well_conditioned", p.well_conditioned}});
    }
    j["per_phase"] = per_phase;
    j["fit"] = {{"residual", c.residual},
                {"converged", c.converged},
                {"evaluations", c.evaluations},
                {"weighting", doc.weighting == calib::Weighting::Unweighted ? "unweighted"
                                                                            : "counts"},
                {"offsets", {{"phase", c.phase_offset}, {"baseline", c.baseline}}},
                {"variation",
                 {{"eta_t", c.variation_t},
                  {"eta_r", c.variation_r},
                  {"worst", c.worst_variation()}}}};
    return j.dump(2) + "\n";
}

CalibrationDocument calibration_from_json(std::string_view json_text) {
    const json j = parse_json(json_text, "calibration");
    CalibrationDocument doc;
    auto& c = doc.curves;
    try {
        if (j.value("kind", std::string()) != "calibration") {
            throw ConfigError("document is not a calibration (kind != \"calibration\")");
        }
        c.model.visibility = j.at("visibility").get<double>();
        c.visibility_err = j.at("visibility_err").get<double>();
        c.model.eta_t = profile_from_json(j.at("eta_t"), "eta_t");
        c.model.eta_r = profile_from_json(j.at("eta_r"), "eta_r");
        c.eta_t_err = j.at("eta_t").value("errors", std::vector<double>{});
        c.eta_r_err = j.at("eta_r").value("errors", std::vector<double>{});
        c.model.xi = j.at("xi").get<double>();
        c.xi_err = j.value("xi_err", 0.0);
        c.model.dark_prob = j.value("dark_prob", 0.0);
        doc.xi_source = j.value("xi_source", std::string("none"));
        c.xi_estimated = doc.xi_source == "pair_prob";
        if (j.contains("eta_t_global")) {
            c.eta_t_global = j.at("eta_t_global").at("value").get<double>();
            c.eta_t_global_err = j.at("eta_t_global").at("err").get<double>();
        }
        if (j.contains("eta_r_global")) {
            c.eta_r_global = j.at("eta_r_global").at("value").get<double>();
            c.eta_r_global_err = j.at("eta_r_global").at("err").get<double>();
        }
        for (const auto& p : j.value("per_phase", json::array())) {
            c.per_phase.push_back({p.at("phi").get<double>(), p.at("eta_t").get<double>(),
                                   p.at("eta_t_err").get<double>(),
                                   p.at("eta_r").get<double>(),
                                   p.at("eta_r_err").get<double>(),
                                   p.at("well_conditioned").get<bool>()});
        }
        const json& fit = j.at("fit");
        c.residual = fit.at("residual").get<double>();
        c.converged = fit.at("converged").get<bool>();
        c.evaluations = fit.value("evaluations", std::size_t{0});
        doc.weighting = fit.value("weighting", std::string("unweighted")) == "counts"
                            ? calib::Weighting::CountWeighted
                            : calib::Weighting::Unweighted;
        if (fit.contains("offsets")) {
            c.phase_offset = fit.at("offsets").value("phase", 0.0);
            c.baseline = fit.at("offsets").value("baseline", 0.0);
        }
        c.variation_t = c.model.eta_t.variation();
        c.variation_r = c.model.eta_r.variation();
        c.model.validate();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed calibration: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid calibration: ") + e.what());
    }
    if (!c.converged) {
        throw ConfigError("calibration is flagged as not converged");
    }
    return doc;
}

void write_fisher_csv(std::ostream& out, const est::FisherCurve& curve) {
    out << kFisherHeader << '\n';
    for (const auto& p : curve.points) {
        out << format_double(p.phi) << ',' << format_double(p.fisher) << ','
            << format_double(p.f_lo) << ',' << format_double(p.f_hi) << ','
            << format_double(p.snl) << ',' << format_double(p.snl_adjusted) << '\n';
    }
}

est::FisherCurve read_fisher_csv(std::istream& in) {
    est::FisherCurve curve;
    for (const auto& line : read_data_lines(in, kFisherHeader, "Fisher CSV")) {
        const auto cells = split(line, ',');
        if (cells.size() != 6) {
            throw ConfigError("Fisher CSV: expected 6 columns");
        }
        curve.points.push_back({parse_number(cells[0]), parse_number(cells[1]),
                                parse_number(cells[2]), parse_number(cells[3]),
                                parse_number(cells[4]), parse_number(cells[5])});
    }
    return curve;
}

void write_samples_csv(std::ostream& out, std::span<const double> estimates) {
    out << kSamplesHeader << '\n';
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        out << i << ',' << format_double(estimates[i]) << '\n';
    }
}

std::vector<double> read_samples_csv(std::istream& in) {
    std::vector<double> out;
    for (const auto& line : read_data_lines(in, kSamplesHeader, "samples CSV")) {
        const auto cells = split(line, ',');
        if (cells.size() != 2 || parse_count(cells[0]) != out.size()) {
            throw ConfigError("samples CSV: expected consecutive sample ids");
        }
        out.push_back(parse_number(cells[1]));
    }
    return out;
}

std::string estimate_to_json(const EstimateDocument& doc) {
    const auto& b = doc.batch;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = "estimate";
    j["phi_true"] = b.phi_true ? json(*b.phi_true) : json(nullptr);
    j["estimates_file"] = doc.estimates_file;
    j["mean"] = b.mean;
    j["stddev"] = b.stddev;
    j["sem"] = b.sem;
    if (b.bootstrap) {
        j["sem_ci"] = {b.bootstrap->ci_lo, b.bootstrap->ci_hi};
        j["bootstrap_sem"] = b.bootstrap->sem;
    } else {
        j["sem_ci"] = nullptr;
        j["bootstrap_sem"] = nullptr;
    }
    j["snl_sem"] = b.snl_sem;
    j["crb_sem"] = std::isfinite(b.crb_sem) ? json(b.crb_sem) : json(nullptr);
    j["fisher"] = b.fisher;
    j["k"] = b.k;
    j["s"] = b.samples();
    j["k_tilde_ratio"] = b.account.k_tilde_ratio();
    j["xi"] = b.account.xi;
    j["eta_min"] = b.account.eta_min;
    j["f_snl"] = b.account.f_snl;
    j["n_tot"] = b.account.total_resources(b.samples());
    j["boundary_samples"] = b.boundary_samples;
    j["boundary_count"] = b.boundary_samples.size();
    j["below_snl"] = b.sem < b.snl_sem;
    j["provenance"] = {{"seed", doc.seed},
                       {"rng", Rng::kAlgorithm},
                       {"version", kVersion},
                       {"config_hash", content_hash(doc.config_json)}};
    if (!doc.config_json.empty()) {
        j["config"] = json::parse(doc.config_json);
    }
    return j.dump(2) + "\n";
}

EstimateSummary estimate_summary_from_json(std::string_view json_text) {
    const json j = parse_json(json_text, "estimate");
    EstimateSummary s;
    try {
        if (j.value("kind", std::string()) != "estimate") {
            throw ConfigError("document is not an estimate (kind != \"estimate\")");
        }
        if (!j.at("phi_true").is_null()) {
            s.phi_true = j.at("phi_true").get<double>();
        }
        s.mean = j.at("mean").get<double>();
        s.sem = j.at("sem").get<double>();
        if (j.at("sem_ci").is_array()) {
            s.sem_ci_lo = j.at("sem_ci").at(0).get<double>();
            s.sem_ci_hi = j.at("sem_ci").at(1).get<double>();
        }
        s.snl_sem = j.at("snl_sem").get<double>();
        s.crb_sem = j.at("crb_sem").is_null() ? std::numeric_limits<double>::infinity()
                                              : j.at("crb_sem").get<double>();
        s.k = j.at("k").get<std::uint64_t>();
        s.s = j.at("s").get<std::uint64_t>();
        s.k_tilde_ratio = j.at("k_tilde_ratio").get<double>();
        s.boundary_count = j.at("boundary_count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed estimate: ") + e.what());
    }
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write '" + path.string() + "'");
        }
        out << contents;
        if (!out) {
            throw ConfigError("write to '" + path.string() + "' failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace noon::io
