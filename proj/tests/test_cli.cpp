#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "noon/io.hpp"
#include "noonsim/commands.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using noon::cli::run;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result noonsim(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path workdir(const std::string& name) {
    const char* env = std::getenv("NOON_TEST_WORKDIR");
    const fs::path base = env != nullptr ? fs::path(env) : fs::temp_directory_path() / "noon_cli";
    const fs::path dir = base / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    return noon::io::read_file(p);
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

// Small but complete reference-parameter configuration.
const char* kSmallConfig = R"({
  "schema_version": 1,
  "model": {"visibility": 0.989, "eta_t": 0.8026, "eta_r": 0.7941, "xi": 0.00155},
  "source": {"pair_prob": 0.0046, "seed": 77},
  "experiment": {"k": 2000, "s": 40, "phases": "0:2pi:24", "events_per_phase": 20000,
                 "bootstrap_resamples": 1000}
})";

} // namespace

TEST_SUITE("cli") {
    TEST_CASE("usage errors") {
        CHECK(noonsim({}).code == noon::cli::kConfigError);
        CHECK(noonsim({"frobnicate"}).code == noon::cli::kConfigError);
        CHECK(noonsim({"simulate"}).code == noon::cli::kConfigError);
        CHECK(noonsim({"--help"}).code == noon::cli::kOk);
        const auto v = noonsim({"--version"});
        CHECK(v.code == noon::cli::kOk);
    }

    TEST_CASE("full pipeline is deterministic") {
        const auto dir = workdir("pipeline");
        const auto cfg = dir / "config.json";
        write(cfg, kSmallConfig);

        auto pipeline = [&](const std::string& tag) {
            const auto scan = dir / (tag + "_scan.csv");
            const auto cal = dir / (tag + "_calib.json");
            const auto fisher = dir / (tag + "_fisher.csv");
            const auto est = dir / (tag + "_est.json");
            const auto report = dir / (tag + "_report.json");
            REQUIRE(noonsim({"simulate", "--config", cfg.string(), "--out", scan.string()}).code ==
                    0);
            REQUIRE(noonsim({"calibrate", "--scan", scan.string(), "--config", cfg.string(),
                             "--out", cal.string()})
                        .code == 0);
            REQUIRE(noonsim({"fisher", "--calib", cal.string(), "--phases", "0:pi:200", "--out",
                             fisher.string()})
                        .code == 0);
            REQUIRE(noonsim({"estimate", "--calib", cal.string(), "--config", cfg.string(),
                             "--phi-true", "1.2", "--out", est.string()})
                        .code == 0);
            REQUIRE(noonsim({"report", "--scan", scan.string(), "--calib", cal.string(),
                             "--fisher", fisher.string(), "--estimate", est.string(),
                             "--config", cfg.string(), "--out", report.string()})
                        .code == 0);
            return std::vector<std::string>{slurp(scan), slurp(cal), slurp(fisher), slurp(est),
                                            slurp(dir / (tag + "_est_samples.csv")),
                                            slurp(report)};
        };
        const auto a = pipeline("a");
        const auto b = pipeline("b");
        REQUIRE(a.size() == b.size());
        // Estimate and report name their own files; compare them with paths removed.
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(a[i] == b[i]);
        }
        CHECK(a[4] == b[4]);
        auto est_a = json::parse(a[3]);
        auto est_b = json::parse(b[3]);
        est_a.erase("estimates_file");
        est_b.erase("estimates_file");
        CHECK(est_a == est_b);

        const json report = json::parse(a[5]);
        CHECK(report.contains("fringe"));
        CHECK(report.contains("fisher"));
        CHECK(report.contains("estimates"));
        CHECK(report.at("estimates").size() == 1);
        CHECK(report.at("fisher").at("max_fisher").get<double>() > 2.0);

        const json est = json::parse(a[3]);
        CHECK(est.at("s") == 40);
        CHECK(est.at("k") == 2000);
        CHECK(est.at("provenance").at("seed") == 77);
        std::istringstream samples(a[4]);
        CHECK(noon::io::read_samples_csv(samples).size() == 40);
    }

    TEST_CASE("seed override changes the scan") {
        const auto dir = workdir("seed");
        const auto cfg = dir / "config.json";
        write(cfg, kSmallConfig);
        REQUIRE(noonsim({"simulate", "--config", cfg.string(), "--phases", "0,0.5",
                         "--events", "500", "--out", (dir / "a.csv").string()})
                    .code == 0);
        REQUIRE(noonsim({"simulate", "--config", cfg.string(), "--phases", "0,0.5",
                         "--events", "500", "--seed", "5", "--out", (dir / "b.csv").string()})
                    .code == 0);
        CHECK(slurp(dir / "a.csv") != slurp(dir / "b.csv"));
        const json meta = json::parse(slurp(dir / "b.csv.meta.json"));
        CHECK(meta.at("provenance").at("seed") == 5);
        CHECK(meta.at("config").at("source").at("seed") == 5);
    }

    TEST_CASE("degree phases on the command line") {
        const auto dir = workdir("degrees");
        const auto cfg = dir / "config.json";
        write(cfg, kSmallConfig);
        REQUIRE(noonsim({"simulate", "--config", cfg.string(), "--phases", "0deg,45deg",
                         "--events", "100", "--out", (dir / "d.csv").string()})
                    .code == 0);
        std::istringstream in(slurp(dir / "d.csv"));
        const auto scan = noon::io::read_scan_csv(in);
        CHECK(scan.rows()[1].phi.radians() == doctest::Approx(noon::kPi / 4));
    }

    TEST_CASE("configuration failures exit with 2") {
        const auto dir = workdir("config");
        write(dir / "bad.json", R"({"model": {"visibility": 2.0}})");
        auto r = noonsim({"simulate", "--config", (dir / "bad.json").string(), "--out",
                          (dir / "x.csv").string()});
        CHECK(r.code == noon::cli::kConfigError);
        CHECK(r.err.find("visibility") != std::string::npos);

        write(dir / "unknown.json", R"({"sauce": {}})");
        CHECK(noonsim({"simulate", "--config", (dir / "unknown.json").string(), "--out",
                       (dir / "x.csv").string()})
                  .code == noon::cli::kConfigError);
        CHECK(noonsim({"simulate", "--config", (dir / "missing.json").string(), "--out",
                       (dir / "x.csv").string()})
                  .code == noon::cli::kConfigError);
        CHECK_FALSE(fs::exists(dir / "x.csv"));
    }

    TEST_CASE("source that never emits exits with 3") {
        const auto dir = workdir("guard");
        write(dir / "dark.json", R"({"source": {"pair_prob": 0}})");
        const auto r = noonsim({"simulate", "--config", (dir / "dark.json").string(),
                                "--phases", "0", "--events", "10", "--out",
                                (dir / "x.csv").string()});
        CHECK(r.code == noon::cli::kSimulationError);
        CHECK(r.err.find("guard") != std::string::npos);
    }

    TEST_CASE("truncated scan fails to calibrate with 4") {
        const auto dir = workdir("truncated");
        write(dir / "cfg.json", kSmallConfig);
        REQUIRE(noonsim({"simulate", "--config", (dir / "cfg.json").string(), "--phases",
                         "0,0.5,1.0", "--events", "1000", "--out", (dir / "s.csv").string()})
                    .code == 0);
        const auto r = noonsim({"calibrate", (dir / "s.csv").string(), "--out",
                                (dir / "c.json").string()});
        CHECK(r.code == noon::cli::kFitError);
        CHECK(r.err.find("insufficient phase coverage") != std::string::npos);
    }

    TEST_CASE("report without a fisher curve names the section") {
        const auto dir = workdir("report");
        write(dir / "cfg.json", kSmallConfig);
        REQUIRE(noonsim({"simulate", "--config", (dir / "cfg.json").string(), "--out",
                         (dir / "s.csv").string()})
                    .code == 0);
        REQUIRE(noonsim({"calibrate", "--scan", (dir / "s.csv").string(), "--out",
                         (dir / "c.json").string()})
                    .code == 0);
        const auto r = noonsim({"report", "--scan", (dir / "s.csv").string(), "--calib",
                                (dir / "c.json").string(), "--out",
                                (dir / "r.json").string()});
        CHECK(r.code == noon::cli::kConfigError);
        CHECK(r.err.find("fisher") != std::string::npos);
    }

    TEST_CASE("fisher of ideal and flat calibrations") {
        const auto dir = workdir("fisher");
        auto make_cal = [&](const std::string& name, double v) {
            noon::io::CalibrationDocument doc;
            noon::InterferometerModel m;
            m.visibility = v;
            doc.curves = noon::calib::curves_from_model(m);
            noon::io::write_file(dir / name, noon::io::calibration_to_json(doc));
        };
        make_cal("ideal.json", 1.0);
        make_cal("flat.json", 0.0);
        REQUIRE(noonsim({"fisher", "--calib", (dir / "ideal.json").string(), "--out",
                         (dir / "ideal.csv").string()})
                    .code == 0);
        REQUIRE(noonsim({"fisher", "--calib", (dir / "flat.json").string(), "--phases",
                         "0:pi:50", "--out", (dir / "flat.csv").string()})
                    .code == 0);
        std::istringstream ideal(slurp(dir / "ideal.csv"));
        const auto ci = noon::io::read_fisher_csv(ideal);
        CHECK(ci.points.size() == 1000);
        for (const auto& p : ci.points) {
            CHECK(std::abs(p.fisher - 4.0) < 1e-9);
        }
        std::istringstream flat(slurp(dir / "flat.csv"));
        for (const auto& p : noon::io::read_fisher_csv(flat).points) {
            CHECK(p.fisher == 0.0);
        }
    }

    TEST_CASE("boundary estimates are flagged") {
        const auto dir = workdir("boundary");
        write(dir / "cfg.json", kSmallConfig);
        noon::io::CalibrationDocument doc;
        noon::InterferometerModel m;
        m.visibility = 0.989;
        m.eta_t = noon::TransmissionProfile::constant(0.8026);
        m.eta_r = noon::TransmissionProfile::constant(0.7941);
        m.xi = 0.00155;
        doc.curves = noon::calib::curves_from_model(m);
        noon::io::write_file(dir / "c.json", noon::io::calibration_to_json(doc));
        const auto r = noonsim({"estimate", "--calib", (dir / "c.json").string(), "--config",
                                (dir / "cfg.json").string(), "--phi-true", "0", "--s", "20",
                                "--bootstrap", "0", "--out", (dir / "e.json").string()});
        REQUIRE(r.code == 0);
        const json e = json::parse(slurp(dir / "e.json"));
        CHECK(e.at("boundary_count").get<int>() > 0);
        CHECK(e.at("boundary_samples").size() == e.at("boundary_count").get<std::size_t>());
    }
}
