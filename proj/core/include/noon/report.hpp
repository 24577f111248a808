#pragma once

#include <optional>
#include <string>
#include <vector>

namespace noon::io {

/// Raw contents of the pipeline artifacts that go into a report bundle.
struct ReportInputs {
    std::optional<std::string> scan_csv;
    std::optional<std::string> calibration_json;
    std::optional<std::string> fisher_csv;
    std::vector<std::string> estimate_jsons;
    std::optional<std::string> config_json;
};

/// Plot-ready bundle: measured and modelled fringes, the Fisher curve with its
/// shot-noise levels, estimate batches against their SNL benchmarks, and a
/// provenance block. Throws ConfigError naming the first missing section.
std::string build_report(const ReportInputs& inputs);

} // namespace noon::io
