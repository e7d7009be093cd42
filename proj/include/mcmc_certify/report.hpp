#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcmc_certify/config.hpp"

namespace certify {

/// t-indexed series. `std_error` is empty for analytic curves.
struct Curve {
    std::string name;
    std::vector<std::int64_t> t;
    std::vector<double> value;
    std::vector<double> std_error;
};

struct AnalysisResult {
    std::string method;
    /// Parameters actually used, defaults and optimizer choices included.
    Json params = Json::object();
    Json scalars = Json::object();
    std::vector<Curve> curves;
    std::optional<std::string> error;
};

struct Report {
    Json config_echo;
    std::vector<AnalysisResult> results;
    std::string version;
    std::uint64_t seed = 0;
    double wall_time_seconds = 0.0;

    bool has_failures() const;
};

Json to_json(const Report& report);

/// `t,value[,stderr]` with a header row and 17 significant digits.
std::string curve_csv(const Curve& curve);

/// Writes report.json and `<index>_<method>_<curve>.csv` files as requested
/// by `output`. Returns the paths written.
std::vector<std::filesystem::path> emit(const Report& report, const OutputConfig& output,
                                        const std::filesystem::path& directory);

}  // namespace certify
