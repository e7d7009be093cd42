#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcmc_certify/chains.hpp"
#include "mcmc_certify/error.hpp"

namespace certify {

using Json = nlohmann::ordered_json;

/// Invalid run configuration. `field` is a dotted path such as
/// `analyses[2].delta_level`, or `<syntax>` for malformed JSON.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ChainConfig {
    Family family = Family::Gaussian;
    int p = 1;
    double alpha = 0.0;
    double sigma = 1.0;
    /// IMH only: uniform, cosine or tabulated.
    std::string density;
    std::vector<double> table_x;
    std::vector<double> table_value;
    /// IMH only: two-column CSV, used when the table is not given inline.
    std::string table_path;
};

struct AnalysisRequest {
    std::string method;
    /// Everything in the request object except `method`.
    Json params;
};

struct McConfig {
    long replicas = 1000;
    int horizon = 20;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct OutputConfig {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    ChainConfig chain;
    std::vector<AnalysisRequest> analyses;
    McConfig mc;
    OutputConfig output;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise
/// ConfigError. Each analysis is checked against the method registry.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form with defaults filled in; parse_config accepts it and
/// returns an equal configuration.
Json to_json(const RunConfig& config);

KernelSpec build_kernel(const ChainConfig& chain);
ImhChain build_imh(const ChainConfig& chain);

}  // namespace certify
