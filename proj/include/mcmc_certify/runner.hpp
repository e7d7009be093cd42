#pragma once

#include <string>
#include <vector>

#include "mcmc_certify/config.hpp"
#include "mcmc_certify/report.hpp"

namespace certify {

/// Names of every analysis method the runner accepts.
std::vector<std::string> method_names();

/// Checks one request against the method's parameter schema and the chain.
/// Throws ConfigError naming `field_prefix.<param>`.
void validate_analysis(const AnalysisRequest& request, const ChainConfig& chain,
                       const std::string& field_prefix);

/// Runs the analyses in order. A failing analysis records its message and
/// the run continues.
Report run(const RunConfig& config);

}  // namespace certify
