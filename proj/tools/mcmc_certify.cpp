// mcmc-certify: batch front end for the convergence-bound toolkit.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mcmc_certify/config.hpp"
#include "mcmc_certify/report.hpp"
#include "mcmc_certify/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Convergence-rate bounds, coupling simulations and spectral brackets for MCMC kernels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", MCMC_CERTIFY_VERSION);

    std::string config_path;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "Run every analysis in a configuration and write the report");
    run_cmd->add_option("config", config_path, "JSON run configuration")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (overrides output.directory)");

    auto* validate_cmd = app.add_subcommand("validate", "Check a configuration without running it");
    validate_cmd->add_option("config", config_path, "JSON run configuration")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    certify::RunConfig config;
    try {
        config = certify::load_config(config_path);
    } catch (const certify::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    if (validate_cmd->parsed()) {
        std::cout << config_path << ": ok (" << config.analyses.size() << " analyses)\n";
        return kOk;
    }

    try {
        const certify::Report report = certify::run(config);
        const std::filesystem::path dir = out_dir.empty() ? config.output.directory : out_dir;
        const auto files = certify::emit(report, config.output, dir);
        for (const auto& r : report.results) {
            if (r.error) std::cerr << r.method << ": failed: " << *r.error << '\n';
        }
        std::cout << "wrote " << files.size() << " files to " << dir.string() << '\n';
        return report.has_failures() ? kRuntimeError : kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
