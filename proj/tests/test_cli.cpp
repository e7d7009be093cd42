#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mcmc_certify/config.hpp"
#include "mcmc_certify/report.hpp"
#include "mcmc_certify/runner.hpp"

using namespace certify;

namespace {

const char* kMinimal = R"({
  "chain": {"family": "gaussian", "p": 10, "alpha": 0.5},
  "analyses": [{"method": "gaussian_tv_bound", "t_max": 20, "x0": 1}],
  "mc": {"replicas": 1000, "horizon": 20, "seed": 42},
  "output": {"formats": ["csv"]}
})";

std::string field_of(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<accepted>";
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("minimal configuration parses") {
    const auto c = parse_config(kMinimal);
    CHECK(c.chain.family == Family::Gaussian);
    CHECK(c.chain.p == 10);
    CHECK(c.analyses.size() == 1);
    CHECK(c.mc.replicas == 1000);
    CHECK(c.mc.seed == 42);
    CHECK(c.output.csv);
    CHECK_FALSE(c.output.json);
}

TEST_CASE("semantic errors name the field") {
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 1.0}, "analyses": []})") == "chain.alpha");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5},
        "analyses": [{"method": "optimize_rho", "delta_level": 2.0}]})") == "analyses[0].delta_level");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5}, "analyses": [], "extra": 1})") ==
          "extra");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5, "sigma": 1}, "analyses": []})") ==
          "chain.sigma");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5},
        "analyses": [{"method": "optimise_rho", "delta_level": 4}]})") == "analyses[0].method");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5},
        "analyses": [{"method": "optimize_rho", "delta": 4}]})") == "analyses[0].delta");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5}, "analyses": [],
        "mc": {"replicas": 0}})") == "mc.replicas");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5}, "analyses": [],
        "mc": {"horizon": 0}})") == "mc.horizon");
    CHECK(field_of(R"({"chain": {"family": "imh", "density": "cosine"},
        "analyses": [{"method": "simulate_coupling", "strategy": "crn", "x0": 0.5}]})") == "analyses[0].strategy");
    CHECK(field_of(R"({"chain": {"family": "rwmh", "p": 2, "sigma": 1},
        "analyses": [{"method": "grid_operator_norm", "n": 50}]})") == "analyses[0].method");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 2, "alpha": 0.5},
        "analyses": [{"method": "gaussian_w1_bound", "t_max": 5, "x0": [1, 2, 3]}]})") == "analyses[0].x0");
    CHECK(field_of(R"({"chain": {"family": "gaussian", "p": 2, "alpha": 0.5},
        "output": {"formats": ["csv", "xml"]}, "analyses": []})") == "output.formats[1]");
}

TEST_CASE("syntax errors report line and column") {
    try {
        (void)parse_config("{\n  \"chain\": {\n    \"family\": \"gaussian\",,\n  }\n}");
        FAIL("expected a syntax error");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "<syntax>");
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        CHECK(std::string(e.what()).find("column") != std::string::npos);
    }
}

TEST_CASE("configuration echo round-trips") {
    const auto c = parse_config(kMinimal);
    const Json echo = to_json(c);
    const auto again = parse_config(echo.dump());
    CHECK(to_json(again) == echo);
    const auto imh = parse_config(R"({"chain": {"family": "imh", "density": "tabulated",
        "x": [0, 0.5, 1], "value": [1, 2, 1]}, "analyses": [{"method": "norm_bracket"}]})");
    CHECK(to_json(parse_config(to_json(imh).dump())) == to_json(imh));
}

TEST_CASE("empty analyses list runs") {
    const auto c = parse_config(R"({"chain": {"family": "gaussian", "p": 1, "alpha": 0.3}, "analyses": []})");
    const auto r = run(c);
    CHECK(r.results.empty());
    CHECK_FALSE(r.has_failures());
}

TEST_CASE("reproduction analyses") {
    const auto c = parse_config(R"({"chain": {"family": "gaussian", "p": 10, "alpha": 0.5},
        "analyses": [{"method": "gaussian_minorization_epsilon", "delta_level": 4},
                     {"method": "optimize_rho", "delta_level": 4}]})");
    const auto r = run(c);
    REQUIRE(r.results.size() == 2);
    CHECK(r.results[0].scalars["eps"].get<double>() == doctest::Approx(2.28e-7).epsilon(0.02));
    const double omr = r.results[1].scalars["one_minus_rho"].get<double>();
    CHECK(omr >= 3e-8);
    CHECK(omr <= 12e-8);
    CHECK(r.results[1].params.contains("r_star"));
}

TEST_CASE("IMH bracket through the runner") {
    const auto c = parse_config(R"({"chain": {"family": "imh", "density": "cosine"},
        "analyses": [{"method": "norm_bracket"}, {"method": "grid_operator_norm", "n": 200},
                     {"method": "grid_conductance", "n": 12}, {"method": "mixing_time", "eps_tol": 0.01}]})");
    const auto r = run(c);
    REQUIRE_FALSE(r.has_failures());
    CHECK(r.results[0].scalars["lower"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(r.results[0].scalars["upper"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
    CHECK(r.results[1].scalars["norm"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(2e-3));
    CHECK(r.results[2].scalars["gap_lower"].get<double>() <= r.results[2].scalars["gap"].get<double>());
    CHECK(r.results[3].scalars["t_mix"].get<long>() == 5);  // (1/3)^5 < 0.01 < (1/3)^4
}

TEST_CASE("Doeblin curve CSV") {
    const auto c = parse_config(R"({"chain": {"family": "imh", "density": "cosine"},
        "analyses": [{"method": "doeblin_tv_bound", "t_max": 5}]})");
    const auto r = run(c);
    REQUIRE(r.results[0].curves.size() == 1);
    const std::string csv = curve_csv(r.results[0].curves[0]);
    CHECK(csv.rfind("t,value\n0,1\n1,0.33333333333333", 0) == 0);
    CHECK(csv.find("\n2,0.1111111111111") != std::string::npos);
}

TEST_CASE("emit is deterministic and JSON matches CSV") {
    const auto c = parse_config(R"({"chain": {"family": "gaussian", "p": 3, "alpha": 0.5},
        "analyses": [{"method": "simulate_crn_one_shot", "x0": 1},
                     {"method": "gaussian_tv_bound", "t_max": 10, "x0": 1}],
        "mc": {"replicas": 3000, "horizon": 10, "seed": 7, "threads": 3}})");
    const auto a = fresh_dir("mcmc_certify_emit_a");
    const auto b = fresh_dir("mcmc_certify_emit_b");
    const auto files_a = emit(run(c), c.output, a);
    const auto files_b = emit(run(c), c.output, b);
    REQUIRE(files_a.size() == files_b.size());
    for (std::size_t i = 0; i < files_a.size(); ++i) {
        if (files_a[i].extension() == ".csv") CHECK(slurp(files_a[i]) == slurp(files_b[i]));
    }
    // Every CSV value appears with identical digits in report.json.
    const Json report = Json::parse(slurp(a / "report.json"));
    const auto& curve = report["results"][1]["curves"][0];
    std::istringstream csv(slurp(a / "01_gaussian_tv_bound_bound.csv"));
    std::string line;
    std::getline(csv, line);
    std::size_t row = 0;
    while (std::getline(csv, line)) {
        const double v = std::stod(line.substr(line.find(',') + 1));
        CHECK(v == curve["value"][row].get<double>());
        ++row;
    }
    CHECK(row == 11);
}

TEST_CASE("failing analyses are recorded without aborting the run") {
    RunConfig c = parse_config(R"({"chain": {"family": "gaussian", "p": 2, "alpha": 0.5},
        "analyses": [{"method": "stationary_moment_bound"}]})");
    c.analyses.insert(c.analyses.begin(), AnalysisRequest{"not_a_method", Json::object()});
    const auto r = run(c);
    REQUIRE(r.results.size() == 2);
    CHECK(r.results[0].error.has_value());
    CHECK_FALSE(r.results[1].error.has_value());
    CHECK(r.has_failures());
}

TEST_CASE("every registered method runs on a small configuration") {
    const std::vector<std::pair<const char*, const char*>> cases = {
        {R"({"family": "imh", "density": "cosine"})", R"([
            {"method": "doeblin_tv_bound", "t_max": 3},
            {"method": "mixing_time", "eps_tol": 0.1},
            {"method": "simulate_coupling", "strategy": "doeblin_split", "x0": 0.5},
            {"method": "simulate_coupling", "strategy": "independent", "x0": 0.5, "y0": 0.1},
            {"method": "norm_bracket"},
            {"method": "grid_operator_norm", "n": 30},
            {"method": "grid_conductance", "n": 8}])"},
        {R"({"family": "gaussian", "p": 2, "alpha": 0.5})", R"([
            {"method": "gaussian_w1_bound", "t_max": 3, "mu_mean_norm": 1.5},
            {"method": "gaussian_tv_bound", "t_max": 3, "x0": [1, 0]},
            {"method": "gaussian_minorization_epsilon", "delta_level": 4},
            {"method": "optimize_rho", "delta_level": 4},
            {"method": "optimize_rho_joint", "delta_hi": 20},
            {"method": "dm_tv_bound", "delta_level": 4, "t_max": 3, "mu_h": 1},
            {"method": "mixing_time", "eps_tol": 0.1, "distance": "w1", "x0": 1},
            {"method": "stationary_moment_bound"},
            {"method": "simulate_coupling", "strategy": "crn", "x0": 1, "metric": "drift", "r": 0.3},
            {"method": "simulate_coupling", "strategy": "maximal", "x0": 1},
            {"method": "simulate_coupling", "strategy": "dm_split", "x0": 1, "delta_level": 4},
            {"method": "simulate_crn_one_shot", "x0": [1, 2], "y0": [0, 0]},
            {"method": "norm_bracket"},
            {"method": "gaussian_norm_upper_iso", "optimize": true}])"},
        {R"({"family": "gaussian", "p": 1, "alpha": 0.4})", R"([
            {"method": "grid_operator_norm", "n": 30},
            {"method": "grid_conductance", "n": 10}])"},
        {R"({"family": "rwmh", "p": 1, "sigma": 0.5})", R"([
            {"method": "rwmh_norm_lower"},
            {"method": "sigma_star"},
            {"method": "rwmh_move_probability"},
            {"method": "norm_bracket"},
            {"method": "grid_operator_norm", "n": 60, "half_width": 6},
            {"method": "simulate_coupling", "strategy": "independent", "x0": 0.2}])"},
    };
    std::set<std::string> seen;
    for (const auto& [chain, analyses] : cases) {
        const std::string text = std::string(R"({"chain": )") + chain + R"(, "analyses": )" + analyses +
                                 R"(, "mc": {"replicas": 200, "horizon": 4, "seed": 1}})";
        const auto c = parse_config(text);
        const auto r = run(c);
        for (const auto& res : r.results) {
            INFO(res.method);
            CHECK_FALSE(res.error.has_value());
            seen.insert(res.method);
        }
    }
    const auto names = method_names();
    CHECK(seen == std::set<std::string>(names.begin(), names.end()));
}
