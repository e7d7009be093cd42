#include "mcmc_certify/report.hpp"

#include <fstream>
#include <sstream>

#include "mcmc_certify/format.hpp"

namespace certify {

namespace {

Json curve_json(const Curve& c) {
    Json j = Json::object();
    j["name"] = c.name;
    j["t"] = c.t;
    j["value"] = c.value;
    if (!c.std_error.empty()) j["stderr"] = c.std_error;
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

bool Report::has_failures() const {
    for (const auto& r : results) {
        if (r.error) return true;
    }
    return false;
}

Json to_json(const Report& report) {
    Json results = Json::array();
    for (const auto& r : report.results) {
        Json item = Json::object();
        item["method"] = r.method;
        item["params"] = r.params;
        if (r.error) {
            item["error"] = *r.error;
        } else {
            item["scalars"] = r.scalars;
            Json curves = Json::array();
            for (const auto& c : r.curves) curves.push_back(curve_json(c));
            item["curves"] = std::move(curves);
        }
        results.push_back(std::move(item));
    }
    Json root = Json::object();
    root["config"] = report.config_echo;
    root["results"] = std::move(results);
    root["provenance"] = {{"version", report.version},
                          {"seed", report.seed},
                          {"wall_time_seconds", report.wall_time_seconds}};
    return root;
}

std::string curve_csv(const Curve& c) {
    const bool with_se = !c.std_error.empty();
    std::ostringstream out;
    out << (with_se ? "t,value,stderr\n" : "t,value\n");
    for (std::size_t i = 0; i < c.t.size(); ++i) {
        out << c.t[i] << ',' << format_number(c.value[i]);
        if (with_se) out << ',' << format_number(c.std_error[i]);
        out << '\n';
    }
    return out.str();
}

std::vector<std::filesystem::path> emit(const Report& report, const OutputConfig& output,
                                        const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    std::vector<std::filesystem::path> written;
    if (output.json) {
        const auto path = directory / "report.json";
        write_file(path, to_json(report).dump(2) + "\n");
        written.push_back(path);
    }
    if (output.csv) {
        for (std::size_t i = 0; i < report.results.size(); ++i) {
            const auto& r = report.results[i];
            for (const auto& c : r.curves) {
                char prefix[16];
                std::snprintf(prefix, sizeof prefix, "%02zu", i);
                const auto path = directory / (std::string(prefix) + "_" + r.method + "_" + c.name + ".csv");
                write_file(path, curve_csv(c));
                written.push_back(path);
            }
        }
    }
    return written;
}

}  // namespace certify
