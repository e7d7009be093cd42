#include "mcmc_certify/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mcmc_certify/runner.hpp"

namespace certify {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) throw ConfigError(join(path, key), "unknown key");
    }
}

const Json& require_object(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    return j;
}

const Json& require_key(const Json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(join(path, key), "missing required key");
    return *it;
}

double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

long long as_integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    return j.get<long long>();
}

std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_number_array(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

int bounded_int(const Json& j, const std::string& path, long long lo, long long hi) {
    const long long v = as_integer(j, path);
    if (v < lo || v > hi) {
        throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

ChainConfig parse_chain(const Json& j) {
    const std::string path = "chain";
    require_object(j, path);
    ChainConfig c;
    const std::string family = as_string(require_key(j, "family", path), "chain.family");
    if (family == "gaussian") {
        reject_unknown(j, {"family", "p", "alpha"}, path);
        c.family = Family::Gaussian;
        c.p = bounded_int(require_key(j, "p", path), "chain.p", 1, 1000000);
        c.alpha = as_number(require_key(j, "alpha", path), "chain.alpha");
        if (!(c.alpha >= 0.0 && c.alpha < 1.0)) throw ConfigError("chain.alpha", "must lie in [0, 1)");
    } else if (family == "rwmh") {
        reject_unknown(j, {"family", "p", "sigma"}, path);
        c.family = Family::Rwmh;
        c.p = bounded_int(require_key(j, "p", path), "chain.p", 1, 1000000);
        c.sigma = as_number(require_key(j, "sigma", path), "chain.sigma");
        if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) throw ConfigError("chain.sigma", "must be positive");
    } else if (family == "imh") {
        reject_unknown(j, {"family", "density", "x", "value", "path"}, path);
        c.family = Family::Imh;
        c.p = 1;
        c.density = as_string(require_key(j, "density", path), "chain.density");
        if (c.density == "tabulated") {
            if (j.contains("path")) {
                if (j.contains("x") || j.contains("value")) {
                    throw ConfigError("chain.path", "give either path or x/value, not both");
                }
                c.table_path = as_string(j["path"], "chain.path");
            } else {
                c.table_x = as_number_array(require_key(j, "x", path), "chain.x");
                c.table_value = as_number_array(require_key(j, "value", path), "chain.value");
            }
        } else if (c.density == "uniform" || c.density == "cosine") {
            for (const char* key : {"x", "value", "path"}) {
                if (j.contains(key)) throw ConfigError(join(path, key), "only valid for tabulated densities");
            }
        } else {
            throw ConfigError("chain.density", "expected uniform, cosine or tabulated");
        }
        try {
            (void)build_imh(c);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError("chain", e.what());
        }
    } else {
        throw ConfigError("chain.family", "expected gaussian, imh or rwmh");
    }
    return c;
}

McConfig parse_mc(const Json& j) {
    const std::string path = "mc";
    require_object(j, path);
    reject_unknown(j, {"replicas", "horizon", "seed", "threads"}, path);
    McConfig mc;
    if (j.contains("replicas")) {
        const long long r = as_integer(j["replicas"], "mc.replicas");
        if (r < 1 || r > 1000000000LL) throw ConfigError("mc.replicas", "must lie in [1, 1e9]");
        mc.replicas = static_cast<long>(r);
    }
    if (j.contains("horizon")) mc.horizon = bounded_int(j["horizon"], "mc.horizon", 1, 100000000);
    if (j.contains("seed")) {
        const Json& s = j["seed"];
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long long>() < 0)) {
            throw ConfigError("mc.seed", "expected a nonnegative integer");
        }
        mc.seed = s.get<std::uint64_t>();
    }
    if (j.contains("threads")) mc.threads = bounded_int(j["threads"], "mc.threads", 1, 1024);
    return mc;
}

OutputConfig parse_output(const Json& j) {
    const std::string path = "output";
    require_object(j, path);
    reject_unknown(j, {"directory", "formats"}, path);
    OutputConfig out;
    if (j.contains("directory")) {
        out.directory = as_string(j["directory"], "output.directory");
        if (out.directory.empty()) throw ConfigError("output.directory", "must not be empty");
    }
    if (j.contains("formats")) {
        const Json& f = j["formats"];
        if (!f.is_array() || f.empty()) throw ConfigError("output.formats", "expected a nonempty array");
        out.csv = out.json = false;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string field = "output.formats[" + std::to_string(i) + "]";
            const std::string name = as_string(f[i], field);
            if (name != "csv" && name != "json") throw ConfigError(field, "expected csv or json");
            bool& flag = (name == "csv") ? out.csv : out.json;
            if (flag) throw ConfigError(field, "duplicate format");
            flag = true;
        }
    }
    return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string msg = e.what();
        const auto pos = msg.find("syntax error");
        if (pos != std::string::npos) msg = msg.substr(pos);
        throw ConfigError("<syntax>", "line " + std::to_string(line) + ", column " +
                                          std::to_string(column) + ": " + msg);
    }
    if (!root.is_object()) throw ConfigError("<root>", "expected a JSON object");
    reject_unknown(root, {"chain", "analyses", "mc", "output"}, "");

    RunConfig config;
    config.chain = parse_chain(require_key(root, "chain", ""));
    const Json& analyses = require_key(root, "analyses", "");
    if (!analyses.is_array()) throw ConfigError("analyses", "expected an array");
    for (std::size_t i = 0; i < analyses.size(); ++i) {
        const std::string path = "analyses[" + std::to_string(i) + "]";
        const Json& a = require_object(analyses[i], path);
        AnalysisRequest req;
        req.method = as_string(require_key(a, "method", path), path + ".method");
        req.params = Json::object();
        for (const auto& [key, value] : a.items()) {
            if (key != "method") req.params[key] = value;
        }
        validate_analysis(req, config.chain, path);
        config.analyses.push_back(std::move(req));
    }
    if (root.contains("mc")) config.mc = parse_mc(root["mc"]);
    if (root.contains("output")) config.output = parse_output(root["output"]);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

Json to_json(const RunConfig& config) {
    Json chain = Json::object();
    const auto& c = config.chain;
    switch (c.family) {
        case Family::Gaussian:
            chain["family"] = "gaussian";
            chain["p"] = c.p;
            chain["alpha"] = c.alpha;
            break;
        case Family::Rwmh:
            chain["family"] = "rwmh";
            chain["p"] = c.p;
            chain["sigma"] = c.sigma;
            break;
        case Family::Imh:
            chain["family"] = "imh";
            chain["density"] = c.density;
            if (!c.table_path.empty()) {
                chain["path"] = c.table_path;
            } else if (c.density == "tabulated") {
                chain["x"] = c.table_x;
                chain["value"] = c.table_value;
            }
            break;
    }
    Json analyses = Json::array();
    for (const auto& a : config.analyses) {
        Json item = Json::object();
        item["method"] = a.method;
        for (const auto& [key, value] : a.params.items()) item[key] = value;
        analyses.push_back(std::move(item));
    }
    Json formats = Json::array();
    if (config.output.csv) formats.push_back("csv");
    if (config.output.json) formats.push_back("json");

    Json root = Json::object();
    root["chain"] = std::move(chain);
    root["analyses"] = std::move(analyses);
    root["mc"] = {{"replicas", config.mc.replicas},
                  {"horizon", config.mc.horizon},
                  {"seed", config.mc.seed},
                  {"threads", config.mc.threads}};
    root["output"] = {{"directory", config.output.directory}, {"formats", std::move(formats)}};
    return root;
}

ImhChain build_imh(const ChainConfig& chain) {
    if (chain.family != Family::Imh) throw InvalidArgument("build_imh: chain is not IMH");
    if (chain.density == "uniform") return ImhChain::uniform();
    if (chain.density == "cosine") return ImhChain::cosine();
    if (!chain.table_path.empty()) return ImhChain::load_csv(chain.table_path);
    return ImhChain::from_table(chain.table_x, chain.table_value);
}

KernelSpec build_kernel(const ChainConfig& chain) {
    switch (chain.family) {
        case Family::Gaussian: return make_kernel(GaussianChain(chain.p, chain.alpha));
        case Family::Rwmh: return make_kernel(RwmhChain(chain.p, chain.sigma));
        case Family::Imh: return make_kernel(build_imh(chain));
    }
    throw InvalidArgument("build_kernel: unknown family");
}

}  // namespace certify
