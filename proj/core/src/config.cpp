#include "matchsim/config.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace matchsim {

const char* to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::SimulateCtmc: return "simulate-ctmc";
        case ExperimentKind::SimulateLimit: return "simulate-limit";
        case ExperimentKind::DoubleEnded: return "double-ended";
        case ExperimentKind::GeneratorCheck: return "generator-check";
        case ExperimentKind::ConvergeSweep: return "converge-sweep";
        case ExperimentKind::CompareLaws: return "compare-laws";
        case ExperimentKind::OracleValidate: return "oracle-validate";
    }
    return "?";
}

namespace {

bool kind_from_string(const std::string& s, ExperimentKind& out) {
    static const std::pair<const char*, ExperimentKind> table[] = {
        {"simulate-ctmc", ExperimentKind::SimulateCtmc},
        {"simulate-limit", ExperimentKind::SimulateLimit},
        {"double-ended", ExperimentKind::DoubleEnded},
        {"generator-check", ExperimentKind::GeneratorCheck},
        {"converge-sweep", ExperimentKind::ConvergeSweep},
        {"compare-laws", ExperimentKind::CompareLaws},
        {"oracle-validate", ExperimentKind::OracleValidate},
    };
    for (const auto& [name, kind] : table)
        if (s == name) { out = kind; return true; }
    return false;
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind);
    j["params"] = params.to_json();
    j["horizon"] = horizon;
    j["dt"] = dt;
    j["replications"] = replications;
    j["seed"] = seed;
    j["out"] = out_dir;
    j["tol"] = tol;
    if (!n_grid.empty()) j["n_grid"] = n_grid;
    if (!window.hi.empty()) {
        j["window"]["lo"] = window.lo;
        j["window"]["hi"] = window.hi;
    }
    if (!compare_times.empty()) j["times"] = compare_times;
    j["ks_threshold"] = ks_threshold;
    j["x0"] = x0;
    j["sigma"] = sigma;
    j["record_every"] = record_every;
    return j;
}

std::variant<ExperimentConfig, std::vector<std::string>> validate_config(
    const nlohmann::json& raw) {
    std::vector<std::string> errors;
    ExperimentConfig cfg;

    if (!raw.contains("kind") || !raw["kind"].is_string()) {
        errors.push_back("kind required (one of simulate-ctmc, simulate-limit, "
                         "double-ended, generator-check, converge-sweep, compare-laws, "
                         "oracle-validate)");
    } else if (!kind_from_string(raw["kind"].get<std::string>(), cfg.kind)) {
        errors.push_back("unknown kind \"" + raw["kind"].get<std::string>() + "\"");
    }

    const nlohmann::json& p = raw.contains("params") ? raw["params"] : raw;
    if (!p.contains("K")) errors.push_back("K required");
    if (!p.contains("lambda0")) errors.push_back("lambda0 required");
    if (!p.contains("beta")) errors.push_back("beta required");
    if (!p.contains("delta")) errors.push_back("delta required");
    if (!p.contains("buffer")) errors.push_back("buffer required");
    if (errors.empty()) {
        try {
            nlohmann::json pj = p;
            if (!pj.contains("n")) pj["n"] = raw.value("n", 1);
            cfg.params = SystemParams::from_json(pj);
        } catch (const std::exception& e) {
            errors.push_back(e.what());
        }
    }
    if (p.contains("K") && p.contains("beta") && p["beta"].is_array() &&
        p["beta"].size() != p["K"].get<std::size_t>())
        errors.push_back("beta length must equal K");
    if (p.contains("K") && p.contains("delta") && p["delta"].is_array() &&
        p["delta"].size() != p["K"].get<std::size_t>())
        errors.push_back("delta length must equal K");

    cfg.horizon = raw.value("horizon", raw.value("T", 0.0));
    cfg.dt = raw.value("dt", 1e-3);
    cfg.replications = raw.value("replications", std::int64_t{1});
    cfg.seed = raw.value("seed", std::uint64_t{0});
    cfg.out_dir = raw.value("out", std::string("."));
    cfg.tol = raw.value("tol", 1e-8);
    cfg.ks_threshold = raw.value("ks_threshold", 0.05);
    cfg.x0 = raw.value("x0", 0.0);
    cfg.sigma = raw.value("sigma", 0.0);
    cfg.record_every = raw.value("record_every", std::uint64_t{1});
    if (raw.contains("n_grid")) cfg.n_grid = raw["n_grid"].get<std::vector<std::int64_t>>();
    if (raw.contains("times")) cfg.compare_times = raw["times"].get<std::vector<double>>();
    if (raw.contains("window")) {
        if (raw["window"].contains("lo"))
            cfg.window.lo = raw["window"]["lo"].get<std::vector<double>>();
        if (raw["window"].contains("hi"))
            cfg.window.hi = raw["window"]["hi"].get<std::vector<double>>();
        else
            errors.push_back("window.hi required when window is given");
    }

    if (cfg.replications < 1) errors.push_back("replications must be >= 1");
    if (!(cfg.dt > 0.0)) errors.push_back("dt must be > 0");
    if (cfg.horizon < 0.0) errors.push_back("horizon must be >= 0");

    switch (cfg.kind) {
        case ExperimentKind::ConvergeSweep:
            if (cfg.n_grid.empty()) errors.push_back("n_grid required for converge-sweep");
            if (cfg.window.hi.empty()) errors.push_back("window required for converge-sweep");
            break;
        case ExperimentKind::CompareLaws:
            if (cfg.compare_times.empty() && cfg.horizon <= 0.0)
                errors.push_back("times or horizon required for compare-laws");
            break;
        default:
            break;
    }

    if (!errors.empty()) return errors;
    return cfg;
}

std::string config_hash(const ExperimentConfig& config) {
    nlohmann::json j = config.to_json();
    j.erase("out");  // the destination is not part of the experiment identity
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

}  // namespace matchsim
