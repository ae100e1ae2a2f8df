#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "matchsim/generator.hpp"
#include "matchsim/model.hpp"

namespace matchsim {

enum class ExperimentKind {
    SimulateCtmc,
    SimulateLimit,
    DoubleEnded,
    GeneratorCheck,
    ConvergeSweep,
    CompareLaws,
    OracleValidate,
};

const char* to_string(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SimulateCtmc;
    SystemParams params;
    double horizon = 0.0;       // CTMC horizon or limit T
    double dt = 1e-3;           // limit kinds
    std::int64_t replications = 1;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double tol = 1e-8;

    // Per-kind extras.
    std::vector<std::int64_t> n_grid;      // converge-sweep
    StateWindow window;                    // converge-sweep
    std::vector<double> compare_times;     // compare-laws
    double ks_threshold = 0.05;            // compare-laws
    double x0 = 0.0;                       // double-ended initial value
    double sigma = 0.0;                    // double-ended; 0 = sqrt(2*lambda0)
    std::uint64_t record_every = 1;        // simulate-ctmc thinning

    nlohmann::json to_json() const;
};

/// Parses and validates a raw JSON config, collecting every error (not
/// fail-fast). Defaults: dt = 1e-3, tol = 1e-8, replications = 1, seed = 0.
std::variant<ExperimentConfig, std::vector<std::string>> validate_config(
    const nlohmann::json& raw);

/// Stable FNV-1a hash of the canonical config serialization; every output
/// file names this hash.
std::string config_hash(const ExperimentConfig& config);

}  // namespace matchsim
