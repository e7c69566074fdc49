#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlab/geometry.hpp"
#include "qlab/multipliers.hpp"

namespace qlab {

inline constexpr const char* kVersionTag = "qlab-1.0";

// Domain file: {"kind": "polygon"|"disc"|"cantor"|"custom-support", "vertices": [[x, y], ...],
// "radius": r, "ratio": q, "support": [h_0, ...]}. ConfigError messages name the field path.
DomainSpec parse_domain_spec(const nlohmann::json& j);
DomainSpec load_domain_spec(const std::string& path);

// Profile file: {"type": "bump"} | {"type": "gaussian-modulated", "center", "width", "frequency"}
// | {"type": "table", "s": [...], "values": [...]}.
ProfileFunction parse_profile(const nlohmann::json& j);
ProfileFunction load_profile(const std::string& path);

struct ExperimentConfig {
    std::string experiment;  // covering, partition, surrogate, kernel-decay, atoms, square-function, norms, subordination
    std::string domain_path;
    std::string profile_path;
    std::map<std::string, double> params;  // unset entries take the experiment defaults
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string baseline_path;  // empty: no baseline comparison
    bool update_baselines = false;
};

struct ReportBundle {
    std::vector<std::string> csv_paths;
    std::string summary_path;
    nlohmann::json summary;
    double wall_seconds = 0.0;  // kept out of the summary so it stays byte-identical
    bool pass = true;
};

// Parameter names and defaults accepted by an experiment, in flag order.
const std::vector<std::pair<std::string, double>>& experiment_parameters(const std::string& experiment);

// SHA-256 over the canonical config: experiment, file contents, filled-in parameters, seed.
std::string config_hash(const ExperimentConfig& config);

ReportBundle run_experiment(const ExperimentConfig& config);

// Runs the domain checks; the result carries M, both radii, the convexity margin and a kappa hint.
nlohmann::json validate_domain(const std::string& path);

// qlab <subcommand> [flags]. Returns 0 pass, 1 assertion failure, 2 config error, 3 numeric budget.
int run_cli(int argc, char** argv);

}  // namespace qlab
