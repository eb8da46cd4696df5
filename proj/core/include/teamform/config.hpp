#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "teamform/harness.hpp"

namespace teamform {

/// Environment variable that, when set and non-empty, replaces the configured output directory.
inline constexpr const char* kOutputDirEnv = "TEAMFORM_OUTPUT_DIR";

/// Experiment configs are JSON objects; `//` and `/* */` comments are allowed.
/// Every key is optional and falls back to the default; unknown keys are rejected
/// so that typos do not silently run the default experiment.
///
///   {
///     "conditions": ["random", "algorithmic_diverse", "self_assembled", "fairness_aware"],
///     "sessions": 40, "agents": 32, "rounds": 10, "seed": 20240501,
///     "ga": {"generations": 20, "population_size": 50},
///     "policy": {"accept_probability": 0.8},
///     "choice": {"interaction": 0.95}
///   }
nlohmann::json config_to_json(const ExperimentConfig& config, bool include_output_dir = true);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// `configured` unless the output-directory environment variable is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

}  // namespace teamform
