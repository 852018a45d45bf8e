#pragma once

// JSON configuration for the experiment harness.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "neurallog/experiment.hpp"

namespace neurallog {

// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical form every field is written in (used for the config hash).
nlohmann::json config_to_json(const ExperimentConfig& config);
nlohmann::json bandit_to_json(const BanditConfig& config);

}  // namespace neurallog
