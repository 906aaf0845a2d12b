#pragma once

#include "stochdef/experiments.hpp"
#include "stochdef/preprocessors.hpp"

#include <json.hpp>

#include <filesystem>

namespace stochdef {

/// Loaders reject unknown keys and wrong types with std::invalid_argument
/// naming the offending key path. Missing keys keep their defaults; for
/// experiment configs the defaults are default_experiment_config(kind).
PreprocessorSpec preprocessor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PreprocessorSpec& spec);
PreprocessorSpec load_preprocessor_spec(const std::filesystem::path& path);

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

} // namespace stochdef
