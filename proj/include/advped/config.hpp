#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "advped/ddpg.hpp"
#include "advped/env.hpp"
#include "advped/harness.hpp"
#include "advped/socialforce.hpp"

namespace advped {

// Section converters. The readers reject unknown keys with ConfigError and
// leave absent keys at their defaults.
nlohmann::json to_json(const WorldConfig& cfg);
nlohmann::json to_json(const DdpgConfig& cfg);
nlohmann::json to_json(const SocialForceParams& params);
nlohmann::json env_to_json(const ObservationNorms& norms, const RewardOptions& opts);

WorldConfig world_from_json(const nlohmann::json& j);
DdpgConfig ddpg_from_json(const nlohmann::json& j);
SocialForceParams socialforce_from_json(const nlohmann::json& j);
void env_from_json(const nlohmann::json& j, ObservationNorms& norms, RewardOptions& opts);

/// Run-configuration document with sections `world`, `ddpg`, `socialforce`,
/// `env` and `run`. Every value is validated before this returns.
RunSpec run_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunSpec& spec);

/// Reads and validates a configuration file. Missing or unparsable files
/// raise ConfigError with key "config".
RunSpec load_run_spec(const std::filesystem::path& path);

/// Hash of everything that fixes the meaning of a policy's inputs and
/// outputs: world geometry, observation scaling and network shapes.
std::string config_fingerprint(const WorldConfig& world, const ObservationNorms& norms,
                               const DdpgConfig& ddpg);

}  // namespace advped
