#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "advped/ddpg.hpp"
#include "advped/env.hpp"
#include "advped/harness.hpp"

namespace advped {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad magic, truncation, checksum failure or unreadable metadata.
class CorruptCheckpoint : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class CheckpointVersionMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Stored layer dims differ from what the caller's configuration builds.
class CheckpointShapeMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Stored world/normalization fingerprint differs from the caller's.
class FingerprintMismatch : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// What an agent was trained against; stored alongside its parameters.
struct CheckpointContext {
  WorldConfig world;
  ObservationNorms norms;
  RewardDesign design = RewardDesign::CollisionMomentum;
  RewardOptions reward_options;
};

struct LoadedCheckpoint {
  CheckpointContext context;
  std::string fingerprint;
  DdpgAgent agent;
};

/// Writes the agent (four networks, optimizer moments, counters, generator
/// states) to `path`, plus `<path>.probe.csv` with actor and critic outputs
/// on fixed probe inputs. The file is written to a temporary name first and
/// renamed into place.
void save_checkpoint(const DdpgAgent& agent, const CheckpointContext& ctx,
                     const std::filesystem::path& path);

/// Restores everything save_checkpoint wrote. The replay buffer starts
/// empty. Throws the CheckpointError subclasses above.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Loads `path` and checks it against a live configuration: shape mismatch
/// when layer dims differ, fingerprint mismatch when geometry or scaling do.
LoadedCheckpoint load_checkpoint_for(const std::filesystem::path& path, const WorldConfig& world,
                                     const ObservationNorms& norms, const DdpgConfig& ddpg);

ActorPolicy to_policy(const LoadedCheckpoint& ckpt);

/// Fixed inputs used by the probe file.
Matrix probe_inputs(int state_dim);

std::filesystem::path probe_path(const std::filesystem::path& checkpoint);

}  // namespace advped
