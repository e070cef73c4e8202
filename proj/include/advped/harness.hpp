#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "advped/ddpg.hpp"
#include "advped/env.hpp"
#include "advped/socialforce.hpp"

namespace advped {

enum class AgentKind { SocialForce, RlBaseline, RlMomentum };

std::string_view to_string(AgentKind kind);
/// "socialforce", "rl_baseline" or "rl_momentum".
AgentKind parse_agent_kind(std::string_view text);
RewardDesign reward_design_for(AgentKind kind);

/// Start rectangle for exploration-free recall episodes.
struct RecallArea {
  double x_min = 40.0;
  double x_max = 60.0;
  double y_min = -6.0;
  double y_max = -3.0;
};

struct RunSpec {
  AgentKind agent = AgentKind::RlMomentum;
  WorldConfig world;
  DdpgConfig ddpg;
  SocialForceParams socialforce;
  ObservationNorms norms;
  RewardOptions reward_options;
  int episodes = 2000;
  int seeds = 1;  // > 1 selects a multi-seed batch
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "runs/default";
  int checkpoint_every = 500;  // 0 disables periodic checkpoints
  int recall_n = 100;
  RecallArea recall_area;

  void validate() const;
};

struct EpisodeMetrics {
  int episode = 0;
  double reward = 0.0;
  int steps = 0;
  bool collided = false;
  double momentum_2d = 0.0;
  double momentum_1d = 0.0;
  double sigma = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  std::vector<EpisodeMetrics> episodes;
  std::optional<std::filesystem::path> final_checkpoint;
};

/// Raised when the learner's parameters stop being finite.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the episode budget for one seed and writes metrics.csv, periodic
/// checkpoints and a final checkpoint (or socialforce.json) under
/// spec.out_dir. Artifacts written before a failure are left in place.
RunResult train_run(const RunSpec& spec);

struct CurvePoint {
  int episode = 0;
  double mean = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

/// Centered moving average; windows shrink at the edges, length preserved.
std::vector<double> moving_average(std::span<const double> series, int window);

/// Per-episode mean and 95% normal-approximation band (1.96 standard errors)
/// across runs, each smoothed with `window`. Runs of unequal length are
/// truncated to the shortest.
std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<double>>& runs, int window);

struct MultiRunResult {
  std::vector<RunResult> runs;
  std::vector<CurvePoint> curves;
  std::vector<std::string> failures;
};

/// Independent runs, one per seed, in `run_<i>` directories under
/// spec.out_dir, then curves.csv. Runs execute on up to `workers` threads
/// (0 picks the hardware concurrency).
MultiRunResult train_multi(const RunSpec& spec, const std::vector<std::uint64_t>& seeds,
                           int workers = 0, int smoothing_window = 20);

/// Seeds derived from spec.seed.
std::vector<std::uint64_t> derive_run_seeds(std::uint64_t master, int n);

/// A trained actor together with what is needed to feed it.
struct ActorPolicy {
  Mlp actor;
  ObservationNorms norms;
  RewardDesign design = RewardDesign::CollisionMomentum;
  RewardOptions reward_options;
};

using PolicySource = std::variant<ActorPolicy, SocialForceParams>;

struct TrajectoryRow {
  double t = 0.0;
  double x_ped = 0.0;
  double y_ped = 0.0;
  double x_veh = 0.0;
  double y_veh = 0.0;
  double v_ped = 0.0;
  double v_veh = 0.0;
  double theta_ped = 0.0;
  double reward = 0.0;
  bool braking = false;
};

struct EpisodeRecord {
  Vec2 start;
  bool collided = false;
  CollisionOutcome collision;
  int steps = 0;
  double total_reward = 0.0;
  std::vector<TrajectoryRow> rows;  // row 0 is the initial state
};

/// One exploration-free episode from `start`.
EpisodeRecord run_episode(const PolicySource& policy, const WorldConfig& world, Vec2 start);

struct RecallStats {
  int n_episodes = 0;
  int n_collisions = 0;
  std::optional<double> mean;  // over collision episodes; empty with no collisions
  std::optional<double> std;   // unbiased; empty with fewer than two collisions
  std::vector<EpisodeRecord> episodes;  // trajectories dropped, summary kept
};

/// n exploration-free episodes from uniform starts in `area`, start i drawn
/// from a generator seeded by derive_seed(seed, i).
RecallStats recall_eval(const PolicySource& policy, const WorldConfig& world, int n,
                        std::uint64_t seed, const RecallArea& area = {});

/// Identical summaries (and per-episode outcomes) bit for bit.
bool operator==(const RecallStats& a, const RecallStats& b);

}  // namespace advped
