// advped: train, evaluate, roll out and plot adversarial pedestrian agents.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "advped/checkpoint.hpp"
#include "advped/config.hpp"
#include "advped/csv.hpp"
#include "advped/harness.hpp"
#include "advped/logging.hpp"
#include "advped/rng.hpp"
#include "advped/svg.hpp"

using namespace advped;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Raised for bad command-line combinations that CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> seeds;
  std::optional<int> episodes;
  std::optional<std::string> agent;
  std::optional<std::string> reward;
  std::optional<int> n;
  std::optional<std::string> checkpoint;
  std::optional<double> kd;
  std::optional<double> x;
  std::optional<double> y;
  int workers = 0;
  int window = 20;
  int bins = 20;
  std::vector<std::string> inputs;
};

RunSpec build_spec(const Options& o) {
  RunSpec spec = o.config ? load_run_spec(*o.config) : RunSpec{};
  if (o.agent) {
    try {
      spec.agent = parse_agent_kind(*o.agent);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("run.agent", e.what());
    }
  }
  if (o.reward) {
    RewardDesign d;
    try {
      d = parse_reward_design(*o.reward);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("run.reward", e.what());
    }
    if (o.agent && spec.agent == AgentKind::SocialForce) {
      throw ConfigError("run.reward", "the socialforce agent takes no reward");
    }
    spec.agent = d == RewardDesign::BaselineSignal ? AgentKind::RlBaseline : AgentKind::RlMomentum;
  }
  if (o.out) spec.out_dir = *o.out;
  if (o.seed) spec.seed = *o.seed;
  if (o.seeds) spec.seeds = *o.seeds;
  if (o.episodes) spec.episodes = *o.episodes;
  if (o.n) spec.recall_n = *o.n;
  if (o.kd) spec.socialforce.k_d = *o.kd;
  spec.validate();
  return spec;
}

int cmd_train(const Options& o) {
  const RunSpec spec = build_spec(o);
  if (spec.seeds == 1) {
    const RunResult r = train_run(spec);
    int collisions = 0;
    for (const auto& m : r.episodes) collisions += m.collided ? 1 : 0;
    std::printf("%s: %zu episodes, %d collisions, artifacts in %s\n",
                std::string(to_string(spec.agent)).c_str(), r.episodes.size(), collisions,
                r.dir.string().c_str());
    return 0;
  }
  const MultiRunResult multi =
      train_multi(spec, derive_run_seeds(spec.seed, spec.seeds), o.workers, o.window);
  std::printf("%zu of %d runs completed, curves in %s\n", multi.runs.size(), spec.seeds,
              (spec.out_dir / "curves.csv").string().c_str());
  for (const auto& f : multi.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  return multi.failures.empty() ? 0 : kExitRuntime;
}

struct LoadedPolicy {
  PolicySource source;
  WorldConfig world;
  std::string label;
};

LoadedPolicy load_policy(const Options& o) {
  if (o.checkpoint && o.agent) throw UsageError("give either --checkpoint or --agent, not both");
  if (o.checkpoint) {
    LoadedCheckpoint ck = [&] {
      if (!o.config) return load_checkpoint(*o.checkpoint);
      const RunSpec spec = load_run_spec(*o.config);
      return load_checkpoint_for(*o.checkpoint, spec.world, spec.norms, spec.ddpg);
    }();
    const std::string label(ck.context.design == RewardDesign::BaselineSignal ? "rl_baseline"
                                                                              : "rl_momentum");
    return {to_policy(ck), ck.context.world, label};
  }
  if (o.agent && *o.agent == "socialforce") {
    RunSpec spec = o.config ? load_run_spec(*o.config) : RunSpec{};
    if (o.kd) spec.socialforce.k_d = *o.kd;
    spec.socialforce.validate();
    return {spec.socialforce, spec.world, "socialforce"};
  }
  throw UsageError("a policy is required: --checkpoint PATH or --agent socialforce");
}

std::filesystem::path out_dir_or_cwd(const Options& o) {
  std::filesystem::path dir = o.out ? std::filesystem::path(*o.out) : std::filesystem::path(".");
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_eval(const Options& o) {
  const int n = o.n.value_or(100);
  if (n < 1) throw ConfigError("n", "must be >= 1");
  const LoadedPolicy p = load_policy(o);
  const std::uint64_t seed = o.seed.value_or(0);
  const RecallStats stats = recall_eval(p.source, p.world, n, seed);

  const auto path = out_dir_or_cwd(o) / "recall.csv";
  CsvWriter csv(path, {"start_x", "start_y", "collided", "momentum_2d", "momentum_1d", "steps"});
  for (const auto& e : stats.episodes) {
    csv.field(e.start.x)
        .field(e.start.y)
        .field(e.collided)
        .field(e.collision.momentum_change_2d)
        .field(e.collision.momentum_change_1d)
        .field(e.steps)
        .end_row();
  }
  csv.flush();

  std::printf("%s: %d/%d collisions\n", p.label.c_str(), stats.n_collisions, stats.n_episodes);
  if (!stats.mean) {
    std::printf("average collision momentum change: undefined (no collisions)\n");
  } else if (!stats.std) {
    std::printf("average collision momentum change: %.2f kg*m/s (std undefined, one collision)\n",
                *stats.mean);
  } else {
    std::printf("average collision momentum change: %.2f ± %.2f kg*m/s\n", *stats.mean, *stats.std);
  }
  return 0;
}

int cmd_rollout(const Options& o) {
  const LoadedPolicy p = load_policy(o);
  const std::uint64_t seed = o.seed.value_or(0);
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::uniform_real_distribution<double> xs(p.world.ped_start_x_min, p.world.ped_start_x_max);
  Vec2 start{xs(rng), p.world.ped_start_y};
  if (o.x) start.x = *o.x;
  if (o.y) start.y = *o.y;
  const EpisodeRecord ep = run_episode(p.source, p.world, start);

  const auto dir = out_dir_or_cwd(o);
  CsvWriter csv(dir / "trajectory.csv", {"t", "x_ped", "y_ped", "x_veh", "y_veh", "v_ped", "v_veh",
                                         "theta_ped", "reward", "braking", "collision"});
  for (std::size_t i = 0; i < ep.rows.size(); ++i) {
    const auto& r = ep.rows[i];
    const bool impact = ep.collided && i + 1 == ep.rows.size();
    csv.field(r.t)
        .field(r.x_ped)
        .field(r.y_ped)
        .field(r.x_veh)
        .field(r.y_veh)
        .field(r.v_ped)
        .field(r.v_veh)
        .field(r.theta_ped)
        .field(r.reward)
        .field(r.braking)
        .field(impact)
        .end_row();
  }
  csv.flush();
  std::ofstream svg(dir / "trajectory.svg", std::ios::trunc);
  svg << svg_trajectory(ep, p.world);
  if (!svg) throw std::runtime_error("write failed: " + (dir / "trajectory.svg").string());

  std::printf("%s from (%.3f, %.3f): %d steps, %s", p.label.c_str(), start.x, start.y, ep.steps,
              ep.collided ? "collision" : "no collision");
  if (ep.collided) std::printf(", momentum change %.2f kg*m/s", ep.collision.momentum_change_2d);
  std::printf("\n");
  return 0;
}

std::string stem_label(const std::filesystem::path& p) {
  const auto parent = p.parent_path().filename().string();
  return parent.empty() ? p.stem().string() : parent + "/" + p.stem().string();
}

int cmd_plot(const Options& o) {
  if (o.inputs.empty()) throw UsageError("plot needs at least one CSV file");
  std::vector<CurveSeries> curves;
  std::vector<double> momenta;
  bool any_recall = false;
  for (const auto& in : o.inputs) {
    const CsvTable t = read_csv(in);
    if (t.rows.empty()) throw CsvError(in, 2, "no data rows");
    const auto& h = t.header;
    auto has = [&](const char* c) { return std::find(h.begin(), h.end(), c) != h.end(); };
    if (has("ci_lo")) {
      const auto ep = t.numbers("episode");
      const auto mean = t.numbers("mean");
      const auto lo = t.numbers("ci_lo");
      const auto hi = t.numbers("ci_hi");
      CurveSeries s{stem_label(in), {}};
      for (std::size_t i = 0; i < ep.size(); ++i) {
        s.points.push_back({static_cast<int>(ep[i]), mean[i], lo[i], hi[i]});
      }
      curves.push_back(std::move(s));
    } else if (has("sigma")) {
      // A single run's metrics: smoothed reward, zero-width band.
      const auto pts = aggregate_curves({t.numbers("reward")}, o.window);
      curves.push_back({stem_label(in), pts});
    } else if (has("start_x")) {
      any_recall = true;
      const auto coll = t.numbers("collided");
      const auto mom = t.numbers("momentum_2d");
      for (std::size_t i = 0; i < coll.size(); ++i) {
        if (coll[i] != 0.0) momenta.push_back(mom[i]);
      }
    } else {
      throw CsvError(in, 1, "unrecognized columns (expected curves, metrics or recall data)");
    }
  }
  if (!curves.empty() && any_recall) throw UsageError("cannot mix recall data with reward curves");

  std::filesystem::path out = o.out ? std::filesystem::path(*o.out)
                                    : std::filesystem::path(any_recall ? "recall.svg" : "curves.svg");
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::trunc);
  if (any_recall) {
    f << svg_histogram(momenta, o.bins, "collision momentum change", "momentum change (kg*m/s)");
  } else {
    f << svg_reward_curves(curves, curves.size() > 1 ? "episode reward comparison" : "episode reward");
  }
  if (!f) throw std::runtime_error("write failed: " + out.string());
  std::printf("wrote %s\n", out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Adversarial pedestrian agents against a braking vehicle"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "run configuration (JSON)");
    c->add_option("--out", o.out, "output directory");
    c->add_option("--seed", o.seed, "master seed");
  };
  auto policy = [&](CLI::App* c) {
    c->add_option("--checkpoint", o.checkpoint, "trained agent checkpoint");
    c->add_option("--agent", o.agent, "socialforce (instead of a checkpoint)");
    c->add_option("--kd", o.kd, "crossing-force gain for the social-force agent");
  };

  auto* train = app.add_subcommand("train", "train one run or a multi-seed batch");
  common(train);
  train->add_option("--seeds", o.seeds, "number of independent runs");
  train->add_option("--episodes", o.episodes, "episode budget per run");
  train->add_option("--agent", o.agent, "socialforce, rl_baseline or rl_momentum");
  train->add_option("--reward", o.reward, "baseline or momentum (selects the RL agent)");
  train->add_option("--kd", o.kd, "crossing-force gain for the social-force agent");
  train->add_option("--workers", o.workers, "parallel runs (0: one per core)");
  train->add_option("--window", o.window, "moving-average window for curves.csv");

  auto* eval = app.add_subcommand("eval", "recall evaluation from random starts");
  common(eval);
  policy(eval);
  eval->add_option("--n", o.n, "episodes (default 100)");

  auto* rollout = app.add_subcommand("rollout", "one exploration-free episode with trajectory output");
  common(rollout);
  policy(rollout);
  rollout->add_option("--x", o.x, "start x (default: drawn from the seed)");
  rollout->add_option("--y", o.y, "start y (default: sidewalk start line)");

  auto* plot = app.add_subcommand("plot", "SVG charts from curves, metrics or recall CSV files");
  plot->add_option("inputs", o.inputs, "CSV files")->required();
  plot->add_option("--out", o.out, "output SVG path");
  plot->add_option("--window", o.window, "smoothing window for metrics files");
  plot->add_option("--bins", o.bins, "histogram bins for recall files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*rollout) return cmd_rollout(o);
    return cmd_plot(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage: %s\n", e.what());
    return kExitUsage;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint: %s\n", e.what());
    return kExitUsage;
  } catch (const CsvError& e) {
    std::fprintf(stderr, "csv: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
