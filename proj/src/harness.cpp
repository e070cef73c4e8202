#include "advped/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "advped/checkpoint.hpp"
#include "advped/config.hpp"
#include "advped/csv.hpp"
#include "advped/logging.hpp"
#include "advped/rng.hpp"

namespace advped {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::SocialForce: return "socialforce";
    case AgentKind::RlBaseline: return "rl_baseline";
    case AgentKind::RlMomentum: return "rl_momentum";
  }
  return "?";
}

AgentKind parse_agent_kind(std::string_view text) {
  if (text == "socialforce") return AgentKind::SocialForce;
  if (text == "rl_baseline") return AgentKind::RlBaseline;
  if (text == "rl_momentum") return AgentKind::RlMomentum;
  throw std::invalid_argument("unknown agent kind '" + std::string(text) +
                              "' (expected socialforce, rl_baseline or rl_momentum)");
}

RewardDesign reward_design_for(AgentKind kind) {
  return kind == AgentKind::RlBaseline ? RewardDesign::BaselineSignal
                                       : RewardDesign::CollisionMomentum;
}

void RunSpec::validate() const {
  world.validate();
  ddpg.validate();
  socialforce.validate();
  if (episodes < 1) throw ConfigError("run.episodes", "must be >= 1");
  if (seeds < 1) throw ConfigError("run.seeds", "must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("run.checkpoint_every", "must be >= 0");
  if (recall_n < 1) throw ConfigError("run.recall_n", "must be >= 1");
  if (!(recall_area.x_min <= recall_area.x_max) || !(recall_area.y_min <= recall_area.y_max)) {
    throw ConfigError("run.recall_area", "min must not exceed max");
  }
  if (out_dir.empty()) throw ConfigError("run.out_dir", "must not be empty");
}

namespace {

// Child stream indices under a run seed. 1-4 are taken by DdpgAgent.
constexpr std::uint64_t kAgentStream = 0;
constexpr std::uint64_t kEpisodeStream = 6;

std::mt19937_64 episode_rng(std::uint64_t run_seed, int episode) {
  return std::mt19937_64(derive_seed(derive_seed(run_seed, kEpisodeStream),
                                     static_cast<std::uint64_t>(episode)));
}

class MetricsFile {
 public:
  explicit MetricsFile(const std::filesystem::path& path)
      : csv_(path, {"episode", "reward", "steps", "collided", "momentum_2d", "momentum_1d", "sigma"}) {}

  void write(const EpisodeMetrics& m) {
    csv_.field(m.episode)
        .field(m.reward)
        .field(m.steps)
        .field(m.collided)
        .field(m.momentum_2d)
        .field(m.momentum_1d)
        .field(m.sigma)
        .end_row();
    csv_.flush();
  }

 private:
  CsvWriter csv_;
};

// Periodic progress summary.
struct Window {
  int episodes = 0;
  int collisions = 0;
  double reward = 0.0;

  void add(const EpisodeMetrics& m) {
    ++episodes;
    collisions += m.collided ? 1 : 0;
    reward += m.reward;
  }
};

constexpr int kLogEvery = 50;

struct SfStep {
  SfPedestrianState ped;
  VehicleState veh;
  bool braking = false;
  CollisionOutcome collision;
};

SfStep socialforce_step(const SfPedestrianState& ped, const VehicleState& veh,
                        const SocialForceParams& params, const WorldConfig& world) {
  SfStep s;
  const double ped_speed_pre = as_pedestrian_state(ped).speed;
  const double veh_speed_pre = veh.speed;
  const Vec2 f = compute_force(ped, veh, params, world.mass_ped);
  s.ped = step_socialforce(ped, f, world.dt, world.mass_ped, params);
  const PedestrianState view = as_pedestrian_state(s.ped);
  const double decel = brake_controller(view, veh, world);
  s.braking = decel > 0.0;
  s.veh = step_vehicle(veh, decel, world);
  s.collision = evaluate_collision(view, s.veh, ped_speed_pre, veh_speed_pre, world);
  return s;
}

EpisodeRecord run_socialforce(const SocialForceParams& params, const WorldConfig& world, Vec2 start) {
  EpisodeRecord rec;
  rec.start = start;
  SfPedestrianState ped{start, {0.0, 0.0}};
  VehicleState veh{world.veh_start, world.veh_speed_init, 0.0};
  auto row = [&](int k, bool braking) {
    const PedestrianState view = as_pedestrian_state(ped);
    rec.rows.push_back({static_cast<double>(k) * world.dt, ped.position.x, ped.position.y,
                        veh.position.x, veh.position.y, view.speed, veh.speed, view.heading, 0.0,
                        braking});
  };
  row(0, false);
  for (int k = 1; k <= world.max_steps; ++k) {
    const SfStep s = socialforce_step(ped, veh, params, world);
    ped = s.ped;
    veh = s.veh;
    row(k, s.braking);
    rec.steps = k;
    if (s.collision.collided) {
      rec.collided = true;
      rec.collision = s.collision;
      break;
    }
  }
  return rec;
}

EpisodeRecord run_actor(const ActorPolicy& policy, const WorldConfig& world, Vec2 start) {
  PedestrianEnv env(world, policy.design, policy.reward_options, policy.norms);
  EpisodeRecord rec;
  rec.start = start;
  Observation obs = env.reset_at(start);
  auto row = [&](const SimState& s, double reward, bool braking) {
    rec.rows.push_back({s.elapsed, s.pedestrian.position.x, s.pedestrian.position.y,
                        s.vehicle.position.x, s.vehicle.position.y, s.pedestrian.speed,
                        s.vehicle.speed, s.pedestrian.heading, reward, braking});
  };
  row(env.state(), 0.0, false);
  while (!env.done()) {
    const StepOutcome out = env.step(forward(policy.actor, obs)(0));
    obs = out.observation;
    rec.total_reward += out.reward;
    rec.steps += 1;
    row(out.info.state, out.reward, out.info.braking);
    if (out.info.collided) {
      rec.collided = true;
      rec.collision = out.info.collision;
    }
  }
  return rec;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

RunResult train_socialforce(const RunSpec& spec, spdlog::logger& log) {
  RunResult result;
  result.seed = spec.seed;
  result.dir = spec.out_dir;
  MetricsFile metrics(spec.out_dir / "metrics.csv");
  Window win;
  for (int e = 0; e < spec.episodes; ++e) {
    auto rng = episode_rng(spec.seed, e);
    std::uniform_real_distribution<double> x(spec.world.ped_start_x_min, spec.world.ped_start_x_max);
    const EpisodeRecord rec = run_socialforce(spec.socialforce, spec.world, {x(rng), spec.world.ped_start_y});
    EpisodeMetrics m;
    m.episode = e;
    m.steps = rec.steps;
    m.collided = rec.collided;
    m.momentum_2d = rec.collision.momentum_change_2d;
    m.momentum_1d = rec.collision.momentum_change_1d;
    metrics.write(m);
    result.episodes.push_back(m);
    win.add(m);
    if ((e + 1) % kLogEvery == 0 || e + 1 == spec.episodes) {
      log.info("episode {}: {}/{} collisions", e + 1, win.collisions, win.episodes);
      win = {};
    }
  }
  const auto params_path = spec.out_dir / "socialforce.json";
  write_json(params_path, to_json(spec.socialforce));
  result.final_checkpoint = params_path;
  return result;
}

RunResult train_ddpg(const RunSpec& spec, spdlog::logger& log) {
  RunResult result;
  result.seed = spec.seed;
  result.dir = spec.out_dir;
  const RewardDesign design = reward_design_for(spec.agent);
  const CheckpointContext ctx{spec.world, spec.norms, design, spec.reward_options};
  PedestrianEnv env(spec.world, design, spec.reward_options, spec.norms);
  DdpgAgent agent(kObservationDim, spec.world.action_bound, spec.ddpg,
                  derive_seed(spec.seed, kAgentStream));
  MetricsFile metrics(spec.out_dir / "metrics.csv");
  const std::int64_t train_every = spec.ddpg.train_every;

  Window win;
  double last_loss = 0.0;
  for (int e = 0; e < spec.episodes; ++e) {
    auto rng = episode_rng(spec.seed, e);
    EpisodeMetrics m;
    m.episode = e;
    m.sigma = agent.noise_sigma();
    Observation obs = env.reset(rng);
    while (!env.done()) {
      const double action = agent.select_action(obs, true);
      StepOutcome out = env.step(action);
      const bool terminal = out.info.collided || (out.info.timeout && !spec.ddpg.bootstrap_on_timeout);
      agent.remember({obs, action, out.reward, out.observation, terminal});
      obs = std::move(out.observation);
      m.reward += out.reward;
      m.steps += 1;
      if (out.info.collided) {
        m.collided = true;
        m.momentum_2d = out.info.momentum_2d;
        m.momentum_1d = out.info.momentum_1d;
      }
      if (agent.ready_to_learn() && agent.env_steps % train_every == 0) {
        for (int g = 0; g < spec.ddpg.gradient_steps; ++g) {
          const TrainMetrics tm = agent.train_step();
          if (!tm.skipped) last_loss = tm.critic_loss;
        }
      }
    }
    agent.end_episode();
    if (!agent.actor.all_finite() || !agent.critic.all_finite()) {
      throw TrainingDiverged("non-finite network parameters after episode " + std::to_string(e) +
                             " (updates " + std::to_string(agent.updates) + ")");
    }
    metrics.write(m);
    result.episodes.push_back(m);
    win.add(m);
    if ((e + 1) % kLogEvery == 0 || e + 1 == spec.episodes) {
      log.info("episode {}: {}/{} collisions, mean reward {:.2f}, sigma {:.4f}, updates {}, critic loss {:.4g}",
               e + 1, win.collisions, win.episodes, win.reward / win.episodes, m.sigma,
               agent.updates, last_loss);
      win = {};
    }
    if (spec.checkpoint_every > 0 && (e + 1) % spec.checkpoint_every == 0 && e + 1 < spec.episodes) {
      save_checkpoint(agent, ctx, spec.out_dir / ("checkpoint_" + std::to_string(e + 1) + ".ckpt"));
    }
  }
  const auto final_path = spec.out_dir / "final.ckpt";
  save_checkpoint(agent, ctx, final_path);
  result.final_checkpoint = final_path;
  return result;
}

}  // namespace

RunResult train_run(const RunSpec& spec) {
  spec.validate();
  std::filesystem::create_directories(spec.out_dir);
  auto log = make_run_logger(spec.out_dir, spec.out_dir.filename().string());
  write_json(spec.out_dir / "config.json", to_json(spec));
  log->info("{} run, seed {}, {} episodes -> {}", to_string(spec.agent), spec.seed, spec.episodes,
            spec.out_dir.string());
  log->debug("episode e starts from derive_seed(derive_seed({}, {}), e)", spec.seed, kEpisodeStream);
  try {
    RunResult r = spec.agent == AgentKind::SocialForce ? train_socialforce(spec, *log)
                                                        : train_ddpg(spec, *log);
    log->flush();
    return r;
  } catch (const std::exception& ex) {
    log->error("run aborted: {}", ex.what());
    log->flush();
    throw;
  }
}

std::vector<double> moving_average(std::span<const double> series, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  const std::ptrdiff_t left = window / 2;
  const std::ptrdiff_t right = (window - 1) / 2;
  std::vector<double> prefix(series.size() + 1, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
  std::vector<double> out(series.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - left);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + right);
    if (hi - lo + 1 == 1) {
      out[i] = series[i];  // no rounding through the prefix sums
    } else {
      out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

std::vector<CurvePoint> aggregate_curves(const std::vector<std::vector<double>>& runs, int window) {
  if (runs.empty()) return {};
  std::size_t len = runs.front().size();
  for (const auto& r : runs) len = std::min(len, r.size());
  std::vector<std::vector<double>> smooth;
  for (const auto& r : runs) smooth.push_back(moving_average(std::span(r.data(), len), window));
  const double k = static_cast<double>(runs.size());
  std::vector<CurvePoint> out(len);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const auto& s : smooth) sum += s[i];
    const double mean = sum / k;
    double half = 0.0;
    if (runs.size() > 1) {
      double ss = 0.0;
      for (const auto& s : smooth) ss += (s[i] - mean) * (s[i] - mean);
      half = 1.96 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
    }
    out[i] = {static_cast<int>(i), mean, mean - half, mean + half};
  }
  return out;
}

std::vector<std::uint64_t> derive_run_seeds(std::uint64_t master, int n) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < n; ++i) out.push_back(derive_seed(master, 1000 + static_cast<std::uint64_t>(i)));
  return out;
}

MultiRunResult train_multi(const RunSpec& spec, const std::vector<std::uint64_t>& seeds, int workers,
                           int smoothing_window) {
  if (seeds.size() < 2) throw std::invalid_argument("train_multi: need at least two seeds");
  spec.validate();
  std::filesystem::create_directories(spec.out_dir);
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, static_cast<int>(seeds.size()));

  std::vector<std::optional<RunResult>> results(seeds.size());
  std::vector<std::string> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      RunSpec one = spec;
      one.seed = seeds[i];
      one.seeds = 1;
      one.out_dir = spec.out_dir / ("run_" + std::to_string(i));
      try {
        results[i] = train_run(one);
      } catch (const std::exception& ex) {
        errors[i] = "run_" + std::to_string(i) + ": " + ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  MultiRunResult out;
  std::vector<std::vector<double>> rewards;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!errors[i].empty()) {
      out.failures.push_back(errors[i]);
      spdlog::warn("{}", errors[i]);
      continue;
    }
    std::vector<double> r;
    for (const auto& m : results[i]->episodes) r.push_back(m.reward);
    rewards.push_back(std::move(r));
    out.runs.push_back(std::move(*results[i]));
  }
  if (!out.failures.empty()) {
    spdlog::warn("aggregating {} of {} runs", out.runs.size(), seeds.size());
  }
  out.curves = aggregate_curves(rewards, smoothing_window);
  CsvWriter csv(spec.out_dir / "curves.csv", {"episode", "mean", "ci_lo", "ci_hi"});
  for (const auto& p : out.curves) csv.field(p.episode).field(p.mean).field(p.ci_lo).field(p.ci_hi).end_row();
  csv.flush();
  return out;
}

EpisodeRecord run_episode(const PolicySource& policy, const WorldConfig& world, Vec2 start) {
  world.validate();
  if (const auto* actor = std::get_if<ActorPolicy>(&policy)) return run_actor(*actor, world, start);
  return run_socialforce(std::get<SocialForceParams>(policy), world, start);
}

RecallStats recall_eval(const PolicySource& policy, const WorldConfig& world, int n,
                        std::uint64_t seed, const RecallArea& area) {
  if (n < 1) throw std::invalid_argument("recall_eval: n must be >= 1");
  RecallStats stats;
  stats.n_episodes = n;
  std::vector<double> momenta;
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::uniform_real_distribution<double> x(area.x_min, area.x_max);
    std::uniform_real_distribution<double> y(area.y_min, area.y_max);
    const double sx = x(rng);
    const double sy = y(rng);
    EpisodeRecord rec = run_episode(policy, world, {sx, sy});
    rec.rows.clear();
    rec.rows.shrink_to_fit();
    if (rec.collided) momenta.push_back(rec.collision.momentum_change_2d);
    stats.episodes.push_back(std::move(rec));
  }
  stats.n_collisions = static_cast<int>(momenta.size());
  if (!momenta.empty()) {
    double sum = 0.0;
    for (double m : momenta) sum += m;
    const double mean = sum / static_cast<double>(momenta.size());
    stats.mean = mean;
    if (momenta.size() > 1) {
      double ss = 0.0;
      for (double m : momenta) ss += (m - mean) * (m - mean);
      stats.std = std::sqrt(ss / static_cast<double>(momenta.size() - 1));
    }
  }
  return stats;
}

bool operator==(const RecallStats& a, const RecallStats& b) {
  if (a.n_episodes != b.n_episodes || a.n_collisions != b.n_collisions || a.mean != b.mean ||
      a.std != b.std || a.episodes.size() != b.episodes.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    const auto& x = a.episodes[i];
    const auto& y = b.episodes[i];
    if (x.start.x != y.start.x || x.start.y != y.start.y || x.collided != y.collided ||
        x.steps != y.steps || x.total_reward != y.total_reward ||
        x.collision.momentum_change_2d != y.collision.momentum_change_2d ||
        x.collision.momentum_change_1d != y.collision.momentum_change_1d) {
      return false;
    }
  }
  return true;
}

}  // namespace advped
