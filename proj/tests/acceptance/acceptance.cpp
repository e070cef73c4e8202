// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   advped_acceptance --group fast       criteria 1-6, 8, 10
//   advped_acceptance --group learning   criteria 7 and 9 (long training runs)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "advped/checkpoint.hpp"
#include "advped/collision.hpp"
#include "advped/config.hpp"
#include "advped/csv.hpp"
#include "advped/ddpg.hpp"
#include "advped/harness.hpp"
#include "advped/logging.hpp"
#include "advped/nn.hpp"
#include "advped/rng.hpp"
#include "advped/sim.hpp"
#include "oracles.hpp"

using namespace advped;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Settings {
  fs::path work_dir = "acceptance_work";
  std::uint64_t master_seed = 2024;
  int episodes = 2000;
  int seeds = 3;
  int recall_n = 100;
  bool reuse = false;
};

std::string fmt_num(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// 1 ------------------------------------------------------------------------
Verdict elastic_conservation() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> mass(0.1, 5000.0), speed(-50.0, 50.0);
  double worst_p = 0.0, worst_e = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double mp = mass(rng), mc = mass(rng), vp = speed(rng), vc = speed(rng);
    const double vp2 = post_collision_speed_1d(mp, mc, vp, vc);
    const double vc2 = post_collision_speed_1d_vehicle(mp, mc, vp, vc);
    const double p_scale = std::abs(mp * vp) + std::abs(mc * vc);
    const double e0 = 0.5 * mp * vp * vp + 0.5 * mc * vc * vc;
    const double e1 = 0.5 * mp * vp2 * vp2 + 0.5 * mc * vc2 * vc2;
    worst_p = std::max(worst_p, std::abs(mp * vp2 + mc * vc2 - (mp * vp + mc * vc)) / p_scale);
    worst_e = std::max(worst_e, std::abs(e1 - e0) / e0);
  }
  return {worst_p <= 1e-9 && worst_e <= 1e-9,
          "max rel error momentum " + fmt_num(worst_p, 3) + ", energy " + fmt_num(worst_e, 3)};
}

// 2 ------------------------------------------------------------------------
Verdict oracle_equivalence() {
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> mass(1.0, 3000.0), speed(0.0, 30.0), ang(-kPi, kPi);
  const double fixed[] = {0.0, kPi / 2, kPi};
  double worst = 0.0;
  int checked = 0;
  auto check = [&](double mp, double mc, double vp, double vc, double th) {
    const double got = momentum_change_2d(mp, mc, vp, vc, th);
    const double want = oracle::momentum_change_2d(mp, mc, vp, vc, th);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    ++checked;
  };
  for (int i = 0; i < 1000; ++i) {
    const double mp = mass(rng), mc = mass(rng), vp = speed(rng), vc = speed(rng);
    // Every tenth draw also runs the three exact angles.
    if (i % 10 == 0) {
      for (double th : fixed) check(mp, mc, vp, vc, th);
    }
    check(mp, mc, vp, vc, ang(rng));
  }
  check(70, 1500, 2, 7, kPi);
  return {worst <= 1e-12, std::to_string(checked) + " inputs, max rel error " + fmt_num(worst, 3)};
}

// 3 ------------------------------------------------------------------------
double grad_rel_error(const Mlp& net, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vector x(net.input_dim());
  for (auto& v : x) v = n01(rng);
  Vector g(net.output_dim());
  for (auto& v : g) v = n01(rng);
  auto loss = [&](const Mlp& m) { return forward(m, x).dot(g); };
  const ParamSet analytic = backward(net, x, g).grads;
  const ParamSet numeric = oracle::fd_param_grads(net, loss, 1e-5);
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
    diff += (analytic.weights[l] - numeric.weights[l]).squaredNorm() +
            (analytic.biases[l] - numeric.biases[l]).squaredNorm();
  }
  na = analytic.squared_norm();
  nn = numeric.squared_norm();
  const double denom = std::sqrt(na) + std::sqrt(nn);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

Verdict gradient_check() {
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> width(2, 24), depth(1, 3);
  std::vector<std::pair<std::vector<int>, OutputActivation>> nets;
  nets.push_back({{8, 512, 256, 1}, OutputActivation::ScaledTanh});
  nets.push_back({{9, 512, 256, 1}, OutputActivation::Linear});
  while (nets.size() < 22) {
    std::vector<int> dims{width(rng)};
    const int d = depth(rng);
    for (int k = 0; k < d; ++k) dims.push_back(width(rng));
    dims.push_back(1 + static_cast<int>(nets.size()) % 3);
    nets.push_back({dims, nets.size() % 2 ? OutputActivation::Linear : OutputActivation::ScaledTanh});
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    Mlp net = init_mlp(nets[i].first, nets[i].second, 500 + i, kPi / 2);
    // Non-zero biases so no unit starts exactly on a ReLU kink.
    std::uniform_real_distribution<double> bias(-0.1, 0.1);
    for (auto& b : net.biases) {
      for (auto& v : b) v = bias(rng);
    }
    worst = std::max(worst, grad_rel_error(net, rng));
  }
  return {worst <= 1e-4, std::to_string(nets.size()) +
                             " nets incl. [8,512,256,1] and [9,512,256,1], max relative error " +
                             fmt_num(worst, 3)};
}

// 4 ------------------------------------------------------------------------
Verdict ddpg_mechanics() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  // Soft update with the default tau.
  const DdpgConfig defaults;
  expect(defaults.tau == 0.005, "default tau");
  Mlp target = init_mlp({8, 512, 256, 1}, OutputActivation::ScaledTanh, 1, kPi / 2);
  const Mlp online = init_mlp({8, 512, 256, 1}, OutputActivation::ScaledTanh, 2, kPi / 2);
  const Mlp before = target;
  soft_update(target, online, defaults.tau);
  double worst = 0.0;
  for (std::size_t l = 0; l < target.weights.size(); ++l) {
    const Matrix moved = target.weights[l] - before.weights[l];
    const Matrix want = defaults.tau * (online.weights[l] - before.weights[l]);
    // The update itself is one fused expression; compare to within the
    // rounding of the final addition.
    const double tol = 4 * std::numeric_limits<double>::epsilon();
    for (Eigen::Index i = 0; i < moved.size(); ++i) {
      const double err = std::abs(moved.data()[i] - want.data()[i]);
      const double scale = std::max(std::abs(before.weights[l].data()[i]), std::abs(target.weights[l].data()[i]));
      worst = std::max(worst, err / std::max(scale * tol, 1e-300));
    }
  }
  expect(worst <= 1.0, "soft update off by " + fmt_num(worst) + " rounding units");

  // FIFO eviction.
  ReplayBuffer buf(2, 5);
  for (int i = 0; i < 12; ++i) buf.push({Vector::Constant(2, i), 0.0, double(i), Vector::Zero(2), false});
  bool fifo = buf.size() == 5;
  for (std::size_t i = 0; i < buf.size(); ++i) fifo = fifo && buf.at(i).reward == double(7 + i);
  expect(fifo, "fifo eviction");

  // Warmup gating: no learning before warmup, nor before a full batch.
  DdpgConfig c;
  c.hidden_layers = {16, 16};
  c.batch_size = 16;
  c.buffer_capacity = 100;
  c.warmup_steps = 40;
  DdpgAgent agent(3, 1.0, c, 4);
  bool gated = true;
  for (int i = 0; i < 40; ++i) {
    gated = gated && !agent.ready_to_learn();
    agent.remember({Vector::Random(3), 0.1, 1.0, Vector::Random(3), false});
  }
  expect(gated && agent.ready_to_learn(), "warmup gating");
  c.warmup_steps = 0;
  DdpgAgent early(3, 1.0, c, 4);
  for (int i = 0; i < 15; ++i) early.remember({Vector::Random(3), 0.1, 1.0, Vector::Random(3), false});
  expect(!early.ready_to_learn() && early.train_step().skipped, "batch gating");

  // gamma = 0 targets are the rewards exactly (unscaled).
  c.gamma = 0.0;
  c.reward_scale = 1.0;
  DdpgAgent g0(3, 1.0, c, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 50; ++i) {
    g0.remember({Vector::Random(3), 0.2, 100 * n01(rng), Vector::Random(3), i % 2 == 0});
  }
  const auto batch = g0.buffer.sample(16, g0.sample_rng);
  expect(batch && critic_targets(g0, *batch) == batch->rewards, "gamma=0 targets");

  Verdict v;
  v.pass = failed.empty();
  v.detail = v.pass ? "tau exact to " + fmt_num(worst, 2) + " rounding units; fifo, warmup, gamma=0 ok"
                    : "failed:";
  for (const auto& f : failed) v.detail += " [" + f + "]";
  return v;
}

// 5 ------------------------------------------------------------------------
Verdict determinism(const Settings& s) {
  RunSpec spec;
  spec.agent = AgentKind::RlMomentum;
  spec.episodes = 50;
  spec.seed = s.master_seed;
  spec.checkpoint_every = 0;
  spec.out_dir = s.work_dir / "c5" / "a";
  fs::remove_all(s.work_dir / "c5");
  train_run(spec);
  spec.out_dir = s.work_dir / "c5" / "b";
  train_run(spec);
  const std::string a = slurp(s.work_dir / "c5" / "a" / "metrics.csv");
  const std::string b = slurp(s.work_dir / "c5" / "b" / "metrics.csv");
  const bool rows_ok = read_csv(s.work_dir / "c5" / "a" / "metrics.csv").rows.size() == 50;
  return {rows_ok && a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "differ")};
}

// 6 ------------------------------------------------------------------------
Verdict braking_gate() {
  const WorldConfig w;
  const VehicleState veh{{0, 0}, w.veh_speed_init, 0};
  struct Case {
    Vec2 ped;
    bool brake;
  };
  const Case cases[] = {
      {{9.9, 0}, true},     {{10.1, 0}, false},  {{-9.9, 0}, true},   {{10.0, 0}, false},
      {{5, 2.9}, true},     {{5, 3.0}, true},    {{5, -3.0}, true},   {{5, 3.1}, false},
      {{5, -5.0}, false},   {{0, -3.01}, false}, {{9.9, -0.5}, true}, {{6, 8}, false},
      {{9.85, 1.5}, true},  {{60, 0}, false},
  };
  int wrong = 0;
  for (const auto& c : cases) {
    const PedestrianState ped{c.ped, 0, 0};
    const bool expect = in_driveway(c.ped, w) && distance(ped, veh) < w.brake_trigger_dist;
    const double decel = brake_controller(ped, veh, w);
    if ((decel > 0.0) != c.brake || expect != c.brake || (c.brake && decel != w.brake_decel)) ++wrong;
  }
  // One step through the vehicle model on each side of the threshold.
  const VehicleState slowed = step_vehicle(veh, brake_controller({{9.9, 0}, 0, 0}, veh, w), w);
  const VehicleState kept = step_vehicle(veh, brake_controller({{10.1, 0}, 0, 0}, veh, w), w);
  const bool dynamics = slowed.speed == veh.speed - w.brake_decel * w.dt && kept.speed == veh.speed;
  return {wrong == 0 && dynamics, std::to_string(std::size(cases)) + " gate cases, " +
                                      std::to_string(wrong) + " wrong; vehicle step " +
                                      (dynamics ? "consistent" : "inconsistent")};
}

// 8 ------------------------------------------------------------------------
Verdict socialforce_dichotomy(const Settings& s) {
  const WorldConfig w;
  SocialForceParams on;
  SocialForceParams off;
  off.k_d = 0.0;
  const RecallStats a = recall_eval(on, w, 20, s.master_seed);
  const RecallStats b = recall_eval(off, w, 20, s.master_seed);
  return {a.n_collisions >= 1 && b.n_collisions == 0,
          "k_d=" + fmt_num(on.k_d) + ": " + std::to_string(a.n_collisions) + "/20 collisions, k_d=0: " +
              std::to_string(b.n_collisions) + "/20"};
}

// 10 -----------------------------------------------------------------------
Verdict checkpoint_round_trip(const Settings& s) {
  RunSpec spec;
  spec.episodes = 3;
  spec.seed = s.master_seed;
  spec.checkpoint_every = 0;
  spec.out_dir = s.work_dir / "c10";
  fs::remove_all(spec.out_dir);
  const RunResult r = train_run(spec);
  const fs::path ckpt = *r.final_checkpoint;

  // Two independent loads, evaluated on the same starts.
  const RecallStats first = recall_eval(to_policy(load_checkpoint(ckpt)), spec.world, 20, 77);
  const fs::path copy = spec.out_dir / "copy.ckpt";
  save_checkpoint(load_checkpoint(ckpt).agent, {spec.world, spec.norms, RewardDesign::CollisionMomentum, {}},
                  copy);
  const RecallStats second = recall_eval(to_policy(load_checkpoint(copy)), spec.world, 20, 77);
  const bool same = first == second;

  std::string bytes = slurp(ckpt);
  const fs::path bad = spec.out_dir / "corrupt.ckpt";
  bool rejected = true;
  auto expect_corrupt = [&](const std::string& content) {
    std::ofstream(bad, std::ios::binary | std::ios::trunc) << content;
    try {
      load_checkpoint(bad);
      rejected = false;
    } catch (const CorruptCheckpoint&) {
    } catch (...) {
      rejected = false;
    }
  };
  expect_corrupt(bytes.substr(0, bytes.size() / 2));
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x01;
  expect_corrupt(flipped);
  std::string magic = bytes;
  magic[0] = 'Z';
  expect_corrupt(magic);

  return {same && rejected, std::string("recall stats ") + (same ? "identical" : "differ") +
                                " after save/load/save/load (" + std::to_string(first.n_collisions) +
                                "/20 collisions); corrupted files " +
                                (rejected ? "rejected as CorruptCheckpoint" : "NOT rejected correctly")};
}

// 7 and 9 ------------------------------------------------------------------
struct LearningRun {
  RunResult result;
  RecallStats recall;
};

LearningRun learning_run(const Settings& s, AgentKind kind, std::uint64_t seed, int index) {
  RunSpec spec;
  spec.agent = kind;
  spec.episodes = s.episodes;
  spec.seed = seed;
  spec.out_dir = s.work_dir / "learning" / std::string(to_string(kind)) / ("run_" + std::to_string(index));
  LearningRun out;
  const fs::path final_ckpt = spec.out_dir / "final.ckpt";
  bool reused = false;
  // A finished run is only reused when it was trained with this exact spec.
  const fs::path stored_cfg = spec.out_dir / "config.json";
  const bool same_spec = fs::exists(stored_cfg) &&
                         nlohmann::json::parse(slurp(stored_cfg), nullptr, false) == to_json(spec);
  if (s.reuse && same_spec && fs::exists(final_ckpt) && fs::exists(spec.out_dir / "metrics.csv")) {
    const CsvTable t = read_csv(spec.out_dir / "metrics.csv");
    if (static_cast<int>(t.rows.size()) == spec.episodes) {
      const auto reward = t.numbers("reward");
      for (std::size_t i = 0; i < reward.size(); ++i) {
        EpisodeMetrics m;
        m.episode = static_cast<int>(i);
        m.reward = reward[i];
        out.result.episodes.push_back(m);
      }
      out.result.final_checkpoint = final_ckpt;
      reused = true;
      spdlog::info("reusing {}", spec.out_dir.string());
    }
  }
  if (!reused) {
    fs::remove_all(spec.out_dir);
    out.result = train_run(spec);
  }
  out.recall = recall_eval(to_policy(load_checkpoint(*out.result.final_checkpoint)), spec.world,
                           s.recall_n, derive_seed(s.master_seed, 77));
  return out;
}

std::string describe(const RecallStats& r) {
  std::string t = std::to_string(r.n_collisions) + "/" + std::to_string(r.n_episodes);
  if (r.mean) t += " mean " + fmt_num(*r.mean, 5);
  if (r.std) t += " +- " + fmt_num(*r.std, 4);
  return t;
}

double mean_of(const std::vector<EpisodeMetrics>& eps, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += eps[i].reward;
  return s / static_cast<double>(to - from);
}

std::pair<Verdict, Verdict> learning_criteria(const Settings& s) {
  const auto seeds = derive_run_seeds(s.master_seed, s.seeds);
  int ordered = 0, rising = 0;
  std::string d7, d9;
  for (int i = 0; i < s.seeds; ++i) {
    const LearningRun mom = learning_run(s, AgentKind::RlMomentum, seeds[i], i);
    const LearningRun base = learning_run(s, AgentKind::RlBaseline, seeds[i], i);
    // An undefined mean (no collisions) never wins a pairing.
    const bool win = mom.recall.mean && base.recall.mean && *mom.recall.mean > *base.recall.mean;
    ordered += win ? 1 : 0;
    d7 += " | seed " + std::to_string(i) + ": momentum " + describe(mom.recall) + " vs baseline " +
          describe(base.recall) + (win ? " ok" : " no");

    const auto& eps = mom.result.episodes;
    const std::size_t tenth = std::max<std::size_t>(1, eps.size() / 10);
    const double first = mean_of(eps, 0, tenth);
    const double last = mean_of(eps, eps.size() - tenth, eps.size());
    rising += last > first ? 1 : 0;
    d9 += " | seed " + std::to_string(i) + ": first " + fmt_num(first, 5) + " last " + fmt_num(last, 5);
    std::fflush(stdout);
  }
  const int need = (2 * s.seeds + 2) / 3;  // 2 of 3
  return {{ordered >= need, std::to_string(ordered) + "/" + std::to_string(s.seeds) + " pairings" + d7},
          {rising >= need, std::to_string(rising) + "/" + std::to_string(s.seeds) + " seeds rising" + d9}};
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"acceptance criteria"};
  std::string group = "all";
  std::vector<int> only;
  Settings s;
  std::string work = s.work_dir.string();
  app.add_option("--group", group, "fast, learning or all")->check(CLI::IsMember({"fast", "learning", "all"}));
  app.add_option("--only", only, "run just these criterion numbers");
  app.add_option("--work-dir", work, "scratch directory for training runs");
  app.add_option("--seed", s.master_seed, "master seed");
  app.add_option("--episodes", s.episodes, "episodes per learning run (criteria 7, 9)");
  app.add_option("--seeds", s.seeds, "seed pairings for criteria 7, 9");
  app.add_flag("--reuse", s.reuse, "reuse finished learning runs found in the work directory");
  CLI11_PARSE(app, argc, argv);
  s.work_dir = work;
  fs::create_directories(s.work_dir);

  const std::set<int> fast{1, 2, 3, 4, 5, 6, 8, 10};
  const std::set<int> learning{7, 9};
  auto selected = [&](int n) {
    if (!only.empty()) return std::find(only.begin(), only.end(), n) != only.end();
    if (group == "fast") return fast.count(n) > 0;
    if (group == "learning") return learning.count(n) > 0;
    return true;
  };

  int failures = 0;
  auto report = [&](int n, const Verdict& v, double secs, double limit) {
    const bool in_time = limit <= 0 || secs <= limit;
    std::printf("criterion %2d: %s  %s [%.1f s%s]\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs,
                limit > 0 ? (in_time ? ", within limit" : ", OVER TIME LIMIT") : "");
    std::fflush(stdout);
    if (!v.pass) ++failures;
  };
  auto timed = [&](int n, double limit, const std::function<Verdict()>& fn) {
    if (!selected(n)) return;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    report(n, v, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), limit);
  };

  timed(1, 1, elastic_conservation);
  timed(2, 1, oracle_equivalence);
  timed(3, 60, gradient_check);
  timed(4, 10, ddpg_mechanics);
  timed(5, 120, [&] { return determinism(s); });
  timed(6, 1, braking_gate);
  timed(8, 60, [&] { return socialforce_dichotomy(s); });
  timed(10, 60, [&] { return checkpoint_round_trip(s); });

  if (selected(7) || selected(9)) {
    const auto t0 = std::chrono::steady_clock::now();
    std::pair<Verdict, Verdict> v;
    try {
      v = learning_criteria(s);
    } catch (const std::exception& e) {
      v.first = v.second = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (selected(7)) report(7, v.first, secs, 45 * 60);
    if (selected(9)) report(9, v.second, secs, 0);
  }
  return failures == 0 ? 0 : 1;
}
