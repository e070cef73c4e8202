#include "advped/config.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace advped {

using nlohmann::json;

namespace {

/// Walks the keys of one section, dispatching each to a setter and
/// rejecting anything not registered.
class SectionReader {
 public:
  SectionReader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw ConfigError(section_, "section must be an object");
  }

  template <typename T>
  SectionReader& field(const std::string& key, T& target) {
    setters_[key] = [this, &target, key](const json& v) {
      try {
        target = v.get<T>();
      } catch (const json::exception&) {
        throw ConfigError(qualified(key), "wrong type");
      }
    };
    return *this;
  }

  SectionReader& custom(const std::string& key, std::function<void(const json&)> fn) {
    setters_[key] = [this, key, fn = std::move(fn)](const json& v) {
      try {
        fn(v);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw ConfigError(qualified(key), e.what());
      }
    };
    return *this;
  }

  void read() const {
    for (const auto& [key, value] : j_.items()) {
      auto it = setters_.find(key);
      if (it == setters_.end()) throw ConfigError(qualified(key), "unknown key");
      it->second(value);
    }
  }

  std::string qualified(const std::string& key) const { return section_ + "." + key; }

 private:
  const json& j_;
  std::string section_;
  std::map<std::string, std::function<void(const json&)>> setters_;
};

Vec2 vec2_from_json(const json& v) {
  if (!v.is_array() || v.size() != 2) throw std::invalid_argument("expected [x, y]");
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

json vec2_to_json(Vec2 v) { return json::array({v.x, v.y}); }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

json to_json(const WorldConfig& c) {
  return {{"dt", c.dt},
          {"ped_speed", c.ped_speed},
          {"veh_speed_init", c.veh_speed_init},
          {"brake_decel", c.brake_decel},
          {"brake_trigger_dist", c.brake_trigger_dist},
          {"mass_ped", c.mass_ped},
          {"mass_veh", c.mass_veh},
          {"collision_radius", c.collision_radius},
          {"driveway_y_min", c.driveway_y_min},
          {"driveway_y_max", c.driveway_y_max},
          {"ped_start_x_min", c.ped_start_x_min},
          {"ped_start_x_max", c.ped_start_x_max},
          {"ped_start_y", c.ped_start_y},
          {"veh_start", vec2_to_json(c.veh_start)},
          {"max_steps", c.max_steps},
          {"action_bound", c.action_bound}};
}

WorldConfig world_from_json(const json& j) {
  WorldConfig c;
  SectionReader(j, "world")
      .field("dt", c.dt)
      .field("ped_speed", c.ped_speed)
      .field("veh_speed_init", c.veh_speed_init)
      .field("brake_decel", c.brake_decel)
      .field("brake_trigger_dist", c.brake_trigger_dist)
      .field("mass_ped", c.mass_ped)
      .field("mass_veh", c.mass_veh)
      .field("collision_radius", c.collision_radius)
      .field("driveway_y_min", c.driveway_y_min)
      .field("driveway_y_max", c.driveway_y_max)
      .field("ped_start_x_min", c.ped_start_x_min)
      .field("ped_start_x_max", c.ped_start_x_max)
      .field("ped_start_y", c.ped_start_y)
      .custom("veh_start", [&](const json& v) { c.veh_start = vec2_from_json(v); })
      .field("max_steps", c.max_steps)
      .field("action_bound", c.action_bound)
      .read();
  c.validate();
  return c;
}

json to_json(const DdpgConfig& c) {
  return {{"gamma", c.gamma},
          {"tau", c.tau},
          {"lr_actor", c.lr_actor},
          {"lr_critic", c.lr_critic},
          {"batch_size", c.batch_size},
          {"buffer_capacity", c.buffer_capacity},
          {"noise_sigma", c.noise_sigma},
          {"noise_decay", c.noise_decay},
          {"warmup_steps", c.warmup_steps},
          {"hidden_layers", c.hidden_layers},
          {"output_layer_init", c.output_layer_init},
          {"train_every", c.train_every},
          {"gradient_steps", c.gradient_steps},
          {"bootstrap_on_timeout", c.bootstrap_on_timeout},
          {"reward_scale", c.reward_scale},
          {"preactivation_penalty", c.preactivation_penalty}};
}

DdpgConfig ddpg_from_json(const json& j) {
  DdpgConfig c;
  SectionReader(j, "ddpg")
      .field("gamma", c.gamma)
      .field("tau", c.tau)
      .field("lr_actor", c.lr_actor)
      .field("lr_critic", c.lr_critic)
      .field("batch_size", c.batch_size)
      .field("buffer_capacity", c.buffer_capacity)
      .field("noise_sigma", c.noise_sigma)
      .field("noise_decay", c.noise_decay)
      .field("warmup_steps", c.warmup_steps)
      .field("hidden_layers", c.hidden_layers)
      .field("output_layer_init", c.output_layer_init)
      .field("train_every", c.train_every)
      .field("gradient_steps", c.gradient_steps)
      .field("bootstrap_on_timeout", c.bootstrap_on_timeout)
      .field("reward_scale", c.reward_scale)
      .field("preactivation_penalty", c.preactivation_penalty)
      .read();
  c.validate();
  return c;
}

json to_json(const SocialForceParams& p) {
  return {{"k_v", p.k_v},
          {"k_d", p.k_d},
          {"relax_time", p.relax_time},
          {"v_max", p.v_max},
          {"crossing_direction", vec2_to_json(p.crossing_direction)}};
}

SocialForceParams socialforce_from_json(const json& j) {
  SocialForceParams p;
  SectionReader(j, "socialforce")
      .field("k_v", p.k_v)
      .field("k_d", p.k_d)
      .field("relax_time", p.relax_time)
      .field("v_max", p.v_max)
      .custom("crossing_direction",
              [&](const json& v) { p.crossing_direction = vec2_from_json(v); })
      .read();
  p.validate();
  return p;
}

json env_to_json(const ObservationNorms& norms, const RewardOptions& opts) {
  return {{"norm_position", norms.position},
          {"norm_speed", norms.speed},
          {"norm_angle", norms.angle},
          {"ties_as_away", opts.ties_as_away},
          {"swap_toward_away", opts.swap_toward_away}};
}

void env_from_json(const json& j, ObservationNorms& norms, RewardOptions& opts) {
  SectionReader(j, "env")
      .field("norm_position", norms.position)
      .field("norm_speed", norms.speed)
      .field("norm_angle", norms.angle)
      .field("ties_as_away", opts.ties_as_away)
      .field("swap_toward_away", opts.swap_toward_away)
      .read();
  for (auto [key, v] : {std::pair{"env.norm_position", norms.position},
                        std::pair{"env.norm_speed", norms.speed},
                        std::pair{"env.norm_angle", norms.angle}}) {
    if (!std::isfinite(v) || v <= 0.0) throw ConfigError(key, "must be > 0");
  }
}

RunSpec run_spec_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");
  RunSpec spec;
  std::optional<std::string> reward;
  for (const auto& [key, value] : doc.items()) {
    if (key == "world") {
      spec.world = world_from_json(value);
    } else if (key == "ddpg") {
      spec.ddpg = ddpg_from_json(value);
    } else if (key == "socialforce") {
      spec.socialforce = socialforce_from_json(value);
    } else if (key == "env") {
      env_from_json(value, spec.norms, spec.reward_options);
    } else if (key == "run") {
      std::string out = spec.out_dir.string();
      SectionReader(value, "run")
          .custom("agent", [&](const json& v) { spec.agent = parse_agent_kind(v.get<std::string>()); })
          .custom("reward", [&](const json& v) { reward = v.get<std::string>(); })
          .field("episodes", spec.episodes)
          .field("seeds", spec.seeds)
          .field("seed", spec.seed)
          .field("out_dir", out)
          .field("checkpoint_every", spec.checkpoint_every)
          .field("recall_n", spec.recall_n)
          .custom("recall_area", [&](const json& v) {
            SectionReader(v, "run.recall_area")
                .field("x_min", spec.recall_area.x_min)
                .field("x_max", spec.recall_area.x_max)
                .field("y_min", spec.recall_area.y_min)
                .field("y_max", spec.recall_area.y_max)
                .read();
          })
          .read();
      spec.out_dir = out;
    } else {
      throw ConfigError(key, "unknown section");
    }
  }
  if (reward) {
    RewardDesign design;
    try {
      design = parse_reward_design(*reward);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("run.reward", e.what());
    }
    if (spec.agent == AgentKind::SocialForce) {
      throw ConfigError("run.reward", "the socialforce agent takes no reward");
    }
    spec.agent = design == RewardDesign::BaselineSignal ? AgentKind::RlBaseline
                                                        : AgentKind::RlMomentum;
  }
  spec.validate();
  return spec;
}

json to_json(const RunSpec& spec) {
  json recall = {{"x_min", spec.recall_area.x_min},
                 {"x_max", spec.recall_area.x_max},
                 {"y_min", spec.recall_area.y_min},
                 {"y_max", spec.recall_area.y_max}};
  return {{"world", to_json(spec.world)},
          {"ddpg", to_json(spec.ddpg)},
          {"socialforce", to_json(spec.socialforce)},
          {"env", env_to_json(spec.norms, spec.reward_options)},
          {"run",
           {{"agent", std::string(to_string(spec.agent))},
            {"episodes", spec.episodes},
            {"seeds", spec.seeds},
            {"seed", spec.seed},
            {"out_dir", spec.out_dir.string()},
            {"checkpoint_every", spec.checkpoint_every},
            {"recall_n", spec.recall_n},
            {"recall_area", recall}}}};
}

RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("parse error: ") + e.what());
  }
  return run_spec_from_json(doc);
}

std::string config_fingerprint(const WorldConfig& world, const ObservationNorms& norms,
                               const DdpgConfig& ddpg) {
  const json doc = {{"world", to_json(world)},
                    {"norms", env_to_json(norms, RewardOptions{})},
                    {"hidden_layers", ddpg.hidden_layers}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(doc.dump())));
  return buf;
}

}  // namespace advped
