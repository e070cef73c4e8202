#include "advped/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advped/config.hpp"
#include "advped/csv.hpp"

namespace advped {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O writes host doubles as little-endian");

namespace {

constexpr char kMagic[8] = {'A', 'D', 'V', 'P', 'E', 'D', '0', '1'};

std::uint64_t fnv1a(const char* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v;
  std::memcpy(&v, in.data() + at, 8);
  return v;
}

// Parameter blocks in file order, as (name, pointer, count).
struct BlockRef {
  std::string name;
  double* data;
  std::size_t count;
};

std::vector<BlockRef> blocks_of(DdpgAgent& agent) {
  std::vector<BlockRef> out;
  auto add_net = [&](const std::string& name, Mlp& net) {
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
      out.push_back({name + ".w" + std::to_string(i), net.weights[i].data(),
                     static_cast<std::size_t>(net.weights[i].size())});
      out.push_back({name + ".b" + std::to_string(i), net.biases[i].data(),
                     static_cast<std::size_t>(net.biases[i].size())});
    }
  };
  auto add_set = [&](const std::string& name, ParamSet& p) {
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
      out.push_back({name + ".w" + std::to_string(i), p.weights[i].data(),
                     static_cast<std::size_t>(p.weights[i].size())});
      out.push_back({name + ".b" + std::to_string(i), p.biases[i].data(),
                     static_cast<std::size_t>(p.biases[i].size())});
    }
  };
  add_net("actor", agent.actor);
  add_net("critic", agent.critic);
  add_net("target_actor", agent.target_actor);
  add_net("target_critic", agent.target_critic);
  add_set("actor_opt.m", agent.actor_opt.m);
  add_set("actor_opt.v", agent.actor_opt.v);
  add_set("critic_opt.m", agent.critic_opt.m);
  add_set("critic_opt.v", agent.critic_opt.v);
  return out;
}

template <typename Rng>
std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

template <typename Rng>
void restore_rng(Rng& rng, const std::string& text) {
  std::istringstream is(text);
  is >> rng;
  if (!is) throw CorruptCheckpoint("checkpoint: unreadable generator state");
}

}  // namespace

std::filesystem::path probe_path(const std::filesystem::path& checkpoint) {
  auto p = checkpoint;
  p += ".probe.csv";
  return p;
}

Matrix probe_inputs(int state_dim) {
  // A handful of fixed, order-one observations; only reproducibility matters.
  constexpr int kProbes = 4;
  Matrix x(state_dim, kProbes);
  for (int j = 0; j < kProbes; ++j) {
    for (int i = 0; i < state_dim; ++i) {
      x(i, j) = std::sin(0.7 * (i + 1) + 1.3 * j) * (j % 2 == 0 ? 1.0 : 0.5);
    }
  }
  return x;
}

void save_checkpoint(const DdpgAgent& agent_in, const CheckpointContext& ctx,
                     const std::filesystem::path& path) {
  // blocks_of needs mutable pointers; nothing is written through them here.
  auto& agent = const_cast<DdpgAgent&>(agent_in);
  const auto blocks = blocks_of(agent);

  json block_list = json::array();
  std::size_t total = 0;
  for (const auto& b : blocks) {
    block_list.push_back({{"name", b.name}, {"count", b.count}});
    total += b.count;
  }
  const json meta = {
      {"format_version", kCheckpointVersion},
      {"state_dim", agent.state_dim},
      {"action_bound", agent.action_bound},
      {"actor_dims", agent.actor.layer_dims},
      {"critic_dims", agent.critic.layer_dims},
      {"episode", agent.episode},
      {"env_steps", agent.env_steps},
      {"updates", agent.updates},
      {"actor_opt_step", agent.actor_opt.step},
      {"critic_opt_step", agent.critic_opt.step},
      {"noise_rng", rng_state(agent.noise_rng)},
      {"sample_rng", rng_state(agent.sample_rng)},
      {"fingerprint", config_fingerprint(ctx.world, ctx.norms, agent.config)},
      {"world", to_json(ctx.world)},
      {"ddpg", to_json(agent.config)},
      {"env", env_to_json(ctx.norms, ctx.reward_options)},
      {"reward_design", std::string(to_string(ctx.design))},
      {"blocks", block_list},
  };
  const std::string meta_text = meta.dump();

  std::string buf;
  buf.reserve(32 + meta_text.size() + total * 8);
  buf.append(kMagic, 8);
  put_u64(buf, meta_text.size());
  buf.append(meta_text);
  put_u64(buf, total);
  for (const auto& b : blocks) {
    buf.append(reinterpret_cast<const char*>(b.data), b.count * sizeof(double));
  }
  put_u64(buf, fnv1a(buf.data(), buf.size()));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.close();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);

  // Column by column, so the values match DdpgAgent::policy bit for bit
  // (a batched product may round differently).
  const Matrix probes = probe_inputs(agent.state_dim);
  CsvWriter probe(probe_path(path), {"probe", "actor", "critic"});
  for (Eigen::Index j = 0; j < probes.cols(); ++j) {
    const Vector x = probes.col(j);
    const double a = agent.policy(x);
    Vector sa(x.size() + 1);
    sa << x, a;
    probe.field(static_cast<long long>(j)).field(a).field(forward(agent.critic, sa)(0)).end_row();
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";

  if (buf.size() < 8 + 8 + 8 + 8) throw CorruptCheckpoint(where + "file too short");
  if (std::memcmp(buf.data(), kMagic, 6) != 0) throw CorruptCheckpoint(where + "bad magic");
  if (std::memcmp(buf.data(), kMagic, 8) != 0) {
    throw CheckpointVersionMismatch(where + "container version " + buf.substr(6, 2));
  }
  const std::uint64_t stored_sum = get_u64(buf, buf.size() - 8);
  if (fnv1a(buf.data(), buf.size() - 8) != stored_sum) {
    throw CorruptCheckpoint(where + "checksum mismatch");
  }
  const std::uint64_t meta_len = get_u64(buf, 8);
  if (meta_len > buf.size() - 32) throw CorruptCheckpoint(where + "metadata length out of range");

  json meta;
  int version = 0;
  try {
    meta = json::parse(buf.substr(16, meta_len));
    version = meta.at("format_version").get<int>();
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(where + "unreadable metadata: " + e.what());
  }
  if (version != kCheckpointVersion) {
    throw CheckpointVersionMismatch(where + "format version " + std::to_string(version) +
                                    ", expected " + std::to_string(kCheckpointVersion));
  }

  const std::size_t payload_at = 16 + meta_len;
  const std::uint64_t total = get_u64(buf, payload_at);
  if (total > (buf.size() - payload_at - 16) / 8 ||
      payload_at + 8 + total * 8 + 8 != buf.size()) {
    throw CorruptCheckpoint(where + "payload size mismatch");
  }

  try {
    CheckpointContext ctx;
    ctx.world = world_from_json(meta.at("world"));
    env_from_json(meta.at("env"), ctx.norms, ctx.reward_options);
    ctx.design = parse_reward_design(meta.at("reward_design").get<std::string>());
    DdpgConfig ddpg = ddpg_from_json(meta.at("ddpg"));

    const int state_dim = meta.at("state_dim").get<int>();
    const double bound = meta.at("action_bound").get<double>();
    if (meta.at("actor_dims").get<std::vector<int>>() != actor_dims(state_dim, ddpg) ||
        meta.at("critic_dims").get<std::vector<int>>() != critic_dims(state_dim, ddpg)) {
      throw CorruptCheckpoint(where + "layer dims disagree with stored configuration");
    }

    LoadedCheckpoint out{ctx, meta.at("fingerprint").get<std::string>(),
                         DdpgAgent(state_dim, bound, ddpg, 0)};
    DdpgAgent& agent = out.agent;
    const auto blocks = blocks_of(agent);
    const auto& listed = meta.at("blocks");
    if (listed.size() != blocks.size()) throw CorruptCheckpoint(where + "block count mismatch");
    std::size_t at = payload_at + 8;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (listed[i].at("name").get<std::string>() != blocks[i].name ||
          listed[i].at("count").get<std::size_t>() != blocks[i].count) {
        throw CorruptCheckpoint(where + "block " + blocks[i].name + " mismatch");
      }
      if (at + blocks[i].count * 8 > buf.size() - 8) throw CorruptCheckpoint(where + "truncated");
      std::memcpy(blocks[i].data, buf.data() + at, blocks[i].count * 8);
      at += blocks[i].count * 8;
    }
    agent.episode = meta.at("episode").get<std::int64_t>();
    agent.env_steps = meta.at("env_steps").get<std::int64_t>();
    agent.updates = meta.at("updates").get<std::int64_t>();
    agent.actor_opt.step = meta.at("actor_opt_step").get<std::int64_t>();
    agent.critic_opt.step = meta.at("critic_opt_step").get<std::int64_t>();
    restore_rng(agent.noise_rng, meta.at("noise_rng").get<std::string>());
    restore_rng(agent.sample_rng, meta.at("sample_rng").get<std::string>());
    if (!agent.actor.all_finite() || !agent.critic.all_finite()) {
      throw CorruptCheckpoint(where + "non-finite parameters");
    }
    return out;
  } catch (const json::exception& e) {
    throw CorruptCheckpoint(where + "bad metadata: " + e.what());
  } catch (const ConfigError& e) {
    throw CorruptCheckpoint(where + "bad stored configuration (" + e.key() + "): " + e.what());
  } catch (const std::invalid_argument& e) {
    throw CorruptCheckpoint(where + e.what());
  }
}

LoadedCheckpoint load_checkpoint_for(const std::filesystem::path& path, const WorldConfig& world,
                                     const ObservationNorms& norms, const DdpgConfig& ddpg) {
  LoadedCheckpoint ck = load_checkpoint(path);
  if (ck.agent.actor.layer_dims != actor_dims(kObservationDim, ddpg) ||
      ck.agent.critic.layer_dims != critic_dims(kObservationDim, ddpg)) {
    throw CheckpointShapeMismatch(path.string() + ": stored network shape differs from configuration");
  }
  const std::string expected = config_fingerprint(world, norms, ddpg);
  if (ck.fingerprint != expected) {
    throw FingerprintMismatch(path.string() + ": fingerprint " + ck.fingerprint +
                              " does not match configuration " + expected);
  }
  return ck;
}

ActorPolicy to_policy(const LoadedCheckpoint& ckpt) {
  return ActorPolicy{ckpt.agent.actor, ckpt.context.norms, ckpt.context.design,
                     ckpt.context.reward_options};
}

}  // namespace advped
