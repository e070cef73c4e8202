#include "advped/reward.hpp"

#include <stdexcept>

#include "advped/collision.hpp"

namespace advped {

namespace {

TransitionKind oriented(TransitionKind kind, const RewardOptions& opts) {
  if (!opts.swap_toward_away) return kind;
  switch (kind) {
    case TransitionKind::Toward: return TransitionKind::Away;
    case TransitionKind::Away: return TransitionKind::Toward;
    case TransitionKind::Collision: return kind;
  }
  return kind;
}

}  // namespace

TransitionKind classify(double prev_dist, double new_dist, bool collided,
                        const RewardOptions& opts) {
  if (collided) return TransitionKind::Collision;
  if (new_dist < prev_dist) return TransitionKind::Toward;
  if (new_dist == prev_dist && !opts.ties_as_away) return TransitionKind::Toward;
  return TransitionKind::Away;
}

double reward_baseline(TransitionKind kind, const RewardOptions& opts) {
  switch (oriented(kind, opts)) {
    case TransitionKind::Toward: return 1.0;
    case TransitionKind::Away: return -2.0;
    case TransitionKind::Collision: return 3000.0;
  }
  return 0.0;
}

double reward_momentum(TransitionKind kind, double dist, double m_p, double m_c, double v_p,
                       double v_c, const RewardOptions& opts) {
  switch (oriented(kind, opts)) {
    case TransitionKind::Toward: return 10.0 / (1.0 + dist);
    case TransitionKind::Away: return -10.0 / (1.0 + dist) - 1.0;
    case TransitionKind::Collision: return 10.0 * momentum_change_1d(m_p, m_c, v_p, v_c);
  }
  return 0.0;
}

std::string_view to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::Toward: return "toward";
    case TransitionKind::Away: return "away";
    case TransitionKind::Collision: return "collision";
  }
  return "?";
}

std::string_view to_string(RewardDesign design) {
  return design == RewardDesign::BaselineSignal ? "baseline" : "momentum";
}

RewardDesign parse_reward_design(std::string_view text) {
  if (text == "baseline") return RewardDesign::BaselineSignal;
  if (text == "momentum") return RewardDesign::CollisionMomentum;
  throw std::invalid_argument("unknown reward design '" + std::string(text) +
                              "' (expected baseline|momentum)");
}

}  // namespace advped
