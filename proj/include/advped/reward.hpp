#pragma once

#include <string>
#include <string_view>

namespace advped {

enum class TransitionKind { Toward, Away, Collision };

enum class RewardDesign { BaselineSignal, CollisionMomentum };

struct RewardOptions {
  // A step that leaves the distance unchanged counts as moving away.
  bool ties_as_away = true;
  // Swap the Toward/Away payouts (the transposed table layout) for ablations.
  bool swap_toward_away = false;
};

TransitionKind classify(double prev_dist, double new_dist, bool collided,
                        const RewardOptions& opts = {});

/// +1 toward, -2 away, 3000 on collision.
double reward_baseline(TransitionKind kind, const RewardOptions& opts = {});

/// Distance-shaped approach/retreat terms plus ten times the pedestrian's 1D
/// elastic momentum change on collision. `dist` is the post-step separation;
/// the speeds are the pre-collision speeds.
double reward_momentum(TransitionKind kind, double dist, double m_p, double m_c, double v_p,
                       double v_c, const RewardOptions& opts = {});

std::string_view to_string(TransitionKind kind);
std::string_view to_string(RewardDesign design);
/// Accepts "baseline" or "momentum"; throws std::invalid_argument otherwise.
RewardDesign parse_reward_design(std::string_view text);

}  // namespace advped
