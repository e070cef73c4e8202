#pragma once

#include <string>
#include <vector>

#include "advped/harness.hpp"

namespace advped {

struct CurveSeries {
  std::string label;
  std::vector<CurvePoint> points;
};

/// Episode-vs-reward chart: one line per series, each with its confidence
/// band shaded underneath. Returns a complete SVG document.
std::string svg_reward_curves(const std::vector<CurveSeries>& series, const std::string& title);

/// Histogram of momentum changes over collision episodes.
std::string svg_histogram(const std::vector<double>& values, int bins, const std::string& title,
                          const std::string& x_label);

/// Top-down trajectory plot with sidewalk and driveway bands, both paths,
/// and a marker at the impact point for collision episodes.
std::string svg_trajectory(const EpisodeRecord& episode, const WorldConfig& world);

}  // namespace advped
