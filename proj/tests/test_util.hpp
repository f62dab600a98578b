// Shared helpers for the test suites: tiny panel builders and deterministic
// random-instance generators.
#pragma once

#include "geodid/panel_data.hpp"

#include <random>
#include <string>
#include <vector>

namespace testutil {

// Balanced two-period panel from parallel arrays.
inline geodid::PanelDataset make_panel(const std::vector<double>& distances,
                                       const std::vector<double>& y0,
                                       const std::vector<double>& y1) {
  geodid::PanelDataset data;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    const std::string id = "u" + std::to_string(i);
    data.observations.push_back({id, 0, y0[i], distances[i]});
    data.observations.push_back({id, 1, y1[i], distances[i]});
  }
  return data;
}

inline geodid::CrossSection make_cross_section(
    const std::vector<double>& distances, const std::vector<double>& values) {
  geodid::CrossSection out;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    out.points.push_back({"u" + std::to_string(i), distances[i], values[i]});
  }
  return out;
}

// Distances guaranteed to cover both sides: first half negative strata,
// second half positive, then uniform noise on top.
inline std::vector<double> random_distances(std::mt19937_64& rng,
                                            std::size_t n, double halfwidth) {
  std::uniform_real_distribution<double> unif(0.01, halfwidth);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double magnitude = unif(rng);
    out[i] = (i % 2 == 0) ? -magnitude : magnitude;
  }
  return out;
}

}  // namespace testutil
