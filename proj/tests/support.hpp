#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "twopath/model.hpp"

namespace twopath::testing {

// Equal arms of length `arm`, with a cavity of length l_cav at offset `before`
// in the upper arm and an optional static phase in the lower arm.
inline TwoPathLayout cavity_layout(double arm, double before, double l_cav, double gamma_ratio,
                                   double lower_phase = 0.0) {
  TwoPathLayout layout;
  layout.upper = {PathSegment::free(before), PathSegment::cavity(l_cav, gamma_ratio),
                  PathSegment::free(arm - before - l_cav)};
  layout.lower = {PathSegment::free(arm)};
  if (lower_phase != 0.0) layout.lower.push_back(PathSegment::phase_shifter(lower_phase));
  return layout;
}

// Cavity layout with theta_cav = x (1 - g) for x = L_cav / (2 ell).
// Free stretches of length ell on either side of the cavity.
inline TwoPathLayout layout_for(double x, double g, double ell) {
  const double l_cav = 2.0 * ell * x;
  return cavity_layout(l_cav + 2.0 * ell, ell, l_cav, g);
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

// Arbitrary valid layout: several free, cavity and phase elements per arm,
// arms of unrelated lengths, random lossless splitter convention.
inline TwoPathLayout random_layout(std::mt19937_64& gen, double ell) {
  auto arm = [&](int count) {
    std::vector<PathSegment> segments;
    for (int i = 0; i < count; ++i) {
      const double pick = uniform(gen, 0.0, 1.0);
      if (pick < 0.45) {
        segments.push_back(PathSegment::free(uniform(gen, 0.0, ell)));
      } else if (pick < 0.8) {
        segments.push_back(PathSegment::cavity(uniform(gen, 0.0, ell), uniform(gen, 0.0, 4.0)));
      } else {
        segments.push_back(PathSegment::phase_shifter(uniform(gen, -3.0, 3.0)));
      }
    }
    return segments;
  };
  TwoPathLayout layout;
  layout.upper = arm(1 + static_cast<int>(uniform(gen, 0.0, 4.0)));
  layout.lower = arm(1 + static_cast<int>(uniform(gen, 0.0, 4.0)));
  layout.splitter = SplitterConvention::general(uniform(gen, -3.0, 3.0), uniform(gen, -3.0, 3.0),
                                                uniform(gen, -3.0, 3.0), uniform(gen, -3.0, 3.0));
  return layout;
}

}  // namespace twopath::testing
