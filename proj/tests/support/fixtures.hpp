#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "poststab/bayes.hpp"
#include "poststab/measure.hpp"

namespace fx {

using namespace poststab;

inline SpacePtr two_points() { return FiniteMetricSpace::line({0.0, 1.0}); }
inline SpacePtr two_points_bounded() { return FiniteMetricSpace::line_truncated({0.0, 1.0}, 1.0); }

struct TwoPoint {
  SpacePtr space;
  DiscreteMeasure mu;
  DiscreteMeasure mu_tilde;
  LogLikelihood phi;   // (0, ln 2)
  LogLikelihood zero;  // (0, 0)
};

inline TwoPoint two_point(bool bounded = false) {
  auto s = bounded ? two_points_bounded() : two_points();
  return TwoPoint{s, DiscreteMeasure(s, {0.5, 0.5}), DiscreteMeasure(s, {0.3, 0.7}),
                  LogLikelihood(s, {0.0, std::log(2.0)}), LogLikelihood(s, {0.0, 0.0})};
}

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(n);
  double s = 0.0;
  for (auto& x : w) {
    x = u(rng) < zero_prob ? 0.0 : u(rng) + 1e-3;
    s += x;
  }
  if (s == 0.0) {
    w[0] = 1.0;
    s = 1.0;
  }
  for (auto& x : w) x /= s;
  return w;
}

inline SpacePtr random_line(std::mt19937_64& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(rng);
  return FiniteMetricSpace::line(xs);
}

inline std::vector<double> uniform_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace fx
