#pragma once

#include <cstddef>
#include <vector>

#include "poststab/divergence.hpp"

namespace poststab {

struct TransportOptions {
  std::size_t max_variables = 250000;
  std::size_t max_pivots = 0;  // 0 picks a size-dependent cap
};

struct CouplingEntry {
  std::size_t from;
  std::size_t to;
  double mass;
};

// Optimal plan for the transportation problem with cost d^q. Potentials are
// indexed by space point and are zero off the respective supports.
struct TransportPlan {
  double q = 1.0;
  double cost = 0.0;
  std::vector<CouplingEntry> coupling;
  std::vector<double> source_potential;
  std::vector<double> target_potential;
  std::vector<std::size_t> source_support;
  std::vector<std::size_t> target_support;
  std::size_t pivots = 0;

  double distance() const;
};

// Transportation simplex: northwest-corner start, MODI potentials, Dantzig
// pricing with lowest-index ties. Falls back to Bland's rule on long runs of
// degenerate pivots.
TransportPlan solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q,
                              const TransportOptions& opts = {});

DivergenceValue wasserstein_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q,
                               const TransportOptions& opts = {});

// Exact quantile coupling for points on an untruncated real line.
DivergenceValue wasserstein_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q);

// wasserstein_1d when the space allows it, the LP otherwise.
DivergenceValue wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q);

// 1-Lipschitz f(x) = min_j (d(x, y_j) - v_j) built from a W1 plan; attains
// the dual value W1 = int f dmu - int f dnu.
std::vector<double> kantorovich_potential(const TransportPlan& plan, const FiniteMetricSpace& space);

}  // namespace poststab
