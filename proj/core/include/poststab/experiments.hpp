#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "poststab/bayes.hpp"
#include "poststab/divergence.hpp"

namespace poststab {

struct SensitivityTrace {
  DivergenceKind kind = DivergenceKind::TV;
  std::vector<double> k_values;
  std::vector<double> Z;
  std::vector<double> Z_tilde;
  std::vector<double> prior_distance;
  std::vector<double> posterior_distance;
  std::vector<double> ratio;           // posterior / prior distance, 0 when the priors agree
  std::vector<double> bound_constant;  // bound rhs / prior distance, 0 when the priors agree
  std::vector<bool> within_bound;

  bool evidence_nonincreasing() const;
  bool all_within_bound() const;
};

// Tempers phi by each k and compares posterior to prior discrepancy against
// the matching prior-perturbation bound (W1 uses the sharp form).
SensitivityTrace sensitivity_sweep(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde,
                                   const LogLikelihood& phi, const std::vector<double>& k_values,
                                   DivergenceKind kind);

struct HuberRange {
  double inf = 0.0;
  double sup = 0.0;
  double posterior_probability = 0.0;
};

// Exact range of the posterior probability of A over the contamination class
// {(1-eps) mu + eps nu}.
HuberRange huber_range(const DiscreteMeasure& mu, const LogLikelihood& phi, const std::vector<std::size_t>& A,
                       double eps);

// Posterior probability of A under the prior (1-eps) mu + eps nu.
double contaminated_posterior_probability(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          const LogLikelihood& phi, const std::vector<std::size_t>& A, double eps);

struct TvRangeResult {
  double value = 0.0;
  std::vector<std::size_t> best_subset;
  std::size_t subsets_checked = 0;
  bool exhaustive = false;
};

// Max over subsets A of the Huber gaps; exhaustive up to 20 points, else
// 10000 random subsets drawn from seed.
TvRangeResult tv_range_lower_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, double eps,
                                   std::uint64_t seed = 0);

SignedDiscreteMeasure frechet_derivative(const DiscreteMeasure& mu, const LogLikelihood& phi,
                                         const SignedDiscreteMeasure& rho);

struct NormBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds on the derivative's operator norm in the full-variation norm. On a
// finite space the lower bound's sup runs over points outside supp(mu).
NormBounds derivative_norm_bounds(const DiscreteMeasure& mu, const LogLikelihood& phi);

// |dT(mu)(nu - mu)| in the full-variation norm.
double local_sensitivity(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LogLikelihood& phi);

struct ContinuityTrace {
  double q = 1.0;
  std::vector<double> prior_distance;
  std::vector<double> posterior_distance;
  bool prior_monotone = true;
  bool posterior_monotone = true;
  bool decayed = true;  // last <= 1e-3 first in both columns (or all zero)

  bool confirmed() const { return prior_monotone && posterior_monotone && decayed; }
};

ContinuityTrace wasserstein_continuity_sweep(const DiscreteMeasure& mu, const std::vector<DiscreteMeasure>& sequence,
                                             const LogLikelihood& phi, double q);

// contaminate(mu, nu, 2^-k) for k = 1..steps.
std::vector<DiscreteMeasure> geometric_contamination(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                     std::size_t steps);

// Densities L(x, y) on a parameter grid x and a data grid y with cell widths;
// each row integrates to 1 against the widths.
struct LikelihoodModel {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> width;
  Eigen::MatrixXd L;

  void validate() const;
};

// Gaussian observation density y ~ N(x, sigma^2), normalized per row on the grid.
LikelihoodModel gaussian_likelihood_model(const std::vector<double>& x, const std::vector<double>& y, double sigma);

struct BrittlenessRow {
  double delta = 0.0;
  std::size_t cells_in_ball = 0;
  double ball_measure = 0.0;  // sum of widths in B_delta(y)
  double d_L = 0.0;           // sup_x |L(x,.) - L~(x,.)|_{L1}
  double d_hat_L = 0.0;       // sup_y |L(.,y) - L~(.,y)|_{L1(mu)}
  double Z_L = 0.0;
  double Z_L_tilde = 0.0;
  double d_TV = 0.0;
  double stability_rhs = 0.0;  // d_hat_L / Z_L
  double fubini_rhs = 0.0;     // (1/Z_L) sum_B w_y sum_x mu |L - L~|
  bool holds = true;           // d_TV <= stability_rhs
};

struct BrittlenessReport {
  std::vector<BrittlenessRow> rows;
  bool d_L_within_eps = true;
  bool d_TV_increasing = true;
  bool inequality_holds = true;
};

struct BrittlenessOptions {
  double eps = 0.05;
  double positivity_floor = 1e-6;  // fraction of each cell's mass that is never removed
};

// For each delta, perturbs L by at most eps per row (in d_L) so that the
// posterior given y in B_delta(y_center) moves toward the target parameters.
BrittlenessReport brittleness_demo(const LikelihoodModel& model, const DiscreteMeasure& mu, double y_center,
                                   const std::vector<double>& deltas, const std::vector<std::size_t>& target,
                                   const BrittlenessOptions& opts = {});

}  // namespace poststab
