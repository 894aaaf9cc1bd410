#pragma once

#include <vector>

#include <Eigen/Dense>

#include "poststab/measure.hpp"

namespace poststab {

// Per-point negative log-likelihood values. shift records what was subtracted
// from the raw misfit; values may be +inf (zero likelihood).
class LogLikelihood {
 public:
  LogLikelihood(SpacePtr space, std::vector<double> values, double shift = 0.0);

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  double shift() const { return shift_; }

  // Minimum over the support of mu.
  double ess_inf(const DiscreteMeasure& mu) const;
  bool finite_on(const DiscreteMeasure& mu) const;

 private:
  SpacePtr space_;
  std::vector<double> v_;
  double shift_;
};

struct Posterior {
  DiscreteMeasure measure;
  double evidence;
  double log_evidence;
};

// Subtracts the minimum over supp(mu) so the result has ess inf zero.
LogLikelihood shift_to_zero_essinf(SpacePtr space, const std::vector<double>& raw, const DiscreteMeasure& mu);

// Subtracts a given shift, e.g. the one recorded on a reference likelihood.
LogLikelihood apply_shift(SpacePtr space, const std::vector<double>& raw, double shift);

Posterior posterior(const DiscreteMeasure& mu, const LogLikelihood& phi);

// Z by direct summation of exp(-phi) mu, for cross-checking the log-domain value.
double evidence_direct(const DiscreteMeasure& mu, const LogLikelihood& phi);

LogLikelihood temper(const LogLikelihood& phi, double k);

// 0.5 (y - G(x))^T Sigma^{-1} (y - G(x)) per point.
std::vector<double> gaussian_negloglik(const std::vector<Eigen::VectorXd>& G, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& Sigma);

}  // namespace poststab
