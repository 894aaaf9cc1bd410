#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace poststab {

class GaussianMeasure {
 public:
  GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd cov);
  static GaussianMeasure scalar(double mean, double variance);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

// Beyond the explicit coefficients the spectrum either continues as the
// identity (Unit: t_k = 1, dm_k = 0) or as t_k = 1 + a k^(-s), dm_k = 0
// (Power, s > 1/2 so that sum (t_k - 1)^2 converges).
enum class TailModel { Unit, Power };

// Pair N(m, C), N(m~, C~) in a shared eigenbasis of C: dm are the
// coefficients of m - m~, c the eigenvalues of C, t the eigenvalues of
// T = C^{-1/2} C~ C^{-1/2}.
struct GaussianSpectralPair {
  std::vector<double> dm;
  std::vector<double> c;
  std::vector<double> t;
  TailModel tail = TailModel::Unit;
  double tail_amplitude = 0.0;
  double tail_exponent = 0.0;

  std::size_t truncation() const { return t.size(); }
  void validate() const;
  // t_k for 1-based k, following the tail model past the explicit list.
  double t_at(std::size_t k) const;
};

struct FredholmResult {
  double value = 1.0;
  double log_value = 0.0;
  std::size_t terms_used = 0;
  double error_bound = 0.0;
};

// max |f''| on [1/2, 3/2] for f(t) = (1+t)/(2 sqrt t).
double fredholm_tail_constant();

// prod (1+t_k)/(2 sqrt t_k), stopping once the remaining factors provably
// change the product by less than tol.
FredholmResult fredholm_det_half_sqrt(std::span<const double> t, double tol);
FredholmResult fredholm_det_half_sqrt(const GaussianSpectralPair& pair, double tol);

enum class SeriesVerdict { Converged, Diverging, Inconclusive };
std::string to_string(SeriesVerdict v);

struct EquivalenceReport {
  double mean_sum = 0.0;  // sum dm_k^2 / c_k
  double cov_sum = 0.0;   // sum (t_k - 1)^2
  SeriesVerdict mean_verdict = SeriesVerdict::Converged;
  SeriesVerdict cov_verdict = SeriesVerdict::Converged;

  bool equivalent() const {
    return mean_verdict == SeriesVerdict::Converged && cov_verdict == SeriesVerdict::Converged;
  }
  bool singular() const {
    return mean_verdict == SeriesVerdict::Diverging || cov_verdict == SeriesVerdict::Diverging;
  }
};

// Ratio and Raabe tests on the last quarter of a series' terms.
SeriesVerdict series_trend(std::span<const double> terms);

EquivalenceReport gaussian_equivalence_check(const GaussianSpectralPair& pair);

double hellinger_gauss_mean_shift(const GaussianMeasure& a, const GaussianMeasure& b);
double hellinger_gauss_mean_shift(const GaussianSpectralPair& pair);

double hellinger_gauss_cov(const GaussianMeasure& a, const GaussianMeasure& b);
double hellinger_gauss_cov(const GaussianSpectralPair& pair, double tol = 1e-12);

// KL(a || b).
double kl_gauss(const GaussianMeasure& a, const GaussianMeasure& b);
// KL(N(m,C) || N(m~,C~)).
double kl_gauss(const GaussianSpectralPair& pair);

struct TvUpperBound {
  double raw = 0.0;      // (3/2)|T - I|_HS + (1/2)|C^{-1/2} dm|
  double clamped = 0.0;  // min(1, raw)
  bool vacuous = false;  // raw >= 1
};

TvUpperBound tv_gauss_upper(const GaussianMeasure& a, const GaussianMeasure& b);
TvUpperBound tv_gauss_upper(const GaussianSpectralPair& pair);

double w2_gauss(const GaussianMeasure& a, const GaussianMeasure& b);
double w2_gauss(const GaussianSpectralPair& pair);

// Symmetric square root via eigendecomposition; eigenvalues below 1e-14 are
// rejected as not SPD.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m);

// Cell probabilities of N(m, s^2) on a sorted grid, cells split at midpoints.
std::vector<double> discretize_normal(const std::vector<double>& grid, double m, double s);

// 1-D adaptive Gauss-Kronrod oracles for N(m1, s1^2) against N(m2, s2^2).
double quadrature_hellinger_1d(double m1, double s1, double m2, double s2);
double quadrature_kl_1d(double m1, double s1, double m2, double s2);
double quadrature_tv_1d(double m1, double s1, double m2, double s2);

}  // namespace poststab
