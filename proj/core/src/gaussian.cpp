#include "poststab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

namespace {

constexpr double kEigFloor = 1e-14;

// log((1+t)/(2 sqrt t)) = log1p((sqrt t - 1)^2 / (2 sqrt t)), accurate near t = 1.
double log_factor(double t) {
  const double r = std::sqrt(t);
  return std::log1p((r - 1.0) * (r - 1.0) / (2.0 * r));
}

void check_spd(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) fail(ErrorCode::NotSpd, std::string(what) + " must be square and nonempty");
  if (!m.allFinite()) fail(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > 1e-12 * scale)
    fail(ErrorCode::NotSpd, std::string(what) + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= kEigFloor)
    fail(ErrorCode::NotSpd, std::string(what) + " is not positive definite");
}

// Eigenvalues of T = C_a^{-1/2} C_b C_a^{-1/2}.
Eigen::VectorXd relative_spectrum(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::Domain, "Gaussian measures have different dimensions");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(b.cov(), a.cov(), Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) fail(ErrorCode::NotSpd, "relative covariance spectrum failed");
  return ges.eigenvalues();
}

double mahalanobis_sq(const Eigen::MatrixXd& cov, const Eigen::VectorXd& d) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotSpd, "covariance is not positive definite");
  return llt.matrixL().solve(d).squaredNorm();
}

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return (a - b).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

double power_tail_sum_bound(const GaussianSpectralPair& p) {
  // sum_{k>N} a^2 k^{-2s} <= a^2 N^{1-2s}/(2s-1), or 1 + that at N = 0.
  const double a2 = p.tail_amplitude * p.tail_amplitude;
  const double s = p.tail_exponent;
  const auto N = static_cast<double>(p.truncation());
  if (N == 0.0) return a2 * (1.0 + 1.0 / (2.0 * s - 1.0));
  return a2 * std::pow(N, 1.0 - 2.0 * s) / (2.0 * s - 1.0);
}

bool has_tail(const GaussianSpectralPair& p) { return p.tail == TailModel::Power && p.tail_amplitude != 0.0; }

void require_unit_tail(const GaussianSpectralPair& p, const char* what) {
  if (has_tail(p)) fail(ErrorCode::Precondition, std::string(what) + " supports only the unit tail model");
}

}  // namespace

GaussianMeasure::GaussianMeasure(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0) fail(ErrorCode::Domain, "Gaussian mean must be nonempty");
  if (!mean_.allFinite()) fail(ErrorCode::NonFinite, "Gaussian mean has non-finite entries");
  if (cov_.rows() != mean_.size()) fail(ErrorCode::Domain, "covariance does not match the mean dimension");
  check_spd(cov_, "covariance");
}

GaussianMeasure GaussianMeasure::scalar(double mean, double variance) {
  return GaussianMeasure(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance));
}

void GaussianSpectralPair::validate() const {
  if (dm.size() != t.size() || c.size() != t.size())
    fail(ErrorCode::Domain, "spectral pair needs dm, c and t of equal length");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(dm[k]) || !std::isfinite(c[k]) || !std::isfinite(t[k]))
      fail(ErrorCode::NonFinite, "spectral coefficients must be finite");
    if (!(c[k] > 0.0)) fail(ErrorCode::Domain, "eigenvalues of C must be positive");
    if (!(t[k] > 0.0)) {
      std::ostringstream os;
      os << "eigenvalue t_" << k + 1 << " = " << t[k] << " is not positive";
      fail(ErrorCode::Domain, os.str());
    }
  }
  if (tail == TailModel::Power) {
    if (!(tail_exponent > 0.5) || !std::isfinite(tail_exponent))
      fail(ErrorCode::Domain, "power tail exponent must exceed 1/2");
    if (!std::isfinite(tail_amplitude) ||
        std::abs(tail_amplitude) * std::pow(static_cast<double>(t.size() + 1), -tail_exponent) >= 1.0)
      fail(ErrorCode::Domain, "power tail would produce nonpositive eigenvalues");
  }
}

double GaussianSpectralPair::t_at(std::size_t k) const {
  if (k >= 1 && k <= t.size()) return t[k - 1];
  if (tail == TailModel::Unit) return 1.0;
  return 1.0 + tail_amplitude * std::pow(static_cast<double>(k), -tail_exponent);
}

double fredholm_tail_constant() {
  static const double c = [] {
    auto f2 = [](double t) { return (3.0 / std::sqrt(t) - std::sqrt(t)) / (8.0 * t * t); };
    double best = 0.0;
    const int n = 100000;
    for (int i = 0; i <= n; ++i) best = std::max(best, std::abs(f2(0.5 + static_cast<double>(i) / n)));
    return best;
  }();
  return c;
}

FredholmResult fredholm_det_half_sqrt(std::span<const double> t, double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::Domain, "tolerance must be positive");
  const std::size_t n = t.size();
  for (std::size_t k = 0; k < n; ++k)
    if (!(t[k] > 0.0) || !std::isfinite(t[k])) {
      std::ostringstream os;
      os << "eigenvalue t_" << k + 1 << " = " << t[k] << " is not positive";
      fail(ErrorCode::Domain, os.str());
    }
  // suffix[K] = sum_{k >= K} (t_k - 1)^2 over 0-based k; the tail bound only
  // applies once every remaining t_k lies in [1/2, 3/2].
  std::vector<double> suffix(n + 1, 0.0);
  std::size_t first_certifiable = n;
  for (std::size_t k = n; k-- > 0;) {
    suffix[k] = suffix[k + 1] + (t[k] - 1.0) * (t[k] - 1.0);
    if (t[k] >= 0.5 && t[k] <= 1.5 && first_certifiable == k + 1) first_certifiable = k;
  }
  const double c = fredholm_tail_constant();
  FredholmResult res;
  double logp = 0.0;
  for (std::size_t K = 0; K <= n; ++K) {
    if (K >= first_certifiable) {
      const double bound = std::exp(logp) * std::expm1(c * suffix[K]);
      if (bound < tol) {
        res.terms_used = K;
        res.error_bound = bound;
        break;
      }
    }
    if (K == n) {
      res.terms_used = n;
      res.error_bound = 0.0;
      break;
    }
    logp += log_factor(t[K]);
  }
  res.log_value = logp;
  res.value = std::exp(logp);
  if (res.value < 1.0 - 1e-15) fail(ErrorCode::SolverFailure, "Fredholm determinant fell below 1");
  return res;
}

FredholmResult fredholm_det_half_sqrt(const GaussianSpectralPair& pair, double tol) {
  pair.validate();
  if (!(tol > 0.0)) fail(ErrorCode::Domain, "tolerance must be positive");
  double logp = 0.0;
  for (double tk : pair.t) logp += log_factor(tk);
  FredholmResult res;
  std::size_t K = pair.truncation();
  if (has_tail(pair)) {
    const double a = pair.tail_amplitude, s = pair.tail_exponent, c = fredholm_tail_constant();
    auto tail_sum = [&](std::size_t k) { return a * a * std::pow(static_cast<double>(k), 1.0 - 2.0 * s) / (2.0 * s - 1.0); };
    constexpr std::size_t kMaxTerms = 100000000;
    for (;;) {
      if (K >= 1 && std::abs(a) * std::pow(static_cast<double>(K + 1), -s) <= 0.5) {
        const double bound = std::exp(logp) * std::expm1(c * tail_sum(K));
        if (bound < tol) {
          res.error_bound = bound;
          break;
        }
      }
      if (K >= kMaxTerms) fail(ErrorCode::SolverFailure, "power tail did not certify within the term cap");
      ++K;
      logp += log_factor(pair.t_at(K));
    }
  }
  res.terms_used = K;
  res.log_value = logp;
  res.value = std::exp(logp);
  if (res.value < 1.0 - 1e-15) fail(ErrorCode::SolverFailure, "Fredholm determinant fell below 1");
  return res;
}

std::string to_string(SeriesVerdict v) {
  switch (v) {
    case SeriesVerdict::Converged: return "converged";
    case SeriesVerdict::Diverging: return "diverging";
    case SeriesVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

SeriesVerdict series_trend(std::span<const double> a) {
  const std::size_t n = a.size();
  if (std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; })) return SeriesVerdict::Converged;
  if (a.back() == 0.0) return SeriesVerdict::Converged;  // the explicit terms end in zeros
  if (n < 4) return SeriesVerdict::Inconclusive;
  const std::size_t w = std::max<std::size_t>(4, n / 4);
  std::vector<double> ratio, raabe;
  for (std::size_t k = n - w; k + 1 < n; ++k) {
    if (a[k] <= 0.0 || a[k + 1] <= 0.0) continue;
    ratio.push_back(a[k + 1] / a[k]);
    raabe.push_back(static_cast<double>(k + 1) * (a[k] / a[k + 1] - 1.0));
  }
  if (ratio.empty()) return SeriesVerdict::Inconclusive;
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  if (median(ratio) < 0.95) return SeriesVerdict::Converged;
  const double r = median(raabe);
  if (r > 1.1) return SeriesVerdict::Converged;
  if (r < 0.9) return SeriesVerdict::Diverging;
  return SeriesVerdict::Inconclusive;
}

EquivalenceReport gaussian_equivalence_check(const GaussianSpectralPair& pair) {
  pair.validate();
  const std::size_t n = pair.truncation();
  std::vector<double> mt(n), ct(n);
  EquivalenceReport rep;
  for (std::size_t k = 0; k < n; ++k) {
    mt[k] = pair.dm[k] * pair.dm[k] / pair.c[k];
    ct[k] = (pair.t[k] - 1.0) * (pair.t[k] - 1.0);
    rep.mean_sum += mt[k];
    rep.cov_sum += ct[k];
  }
  rep.mean_verdict = series_trend(mt);
  rep.cov_verdict = has_tail(pair) ? SeriesVerdict::Converged : series_trend(ct);
  return rep;
}

double hellinger_gauss_mean_shift(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::Domain, "Gaussian measures have different dimensions");
  if (!same_matrix(a.cov(), b.cov())) fail(ErrorCode::Precondition, "mean-shift formula needs equal covariances");
  const double q = mahalanobis_sq(a.cov(), a.mean() - b.mean());
  return std::sqrt(std::max(0.0, -2.0 * std::expm1(-q / 8.0)));
}

double hellinger_gauss_mean_shift(const GaussianSpectralPair& pair) {
  pair.validate();
  if (has_tail(pair) || std::any_of(pair.t.begin(), pair.t.end(), [](double x) { return x != 1.0; }))
    fail(ErrorCode::Precondition, "mean-shift formula needs equal covariances (t_k = 1)");
  const EquivalenceReport eq = gaussian_equivalence_check(pair);
  if (eq.mean_verdict == SeriesVerdict::Diverging)
    fail(ErrorCode::Singular, "mean difference is not in the Cameron-Martin space (series diverges)");
  return std::sqrt(std::max(0.0, -2.0 * std::expm1(-eq.mean_sum / 8.0)));
}

double hellinger_gauss_cov(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::Domain, "Gaussian measures have different dimensions");
  if ((a.mean() - b.mean()).cwiseAbs().maxCoeff() > 0.0)
    fail(ErrorCode::Precondition, "covariance formula needs equal means");
  const Eigen::VectorXd t = relative_spectrum(a, b);
  double logdet = 0.0;
  for (Eigen::Index k = 0; k < t.size(); ++k) logdet += log_factor(t[k]);
  return std::sqrt(std::max(0.0, -2.0 * std::expm1(-0.5 * logdet)));
}

double hellinger_gauss_cov(const GaussianSpectralPair& pair, double tol) {
  pair.validate();
  if (std::any_of(pair.dm.begin(), pair.dm.end(), [](double x) { return x != 0.0; }))
    fail(ErrorCode::Precondition, "covariance formula needs equal means (dm = 0)");
  const FredholmResult f = fredholm_det_half_sqrt(pair, tol);
  return std::sqrt(std::max(0.0, -2.0 * std::expm1(-0.5 * f.log_value)));
}

double kl_gauss(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::Domain, "Gaussian measures have different dimensions");
  // KL(a||b) = 1/2 sum_k (t_k - 1 - log t_k) + 1/2 |C_b^{-1/2} dm|^2 with t
  // the spectrum of C_b^{-1/2} C_a C_b^{-1/2}.
  const Eigen::VectorXd t = relative_spectrum(b, a);
  double s = 0.0;
  for (Eigen::Index k = 0; k < t.size(); ++k) s += (t[k] - 1.0) - std::log(t[k]);
  s += mahalanobis_sq(b.cov(), a.mean() - b.mean());
  return std::max(0.0, 0.5 * s);
}

double kl_gauss(const GaussianSpectralPair& pair) {
  pair.validate();
  require_unit_tail(pair, "spectral KL");
  double s = 0.0;
  for (std::size_t k = 0; k < pair.truncation(); ++k) {
    const double t = pair.t[k];
    s += (1.0 / t - 1.0) + std::log(t) + pair.dm[k] * pair.dm[k] / (pair.c[k] * t);
  }
  return std::max(0.0, 0.5 * s);
}

namespace {

TvUpperBound make_tv(double hs, double cm) {
  TvUpperBound r;
  r.raw = 1.5 * hs + 0.5 * cm;
  r.clamped = std::min(1.0, r.raw);
  r.vacuous = r.raw >= 1.0;
  return r;
}

}  // namespace

TvUpperBound tv_gauss_upper(const GaussianMeasure& a, const GaussianMeasure& b) {
  const Eigen::VectorXd t = relative_spectrum(a, b);
  double hs = 0.0;
  for (Eigen::Index k = 0; k < t.size(); ++k) hs += (t[k] - 1.0) * (t[k] - 1.0);
  return make_tv(std::sqrt(hs), std::sqrt(mahalanobis_sq(a.cov(), a.mean() - b.mean())));
}

TvUpperBound tv_gauss_upper(const GaussianSpectralPair& pair) {
  const EquivalenceReport eq = gaussian_equivalence_check(pair);
  const double hs = eq.cov_sum + (has_tail(pair) ? power_tail_sum_bound(pair) : 0.0);
  return make_tv(std::sqrt(hs), std::sqrt(eq.mean_sum));
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& m) {
  check_spd(m, "matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double w2_gauss(const GaussianMeasure& a, const GaussianMeasure& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::Domain, "Gaussian measures have different dimensions");
  const Eigen::MatrixXd ra = spd_sqrt(a.cov());
  Eigen::MatrixXd inner = ra * b.cov() * ra;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::NotSpd, "matrix square root failed");
  double cross = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) cross += std::sqrt(std::max(0.0, es.eigenvalues()[k]));
  const double v = (a.mean() - b.mean()).squaredNorm() + a.cov().trace() + b.cov().trace() - 2.0 * cross;
  return std::sqrt(std::max(0.0, v));
}

double w2_gauss(const GaussianSpectralPair& pair) {
  pair.validate();
  require_unit_tail(pair, "spectral W2");
  double v = 0.0;
  for (std::size_t k = 0; k < pair.truncation(); ++k) {
    const double d = 1.0 - std::sqrt(pair.t[k]);
    v += pair.dm[k] * pair.dm[k] + pair.c[k] * d * d;
  }
  return std::sqrt(v);
}

std::vector<double> discretize_normal(const std::vector<double>& grid, double m, double s) {
  if (grid.empty()) fail(ErrorCode::Domain, "grid must be nonempty");
  if (!(s > 0.0)) fail(ErrorCode::Domain, "standard deviation must be positive");
  if (!std::is_sorted(grid.begin(), grid.end())) fail(ErrorCode::Domain, "grid must be sorted");
  // Upper-tail probabilities avoid cancellation on the right; lower-tail on the left.
  auto upper = [&](double x) { return 0.5 * std::erfc((x - m) / (s * std::sqrt(2.0))); };
  const std::size_t n = grid.size();
  std::vector<double> w(n);
  std::vector<double> cut(n + 1);
  cut[0] = -std::numeric_limits<double>::infinity();
  cut[n] = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) cut[i] = 0.5 * (grid[i - 1] + grid[i]);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = cut[i], hi = cut[i + 1];
    if (hi <= m) {
      auto lower = [&](double x) { return 0.5 * std::erfc(-(x - m) / (s * std::sqrt(2.0))); };
      w[i] = lower(hi) - (std::isinf(lo) ? 0.0 : lower(lo));
    } else {
      w[i] = (std::isinf(lo) ? 1.0 : upper(lo)) - (std::isinf(hi) ? 0.0 : upper(hi));
    }
    w[i] = std::max(0.0, w[i]);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

}  // namespace poststab
