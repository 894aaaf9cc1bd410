#include "poststab/bayes.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_values(const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i]) || v[i] == -kInf) {
      std::ostringstream os;
      os << "log-likelihood value " << i << " is " << v[i];
      fail(ErrorCode::NonFinite, os.str());
    }
  }
}

}  // namespace

LogLikelihood::LogLikelihood(SpacePtr space, std::vector<double> values, double shift)
    : space_(std::move(space)), v_(std::move(values)), shift_(shift) {
  if (!space_) fail(ErrorCode::Domain, "log-likelihood needs a space");
  if (v_.size() != space_->size()) {
    std::ostringstream os;
    os << "log-likelihood has " << v_.size() << " values but the space has " << space_->size() << " points";
    fail(ErrorCode::Domain, os.str());
  }
  if (!std::isfinite(shift_)) fail(ErrorCode::NonFinite, "log-likelihood shift must be finite");
  check_values(v_);
}

double LogLikelihood::ess_inf(const DiscreteMeasure& mu) const {
  require_same_space(space(), mu.space());
  double m = kInf;
  for (std::size_t i : mu.support()) m = std::min(m, v_[i]);
  return m;
}

bool LogLikelihood::finite_on(const DiscreteMeasure& mu) const {
  for (std::size_t i : mu.support())
    if (!std::isfinite(v_[i])) return false;
  return true;
}

LogLikelihood shift_to_zero_essinf(SpacePtr space, const std::vector<double>& raw, const DiscreteMeasure& mu) {
  check_values(raw);
  require_same_space(*space, mu.space());
  if (raw.size() != space->size()) fail(ErrorCode::Domain, "raw misfit must have one value per point");
  double m = kInf;
  for (std::size_t i : mu.support()) m = std::min(m, raw[i]);
  if (!std::isfinite(m)) fail(ErrorCode::NonFinite, "misfit is infinite on the whole prior support");
  return apply_shift(std::move(space), raw, m);
}

LogLikelihood apply_shift(SpacePtr space, const std::vector<double>& raw, double shift) {
  std::vector<double> v(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) v[i] = raw[i] - shift;
  return LogLikelihood(std::move(space), std::move(v), shift);
}

Posterior posterior(const DiscreteMeasure& mu, const LogLikelihood& phi) {
  require_same_space(mu.space(), phi.space());
  // log Z = log sum exp(log mu(x) - phi(x)), max-shifted.
  double top = -kInf;
  for (std::size_t i : mu.support()) top = std::max(top, std::log(mu[i]) - phi[i]);
  if (top == -kInf) fail(ErrorCode::DegenerateLikelihood, "likelihood vanishes on the whole prior support");
  std::vector<double> w(mu.size(), 0.0);
  double s = 0.0;
  for (std::size_t i : mu.support()) {
    w[i] = std::exp(std::log(mu[i]) - phi[i] - top);
    s += w[i];
  }
  const double log_z = top + std::log(s);
  for (double& x : w) x /= s;
  return Posterior{DiscreteMeasure(mu.space_ptr(), std::move(w)), std::exp(log_z), log_z};
}

double evidence_direct(const DiscreteMeasure& mu, const LogLikelihood& phi) {
  require_same_space(mu.space(), phi.space());
  double z = 0.0;
  for (std::size_t i : mu.support()) z += std::exp(-phi[i]) * mu[i];
  return z;
}

LogLikelihood temper(const LogLikelihood& phi, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorCode::Domain, "tempering exponent must be positive");
  std::vector<double> v(phi.values());
  for (double& x : v) x *= k;
  return LogLikelihood(phi.space_ptr(), std::move(v), phi.shift() * k);
}

std::vector<double> gaussian_negloglik(const std::vector<Eigen::VectorXd>& G, const Eigen::VectorXd& y,
                                       const Eigen::MatrixXd& Sigma) {
  const auto k = y.size();
  if (Sigma.rows() != k || Sigma.cols() != k) fail(ErrorCode::Domain, "noise covariance does not match the data dimension");
  if (!Sigma.isApprox(Sigma.transpose(), 1e-12)) fail(ErrorCode::NotSpd, "noise covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() != Eigen::Success) fail(ErrorCode::NotSpd, "noise covariance is not positive definite");
  std::vector<double> out;
  out.reserve(G.size());
  for (const auto& g : G) {
    if (g.size() != k) fail(ErrorCode::Domain, "forward map value does not match the data dimension");
    const Eigen::VectorXd r = llt.matrixL().solve(y - g);
    out.push_back(0.5 * r.squaredNorm());
  }
  return out;
}

}  // namespace poststab
