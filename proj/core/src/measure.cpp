#include "poststab/measure.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

namespace {

constexpr double kRenormTol = 1e-9;
constexpr double kMassTol = 1e-12;
constexpr double kMetricTol = 1e-12;

double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), w_(std::move(weights)) {
  if (!space_) fail(ErrorCode::InvalidMeasure, "measure needs a space");
  if (w_.size() != space_->size()) {
    std::ostringstream os;
    os << "weights have " << w_.size() << " entries but the space has " << space_->size() << " points";
    fail(ErrorCode::InvalidMeasure, os.str());
  }
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (!std::isfinite(w_[i])) fail(ErrorCode::NonFinite, "weights must be finite");
    if (w_[i] < 0.0) {
      std::ostringstream os;
      os << "weight " << i << " is negative (" << w_[i] << ")";
      fail(ErrorCode::InvalidMeasure, os.str());
    }
  }
  const double total = kahan_sum(w_);
  if (!(std::abs(total - 1.0) <= kRenormTol)) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", not 1";
    fail(ErrorCode::InvalidMeasure, os.str());
  }
  if (total != 1.0)
    for (double& x : w_) x /= total;
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, std::size_t i) {
  if (!space || i >= space->size()) fail(ErrorCode::Domain, "dirac index outside the space");
  std::vector<double> w(space->size(), 0.0);
  w[i] = 1.0;
  return DiscreteMeasure(std::move(space), std::move(w));
}

DiscreteMeasure DiscreteMeasure::uniform(SpacePtr space) {
  if (!space) fail(ErrorCode::InvalidMeasure, "measure needs a space");
  const std::size_t n = space->size();
  return DiscreteMeasure(std::move(space), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::vector<std::size_t> DiscreteMeasure::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < w_.size(); ++i)
    if (w_[i] > 0.0) s.push_back(i);
  return s;
}

SignedDiscreteMeasure::SignedDiscreteMeasure(SpacePtr space, std::vector<double> weights, double declared_mass)
    : space_(std::move(space)), w_(std::move(weights)), mass_(declared_mass) {
  if (!space_) fail(ErrorCode::InvalidMeasure, "signed measure needs a space");
  if (w_.size() != space_->size()) fail(ErrorCode::InvalidMeasure, "signed weights do not match the point count");
  for (double x : w_)
    if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "signed weights must be finite");
  const double m = kahan_sum(w_);
  if (!(std::abs(m - mass_) <= kMassTol * std::max(1.0, variation_norm()))) {
    std::ostringstream os;
    os.precision(17);
    os << "signed weights sum to " << m << " but declared mass is " << mass_;
    fail(ErrorCode::InvalidMeasure, os.str());
  }
}

double SignedDiscreteMeasure::total_mass() const { return kahan_sum(w_); }

double SignedDiscreteMeasure::variation_norm() const {
  double s = 0.0;
  for (double x : w_) s += std::abs(x);
  return s;
}

void require_same_space(const FiniteMetricSpace& a, const FiniteMetricSpace& b) {
  if (!a.same_as(b)) fail(ErrorCode::SpaceMismatch, "measures live on different spaces");
}

double moment_at(const DiscreteMeasure& mu, std::size_t center, double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) fail(ErrorCode::Domain, "moment order q must be >= 1");
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0) continue;
    const double d = mu.space().distance(i, center);
    acc += std::pow(d, q) * mu[i];
  }
  return std::pow(acc, 1.0 / q);
}

MomentBound moment_bound_detail(const DiscreteMeasure& mu, double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) fail(ErrorCode::Domain, "moment order q must be >= 1");
  MomentBound best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t c : mu.support()) {
    const double v = moment_at(mu, c, q);
    if (v < best.value) best = {v, c};
  }
  return best;
}

double moment_bound(const DiscreteMeasure& mu, double q) { return moment_bound_detail(mu, q).value; }

DiscreteMeasure contaminate(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
  require_same_space(mu, nu);
  if (!(eps >= 0.0 && eps <= 1.0)) fail(ErrorCode::Domain, "contamination level must lie in [0,1]");
  std::vector<double> w(mu.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = (1.0 - eps) * mu[i] + eps * nu[i];
  DiscreteMeasure out(mu.space_ptr(), std::move(w));
  double tv = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) tv += std::abs(out[i] - mu[i]);
  if (0.5 * tv > eps + 1e-12) fail(ErrorCode::SolverFailure, "contamination left the TV ball");
  return out;
}

DiscreteMeasure ball_removal(const DiscreteMeasure& mu, std::size_t center, double eps_radius,
                             std::size_t target) {
  const auto& sp = mu.space();
  if (center >= sp.size() || target >= sp.size()) fail(ErrorCode::Domain, "ball center or target outside the space");
  if (!(eps_radius > 0.0) || !std::isfinite(eps_radius)) fail(ErrorCode::Domain, "ball radius must be positive");
  const double tol = kMetricTol * std::max(1.0, eps_radius);
  const double dct = sp.distance(center, target);
  if (dct < eps_radius - tol) {
    std::ostringstream os;
    os << "target " << target << " lies strictly inside the ball (distance " << dct << " < " << eps_radius << ")";
    fail(ErrorCode::Precondition, os.str());
  }
  std::vector<double> w = mu.weights();
  double moved = 0.0, cost = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i == target || sp.distance(i, center) > eps_radius + tol) continue;
    moved += w[i];
    cost += w[i] * sp.distance(i, target);
    w[i] = 0.0;
  }
  w[target] += moved;
  // The relocation coupling costs at most (eps + d(center,target)) per unit
  // of moved mass, which is 2 eps mu(B) for a target on the shell.
  if (cost > (eps_radius + dct) * moved + tol) fail(ErrorCode::SolverFailure, "ball relocation cost exceeds its bound");
  return DiscreteMeasure(mu.space_ptr(), std::move(w));
}

SignedDiscreteMeasure perturbation_direction(const DiscreteMeasure& nu, const DiscreteMeasure& mu) {
  require_same_space(nu, mu);
  std::vector<double> w(mu.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = nu[i] - mu[i];
  return SignedDiscreteMeasure(mu.space_ptr(), std::move(w), 0.0);
}

}  // namespace poststab
