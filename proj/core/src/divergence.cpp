#include "poststab/divergence.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

DivergenceValue DivergenceValue::finite_value(DivergenceKind kind, double v, double q) {
  if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "divergence value must be finite; use infinite()");
  DivergenceValue d;
  d.kind_ = kind;
  d.v_ = v;
  d.q_ = q;
  return d;
}

DivergenceValue DivergenceValue::infinite(DivergenceKind kind) {
  DivergenceValue d;
  d.kind_ = kind;
  d.finite_ = false;
  return d;
}

double DivergenceValue::value() const {
  if (!finite_) fail(ErrorCode::NonFinite, label() + " is infinite");
  return v_;
}

double DivergenceValue::value_or_inf() const {
  return finite_ ? v_ : std::numeric_limits<double>::infinity();
}

std::string DivergenceValue::label() const {
  if (kind_ != DivergenceKind::Wasserstein) return to_string(kind_);
  std::ostringstream os;
  os << "W" << q_;
  return os.str();
}

std::string to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::TV: return "TV";
    case DivergenceKind::Hellinger: return "Hellinger";
    case DivergenceKind::KL: return "KL";
    case DivergenceKind::Wasserstein: return "W";
  }
  return "?";
}

DivergenceValue tv_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu, nu);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
  return DivergenceValue::finite_value(DivergenceKind::TV, std::min(1.0, 0.5 * s));
}

DivergenceValue hellinger_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu, nu);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double d = std::sqrt(mu[i]) - std::sqrt(nu[i]);
    s += d * d;
  }
  return DivergenceValue::finite_value(DivergenceKind::Hellinger, std::sqrt(s));
}

DivergenceValue kl_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu, nu);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] == 0.0) continue;
    if (nu[i] == 0.0) return DivergenceValue::infinite(DivergenceKind::KL);
    s += mu[i] * std::log(mu[i] / nu[i]);
  }
  // Rounding can push a zero divergence slightly negative.
  return DivergenceValue::finite_value(DivergenceKind::KL, std::max(0.0, s));
}

double lipschitz_constant(const std::vector<double>& values, const FiniteMetricSpace& space) {
  if (values.size() != space.size()) fail(ErrorCode::Domain, "one value per point is required");
  if (space.size() < 2) fail(ErrorCode::Domain, "Lipschitz constant needs at least two points");
  double lip = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      const double dv = std::abs(values[i] - values[j]);
      if (dv == 0.0) continue;
      const double d = space.distance(i, j);
      if (d == 0.0) return std::numeric_limits<double>::infinity();
      lip = std::max(lip, dv / d);
    }
  }
  return lip;
}

double kantorovich_dual_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const std::vector<double>& f) {
  require_same_space(mu, nu);
  const auto& sp = mu.space();
  if (f.size() != sp.size()) fail(ErrorCode::Domain, "test function needs one value per point");
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) fail(ErrorCode::NonFinite, "test function values must be finite");
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const double d = sp.distance(i, j);
      if (std::abs(f[i] - f[j]) > d + 1e-12 * std::max(1.0, d)) {
        std::ostringstream os;
        os << "test function is not 1-Lipschitz at points (" << i << "," << j << "): |f difference| "
           << std::abs(f[i] - f[j]) << " > distance " << d;
        fail(ErrorCode::Precondition, os.str());
      }
    }
  }
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    a += f[i] * mu[i];
    b += f[i] * nu[i];
  }
  return std::abs(a - b);
}

}  // namespace poststab
