#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "poststab/error.hpp"
#include "poststab/gaussian.hpp"

namespace poststab {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double log_density(double x, double m, double s) {
  const double z = (x - m) / s;
  return -0.5 * z * z - std::log(s) - kHalfLog2Pi;
}

void check_args(double s1, double s2) {
  if (!(s1 > 0.0) || !(s2 > 0.0)) fail(ErrorCode::Domain, "standard deviations must be positive");
}

// Integration breakpoints: the density crossings plus a +-14 sigma window.
std::vector<double> breakpoints(double m1, double s1, double m2, double s2) {
  const double lo = std::min(m1 - 14.0 * s1, m2 - 14.0 * s2);
  const double hi = std::max(m1 + 14.0 * s1, m2 + 14.0 * s2);
  std::vector<double> pts{lo, hi};
  // log p1 = log p2 as a quadratic a x^2 + b x + c = 0.
  const double a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1);
  const double b = m1 / (s1 * s1) - m2 / (s2 * s2);
  const double c = 0.5 * m2 * m2 / (s2 * s2) - 0.5 * m1 * m1 / (s1 * s1) + std::log(s2 / s1);
  if (std::abs(a) < 1e-300) {
    if (b != 0.0) pts.push_back(-c / b);
  } else {
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double r = std::sqrt(disc);
      pts.push_back((-b - r) / (2.0 * a));
      pts.push_back((-b + r) / (2.0 * a));
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts)
    if (p >= lo && p <= hi && (out.empty() || p > out.back())) out.push_back(p);
  return out;
}

template <class F>
double integrate(F f, const std::vector<double>& pts) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 20, 1e-14);
  return total;
}

}  // namespace

double quadrature_hellinger_1d(double m1, double s1, double m2, double s2) {
  check_args(s1, s2);
  auto f = [&](double x) {
    const double d = std::exp(0.5 * log_density(x, m1, s1)) - std::exp(0.5 * log_density(x, m2, s2));
    return d * d;
  };
  return std::sqrt(std::max(0.0, integrate(f, breakpoints(m1, s1, m2, s2))));
}

double quadrature_kl_1d(double m1, double s1, double m2, double s2) {
  check_args(s1, s2);
  auto f = [&](double x) {
    const double l1 = log_density(x, m1, s1);
    return std::exp(l1) * (l1 - log_density(x, m2, s2));
  };
  return integrate(f, breakpoints(m1, s1, m2, s2));
}

double quadrature_tv_1d(double m1, double s1, double m2, double s2) {
  check_args(s1, s2);
  auto f = [&](double x) { return std::abs(std::exp(log_density(x, m1, s1)) - std::exp(log_density(x, m2, s2))); };
  return 0.5 * integrate(f, breakpoints(m1, s1, m2, s2));
}

}  // namespace poststab
