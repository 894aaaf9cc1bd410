#pragma once

#include <string>
#include <vector>

#include "poststab/measure.hpp"

namespace poststab {

enum class DivergenceKind { TV, Hellinger, KL, Wasserstein };

// A discrepancy value. An infinite KL divergence is carried as a flag; value()
// refuses to hand it out as a float.
class DivergenceValue {
 public:
  static DivergenceValue finite_value(DivergenceKind kind, double v, double q = 1.0);
  static DivergenceValue infinite(DivergenceKind kind);

  DivergenceKind kind() const { return kind_; }
  double order() const { return q_; }
  bool is_finite() const { return finite_; }
  double value() const;
  // Float view with +inf for the infinite marker, for comparisons only.
  double value_or_inf() const;
  std::string label() const;

 private:
  DivergenceKind kind_ = DivergenceKind::TV;
  double v_ = 0.0;
  double q_ = 1.0;
  bool finite_ = true;
};

std::string to_string(DivergenceKind kind);

DivergenceValue tv_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
DivergenceValue hellinger_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
DivergenceValue kl_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// max over pairs of |v(x)-v(y)|/d(x,y); +inf if distinct points at distance 0
// carry different values.
double lipschitz_constant(const std::vector<double>& values, const FiniteMetricSpace& space);

// |int f dmu - int f dnu| for a 1-Lipschitz f.
double kantorovich_dual_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const std::vector<double>& f);

}  // namespace poststab
