#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "poststab/metric_space.hpp"

namespace poststab {

// Probability weights on a finite metric space. Weights within 1e-9 of unit
// mass are renormalized; anything further off is rejected.
class DiscreteMeasure {
 public:
  DiscreteMeasure(SpacePtr space, std::vector<double> weights);

  static DiscreteMeasure dirac(SpacePtr space, std::size_t i);
  static DiscreteMeasure uniform(SpacePtr space);

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const { return w_; }

  bool in_support(std::size_t i) const { return w_[i] > 0.0; }
  std::vector<std::size_t> support() const;

 private:
  SpacePtr space_;
  std::vector<double> w_;
};

// Signed weights with a declared total mass, e.g. perturbation directions.
class SignedDiscreteMeasure {
 public:
  SignedDiscreteMeasure(SpacePtr space, std::vector<double> weights, double declared_mass = 0.0);

  const FiniteMetricSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const { return w_; }
  double declared_mass() const { return mass_; }

  double total_mass() const;
  // Full variation sum |w|; twice the TV distance for differences of
  // probability measures.
  double variation_norm() const;

 private:
  SpacePtr space_;
  std::vector<double> w_;
  double mass_;
};

void require_same_space(const FiniteMetricSpace& a, const FiniteMetricSpace& b);

template <class A, class B>
void require_same_space(const A& a, const B& b) {
  require_same_space(a.space(), b.space());
}

struct MomentBound {
  double value;
  std::size_t center;
};

// min over support centers x0 of (sum d(x,x0)^q mu(x))^(1/q).
double moment_bound(const DiscreteMeasure& mu, double q);
MomentBound moment_bound_detail(const DiscreteMeasure& mu, double q);
double moment_at(const DiscreteMeasure& mu, std::size_t center, double q);

DiscreteMeasure contaminate(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps);

// Moves all mass in the closed ball B_eps(center) onto target.
DiscreteMeasure ball_removal(const DiscreteMeasure& mu, std::size_t center, double eps_radius,
                             std::size_t target);

SignedDiscreteMeasure perturbation_direction(const DiscreteMeasure& nu, const DiscreteMeasure& mu);

}  // namespace poststab
