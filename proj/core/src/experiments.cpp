#include "poststab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "poststab/bounds.hpp"
#include "poststab/error.hpp"
#include "poststab/parallel.hpp"
#include "poststab/transport.hpp"

namespace poststab {

namespace {

std::vector<char> membership(const std::vector<std::size_t>& A, std::size_t n) {
  std::vector<char> in(n, 0);
  for (std::size_t i : A) {
    if (i >= n) fail(ErrorCode::Domain, "subset index outside the space");
    if (in[i]) fail(ErrorCode::Domain, "subset lists a point twice");
    in[i] = 1;
  }
  return in;
}

struct HuberParts {
  double Z;
  double mass_A;  // int_A e^{-phi} dmu
  double sup_in;
  double sup_out;
};

HuberParts huber_parts(const std::vector<double>& lik, const DiscreteMeasure& mu, const std::vector<char>& in) {
  HuberParts p{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < lik.size(); ++i) {
    p.Z += lik[i] * mu[i];
    if (in[i]) {
      p.mass_A += lik[i] * mu[i];
      p.sup_in = std::max(p.sup_in, lik[i]);
    } else {
      p.sup_out = std::max(p.sup_out, lik[i]);
    }
  }
  return p;
}

HuberRange huber_from_parts(const HuberParts& p, double eps) {
  HuberRange r;
  r.posterior_probability = p.mass_A / p.Z;
  const double a = (1.0 - eps) * p.Z;
  r.inf = r.posterior_probability / (1.0 + eps * p.sup_out / a);
  r.sup = (a * r.posterior_probability + eps * p.sup_in) / (a + eps * p.sup_in);
  return r;
}

void check_eps_open(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    std::ostringstream os;
    os << "contamination level must lie in (0,1), got " << eps;
    fail(ErrorCode::Domain, os.str());
  }
}

std::vector<double> likelihood_of(const LogLikelihood& phi) {
  std::vector<double> lik(phi.size());
  for (std::size_t i = 0; i < lik.size(); ++i) lik[i] = std::exp(-phi[i]);
  return lik;
}

bool nonincreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + 1e-12 * std::max(1.0, v[i - 1])) return false;
  return true;
}

}  // namespace

bool SensitivityTrace::evidence_nonincreasing() const { return nonincreasing(Z) && nonincreasing(Z_tilde); }

bool SensitivityTrace::all_within_bound() const {
  return std::all_of(within_bound.begin(), within_bound.end(), [](bool b) { return b; });
}

SensitivityTrace sensitivity_sweep(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde,
                                   const LogLikelihood& phi, const std::vector<double>& k_values,
                                   DivergenceKind kind) {
  require_same_space(mu, mu_tilde);
  if (kind == DivergenceKind::KL && mu.support() != mu_tilde.support())
    fail(ErrorCode::EquivalenceViolation, "KL sensitivity needs priors with identical supports");
  const std::size_t n = k_values.size();
  SensitivityTrace tr;
  tr.kind = kind;
  tr.k_values = k_values;
  tr.Z.resize(n);
  tr.Z_tilde.resize(n);
  tr.prior_distance.resize(n);
  tr.posterior_distance.resize(n);
  tr.ratio.resize(n);
  tr.bound_constant.resize(n);
  tr.within_bound.resize(n);
  std::vector<char> ok(n);
  parallel_for(n, [&](std::size_t i) {
    const LogLikelihood pk = temper(phi, k_values[i]);
    BoundReport rep;
    double prior = 0.0;
    switch (kind) {
      case DivergenceKind::TV:
        rep = tv_prior_bound(mu, mu_tilde, pk);
        prior = rep.ingredients.at("d_TV_prior");
        break;
      case DivergenceKind::Hellinger:
        rep = hellinger_prior_bound(mu, mu_tilde, pk);
        prior = rep.ingredients.at("d_H_prior");
        break;
      case DivergenceKind::KL:
        rep = kl_prior_bound(mu, mu_tilde, pk, KlDirection::Forward);
        prior = rep.ingredients.at("KL_prior_forward");
        break;
      case DivergenceKind::Wasserstein:
        rep = w1_prior_bound(mu, mu_tilde, pk, BoundForm::Sharp);
        prior = rep.ingredients.at("W1_prior");
        break;
    }
    const double post = rep.lhs.value();
    tr.Z[i] = rep.ingredients.at("Z");
    tr.Z_tilde[i] = rep.ingredients.at("Z_tilde");
    tr.prior_distance[i] = prior;
    tr.posterior_distance[i] = post;
    tr.ratio[i] = prior > 0.0 ? post / prior : 0.0;
    tr.bound_constant[i] = prior > 0.0 ? rep.rhs / prior : 0.0;
    ok[i] = rep.all_hold();
  });
  for (std::size_t i = 0; i < n; ++i) tr.within_bound[i] = ok[i] != 0;
  return tr;
}

HuberRange huber_range(const DiscreteMeasure& mu, const LogLikelihood& phi, const std::vector<std::size_t>& A,
                       double eps) {
  require_same_space(mu.space(), phi.space());
  check_eps_open(eps);
  const std::size_t n = mu.size();
  const auto in = membership(A, n);
  if (A.empty()) fail(ErrorCode::Domain, "event A must be nonempty");
  if (A.size() == n) fail(ErrorCode::Domain, "event A must have a nonempty complement");
  const HuberParts p = huber_parts(likelihood_of(phi), mu, in);
  if (!(p.Z > 0.0)) fail(ErrorCode::DegenerateLikelihood, "evidence vanishes");
  const HuberRange r = huber_from_parts(p, eps);
  if (!(r.inf <= r.posterior_probability + 1e-15 && r.posterior_probability <= r.sup + 1e-15))
    fail(ErrorCode::SolverFailure, "Huber range does not bracket the posterior probability");
  return r;
}

double contaminated_posterior_probability(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          const LogLikelihood& phi, const std::vector<std::size_t>& A, double eps) {
  const DiscreteMeasure mix = contaminate(mu, nu, eps);
  const Posterior post = posterior(mix, phi);
  const auto in = membership(A, mu.size());
  double s = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i]) s += post.measure[i];
  return s;
}

TvRangeResult tv_range_lower_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, double eps,
                                   std::uint64_t seed) {
  require_same_space(mu.space(), phi.space());
  check_eps_open(eps);
  const std::size_t n = mu.size();
  if (n < 2) fail(ErrorCode::Domain, "subsets need at least two points");
  const std::vector<double> lik = likelihood_of(phi);
  double Z = 0.0;
  for (std::size_t i = 0; i < n; ++i) Z += lik[i] * mu[i];
  if (!(Z > 0.0)) fail(ErrorCode::DegenerateLikelihood, "evidence vanishes");

  auto gap_of = [&](const std::vector<char>& in) {
    HuberParts p = huber_parts(lik, mu, in);
    p.Z = Z;
    const HuberRange r = huber_from_parts(p, eps);
    return std::max(r.posterior_probability - r.inf, r.sup - r.posterior_probability);
  };

  TvRangeResult res;
  res.exhaustive = n <= 20;
  std::vector<std::vector<char>> masks;
  std::size_t count = 0;
  if (res.exhaustive) {
    count = (std::size_t{1} << n) - 2;
  } else {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    masks.reserve(10000);
    while (masks.size() < 10000) {
      std::vector<char> in(n);
      std::size_t k = 0;
      for (auto& b : in) k += (b = coin(rng) ? 1 : 0);
      if (k == 0 || k == n) continue;
      masks.push_back(std::move(in));
    }
    count = masks.size();
  }
  const std::size_t chunks = std::min<std::size_t>(count, 64);
  std::vector<double> best(chunks, -1.0);
  std::vector<std::size_t> best_idx(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = count * c / chunks, hi = count * (c + 1) / chunks;
    std::vector<char> in(n);
    for (std::size_t s = lo; s < hi; ++s) {
      if (res.exhaustive) {
        const std::size_t bits = s + 1;
        for (std::size_t i = 0; i < n; ++i) in[i] = (bits >> i) & 1u;
      }
      const double g = gap_of(res.exhaustive ? in : masks[s]);
      if (g > best[c]) {
        best[c] = g;
        best_idx[c] = s;
      }
    }
  });
  std::size_t winner = 0;
  for (std::size_t c = 1; c < chunks; ++c)
    if (best[c] > best[winner]) winner = c;
  res.value = std::max(0.0, best[winner]);
  res.subsets_checked = count;
  const std::size_t s = best_idx[winner];
  for (std::size_t i = 0; i < n; ++i) {
    const bool member = res.exhaustive ? ((s + 1) >> i) & 1u : masks[s][i] != 0;
    if (member) res.best_subset.push_back(i);
  }
  return res;
}

SignedDiscreteMeasure frechet_derivative(const DiscreteMeasure& mu, const LogLikelihood& phi,
                                         const SignedDiscreteMeasure& rho) {
  require_same_space(mu.space(), phi.space());
  require_same_space(mu.space(), rho.space());
  if (std::abs(rho.total_mass()) > 1e-12 * std::max(1.0, rho.variation_norm()))
    fail(ErrorCode::Domain, "perturbation direction must have zero mass");
  const double Z = posterior(mu, phi).evidence;
  const std::vector<double> lik = likelihood_of(phi);
  double drho = 0.0;
  for (std::size_t i = 0; i < lik.size(); ++i) drho += lik[i] * rho[i];
  std::vector<double> w(lik.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = lik[i] * (rho[i] - drho / Z * mu[i]) / Z;
  return SignedDiscreteMeasure(mu.space_ptr(), std::move(w), 0.0);
}

NormBounds derivative_norm_bounds(const DiscreteMeasure& mu, const LogLikelihood& phi) {
  require_same_space(mu.space(), phi.space());
  const double Z = posterior(mu, phi).evidence;
  NormBounds b;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double l = std::exp(-phi[i]);
    b.upper = std::max(b.upper, l);
    if (!mu.in_support(i)) b.lower = std::max(b.lower, l);
  }
  b.lower /= Z;
  b.upper /= Z;
  return b;
}

double local_sensitivity(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LogLikelihood& phi) {
  return frechet_derivative(mu, phi, perturbation_direction(nu, mu)).variation_norm();
}

ContinuityTrace wasserstein_continuity_sweep(const DiscreteMeasure& mu, const std::vector<DiscreteMeasure>& sequence,
                                             const LogLikelihood& phi, double q) {
  const Posterior base = posterior(mu, phi);
  ContinuityTrace tr;
  tr.q = q;
  const std::size_t n = sequence.size();
  tr.prior_distance.resize(n);
  tr.posterior_distance.resize(n);
  parallel_for(n, [&](std::size_t k) {
    require_same_space(mu, sequence[k]);
    tr.prior_distance[k] = wasserstein(mu, sequence[k], q).value();
    tr.posterior_distance[k] = wasserstein(base.measure, posterior(sequence[k], phi).measure, q).value();
  });
  tr.prior_monotone = nonincreasing(tr.prior_distance);
  tr.posterior_monotone = nonincreasing(tr.posterior_distance);
  auto decays = [](const std::vector<double>& v) {
    if (v.empty() || v.front() == 0.0) return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    return v.back() <= 1e-3 * v.front();
  };
  tr.decayed = decays(tr.prior_distance) && decays(tr.posterior_distance);
  return tr;
}

std::vector<DiscreteMeasure> geometric_contamination(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                     std::size_t steps) {
  std::vector<DiscreteMeasure> out;
  out.reserve(steps);
  for (std::size_t k = 1; k <= steps; ++k) out.push_back(contaminate(mu, nu, std::ldexp(1.0, -static_cast<int>(k))));
  return out;
}

}  // namespace poststab
