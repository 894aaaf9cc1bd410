#include "poststab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "poststab/error.hpp"
#include "poststab/measure.hpp"
#include "poststab/transport.hpp"

namespace poststab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNormTol = 1e-12;

double slack_of(double lhs, double rhs) { return std::isinf(lhs) ? -kInf : rhs - lhs; }

SideCheck side(std::string name, double lhs, double rhs) {
  return SideCheck{std::move(name), lhs, rhs, slack_of(lhs, rhs), within_tolerance(lhs, rhs)};
}

BoundReport make_report(std::string id, DivergenceValue lhs, double rhs) {
  BoundReport r;
  r.theorem_id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = slack_of(lhs.value_or_inf(), rhs);
  r.holds = within_tolerance(lhs.value_or_inf(), rhs);
  return r;
}

// Hypotheses shared by the likelihood-perturbation bounds.
void require_phi_pair(const char* theorem, const DiscreteMeasure& mu, const LogLikelihood& phi,
                      const LogLikelihood& phi_tilde) {
  require_same_space(mu.space(), phi.space());
  require_same_space(mu.space(), phi_tilde.space());
  if (!phi.finite_on(mu) || !phi_tilde.finite_on(mu)) {
    std::ostringstream os;
    os << theorem << " needs both log-likelihoods finite on the prior support";
    fail(ErrorCode::Precondition, os.str());
  }
  const double m = phi.ess_inf(mu);
  if (std::abs(m) > kNormTol) {
    std::ostringstream os;
    os.precision(17);
    os << theorem << " needs ess inf of the reference log-likelihood equal to 0 under the prior (got " << m << ")";
    fail(ErrorCode::Precondition, os.str());
  }
}

// Hypotheses shared by the prior-perturbation bounds: Phi >= 0 and finite on
// both supports.
void require_prior_pair(const char* theorem, const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde,
                        const LogLikelihood& phi) {
  require_same_space(mu, mu_tilde);
  require_same_space(mu.space(), phi.space());
  for (const DiscreteMeasure* m : {&mu, &mu_tilde}) {
    for (std::size_t i : m->support()) {
      if (!(phi[i] >= 0.0) || !std::isfinite(phi[i])) {
        std::ostringstream os;
        os.precision(17);
        os << theorem << " needs a finite nonnegative log-likelihood on both prior supports (value at point " << i
           << " is " << phi[i] << ")";
        fail(ErrorCode::Precondition, os.str());
      }
    }
  }
}

void common_ingredients(BoundReport& r, const Posterior& a, const Posterior& b) {
  r.ingredients["Z"] = a.evidence;
  r.ingredients["Z_tilde"] = b.evidence;
  r.ingredients["log_Z"] = a.log_evidence;
  r.ingredients["log_Z_tilde"] = b.log_evidence;
  r.ingredients["min_Z"] = std::exp(std::min(a.log_evidence, b.log_evidence));
}

DivergenceValue w1(const DiscreteMeasure& a, const DiscreteMeasure& b) { return wasserstein(a, b, 1.0); }

}  // namespace

bool within_tolerance(double lhs, double rhs) {
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  if (std::isinf(rhs) && rhs > 0) return true;
  return lhs <= rhs + 1e-10 * std::max(1.0, rhs);
}

bool BoundReport::all_hold() const {
  return holds && std::all_of(side_checks.begin(), side_checks.end(), [](const SideCheck& s) { return s.holds; });
}

double lp_norm_diff(const LogLikelihood& phi, const LogLikelihood& phi_tilde, const DiscreteMeasure& mu, int p) {
  if (p != 1 && p != 2) fail(ErrorCode::Domain, "norm exponent p must be 1 or 2");
  require_same_space(mu.space(), phi.space());
  require_same_space(mu.space(), phi_tilde.space());
  double acc = 0.0;
  for (std::size_t i : mu.support()) {
    const double d = std::abs(phi[i] - phi_tilde[i]);
    if (!std::isfinite(d)) fail(ErrorCode::NonFinite, "log-likelihood difference must be finite on the prior support");
    acc += (p == 1 ? d : d * d) * mu[i];
  }
  return p == 1 ? acc : std::sqrt(acc);
}

double lp_norm(const LogLikelihood& phi, const DiscreteMeasure& mu, int p) {
  if (p < 1) fail(ErrorCode::Domain, "norm exponent p must be >= 1");
  double acc = 0.0;
  for (std::size_t i : mu.support()) {
    const double v = std::abs(phi[i]);
    if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "log-likelihood must be finite on the prior support");
    acc += std::pow(v, p) * mu[i];
  }
  return std::pow(acc, 1.0 / p);
}

double evidence_lower_bound(const LogLikelihood& phi, const LogLikelihood& phi_tilde, const DiscreteMeasure& mu) {
  return std::exp(-lp_norm(phi, mu, 1) - lp_norm_diff(phi, phi_tilde, mu, 1));
}

BoundReport hellinger_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde) {
  require_phi_pair("hellinger_phi", mu, phi, phi_tilde);
  const Posterior a = posterior(mu, phi), b = posterior(mu, phi_tilde);
  const double l2 = lp_norm_diff(phi, phi_tilde, mu, 2);
  const NegPart neg(phi_tilde.ess_inf(mu));
  const double log_min = std::min(a.log_evidence, b.log_evidence);
  const double rhs = std::exp(-neg.value - log_min) * l2;
  BoundReport r = make_report("hellinger_phi", hellinger_distance(a.measure, b.measure), rhs);
  common_ingredients(r, a, b);
  r.ingredients["L2_diff"] = l2;
  r.ingredients["neg_part_essinf_phi_tilde"] = neg.value;
  return r;
}

BoundReport hellinger_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi) {
  require_prior_pair("hellinger_prior", mu, mu_tilde, phi);
  const Posterior a = posterior(mu, phi), b = posterior(mu_tilde, phi);
  const double dh = hellinger_distance(mu, mu_tilde).value();
  const double log_min = std::min(a.log_evidence, b.log_evidence);
  BoundReport r = make_report("hellinger_prior", hellinger_distance(a.measure, b.measure), 2.0 * std::exp(-log_min) * dh);
  common_ingredients(r, a, b);
  r.ingredients["d_H_prior"] = dh;
  r.side_checks.push_back(side("evidence_gap_vs_2dH", std::abs(a.evidence - b.evidence), 2.0 * dh));
  return r;
}

BoundReport tv_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde) {
  require_phi_pair("tv_phi", mu, phi, phi_tilde);
  const Posterior a = posterior(mu, phi), b = posterior(mu, phi_tilde);
  const double l1 = lp_norm_diff(phi, phi_tilde, mu, 1);
  const NegPart neg(phi_tilde.ess_inf(mu));
  BoundReport r = make_report("tv_phi", tv_distance(a.measure, b.measure), std::exp(-neg.value - a.log_evidence) * l1);
  common_ingredients(r, a, b);
  r.ingredients["L1_diff"] = l1;
  r.ingredients["neg_part_essinf_phi_tilde"] = neg.value;
  return r;
}

BoundReport tv_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi) {
  require_prior_pair("tv_prior", mu, mu_tilde, phi);
  const Posterior a = posterior(mu, phi), b = posterior(mu_tilde, phi);
  const double dtv = tv_distance(mu, mu_tilde).value();
  BoundReport r = make_report("tv_prior", tv_distance(a.measure, b.measure), 2.0 * std::exp(-a.log_evidence) * dtv);
  common_ingredients(r, a, b);
  r.ingredients["d_TV_prior"] = dtv;
  return r;
}

BoundReport kl_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde,
                         KlDirection direction) {
  const char* id = direction == KlDirection::Forward ? "kl_phi_forward" : "kl_phi_reverse";
  require_phi_pair(id, mu, phi, phi_tilde);
  const Posterior a = posterior(mu, phi), b = posterior(mu, phi_tilde);
  const double l1 = lp_norm_diff(phi, phi_tilde, mu, 1);
  const NegPart neg(phi_tilde.ess_inf(mu));
  const double log_min = std::min(a.log_evidence, b.log_evidence);
  const DivergenceValue lhs = direction == KlDirection::Forward ? kl_divergence(a.measure, b.measure)
                                                                : kl_divergence(b.measure, a.measure);
  BoundReport r = make_report(id, lhs, 2.0 * std::exp(-neg.value - log_min) * l1);
  common_ingredients(r, a, b);
  r.ingredients["L1_diff"] = l1;
  r.ingredients["neg_part_essinf_phi_tilde"] = neg.value;
  return r;
}

BoundReport kl_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi,
                           KlDirection direction) {
  const char* id = direction == KlDirection::Forward ? "kl_prior_forward" : "kl_prior_reverse";
  require_prior_pair(id, mu, mu_tilde, phi);
  if (mu.support() != mu_tilde.support()) {
    std::ostringstream os;
    os << id << " needs equivalent priors (identical supports)";
    fail(ErrorCode::EquivalenceViolation, os.str());
  }
  const Posterior a = posterior(mu, phi), b = posterior(mu_tilde, phi);
  const double kf = kl_divergence(mu, mu_tilde).value();
  const double kr = kl_divergence(mu_tilde, mu).value();
  const double log_min = std::min(a.log_evidence, b.log_evidence);
  const DivergenceValue lhs = direction == KlDirection::Forward ? kl_divergence(a.measure, b.measure)
                                                                : kl_divergence(b.measure, a.measure);
  BoundReport r = make_report(id, lhs, std::exp(-log_min) * (kf + kr));
  common_ingredients(r, a, b);
  r.ingredients["KL_prior_forward"] = kf;
  r.ingredients["KL_prior_reverse"] = kr;
  r.side_checks.push_back(side("evidence_gap_vs_sqrt_2KL", std::abs(a.evidence - b.evidence), std::sqrt(2.0 * kf)));
  return r;
}

BoundReport w1_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde,
                         BoundForm form) {
  const char* id = form == BoundForm::Sharp ? "w1_phi_sharp" : "w1_phi_simplified";
  require_phi_pair(id, mu, phi, phi_tilde);
  const Posterior a = posterior(mu, phi), b = posterior(mu, phi_tilde);
  const double l1 = lp_norm_diff(phi, phi_tilde, mu, 1);
  const double l2 = lp_norm_diff(phi, phi_tilde, mu, 2);
  const NegPart neg(phi_tilde.ess_inf(mu));
  const double m1_post = moment_bound(a.measure, 1.0);
  const double m2 = moment_bound(mu, 2.0);
  const double log_min = std::min(a.log_evidence, b.log_evidence);
  const double sharp = std::exp(-neg.value - b.log_evidence) * (m1_post * l1 + m2 * l2);
  const double simplified = 2.0 * std::exp(-neg.value - 2.0 * log_min) * m2 * l2;
  BoundReport r = make_report(id, w1(a.measure, b.measure), form == BoundForm::Sharp ? sharp : simplified);
  common_ingredients(r, a, b);
  r.ingredients["L1_diff"] = l1;
  r.ingredients["L2_diff"] = l2;
  r.ingredients["neg_part_essinf_phi_tilde"] = neg.value;
  r.ingredients["P1_moment_posterior"] = m1_post;
  r.ingredients["P2_moment_prior"] = m2;
  r.ingredients["rhs_sharp"] = sharp;
  r.ingredients["rhs_simplified"] = simplified;
  r.side_checks.push_back(side("sharp_le_simplified", sharp, simplified));
  return r;
}

BoundReport w1_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi,
                           BoundForm form) {
  const char* id = form == BoundForm::Sharp ? "w1_prior_sharp" : "w1_prior_simplified";
  require_prior_pair(id, mu, mu_tilde, phi);
  const auto D = mu.space().bound();
  if (!D) {
    std::ostringstream os;
    os << id << " needs a metric bounded by some D (use a truncated or explicit metric)";
    fail(ErrorCode::Precondition, os.str());
  }
  std::vector<double> lik(phi.size());
  for (std::size_t i = 0; i < lik.size(); ++i) lik[i] = std::exp(-phi[i]);
  const double lip = lipschitz_constant(lik, mu.space());
  if (!std::isfinite(lip)) fail(ErrorCode::Precondition, "exp(-Phi) is not Lipschitz on the space");
  const Posterior a = posterior(mu, phi), b = posterior(mu_tilde, phi);
  const double w_prior = w1(mu, mu_tilde).value();
  const double m1 = moment_bound(mu, 1.0);
  const double log_min = std::min(a.log_evidence, b.log_evidence);
  const double c = 1.0 + *D * lip;
  const double sharp = c * std::exp(-b.log_evidence) * (1.0 + lip * m1 * std::exp(-a.log_evidence)) * w_prior;
  const double simplified = c * c * std::exp(-2.0 * log_min) * w_prior;
  BoundReport r = make_report(id, w1(a.measure, b.measure), form == BoundForm::Sharp ? sharp : simplified);
  common_ingredients(r, a, b);
  r.ingredients["D"] = *D;
  r.ingredients["Lip_exp_neg_phi"] = lip;
  r.ingredients["P1_moment_prior"] = m1;
  r.ingredients["W1_prior"] = w_prior;
  r.ingredients["rhs_sharp"] = sharp;
  r.ingredients["rhs_simplified"] = simplified;
  r.side_checks.push_back(side("evidence_gap_vs_Lip_W1", std::abs(a.evidence - b.evidence), lip * w_prior));
  r.side_checks.push_back(side("sharp_le_simplified", sharp, simplified));
  return r;
}

TableEntry lipschitz_table_entry(const DiscreteMeasure& mu, const LogLikelihood& phi, double r, DivergenceKind kind,
                                 TableSide side_) {
  if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::Domain, "table radius r must be positive");
  const Posterior post = posterior(mu, phi);
  const double Z = post.evidence;
  if (side_ == TableSide::Likelihood) {
    const double l1 = lp_norm(phi, mu, 1);
    switch (kind) {
      case DivergenceKind::TV: return {kind, side_, 1.0 / Z, kInf, 1};
      case DivergenceKind::Hellinger: return {kind, side_, std::exp(l1 + r), kInf, 2};
      case DivergenceKind::KL: return {kind, side_, 2.0 * std::exp(l1 + r), kInf, 1};
      case DivergenceKind::Wasserstein:
        return {kind, side_, 2.0 * moment_bound(mu, 2.0) * std::exp(2.0 * l1 + 2.0 * r), kInf, 2};
    }
  }
  auto check_radius = [&](double R, const char* row) {
    if (r >= R) {
      std::ostringstream os;
      os.precision(17);
      os << "prior-side " << row << " row needs r < " << R << " (got " << r << ")";
      fail(ErrorCode::RadiusExceeded, os.str());
    }
  };
  switch (kind) {
    case DivergenceKind::TV: return {kind, side_, 2.0 / Z, kInf, 1};
    case DivergenceKind::Hellinger:
      check_radius(Z / 2.0, "Hellinger");
      return {kind, side_, 2.0 / (Z - 2.0 * r), Z / 2.0, 1};
    case DivergenceKind::KL:
      check_radius(Z * Z / 2.0, "KL");
      return {kind, side_, 2.0 / (Z - std::sqrt(2.0 * r)), Z * Z / 2.0, 1};
    case DivergenceKind::Wasserstein: {
      const auto D = mu.space().bound();
      if (!D) fail(ErrorCode::Precondition, "prior-side W1 row needs a metric bounded by some D");
      std::vector<double> lik(phi.size());
      for (std::size_t i = 0; i < lik.size(); ++i) lik[i] = std::exp(-phi[i]);
      const double lip = lipschitz_constant(lik, mu.space());
      const double R = lip > 0.0 ? Z / lip : kInf;
      check_radius(R, "W1");
      const double c = 1.0 + *D * lip;
      return {kind, side_, c * c / (Z - lip * r), R, 1};
    }
  }
  fail(ErrorCode::Domain, "unknown table row");
}

std::vector<TableEntry> lipschitz_table(const DiscreteMeasure& mu, const LogLikelihood& phi, double r) {
  const DivergenceKind kinds[] = {DivergenceKind::TV, DivergenceKind::Hellinger, DivergenceKind::KL,
                                  DivergenceKind::Wasserstein};
  std::vector<TableEntry> out;
  for (auto k : kinds) out.push_back(lipschitz_table_entry(mu, phi, r, k, TableSide::Likelihood));
  for (auto k : kinds) {
    if (k == DivergenceKind::Wasserstein && !mu.space().bound()) continue;
    out.push_back(lipschitz_table_entry(mu, phi, r, k, TableSide::Prior));
  }
  return out;
}

BoundReport data_perturbation_bound(const DiscreteMeasure& mu, const DataPerturbation& data, DataForm form) {
  const auto& sp = mu.space_ptr();
  if (data.G.size() != sp->size()) fail(ErrorCode::Domain, "forward map needs one value per point");
  if (data.p < 1) fail(ErrorCode::Domain, "norm exponent p must be >= 1");
  const std::vector<double> raw = gaussian_negloglik(data.G, data.y, data.Sigma);
  const std::vector<double> raw_tilde = gaussian_negloglik(data.G, data.y_tilde, data.Sigma);
  const double dy = (data.y - data.y_tilde).norm();
  // Operator norm of Sigma^{-1}: the inverse of the smallest eigenvalue.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(data.Sigma);
  const double c_inv = 1.0 / es.eigenvalues().minCoeff();
  const double m2 = moment_bound(mu, 2.0);

  if (form == DataForm::Remark) {
    const LogLikelihood phi = shift_to_zero_essinf(sp, raw, mu);
    const LogLikelihood phi_tilde = apply_shift(sp, raw_tilde, phi.shift());
    const Posterior a = posterior(mu, phi), b = posterior(mu, phi_tilde);
    const double q = 2.0 * data.p;
    double g_norm = 0.0;
    for (std::size_t i : mu.support()) g_norm += std::pow(data.G[i].norm(), q) * mu[i];
    g_norm = std::pow(g_norm, 1.0 / q);
    const double r = 0.5 * c_inv * (data.y.norm() + data.y_tilde.norm() + 2.0 * g_norm) * dy;
    const NegPart neg(phi_tilde.ess_inf(mu));
    const double l1 = lp_norm(phi, mu, 1);
    const double constant = std::exp(-neg.value) * 2.0 * m2 * std::exp(2.0 * l1 + 2.0 * r);
    BoundReport rep = make_report("data_remark", w1(a.measure, b.measure), constant * r);
    common_ingredients(rep, a, b);
    rep.ingredients["C_Sigma_inv"] = c_inv;
    rep.ingredients["G_norm"] = g_norm;
    rep.ingredients["data_gap"] = dy;
    rep.ingredients["r"] = r;
    rep.ingredients["L2_diff"] = lp_norm_diff(phi, phi_tilde, mu, 2);
    rep.ingredients["L1_phi"] = l1;
    rep.ingredients["P2_moment_prior"] = m2;
    rep.ingredients["neg_part_essinf_phi_tilde"] = neg.value;
    rep.ingredients["C_r"] = constant;
    rep.side_checks.push_back(side("L2_diff_vs_r", rep.ingredients["L2_diff"], r));
    return rep;
  }

  // Corollary form on the unshifted misfit.
  const LogLikelihood phi(sp, raw, 0.0), phi_tilde(sp, raw_tilde, 0.0);
  const Posterior a = posterior(mu, phi), b = posterior(mu, phi_tilde);
  const double r = std::max(data.y.norm(), data.y_tilde.norm());
  std::vector<double> M = data.majorant;
  if (M.empty()) {
    M.resize(sp->size());
    for (std::size_t i = 0; i < M.size(); ++i) M[i] = c_inv * (r + data.G[i].norm());
  } else if (M.size() != sp->size()) {
    fail(ErrorCode::Domain, "majorant needs one value per point");
  }
  std::vector<std::size_t> A = data.set_A;
  if (A.empty()) {
    const auto center = moment_bound_detail(mu, 2.0).center;
    std::vector<std::size_t> supp = mu.support();
    std::stable_sort(supp.begin(), supp.end(), [&](std::size_t i, std::size_t j) {
      return sp->distance(i, center) < sp->distance(j, center);
    });
    double mass = 0.0, radius = 0.0;
    for (std::size_t i : supp) {
      if (mass >= 0.1) break;
      mass += mu[i];
      radius = sp->distance(i, center);
    }
    for (std::size_t i : mu.support())
      if (sp->distance(i, center) <= radius) A.push_back(i);
  }
  if (A.empty()) fail(ErrorCode::Precondition, "no set A with positive prior mass");
  double mass_A = 0.0, R_A = 0.0, integral = 0.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(data.y.size());
  const std::vector<double> at_zero = gaussian_negloglik(data.G, zero, data.Sigma);
  for (std::size_t i : A) {
    if (i >= sp->size()) fail(ErrorCode::Domain, "set A index outside the space");
    mass_A += mu[i];
    R_A = std::max(R_A, M[i]);
    integral += std::exp(-at_zero[i]) * mu[i];
  }
  if (!(mass_A > 0.0)) fail(ErrorCode::Precondition, "set A must carry positive prior mass");
  const double min_lb = std::exp(-r * R_A) * integral;
  double m_l2 = 0.0;
  for (std::size_t i : mu.support()) m_l2 += M[i] * M[i] * mu[i];
  m_l2 = std::sqrt(m_l2);
  const double constant = 2.0 * m2 / (min_lb * min_lb) * m_l2;
  BoundReport rep = make_report("data_corollary", w1(a.measure, b.measure), constant * dy);
  common_ingredients(rep, a, b);
  rep.ingredients["C_Sigma_inv"] = c_inv;
  rep.ingredients["data_gap"] = dy;
  rep.ingredients["r"] = r;
  rep.ingredients["R_A"] = R_A;
  rep.ingredients["mass_A"] = mass_A;
  rep.ingredients["min_Z_lower_bound"] = min_lb;
  rep.ingredients["M_L2"] = m_l2;
  rep.ingredients["P2_moment_prior"] = m2;
  rep.ingredients["C_r"] = constant;
  rep.side_checks.push_back(side("evidence_lower_bound", min_lb, rep.ingredients["min_Z"]));
  rep.side_checks.push_back(side("L2_diff_vs_M_L2_gap", lp_norm_diff(phi, phi_tilde, mu, 2), m_l2 * dy));
  return rep;
}

std::string to_string(KlDirection d) { return d == KlDirection::Forward ? "forward" : "reverse"; }
std::string to_string(BoundForm f) { return f == BoundForm::Sharp ? "sharp" : "simplified"; }
std::string to_string(TableSide s) { return s == TableSide::Likelihood ? "likelihood" : "prior"; }

}  // namespace poststab
