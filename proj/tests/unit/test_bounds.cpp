#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "instances.hpp"
#include "two_point_oracle.hpp"
#include "poststab/bounds.hpp"
#include "poststab/error.hpp"
#include "poststab/transport.hpp"

using namespace poststab;

namespace {

const double ln2 = std::log(2.0);

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a poststab::Error");
  return ErrorCode::Domain;
}

}  // namespace

TEST_CASE("lp norms and evidence lower bound") {
  auto t = fx::two_point();
  CHECK(lp_norm_diff(t.phi, t.phi, t.mu, 1) == 0.0);
  CHECK(lp_norm_diff(t.zero, t.phi, t.mu, 1) == doctest::Approx(0.5 * ln2).epsilon(1e-15));
  CHECK(lp_norm_diff(t.zero, t.phi, t.mu, 2) == doctest::Approx(ln2 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(code_of([&] { lp_norm_diff(t.zero, t.phi, t.mu, 3); }) == ErrorCode::Domain);

  CHECK(evidence_lower_bound(t.zero, t.zero, t.mu) == 1.0);
  CHECK(evidence_lower_bound(t.zero, t.phi, t.mu) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(evidence_lower_bound(t.phi, t.zero, t.mu) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(evidence_lower_bound(t.zero, t.phi, t.mu) <= 0.75);
  LogLikelihood c(t.space, {0.7, 0.7});
  CHECK(evidence_lower_bound(c, c, t.mu) == doctest::Approx(posterior(t.mu, c).evidence).epsilon(1e-15));
}

TEST_CASE("likelihood-side bounds on the two-point fixture") {
  auto t = fx::two_point();
  auto h = hellinger_phi_bound(t.mu, t.zero, t.phi);
  CHECK(h.lhs.value() == doctest::Approx(oracle::hellinger_phi_lhs).epsilon(1e-12));
  CHECK(h.rhs == doctest::Approx(ln2 / std::sqrt(2.0) / 0.75).epsilon(1e-13));
  CHECK(h.all_hold());
  CHECK(h.theorem_id == "hellinger_phi");

  auto tv = tv_phi_bound(t.mu, t.zero, t.phi);
  CHECK(tv.lhs.value() == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(tv.rhs == doctest::Approx(0.5 * ln2).epsilon(1e-13));
  CHECK(tv.all_hold());

  auto kf = kl_phi_bound(t.mu, t.zero, t.phi, KlDirection::Forward);
  CHECK(kf.lhs.value() == doctest::Approx(oracle::kl_phi_forward_lhs).epsilon(1e-12));
  CHECK(kf.rhs == doctest::Approx(2 * 0.5 * ln2 / 0.75).epsilon(1e-13));
  CHECK(kf.all_hold());
  auto kr = kl_phi_bound(t.mu, t.zero, t.phi, KlDirection::Reverse);
  CHECK(kr.lhs.value() == doctest::Approx(oracle::kl_phi_reverse_lhs).epsilon(1e-12));
  CHECK(kr.theorem_id == "kl_phi_reverse");

  // mu_Phi = (1/2, 1/2) has first moment 1/2 about either support point
  auto ws = w1_phi_bound(t.mu, t.zero, t.phi, BoundForm::Sharp);
  CHECK(ws.lhs.value() == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(ws.rhs == doctest::Approx((0.5 * 0.5 * ln2 + std::sqrt(0.5) * ln2 / std::sqrt(2.0)) / 0.75).epsilon(1e-13));
  CHECK(ws.rhs == doctest::Approx(ln2).epsilon(1e-13));
  CHECK(ws.all_hold());
  auto wsim = w1_phi_bound(t.mu, t.zero, t.phi, BoundForm::Simplified);
  CHECK(wsim.rhs == doctest::Approx(2 * std::sqrt(0.5) / (0.75 * 0.75) * ln2 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(ws.rhs <= wsim.rhs);
}

TEST_CASE("likelihood-side bounds with identical likelihoods") {
  auto t = fx::two_point();
  for (auto r : {hellinger_phi_bound(t.mu, t.phi, t.phi), tv_phi_bound(t.mu, t.phi, t.phi),
                 kl_phi_bound(t.mu, t.phi, t.phi, KlDirection::Forward),
                 kl_phi_bound(t.mu, t.phi, t.phi, KlDirection::Reverse),
                 w1_phi_bound(t.mu, t.phi, t.phi, BoundForm::Sharp)}) {
    CHECK(r.lhs.value() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(r.rhs == 0.0);
    CHECK(r.holds);
  }
}

TEST_CASE("negative perturbed likelihood scales the constant") {
  auto t = fx::two_point();
  LogLikelihood dip(t.space, {-0.5, 0.2});
  auto a = hellinger_phi_bound(t.mu, t.zero, dip);
  CHECK(a.ingredients.at("neg_part_essinf_phi_tilde") == -0.5);
  const double l2 = std::sqrt(0.5 * 0.25 + 0.5 * 0.04);
  const double zt = 0.5 * (std::exp(0.5) + std::exp(-0.2));
  CHECK(a.rhs == doctest::Approx(std::exp(0.5) * l2 / std::min(1.0, zt)).epsilon(1e-13));
  CHECK(a.all_hold());
}

TEST_CASE("prior-side bounds on the two-point fixture") {
  auto t = fx::two_point(true);
  auto h = hellinger_prior_bound(t.mu, t.mu_tilde, t.phi);
  CHECK(h.lhs.value() == doctest::Approx(oracle::hellinger_prior_lhs).epsilon(1e-12));
  CHECK(h.rhs == doctest::Approx(2.0 / 0.65 * oracle::hellinger_priors).epsilon(1e-12));
  CHECK(h.ingredients.at("d_H_prior") == doctest::Approx(oracle::hellinger_priors).epsilon(1e-12));
  CHECK(h.all_hold());

  auto tv = tv_prior_bound(t.mu, t.mu_tilde, t.phi);
  CHECK(tv.lhs.value() == doctest::Approx(8.0 / 39.0).epsilon(1e-13));
  CHECK(tv.rhs == doctest::Approx(2.0 / 0.75 * 0.2).epsilon(1e-13));
  CHECK(tv.all_hold());

  auto kl = kl_prior_bound(t.mu, t.mu_tilde, t.phi);
  CHECK(kl.lhs.value() == doctest::Approx(oracle::kl_prior_lhs).epsilon(1e-12));
  CHECK(kl.rhs == doctest::Approx((oracle::kl_priors_forward + oracle::kl_priors_reverse) / 0.65).epsilon(1e-12));
  CHECK(kl.all_hold());

  auto ws = w1_prior_bound(t.mu, t.mu_tilde, t.phi, BoundForm::Sharp);
  CHECK(ws.lhs.value() == doctest::Approx(8.0 / 39.0).epsilon(1e-13));
  CHECK(ws.rhs == doctest::Approx(1.5 / 0.65 * (1 + 0.5 * 0.5 / 0.75) * 0.2).epsilon(1e-13));
  CHECK(ws.ingredients.at("Lip_exp_neg_phi") == doctest::Approx(0.5));
  CHECK(ws.all_hold());
  // |Z - Z~| = Lip W1 exactly here
  bool found = false;
  for (const auto& s : ws.side_checks) {
    if (s.name != "evidence_gap_vs_Lip_W1") continue;
    found = true;
    CHECK(s.lhs == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(s.rhs == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(s.holds);
  }
  CHECK(found);
  auto wsim = w1_prior_bound(t.mu, t.mu_tilde, t.phi, BoundForm::Simplified);
  CHECK(wsim.rhs == doctest::Approx(2.25 / (0.65 * 0.65) * 0.2).epsilon(1e-13));
}

TEST_CASE("prior-side hypotheses") {
  auto t = fx::two_point(true);
  LogLikelihood neg(t.space, {-0.1, 0.3});
  try {
    tv_prior_bound(t.mu, t.mu_tilde, neg);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Precondition);
    CHECK(std::string(e.what()).find("nonnegative") != std::string::npos);
  }
  auto d0 = DiscreteMeasure::dirac(t.space, 0);
  CHECK(code_of([&] { kl_prior_bound(t.mu, d0, t.phi); }) == ErrorCode::EquivalenceViolation);

  auto u = fx::two_point(false);
  CHECK(code_of([&] { w1_prior_bound(u.mu, u.mu_tilde, u.phi, BoundForm::Sharp); }) == ErrorCode::Precondition);

  // likelihood side insists on ess inf zero
  LogLikelihood lifted(u.space, {0.3, 0.4});
  CHECK(code_of([&] { tv_phi_bound(u.mu, lifted, u.phi); }) == ErrorCode::Precondition);
}

TEST_CASE("lipschitz table") {
  auto s = fx::two_points();
  DiscreteMeasure mu(s, {0.5, 0.5});
  LogLikelihood flat(s, {0.0, 0.0});
  auto h0 = lipschitz_table_entry(mu, flat, 1e-9, DivergenceKind::Hellinger, TableSide::Prior);
  CHECK(h0.constant == doctest::Approx(2.0).epsilon(1e-8));

  LogLikelihood phi(s, {0.0, ln2});
  auto h = lipschitz_table_entry(mu, phi, 0.1, DivergenceKind::Hellinger, TableSide::Prior);
  CHECK(h.constant == doctest::Approx(2.0 / 0.55).epsilon(1e-13));
  CHECK(h.radius == doctest::Approx(0.375));

  CHECK(code_of([&] {
          lipschitz_table_entry(mu, phi, 0.75 * 0.75 / 2, DivergenceKind::KL, TableSide::Prior);
        }) == ErrorCode::RadiusExceeded);

  auto table = lipschitz_table(mu, phi, 0.1);
  CHECK(table.size() == 7);  // no W1 prior row without a bounded metric
  auto bounded = fx::two_point(true);
  CHECK(lipschitz_table(bounded.mu, bounded.phi, 0.1).size() == 8);

  auto hl = lipschitz_table_entry(mu, phi, 0.1, DivergenceKind::Hellinger, TableSide::Likelihood);
  CHECK(hl.constant == doctest::Approx(std::exp(0.5 * ln2 + 0.1)).epsilon(1e-13));
  CHECK(hl.p == 2);
}

TEST_CASE("table constants dominate the bounds inside the radius") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 100; ++it) {
    auto c = fx::random_prior_instance(rng, false, false);
    const double r = hellinger_distance(c.mu, c.mu_tilde).value();
    const double Z = posterior(c.mu, c.phi).evidence;
    if (r >= Z / 2) continue;
    auto e = lipschitz_table_entry(c.mu, c.phi, r, DivergenceKind::Hellinger, TableSide::Prior);
    auto post = hellinger_distance(posterior(c.mu, c.phi).measure, posterior(c.mu_tilde, c.phi).measure);
    CHECK(post.value() <= e.constant * r * (1 + 1e-10));
  }
}

TEST_CASE("data perturbation") {
  auto s = fx::two_points();
  DiscreteMeasure mu(s, {0.5, 0.5});
  DataPerturbation d;
  d.G = {Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)};
  d.y = Eigen::VectorXd::Constant(1, 0.0);
  d.y_tilde = Eigen::VectorXd::Constant(1, 0.1);
  d.Sigma = Eigen::MatrixXd::Identity(1, 1);

  // direct evaluation: Phi = (0, 0.5), Phi~ = (0.005, 0.405)
  const double p1 = 1 / (1 + std::exp(0.5)), q1 = std::exp(-0.405) / (std::exp(-0.005) + std::exp(-0.405));
  for (auto form : {DataForm::Remark, DataForm::Corollary}) {
    auto r = data_perturbation_bound(mu, d, form);
    CHECK(r.lhs.value() == doctest::Approx(std::abs(p1 - q1)).epsilon(1e-12));
    CHECK(r.all_hold());
  }
  d.y_tilde = d.y;
  for (auto form : {DataForm::Remark, DataForm::Corollary}) {
    auto r = data_perturbation_bound(mu, d, form);
    CHECK(r.lhs.value() == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(r.rhs == 0.0);
  }

  // lhs / |y - y~| stays below the corollary constant along a sweep
  for (double dy : {0.01, 0.05, 0.2, 0.5, 1.0}) {
    d.y_tilde = Eigen::VectorXd::Constant(1, dy);
    auto r = data_perturbation_bound(mu, d, DataForm::Corollary);
    CHECK(r.lhs.value() / dy <= r.ingredients.at("C_r") * (1 + 1e-10));
  }
}

TEST_CASE("randomized bound sweep") {
  std::mt19937_64 rng(99);
  for (const auto& tc : fx::theorem_cases()) {
    CAPTURE(tc.id);
    for (int it = 0; it < 100; ++it) {
      auto r = tc.run(rng);
      CHECK(r.theorem_id == tc.id);
      CHECK(r.slack >= -1e-10 * std::max(1.0, r.rhs));
      CHECK(r.all_hold());
    }
  }
}
