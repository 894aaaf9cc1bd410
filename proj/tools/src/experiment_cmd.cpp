#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <random>

#include "output.hpp"
#include "poststab/error.hpp"
#include "poststab/experiments.hpp"
#include "poststab/io.hpp"
#include "poststab/measure.hpp"
#include "poststab/parallel.hpp"
#include "poststab_cli/cli.hpp"
#include "poststab_cli/scenario.hpp"

namespace poststab::cli {

namespace {

struct Result {
  CsvTable table;
  json params = json::object();
  std::map<std::string, bool> checks;
};

// Portable across standard libraries, unlike the <random> distributions.
double unit(std::mt19937_64& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

std::mt19937_64 task_rng(std::uint64_t seed, std::size_t task) {
  return std::mt19937_64(seed + 0x9E3779B97F4A7C15ull * (task + 1));
}

DiscreteMeasure random_measure(std::mt19937_64& rng, const SpacePtr& space) {
  std::vector<double> w(space->size());
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log(unit(rng)));
  for (auto& x : w) x /= total;
  return DiscreteMeasure(space, std::move(w));
}

std::string kind_name(DivergenceKind k) {
  switch (k) {
    case DivergenceKind::TV: return "d_TV";
    case DivergenceKind::Hellinger: return "d_H";
    case DivergenceKind::KL: return "d_KL";
    case DivergenceKind::Wasserstein: return "W1";
  }
  return "";
}

DivergenceKind kind_of(const json& p, const std::string& where) {
  const std::string d = p.value("distance", "tv");
  if (d == "tv") return DivergenceKind::TV;
  if (d == "hellinger") return DivergenceKind::Hellinger;
  if (d == "kl") return DivergenceKind::KL;
  if (d == "w1") return DivergenceKind::Wasserstein;
  fail(ErrorCode::Validation, where + ".distance: expected tv, hellinger, kl or w1");
}

std::size_t count_field(const json& p, const std::string& key, const std::string& where, std::size_t fallback) {
  if (!p.contains(key)) return fallback;
  const std::size_t v = index_field(p, key, where);
  if (v == 0) fail(ErrorCode::Validation, where + "." + key + ": must be positive");
  return v;
}

std::vector<double> grid_of(const json& j, const std::string& where) {
  if (j.is_object()) {
    const double lo = number_field(j, "min", where), hi = number_field(j, "max", where);
    const std::size_t n = index_field(j, "n", where);
    if (n < 2 || !(hi > lo)) fail(ErrorCode::Validation, where + ": need n >= 2 and max > min");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
  }
  return number_list(j, where);
}

bool nondecreasing(const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); }

Result run_sensitivity(const Scenario& sc, const json& p, const std::string& where) {
  const auto& mu = sc.prior(field(p, "prior", where), where + ".prior");
  const auto& mu_t = sc.prior(field(p, "prior_tilde", where), where + ".prior_tilde");
  const auto& phi = sc.likelihood(field(p, "phi", where), where + ".phi");
  const DivergenceKind kind = kind_of(p, where);
  std::vector<double> ks;
  if (p.contains("k_values")) {
    ks = number_list(p.at("k_values"), where + ".k_values");
  } else {
    const std::size_t kmax = count_field(p, "k_max", where, 20);
    for (std::size_t k = 1; k <= kmax; ++k) ks.push_back(static_cast<double>(k));
  }
  if (ks.empty()) fail(ErrorCode::Validation, where + ": no tempering levels");
  for (double k : ks)
    if (!(k > 0.0) || !std::isfinite(k)) fail(ErrorCode::Validation, where + ".k_values: must be positive");
  std::optional<double> min_growth;
  if (p.contains("min_growth")) min_growth = number_field(p, "min_growth", where);

  const auto tr = sensitivity_sweep(mu, mu_t, phi, ks, kind);
  Result r;
  const std::string d = kind_name(kind);
  r.params = {{"distance", d}, {"k_values", ks}};
  r.table.header_comments = {
      "k: tempering level (likelihood k*Phi); Z, Z_tilde: evidences at level k",
      "prior_distance, posterior_distance: " + d + " between the priors and between the tempered posteriors",
      "ratio = posterior_distance / prior_distance; bound_constant = theorem rhs / prior_distance"};
  r.table.columns = {"k", "Z", "Z_tilde", "prior_distance", "posterior_distance", "ratio", "bound_constant",
                     "within_bound"};
  for (std::size_t i = 0; i < ks.size(); ++i)
    r.table.rows.push_back({cell(tr.k_values[i]), cell(tr.Z[i]), cell(tr.Z_tilde[i]), cell(tr.prior_distance[i]),
                            cell(tr.posterior_distance[i]), cell(tr.ratio[i]), cell(tr.bound_constant[i]),
                            cell(static_cast<bool>(tr.within_bound[i]))});
  r.checks["within_bound"] = tr.all_within_bound();
  r.checks["evidence_nonincreasing"] = tr.evidence_nonincreasing();
  r.checks["bound_constant_nondecreasing"] = nondecreasing(tr.bound_constant);
  if (min_growth) {
    const double first = tr.ratio.front(), last = tr.ratio.back();
    const double growth = first > 0.0 ? last / first : 0.0;
    r.params["min_growth"] = *min_growth;
    r.params["observed_growth"] = number_json(growth);
    r.checks["ratio_growth"] = growth >= *min_growth;
  }
  return r;
}

Result run_huber(const Scenario& sc, const json& p, const std::string& where, std::uint64_t seed) {
  const auto& mu = sc.prior(field(p, "prior", where), where + ".prior");
  const auto& phi = sc.likelihood(field(p, "phi", where), where + ".phi");
  const auto A = index_list(field(p, "A", where), where + ".A");
  std::vector<double> eps;
  const json& e = field(p, "eps", where);
  eps = e.is_array() ? number_list(e, where + ".eps") : std::vector<double>{number_field(p, "eps", where)};
  for (double x : eps)
    if (!(x > 0.0 && x < 1.0)) fail(ErrorCode::Validation, where + ".eps: " + format_number(x) + " is outside (0,1)");
  for (std::size_t i : A)
    if (i >= mu.size()) fail(ErrorCode::Validation, where + ".A: index " + std::to_string(i) + " outside the space");
  const std::size_t n_cont = count_field(p, "contaminants", where, 1000);

  const double Z = posterior(mu, phi).evidence;
  Result r;
  r.params = {{"A", A}, {"eps", eps}, {"contaminants", n_cont}};
  r.table.header_comments = {
      "posterior probability of A under (1-eps) mu + eps nu; inf, sup: exact range over all nu",
      "observed_min, observed_max: over random nu and every Dirac; tv_range: lower bound on worst posterior d_TV",
      "tv_upper = 2 eps / Z"};
  r.table.columns = {"eps", "inf", "posterior_probability", "sup", "observed_min", "observed_max", "bracketed",
                     "extremes_attained", "tv_range", "tv_upper", "tv_range_below_upper"};
  bool bracketed = true, attained = true, below = true;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const double x = eps[k];
    const auto h = huber_range(mu, phi, A, x);
    std::vector<double> probs(n_cont);
    parallel_for(n_cont, [&](std::size_t t) {
      auto rng = task_rng(seed + k, t);
      probs[t] = contaminated_posterior_probability(mu, random_measure(rng, mu.space_ptr()), phi, A, x);
    });
    double dmin = 2.0, dmax = -1.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double v = contaminated_posterior_probability(mu, DiscreteMeasure::dirac(mu.space_ptr(), i), phi, A, x);
      dmin = std::min(dmin, v);
      dmax = std::max(dmax, v);
    }
    const double omin = std::min(dmin, *std::min_element(probs.begin(), probs.end()));
    const double omax = std::max(dmax, *std::max_element(probs.begin(), probs.end()));
    const bool br = omin >= h.inf - 1e-12 && omax <= h.sup + 1e-12;
    const bool at = std::abs(dmin - h.inf) <= 1e-9 && std::abs(dmax - h.sup) <= 1e-9;
    const double tv = tv_range_lower_bound(mu, phi, x, seed).value;
    const double upper = 2.0 * x / Z;
    bracketed = bracketed && br;
    attained = attained && at;
    below = below && tv <= upper;
    r.table.rows.push_back({cell(x), cell(h.inf), cell(h.posterior_probability), cell(h.sup), cell(omin), cell(omax),
                            cell(br), cell(at), cell(tv), cell(upper), cell(tv <= upper)});
  }
  r.checks["bracketed"] = bracketed;
  r.checks["extremes_attained"] = attained;
  r.checks["tv_range_below_upper"] = below;
  return r;
}

Result run_brittleness(const Scenario& sc, const json& p, const std::string& where) {
  const DiscreteMeasure mu =
      p.contains("prior") ? sc.prior(p.at("prior"), where + ".prior") : DiscreteMeasure::uniform(sc.space);
  if (!sc.space->is_scalar_line()) fail(ErrorCode::Validation, where + ": the scenario space must be a 1-D line");
  std::vector<double> x(sc.space->size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = sc.space->coordinate(i);
  const auto y = grid_of(field(p, "y_grid", where), where + ".y_grid");
  const double sigma = number_field(p, "sigma", where);
  const double y_center = number_field(p, "y_center", where, 0.0);
  const double delta0 = number_field(p, "delta0", where);
  const std::size_t halvings = p.contains("halvings") ? index_field(p, "halvings", where) : 6;
  BrittlenessOptions opts;
  opts.eps = number_field(p, "eps", where, opts.eps);
  if (!(opts.eps >= 0.0)) fail(ErrorCode::Validation, where + ".eps: must be nonnegative");
  if (!(delta0 > 0.0)) fail(ErrorCode::Validation, where + ".delta0: must be positive");
  std::vector<std::size_t> target;
  const json& t = field(p, "target", where);
  if (t.is_object()) {
    const double xmin = number_field(t, "x_min", where + ".target");
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] >= xmin) target.push_back(i);
  } else {
    target = index_list(t, where + ".target");
  }
  if (target.empty()) fail(ErrorCode::Validation, where + ".target: selects no parameter point");
  std::vector<double> deltas;
  for (std::size_t k = 0; k <= halvings; ++k) deltas.push_back(std::ldexp(delta0, -static_cast<int>(k)));

  const auto model = gaussian_likelihood_model(x, y, sigma);
  const auto rep = brittleness_demo(model, mu, y_center, deltas, target, opts);
  Result r;
  r.params = {{"nx", x.size()}, {"ny", y.size()}, {"sigma", sigma}, {"y_center", y_center}, {"deltas", deltas},
              {"eps", opts.eps}, {"target_points", target.size()}};
  r.table.header_comments = {
      "delta: radius of the observed data ball B around y_center; cells, ball_measure: data cells in B and their total width",
      "d_L: sup over x of the L1 gap of L(x,.); d_hat_L: sup over y of the L1(mu) gap of L(.,y)",
      "Z_L, Z_L_tilde: evidences of B; d_TV: posterior total variation; stability_rhs = d_hat_L / Z_L",
      "fubini_rhs: ball-averaged version of stability_rhs"};
  r.table.columns = {"delta", "cells", "ball_measure", "d_L", "d_hat_L", "Z_L", "Z_L_tilde", "d_TV", "stability_rhs",
                     "fubini_rhs", "holds"};
  for (const auto& row : rep.rows)
    r.table.rows.push_back({cell(row.delta), cell(row.cells_in_ball), cell(row.ball_measure), cell(row.d_L),
                            cell(row.d_hat_L), cell(row.Z_L), cell(row.Z_L_tilde), cell(row.d_TV),
                            cell(row.stability_rhs), cell(row.fubini_rhs), cell(row.holds)});
  r.checks["d_L_within_eps"] = rep.d_L_within_eps;
  r.checks["d_TV_increasing"] = rep.d_TV_increasing;
  r.checks["inequality_holds"] = rep.inequality_holds;
  return r;
}

Result run_continuity(const Scenario& sc, const json& p, const std::string& where) {
  const auto& mu = sc.prior(field(p, "prior", where), where + ".prior");
  const auto& nu = sc.prior(field(p, "nu", where), where + ".nu");
  const auto& phi = sc.likelihood(field(p, "phi", where), where + ".phi");
  const std::size_t steps = count_field(p, "steps", where, 24);
  const auto qs = p.contains("q") ? number_list(p.at("q"), where + ".q") : std::vector<double>{1.0};
  for (double q : qs)
    if (!(q >= 1.0) || !std::isfinite(q)) fail(ErrorCode::Validation, where + ".q: orders must be >= 1");

  const auto seq = geometric_contamination(mu, nu, steps);
  Result r;
  r.params = {{"steps", steps}, {"q", qs}};
  r.table.header_comments = {
      "step k: prior (1 - 2^-k) mu + 2^-k nu",
      "prior_distance: W_q to mu; posterior_distance: W_q between the posteriors"};
  r.table.columns = {"q", "step", "prior_distance", "posterior_distance"};
  for (double q : qs) {
    const auto tr = wasserstein_continuity_sweep(mu, seq, phi, q);
    for (std::size_t k = 0; k < tr.prior_distance.size(); ++k)
      r.table.rows.push_back({cell(q), cell(k + 1), cell(tr.prior_distance[k]), cell(tr.posterior_distance[k])});
    r.checks["confirmed_q" + format_number(q)] = tr.confirmed();
  }
  return r;
}

double residual(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const LogLikelihood& phi,
                const DiscreteMeasure& base, const SignedDiscreteMeasure& d, double h) {
  const auto ph = posterior(contaminate(mu, nu, h), phi).measure;
  double s = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) s += std::abs(ph[i] - base[i] - h * d[i]);
  return s;
}

Result run_derivative(const Scenario& sc, const json& p, const std::string& where, std::uint64_t seed) {
  const auto& mu = sc.prior(field(p, "prior", where), where + ".prior");
  const auto& phi = sc.likelihood(field(p, "phi", where), where + ".phi");
  const std::size_t n_dir = count_field(p, "directions", where, 100);
  const auto hs = p.contains("h") ? number_list(p.at("h"), where + ".h") : std::vector<double>{1e-2, 1e-3};
  if (hs.size() < 2) fail(ErrorCode::Validation, where + ".h: need at least two step sizes");
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (!(hs[i] > 0.0 && hs[i] < 1.0) || (i > 0 && !(hs[i] < hs[i - 1])))
      fail(ErrorCode::Validation, where + ".h: step sizes must decrease within (0,1)");
  const double factor = number_field(p, "richardson_factor", where, 1.05);
  if (!(factor >= 1.0)) fail(ErrorCode::Validation, where + ".richardson_factor: must be >= 1");

  const auto base = posterior(mu, phi).measure;
  const auto nb = derivative_norm_bounds(mu, phi);
  struct Dir {
    std::vector<double> res;
    double norm = 0.0, rho_norm = 0.0;
  };
  std::vector<Dir> dirs(n_dir);
  parallel_for(n_dir, [&](std::size_t t) {
    auto rng = task_rng(seed, t);
    const auto nu = random_measure(rng, mu.space_ptr());
    const auto rho = perturbation_direction(nu, mu);
    const auto d = frechet_derivative(mu, phi, rho);
    dirs[t].norm = d.variation_norm();
    dirs[t].rho_norm = rho.variation_norm();
    for (double h : hs) dirs[t].res.push_back(residual(mu, nu, phi, base, d, h));
  });

  Result r;
  r.params = {{"directions", n_dir}, {"h", hs}, {"richardson_factor", factor}};
  r.table.header_comments = {
      "direction rho = nu - mu for a random nu; residual_h = |T(mu + h rho) - T(mu) - h dT(rho)|_TV (full variation)",
      "richardson: residual at each h <= factor (h / previous h)^2 residual at the previous h",
      "norm_ratio = |dT(rho)| / |rho|, checked against the operator-norm upper bound"};
  r.table.columns = {"direction", "derivative_norm", "norm_ratio"};
  for (double h : hs) r.table.columns.push_back("residual_h=" + format_number(h));
  r.table.columns.push_back("richardson");
  bool rich = true, norm_ok = true;
  for (std::size_t t = 0; t < n_dir; ++t) {
    const auto& d = dirs[t];
    bool ok = true;
    for (std::size_t i = 1; i < hs.size(); ++i) {
      const double q = hs[i] / hs[i - 1];
      ok = ok && d.res[i] <= factor * q * q * d.res[i - 1];
    }
    const double ratio = d.rho_norm > 0.0 ? d.norm / d.rho_norm : 0.0;
    norm_ok = norm_ok && ratio <= nb.upper * (1.0 + 1e-12);
    rich = rich && ok;
    std::vector<std::string> row{cell(t), cell(d.norm), cell(ratio)};
    for (double v : d.res) row.push_back(cell(v));
    row.push_back(cell(ok));
    r.table.rows.push_back(std::move(row));
  }
  r.params["norm_upper"] = number_json(nb.upper);
  r.params["norm_lower"] = number_json(nb.lower);
  r.checks["richardson"] = rich;
  r.checks["norm_within_upper"] = norm_ok;
  return r;
}

}  // namespace

int cmd_experiment(const std::string& name, const Flags& flags, std::ostream& out, std::ostream& err) {
  try {
    static const std::vector<std::string> known{"sensitivity", "huber", "brittleness", "continuity", "derivative"};
    if (std::find(known.begin(), known.end(), name) == known.end())
      fail(ErrorCode::Validation, "unknown experiment '" + name + "'");
    const Scenario sc = load_scenario(flags.scenario);
    const std::uint64_t seed = effective_seed(flags, sc);
    const std::string where = "experiments." + name;
    if (!sc.experiments.contains(name))
      fail(ErrorCode::Validation, flags.scenario + ": no " + where + " section");
    const json& p = sc.experiments.at(name);
    if (!p.is_object()) fail(ErrorCode::Validation, where + ": expected an object");

    Result r;
    try {
      if (name == "sensitivity") r = run_sensitivity(sc, p, where);
      else if (name == "huber") r = run_huber(sc, p, where, seed);
      else if (name == "brittleness") r = run_brittleness(sc, p, where);
      else if (name == "continuity") r = run_continuity(sc, p, where);
      else r = run_derivative(sc, p, where, seed);
    } catch (const Error& e) {
      throw Error(e.code(), flags.scenario + ": " + e.what());
    }

    bool pass = true;
    json checks = json::object();
    for (const auto& [k, v] : r.checks) {
      checks[k] = v;
      pass = pass && v;
    }
    r.table.header_comments.insert(r.table.header_comments.begin(),
                                   {"experiment: " + name, "scenario: " + sc.name, "seed: " + std::to_string(seed)});

    const json summary{{"experiment", name}, {"scenario", sc.name}, {"seed", seed},
                       {"params", r.params}, {"checks", checks}, {"pass", pass}};
    const std::string stem = sc.name + "_" + name;
    write_outputs(flags.out, select_outputs(flags.format,
                                            {output_name(sc, name + "_csv", stem + ".csv"), r.table.render()},
                                            {output_name(sc, name + "_json", stem + ".json"), summary.dump(2) + "\n"}));
    for (const auto& [k, v] : r.checks) out << (v ? "ok    " : "FAIL  ") << name << " " << k << '\n';
    out << name << ": " << (pass ? "pass" : "fail") << '\n';
    return pass ? kOk : kViolation;
  } catch (const Error& e) {
    err << "poststab experiment: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace poststab::cli
