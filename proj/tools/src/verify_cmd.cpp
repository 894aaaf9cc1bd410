#include <ostream>
#include <sstream>

#include "output.hpp"
#include "poststab/bounds.hpp"
#include "poststab/error.hpp"
#include "poststab/io.hpp"
#include "poststab_cli/cli.hpp"
#include "poststab_cli/scenario.hpp"

namespace poststab::cli {

namespace {

struct Row {
  std::string perturbation;
  BoundReport report;
};

Eigen::VectorXd vector_of(const json& j, const std::string& where) {
  const auto v = number_list(j, where);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd matrix_of(const json& j, const std::string& where) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) fail(ErrorCode::Validation, where + ": expected a number or a square matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = number_list(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
    if (static_cast<Eigen::Index>(row.size()) != n) fail(ErrorCode::Validation, where + ": matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

DataPerturbation data_of(const json& p, const std::string& where) {
  DataPerturbation d;
  const json& G = field(p, "G", where);
  if (!G.is_array()) fail(ErrorCode::Validation, where + ".G: expected one forward value per point");
  for (std::size_t i = 0; i < G.size(); ++i) d.G.push_back(vector_of(G[i], where + ".G[" + std::to_string(i) + "]"));
  d.y = vector_of(field(p, "y", where), where + ".y");
  d.y_tilde = vector_of(field(p, "y_tilde", where), where + ".y_tilde");
  d.Sigma = matrix_of(field(p, "Sigma", where), where + ".Sigma");
  if (p.contains("p")) {
    if (!p.at("p").is_number_integer()) fail(ErrorCode::Validation, where + ".p: expected an integer");
    d.p = p.at("p").get<int>();
  }
  if (p.contains("majorant")) d.majorant = number_list(p.at("majorant"), where + ".majorant");
  if (p.contains("set_A")) d.set_A = index_list(p.at("set_A"), where + ".set_A");
  return d;
}

BoundReport run_check(const Scenario& sc, const Perturbation& pert, const std::string& id, const std::string& where) {
  const json& p = pert.payload;
  const auto& mu = sc.prior(field(p, "prior", where), where + ".prior");
  if (pert.kind == "phi") {
    const auto& phi = sc.likelihood(field(p, "phi", where), where + ".phi");
    const auto& phi_t = sc.likelihood(field(p, "phi_tilde", where), where + ".phi_tilde");
    if (id == "hellinger_phi") return hellinger_phi_bound(mu, phi, phi_t);
    if (id == "tv_phi") return tv_phi_bound(mu, phi, phi_t);
    if (id == "kl_phi_forward") return kl_phi_bound(mu, phi, phi_t, KlDirection::Forward);
    if (id == "kl_phi_reverse") return kl_phi_bound(mu, phi, phi_t, KlDirection::Reverse);
    if (id == "w1_phi_sharp") return w1_phi_bound(mu, phi, phi_t, BoundForm::Sharp);
    if (id == "w1_phi_simplified") return w1_phi_bound(mu, phi, phi_t, BoundForm::Simplified);
  } else if (pert.kind == "prior") {
    const auto& mu_t = sc.prior(field(p, "prior_tilde", where), where + ".prior_tilde");
    const auto& phi = sc.likelihood(field(p, "phi", where), where + ".phi");
    if (id == "hellinger_prior") return hellinger_prior_bound(mu, mu_t, phi);
    if (id == "tv_prior") return tv_prior_bound(mu, mu_t, phi);
    if (id == "kl_prior_forward") return kl_prior_bound(mu, mu_t, phi, KlDirection::Forward);
    if (id == "kl_prior_reverse") return kl_prior_bound(mu, mu_t, phi, KlDirection::Reverse);
    if (id == "w1_prior_sharp") return w1_prior_bound(mu, mu_t, phi, BoundForm::Sharp);
    if (id == "w1_prior_simplified") return w1_prior_bound(mu, mu_t, phi, BoundForm::Simplified);
  } else {
    const DataPerturbation d = data_of(p, where);
    if (id == "data_remark") return data_perturbation_bound(mu, d, DataForm::Remark);
    if (id == "data_corollary") return data_perturbation_bound(mu, d, DataForm::Corollary);
  }
  fail(ErrorCode::Validation, where + ": check " + id + " does not apply to a " + pert.kind + " perturbation");
}

std::vector<Row> run_all(const Scenario& sc) {
  if (sc.checks.empty()) fail(ErrorCode::Validation, "checks: no theorem ids requested");
  for (const auto& id : sc.checks) {
    const auto& kind = theorem_kinds().at(id);
    bool any = false;
    for (const auto& p : sc.perturbations) any = any || p.kind == kind;
    if (!any) fail(ErrorCode::Validation, "checks: " + id + " needs a " + kind + " perturbation, none declared");
  }
  std::vector<Row> rows;
  for (std::size_t i = 0; i < sc.perturbations.size(); ++i) {
    const auto& p = sc.perturbations[i];
    const std::string where = "perturbations[" + std::to_string(i) + "] (" + p.id + ")";
    for (const auto& id : sc.checks) {
      if (theorem_kinds().at(id) != p.kind) continue;
      try {
        rows.push_back({p.id, run_check(sc, p, id, where + ".payload")});
      } catch (const Error& e) {
        throw Error(e.code(), where + ", check " + id + ": " + e.what());
      }
    }
  }
  return rows;
}

std::string ingredient_cell(const BoundReport& r) {
  std::string s;
  for (const auto& [k, v] : r.ingredients) {
    if (k == "Z" || k == "Z_tilde") continue;
    if (!s.empty()) s += ';';
    s += k + "=" + format_number(v);
  }
  return s;
}

std::string maybe(const BoundReport& r, const std::string& key) {
  auto it = r.ingredients.find(key);
  return it == r.ingredients.end() ? "" : format_number(it->second);
}

CsvTable csv_of(const Scenario& sc, std::uint64_t seed, const std::vector<Row>& rows) {
  CsvTable t;
  t.header_comments = {
      "scenario: " + sc.name,
      "seed: " + std::to_string(seed),
      "lhs: posterior discrepancy named in column distance (TV = d_TV, H = d_H, KL = d_KL, W1); rhs: bound",
      "slack = rhs - lhs; holds: lhs <= rhs + 1e-10 max(1, rhs); side_checks_hold: every auxiliary inequality",
      "Z, Z_tilde: evidences of the reference and perturbed posterior; ingredients: key=value",
  };
  t.columns = {"perturbation", "theorem_id", "distance", "lhs", "rhs", "slack", "holds", "side_checks_hold",
               "Z", "Z_tilde", "ingredients"};
  for (const auto& row : rows) {
    const auto& r = row.report;
    bool sides = true;
    for (const auto& s : r.side_checks) sides = sides && s.holds;
    t.rows.push_back({row.perturbation, r.theorem_id, r.lhs.label(), cell(r.lhs.value_or_inf()), cell(r.rhs),
                      cell(r.slack), cell(r.holds), cell(sides), maybe(r, "Z"), maybe(r, "Z_tilde"),
                      ingredient_cell(r)});
  }
  return t;
}

}  // namespace

int cmd_verify(const Flags& flags, std::ostream& out, std::ostream& err) {
  try {
    const Scenario sc = load_scenario(flags.scenario);
    const std::uint64_t seed = effective_seed(flags, sc);
    const std::vector<Row> rows = run_all(sc);

    bool all = true;
    json reports = json::array();
    for (const auto& row : rows) {
      all = all && row.report.all_hold();
      json j = report_to_json(row.report);
      j["perturbation"] = row.perturbation;
      reports.push_back(std::move(j));
    }
    const json summary = {{"scenario", sc.name}, {"seed", seed}, {"all_hold", all}, {"reports", reports}};
    write_outputs(flags.out,
                  select_outputs(flags.format,
                                 {output_name(sc, "csv", sc.name + "_verify.csv"), csv_of(sc, seed, rows).render()},
                                 {output_name(sc, "json", sc.name + "_verify.json"), summary.dump(2) + "\n"}));

    for (const auto& row : rows) {
      const auto& r = row.report;
      out << (r.all_hold() ? "ok    " : "FAIL  ") << row.perturbation << " " << r.theorem_id
          << "  lhs=" << format_number(r.lhs.value_or_inf()) << " rhs=" << format_number(r.rhs) << '\n';
    }
    out << rows.size() << " reports, " << (all ? "all hold" : "violations found") << '\n';
    return all ? kOk : kViolation;
  } catch (const Error& e) {
    err << "poststab verify: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace poststab::cli
