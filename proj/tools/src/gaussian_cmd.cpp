#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <set>

#include "output.hpp"
#include "poststab/error.hpp"
#include "poststab/gaussian.hpp"
#include "poststab/io.hpp"
#include "poststab/transport.hpp"
#include "poststab_cli/cli.hpp"
#include "poststab_cli/scenario.hpp"

namespace poststab::cli {

namespace {

constexpr double kW2Tol = 2e-3;  // discretized W2 cannot do better on a 4001-point grid

struct Row {
  std::string quantity;
  json value;  // number, bool, "inf" or null when refused
  std::optional<double> oracle;
  std::optional<bool> within_tol;
  std::string note;
};

std::string text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return cell(v.get<bool>());
  if (v.is_string()) return v.get<std::string>();
  return cell(v.get<double>());
}

struct Input {
  std::string name = "gaussian";
  std::optional<GaussianMeasure> a, b;
  std::optional<GaussianSpectralPair> spectral;
  std::vector<std::string> distances;
};

GaussianMeasure gaussian_of(const json& j, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::Validation, where + ": expected {mean, cov}");
  const json& m = field(j, "mean", where);
  const json& c = j.contains("cov") ? j.at("cov") : field(j, "var", where);
  try {
    if (m.is_number()) {
      if (!c.is_number()) fail(ErrorCode::Validation, "a scalar mean needs a scalar variance");
      return GaussianMeasure::scalar(m.get<double>(), c.get<double>());
    }
    const auto mv = number_list(m, where + ".mean");
    const auto n = static_cast<Eigen::Index>(mv.size());
    Eigen::MatrixXd cov(n, n);
    if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != n)
      fail(ErrorCode::Validation, "cov must be a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto row = number_list(c[static_cast<std::size_t>(r)], where + ".cov");
      if (static_cast<Eigen::Index>(row.size()) != n) fail(ErrorCode::Validation, "cov rows must have length " + std::to_string(n));
      for (Eigen::Index k = 0; k < n; ++k) cov(r, k) = row[static_cast<std::size_t>(k)];
    }
    return GaussianMeasure(Eigen::Map<const Eigen::VectorXd>(mv.data(), n), cov);
  } catch (const Error& e) {
    throw Error(ErrorCode::Validation, where + ": " + e.what());
  }
}

Input read_input(const GaussianArgs& args, const Flags& flags) {
  Input in;
  in.distances = args.distances;
  if (!flags.scenario.empty()) {
    const json j = read_json_file(flags.scenario);
    try {
      if (!j.is_object()) fail(ErrorCode::Validation, "expected a JSON object");
      in.name = j.value("name", std::filesystem::path(flags.scenario).stem().string());
      const json& g = j.contains("gaussian") ? j.at("gaussian") : j;
      if (g.contains("spectral")) {
        in.spectral = spectral_pair_from_json(g.at("spectral"));
      } else {
        in.a = gaussian_of(field(g, "a", "gaussian"), "gaussian.a");
        in.b = gaussian_of(field(g, "b", "gaussian"), "gaussian.b");
      }
      if (in.distances.empty() && g.contains("distances")) {
        if (!g.at("distances").is_array()) fail(ErrorCode::Validation, "distances: expected a list of names");
        for (const auto& d : g.at("distances")) {
          if (!d.is_string()) fail(ErrorCode::Validation, "distances: expected a list of names");
          in.distances.push_back(d.get<std::string>());
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), flags.scenario + ": " + e.what());
    }
  } else {
    if (!args.mean_a || !args.var_a || !args.mean_b || !args.var_b)
      fail(ErrorCode::Validation, "give --scenario or all of --mean-a --var-a --mean-b --var-b");
    try {
      in.a = GaussianMeasure::scalar(*args.mean_a, *args.var_a);
      in.b = GaussianMeasure::scalar(*args.mean_b, *args.var_b);
    } catch (const Error& e) {
      throw Error(ErrorCode::Validation, std::string("command line Gaussians: ") + e.what());
    }
  }
  static const std::set<std::string> known{"hellinger", "kl", "tv", "w2"};
  if (in.distances.empty()) in.distances = {"hellinger", "kl", "tv", "w2"};
  for (const auto& d : in.distances)
    if (!known.count(d)) fail(ErrorCode::Validation, "unknown distance '" + d + "' (hellinger, kl, tv, w2)");
  return in;
}

bool same(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() && (x - y).cwiseAbs().maxCoeff() <= 0.0;
}

Row compare(const std::string& q, double value, double oracle, double tol, const std::string& note = {}) {
  return {q, value, oracle, std::abs(value - oracle) <= tol, note};
}

Row plain(const std::string& q, double value, const std::string& note = {}) { return {q, value, {}, {}, note}; }

double discretized_w2(double m1, double s1, double m2, double s2) {
  const double lo = std::min(m1 - 10.0 * s1, m2 - 10.0 * s2);
  const double hi = std::max(m1 + 10.0 * s1, m2 + 10.0 * s2);
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) grid.push_back(lo + (hi - lo) * i / 4000.0);
  auto s = FiniteMetricSpace::line(grid);
  return wasserstein_1d(DiscreteMeasure(s, discretize_normal(grid, m1, s1)),
                        DiscreteMeasure(s, discretize_normal(grid, m2, s2)), 2.0)
      .value();
}

std::vector<Row> finite_rows(const Input& in, const Flags& flags) {
  const auto& a = *in.a;
  const auto& b = *in.b;
  const bool scalar = a.dim() == 1 && b.dim() == 1;
  const bool oracle = flags.oracle && scalar;
  const double m1 = a.mean()(0), m2 = b.mean()(0);
  const double s1 = std::sqrt(a.cov()(0, 0)), s2 = std::sqrt(b.cov()(0, 0));
  std::vector<Row> rows;
  for (const auto& d : in.distances) {
    if (d == "hellinger") {
      std::optional<double> h;
      std::string note;
      if (same(a.cov(), b.cov())) {
        h = hellinger_gauss_mean_shift(a, b);
        note = "mean-shift form";
      } else if (same(a.mean(), b.mean())) {
        h = hellinger_gauss_cov(a, b);
        note = "covariance form";
      }
      if (!h) {
        rows.push_back({"d_H", nullptr, {}, {}, "no closed form: means and covariances both differ"});
        if (oracle) rows.back().oracle = quadrature_hellinger_1d(m1, s1, m2, s2);
      } else if (oracle) {
        rows.push_back(compare("d_H", *h, quadrature_hellinger_1d(m1, s1, m2, s2), flags.tol, note));
      } else {
        rows.push_back(plain("d_H", *h, note));
      }
    } else if (d == "kl") {
      const double kab = kl_gauss(a, b), kba = kl_gauss(b, a);
      if (oracle) {
        rows.push_back(compare("d_KL(a||b)", kab, quadrature_kl_1d(m1, s1, m2, s2), flags.tol));
        rows.push_back(compare("d_KL(b||a)", kba, quadrature_kl_1d(m2, s2, m1, s1), flags.tol));
      } else {
        rows.push_back(plain("d_KL(a||b)", kab));
        rows.push_back(plain("d_KL(b||a)", kba));
      }
    } else if (d == "tv") {
      const auto tv = tv_gauss_upper(a, b);
      Row r = plain("d_TV upper", tv.clamped, tv.vacuous ? "vacuous (raw " + format_number(tv.raw) + ")" : "");
      if (oracle) {
        const double q = quadrature_tv_1d(m1, s1, m2, s2);
        r.oracle = q;
        r.within_tol = q <= tv.clamped + flags.tol;
        r.note += r.note.empty() ? "oracle is the true d_TV" : "; oracle is the true d_TV";
      }
      rows.push_back(r);
    } else if (d == "w2") {
      const double w = w2_gauss(a, b);
      if (oracle) rows.push_back(compare("W2", w, discretized_w2(m1, s1, m2, s2), std::max(flags.tol, kW2Tol),
                                         "oracle: 4001-point discretization"));
      else rows.push_back(plain("W2", w));
    }
  }
  return rows;
}

std::vector<Row> spectral_rows(const Input& in, bool& refused) {
  const auto& p = *in.spectral;
  const auto eq = gaussian_equivalence_check(p);
  std::vector<Row> rows;
  rows.push_back(plain("sum dm_k^2/c_k", eq.mean_sum, "series " + to_string(eq.mean_verdict)));
  rows.push_back(plain("sum (t_k-1)^2", eq.cov_sum, "series " + to_string(eq.cov_verdict)));
  rows.push_back({"equivalent", eq.equivalent(), {}, {}, eq.singular() ? "singular" : ""});
  bool mean_zero = std::all_of(p.dm.begin(), p.dm.end(), [](double x) { return x == 0.0; });
  bool cov_unit = p.tail == TailModel::Unit && std::all_of(p.t.begin(), p.t.end(), [](double x) { return x == 1.0; });
  for (const auto& d : in.distances) {
    try {
      if (d == "hellinger") {
        if (!mean_zero || cov_unit) rows.push_back(plain("d_H", hellinger_gauss_mean_shift(p), "mean-shift form"));
        else rows.push_back(plain("d_H", hellinger_gauss_cov(p), "covariance form"));
      } else if (d == "kl") {
        if (eq.singular()) rows.push_back({"d_KL", "inf", {}, {}, "measures are singular"});
        else rows.push_back(plain("d_KL", kl_gauss(p)));
      } else if (d == "tv") {
        const auto tv = tv_gauss_upper(p);
        rows.push_back(plain("d_TV upper", tv.clamped, tv.vacuous ? "vacuous" : ""));
      } else if (d == "w2") {
        rows.push_back(plain("W2", w2_gauss(p)));
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Domain || e.code() == ErrorCode::NonFinite) throw;
      refused = true;
      rows.push_back({d == "hellinger" ? "d_H" : d, nullptr, {}, {}, e.what()});
    }
  }
  return rows;
}

}  // namespace

int cmd_gaussian(const GaussianArgs& args, const Flags& flags, std::ostream& out, std::ostream& err) {
  try {
    const Input in = read_input(args, flags);
    bool refused = false;
    const auto rows = in.spectral ? spectral_rows(in, refused) : finite_rows(in, flags);

    bool pass = !refused;
    CsvTable t;
    t.header_comments = {"gaussian: " + in.name,
                         "d_H Hellinger, d_KL Kullback-Leibler, d_TV total variation, W2 2-Wasserstein",
                         "oracle: 1-D quadrature (or discretized transport for W2); within_tol uses --tol " +
                             format_number(flags.tol)};
    t.columns = {"quantity", "value", "oracle", "abs_diff", "within_tol", "note"};
    json jrows = json::array();
    for (const auto& r : rows) {
      if (r.within_tol == false) pass = false;
      std::string diff;
      if (r.oracle && r.value.is_number()) diff = cell(std::abs(r.value.get<double>() - *r.oracle));
      t.rows.push_back({r.quantity, text(r.value), r.oracle ? cell(*r.oracle) : "", diff,
                        r.within_tol ? cell(*r.within_tol) : "", r.note});
      json jr{{"quantity", r.quantity}, {"value", r.value.is_number() ? number_json(r.value.get<double>()) : r.value},
              {"note", r.note}};
      if (r.oracle) jr["oracle"] = number_json(*r.oracle);
      if (r.within_tol) jr["within_tol"] = *r.within_tol;
      jrows.push_back(std::move(jr));
    }
    const json summary{{"gaussian", in.name}, {"pass", pass}, {"rows", jrows}};
    if (flags.out_given)
      write_outputs(flags.out, select_outputs(flags.format, {in.name + "_gaussian.csv", t.render()},
                                              {in.name + "_gaussian.json", summary.dump(2) + "\n"}));
    out << summary.dump(2) << '\n';
    return pass ? kOk : kViolation;
  } catch (const Error& e) {
    err << "poststab gaussian: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace poststab::cli
