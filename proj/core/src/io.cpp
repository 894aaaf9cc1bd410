#include "poststab/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) { fail(ErrorCode::Validation, where + ": " + msg); }

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of numbers");
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return v;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double number_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  bad(where, "expected a number or \"inf\"");
}

SpacePtr space_from_json(const json& j) {
  if (!j.is_object()) bad("space", "expected an object");
  std::string kind = "euclidean";
  double D = 0.0;
  if (j.contains("metric")) {
    const json& m = j.at("metric");
    if (!m.is_object() || !m.contains("kind") || !m.at("kind").is_string()) bad("space.metric", "expected {\"kind\": ...}");
    kind = m.at("kind").get<std::string>();
    if (kind == "euclidean-truncated") {
      if (!m.contains("D")) bad("space.metric.D", "truncated metric needs D");
      D = number_from_json(m.at("D"), "space.metric.D");
    }
    if (kind == "explicit") {
      if (!m.contains("matrix") || !m.at("matrix").is_array()) bad("space.metric.matrix", "explicit metric needs a matrix");
      const json& rows = m.at("matrix");
      const auto n = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd d(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto row = number_array(rows[static_cast<std::size_t>(r)], "space.metric.matrix[" + std::to_string(r) + "]");
        if (static_cast<Eigen::Index>(row.size()) != n) bad("space.metric.matrix", "matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) d(r, c) = row[static_cast<std::size_t>(c)];
      }
      return FiniteMetricSpace::explicit_matrix(std::move(d));
    }
  }
  std::vector<std::vector<double>> pts;
  if (j.contains("grid")) {
    // {"min": a, "max": b, "n": n}: n equispaced points on [a, b]
    const json& g = j.at("grid");
    if (!g.is_object() || !g.contains("min") || !g.contains("max") || !g.contains("n") || !g.at("n").is_number_integer())
      bad("space.grid", "expected {\"min\": a, \"max\": b, \"n\": count}");
    const double lo = number_from_json(g.at("min"), "space.grid.min");
    const double hi = number_from_json(g.at("max"), "space.grid.max");
    const auto n = g.at("n").get<long long>();
    if (n < 2 || !(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) bad("space.grid", "need n >= 2 and min < max");
    for (long long i = 0; i < n; ++i) pts.push_back({lo + (hi - lo) * double(i) / double(n - 1)});
  } else {
    if (!j.contains("points") || !j.at("points").is_array()) bad("space.points", "expected an array of points");
    const json& jp = j.at("points");
    for (std::size_t i = 0; i < jp.size(); ++i) {
      const std::string where = "space.points[" + std::to_string(i) + "]";
      if (jp[i].is_number()) pts.push_back({jp[i].get<double>()});
      else pts.push_back(number_array(jp[i], where));
    }
  }
  if (kind == "euclidean") return FiniteMetricSpace::euclidean(std::move(pts));
  if (kind == "euclidean-truncated") return FiniteMetricSpace::euclidean_truncated(std::move(pts), D);
  bad("space.metric.kind", "unknown metric kind \"" + kind + "\"");
}

json space_to_json(const FiniteMetricSpace& space) {
  json j;
  if (space.kind() == MetricKind::Explicit) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < space.raw_matrix().rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < space.raw_matrix().cols(); ++c) row.push_back(space.raw_matrix()(r, c));
      rows.push_back(row);
    }
    j["metric"] = {{"kind", "explicit"}, {"matrix", rows}};
    return j;
  }
  json pts = json::array();
  for (std::size_t i = 0; i < space.size(); ++i)
    pts.push_back(std::vector<double>(space.coords(i), space.coords(i) + space.dimension()));
  j["points"] = pts;
  if (space.kind() == MetricKind::Euclidean) j["metric"] = {{"kind", "euclidean"}};
  else j["metric"] = {{"kind", "euclidean-truncated"}, {"D", *space.truncation()}};
  return j;
}

DiscreteMeasure measure_from_json(const json& j, const SpacePtr& space, const std::string& where) {
  const json& w = j.is_object() ? (j.contains("weights") ? j.at("weights") : json()) : j;
  const auto v = number_array(w, where + ".weights");
  if (v.size() != space->size())
    bad(where, "weights have " + std::to_string(v.size()) + " entries, space has " + std::to_string(space->size()) + " points");
  try {
    return DiscreteMeasure(space, v);
  } catch (const Error& e) {
    bad(where, e.what());
  }
}

json measure_to_json(const DiscreteMeasure& mu) {
  json j = space_to_json(mu.space());
  j["weights"] = mu.weights();
  return j;
}

LogLikelihood likelihood_from_json(const json& j, const SpacePtr& space, const std::string& where) {
  if (!j.is_object() || !j.contains("values")) bad(where, "expected {\"values\": [...], \"shift\": r}");
  const auto v = number_array(j.at("values"), where + ".values");
  if (v.size() != space->size())
    bad(where, "values have " + std::to_string(v.size()) + " entries, space has " + std::to_string(space->size()) + " points");
  const double shift = j.contains("shift") ? number_from_json(j.at("shift"), where + ".shift") : 0.0;
  try {
    return LogLikelihood(space, v, shift);
  } catch (const Error& e) {
    bad(where, e.what());
  }
}

json likelihood_to_json(const LogLikelihood& phi) {
  json vals = json::array();
  for (double v : phi.values()) vals.push_back(number_json(v));
  return {{"values", vals}, {"shift", phi.shift()}};
}

json divergence_to_json(const DivergenceValue& d) {
  json j{{"kind", d.label()}};
  j["value"] = d.is_finite() ? json(d.value()) : json("inf");
  return j;
}

json report_to_json(const BoundReport& r) {
  json ing = json::object();
  for (const auto& [k, v] : r.ingredients) ing[k] = number_json(v);
  json sides = json::array();
  for (const auto& s : r.side_checks)
    sides.push_back({{"name", s.name}, {"lhs", number_json(s.lhs)}, {"rhs", number_json(s.rhs)},
                     {"slack", number_json(s.slack)}, {"holds", s.holds}});
  return {{"theorem_id", r.theorem_id}, {"lhs", divergence_to_json(r.lhs)}, {"rhs", number_json(r.rhs)},
          {"slack", number_json(r.slack)}, {"holds", r.holds}, {"ingredients", ing}, {"side_checks", sides}};
}

GaussianSpectralPair spectral_pair_from_json(const json& j) {
  if (!j.is_object()) bad("spectral", "expected an object");
  GaussianSpectralPair p;
  for (const char* key : {"t", "c"})
    if (!j.contains(key)) bad(std::string("spectral.") + key, "missing");
  p.t = number_array(j.at("t"), "spectral.t");
  p.c = number_array(j.at("c"), "spectral.c");
  p.dm = j.contains("dm") ? number_array(j.at("dm"), "spectral.dm") : std::vector<double>(p.t.size(), 0.0);
  if (j.contains("tail")) {
    const json& t = j.at("tail");
    if (t.is_string() && t.get<std::string>() == "unit") {
      p.tail = TailModel::Unit;
    } else if (t.is_object() && t.value("kind", "") == "power") {
      p.tail = TailModel::Power;
      p.tail_amplitude = number_from_json(t.at("amplitude"), "spectral.tail.amplitude");
      p.tail_exponent = number_from_json(t.at("exponent"), "spectral.tail.exponent");
    } else {
      bad("spectral.tail", "expected \"unit\" or {\"kind\": \"power\", \"amplitude\": a, \"exponent\": s}");
    }
  }
  try {
    p.validate();
  } catch (const Error& e) {
    bad("spectral", e.what());
  }
  return p;
}

json spectral_pair_to_json(const GaussianSpectralPair& p) {
  json j{{"dm", p.dm}, {"c", p.c}, {"t", p.t}};
  if (p.tail == TailModel::Unit) j["tail"] = "unit";
  else j["tail"] = {{"kind", "power"}, {"amplitude", p.tail_amplitude}, {"exponent", p.tail_exponent}};
  return j;
}

}  // namespace poststab
