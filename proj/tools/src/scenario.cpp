#include "poststab_cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "poststab/error.hpp"
#include "poststab/io.hpp"

namespace poststab::cli {

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& msg) {
  fail(ErrorCode::Validation, where + ": " + msg);
}

std::string ref_name(const json& ref, const std::string& where) {
  if (!ref.is_string()) bad(where, "expected a name");
  return ref.get<std::string>();
}

class Builder {
 public:
  Builder(const json& root, Scenario& sc) : root_(root), sc_(sc) {}

  void build_priors() {
    if (!root_.contains("priors")) return;
    const json& p = root_.at("priors");
    if (!p.is_object()) bad("priors", "expected an object of named priors");
    for (auto it = p.begin(); it != p.end(); ++it) resolve_prior(it.key());
  }

  void build_likelihoods() {
    if (!root_.contains("likelihoods")) return;
    const json& l = root_.at("likelihoods");
    if (!l.is_object()) bad("likelihoods", "expected an object of named likelihoods");
    for (auto it = l.begin(); it != l.end(); ++it)
      sc_.likelihoods.emplace(it.key(), likelihood(it.value(), "likelihoods." + it.key()));
  }

 private:
  // Priors may be derived from other priors, so they resolve on demand.
  const DiscreteMeasure& resolve_prior(const std::string& name) {
    if (auto it = sc_.priors.find(name); it != sc_.priors.end()) return it->second;
    const std::string where = "priors." + name;
    const json& all = root_.at("priors");
    if (!all.contains(name)) bad(where, "unknown prior");
    if (!visiting_.insert(name).second) bad(where, "derived priors form a cycle");
    DiscreteMeasure mu = prior(all.at(name), where);
    visiting_.erase(name);
    return sc_.priors.emplace(name, std::move(mu)).first->second;
  }

  DiscreteMeasure prior(const json& j, const std::string& where) {
    if (j.is_string() && j.get<std::string>() == "uniform") return DiscreteMeasure::uniform(sc_.space);
    if (j.is_object() && j.contains("dirac")) {
      const std::size_t i = index_field(j, "dirac", where);
      if (i >= sc_.space->size()) bad(where + ".dirac", "index outside the space");
      return DiscreteMeasure::dirac(sc_.space, i);
    }
    if (j.is_object() && j.contains("ball_removal")) {
      const json& b = j.at("ball_removal");
      const std::string w = where + ".ball_removal";
      const auto& from = resolve_prior(ref_name(field(b, "from", w), w + ".from"));
      const std::size_t center = index_field(b, "center", w), target = index_field(b, "target", w);
      if (center >= sc_.space->size() || target >= sc_.space->size()) bad(w, "index outside the space");
      return wrap(w, [&] { return ball_removal(from, center, number_field(b, "radius", w), target); });
    }
    if (j.is_object() && j.contains("contaminate")) {
      const json& c = j.at("contaminate");
      const std::string w = where + ".contaminate";
      const auto& from = resolve_prior(ref_name(field(c, "from", w), w + ".from"));
      const auto& nu = resolve_prior(ref_name(field(c, "nu", w), w + ".nu"));
      return wrap(w, [&] { return contaminate(from, nu, number_field(c, "eps", w)); });
    }
    return measure_from_json(j, sc_.space, where);
  }

  LogLikelihood likelihood(const json& j, const std::string& where) {
    if (!j.is_object()) bad(where, "expected an object");
    if (j.contains("values")) return likelihood_from_json(j, sc_.space, where);
    std::vector<double> raw;
    if (j.contains("raw")) {
      raw = number_list(j.at("raw"), where + ".raw");
      if (raw.size() != sc_.space->size()) bad(where + ".raw", "needs one value per point");
    } else if (j.contains("distance_power")) {
      // scale * d(x, center)^power
      const json& d = j.at("distance_power");
      const std::string w = where + ".distance_power";
      const std::size_t c = index_field(d, "center", w);
      if (c >= sc_.space->size()) bad(w + ".center", "index outside the space");
      const double scale = number_field(d, "scale", w), power = number_field(d, "power", w);
      if (!(power > 0.0)) bad(w + ".power", "must be positive");
      for (std::size_t i = 0; i < sc_.space->size(); ++i)
        raw.push_back(scale * std::pow(sc_.space->distance(i, c), power));
    } else {
      bad(where, "expected \"values\", \"raw\" or \"distance_power\"");
    }
    return wrap(where, [&] {
      if (j.contains("normalize_against"))
        return shift_to_zero_essinf(sc_.space, raw, resolve_prior(ref_name(j.at("normalize_against"), where)));
      return apply_shift(sc_.space, raw, number_field(j, "shift", where, 0.0));
    });
  }

  template <class F>
  auto wrap(const std::string& where, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Validation) throw;
      bad(where, e.what());
    }
  }

  const json& root_;
  Scenario& sc_;
  std::set<std::string> visiting_;
};

}  // namespace

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  if (!j.contains(key)) bad(where + "." + key, "missing");
  return j.at(key);
}

double number_field(const json& j, const std::string& key, const std::string& where) {
  return number_from_json(field(j, key, where), where + "." + key);
}

double number_field(const json& j, const std::string& key, const std::string& where, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number_field(j, key, where);
}

std::size_t index_field(const json& j, const std::string& key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(where + "." + key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) bad(where, "expected a number or an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> index_list(const json& j, const std::string& where) {
  if (!j.is_array()) bad(where, "expected an array of point indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer() || j[i].get<long long>() < 0)
      bad(where + "[" + std::to_string(i) + "]", "expected a nonnegative integer");
    out.push_back(j[i].get<std::size_t>());
  }
  return out;
}

const DiscreteMeasure& Scenario::prior(const json& ref, const std::string& where) const {
  const std::string name = ref_name(ref, where);
  auto it = priors.find(name);
  if (it == priors.end()) bad(where, "unknown prior \"" + name + "\"");
  return it->second;
}

const LogLikelihood& Scenario::likelihood(const json& ref, const std::string& where) const {
  const std::string name = ref_name(ref, where);
  auto it = likelihoods.find(name);
  if (it == likelihoods.end()) bad(where, "unknown likelihood \"" + name + "\"");
  return it->second;
}

const std::map<std::string, std::string>& theorem_kinds() {
  static const std::map<std::string, std::string> kinds = {
      {"hellinger_phi", "phi"},         {"tv_phi", "phi"},
      {"kl_phi_forward", "phi"},        {"kl_phi_reverse", "phi"},
      {"w1_phi_sharp", "phi"},          {"w1_phi_simplified", "phi"},
      {"hellinger_prior", "prior"},     {"tv_prior", "prior"},
      {"kl_prior_forward", "prior"},    {"kl_prior_reverse", "prior"},
      {"w1_prior_sharp", "prior"},      {"w1_prior_simplified", "prior"},
      {"data_remark", "data"},          {"data_corollary", "data"},
  };
  return kinds;
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) bad("scenario", "top level must be an object");
  Scenario sc;
  sc.name = j.contains("name") && j.at("name").is_string() ? j.at("name").get<std::string>() : "scenario";
  if (sc.name.empty() || sc.name.find_first_of("/\\") != std::string::npos)
    bad("name", "must be a nonempty plain file stem");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad("seed", "expected a nonnegative integer");
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("space")) sc.space = space_from_json(j.at("space"));
  if (!sc.space && (j.contains("priors") || j.contains("likelihoods")))
    bad("space", "priors and likelihoods need a space");

  Builder b(j, sc);
  b.build_priors();
  b.build_likelihoods();

  if (j.contains("perturbations")) {
    const json& ps = j.at("perturbations");
    if (!ps.is_array()) bad("perturbations", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string where = "perturbations[" + std::to_string(i) + "]";
      Perturbation p;
      const json& kind = field(ps[i], "kind", where);
      if (!kind.is_string()) bad(where + ".kind", "expected phi, prior or data");
      p.kind = kind.get<std::string>();
      if (p.kind != "phi" && p.kind != "prior" && p.kind != "data")
        bad(where + ".kind", "expected phi, prior or data, got \"" + p.kind + "\"");
      p.id = ps[i].contains("id") && ps[i].at("id").is_string() ? ps[i].at("id").get<std::string>()
                                                                : p.kind + std::to_string(i);
      if (!ids.insert(p.id).second) bad(where + ".id", "duplicate id \"" + p.id + "\"");
      p.payload = field(ps[i], "payload", where);
      if (!p.payload.is_object()) bad(where + ".payload", "expected an object");
      sc.perturbations.push_back(std::move(p));
    }
  }
  if (j.contains("checks")) {
    const json& cs = j.at("checks");
    if (!cs.is_array()) bad("checks", "expected an array of theorem ids");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string where = "checks[" + std::to_string(i) + "]";
      if (!cs[i].is_string()) bad(where, "expected a theorem id");
      const auto id = cs[i].get<std::string>();
      if (!theorem_kinds().count(id)) bad(where, "unknown theorem id \"" + id + "\"");
      sc.checks.push_back(id);
    }
  }
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    if (!o.is_object()) bad("outputs", "expected an object of file names");
    for (auto it = o.begin(); it != o.end(); ++it) {
      if (!it.value().is_string()) bad("outputs." + it.key(), "expected a file name");
      const auto name = it.value().get<std::string>();
      if (name.empty() || name.find_first_of("/\\") != std::string::npos)
        bad("outputs." + it.key(), "file names are relative to --out and may not contain separators");
      sc.outputs[it.key()] = name;
    }
  }
  if (j.contains("experiments")) {
    if (!j.at("experiments").is_object()) bad("experiments", "expected an object keyed by experiment name");
    sc.experiments = j.at("experiments");
  }
  return sc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Parse, "cannot open scenario file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path + ": " + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return parse_scenario(j);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace poststab::cli
