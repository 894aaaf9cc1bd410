#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "poststab/bayes.hpp"

namespace poststab::cli {

using json = nlohmann::json;

struct Perturbation {
  std::string id;
  std::string kind;  // phi, prior or data
  json payload;
};

// Named objects on one finite space plus the requested checks. Experiments
// read their parameters from the "experiments" section.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  SpacePtr space;
  std::map<std::string, DiscreteMeasure> priors;
  std::map<std::string, LogLikelihood> likelihoods;
  std::vector<Perturbation> perturbations;
  std::vector<std::string> checks;
  std::map<std::string, std::string> outputs;
  json experiments = json::object();

  const DiscreteMeasure& prior(const json& ref, const std::string& where) const;
  const LogLikelihood& likelihood(const json& ref, const std::string& where) const;
};

// Throws poststab::Error (Parse or Validation) with a field path or a
// line/column position.
json read_json_file(const std::string& path);
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const json& j);

// Theorem ids a verify run understands, and the perturbation kind each needs.
const std::map<std::string, std::string>& theorem_kinds();

// Field helpers shared by the commands.
const json& field(const json& j, const std::string& key, const std::string& where);
double number_field(const json& j, const std::string& key, const std::string& where);
double number_field(const json& j, const std::string& key, const std::string& where, double fallback);
std::size_t index_field(const json& j, const std::string& key, const std::string& where);
std::vector<double> number_list(const json& j, const std::string& where);
std::vector<std::size_t> index_list(const json& j, const std::string& where);

}  // namespace poststab::cli
