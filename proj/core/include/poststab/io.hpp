#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "poststab/bayes.hpp"
#include "poststab/bounds.hpp"
#include "poststab/gaussian.hpp"

namespace poststab {

using json = nlohmann::json;

// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

// Number, or a string for non-finite values (JSON has no infinity).
json number_json(double v);
// Accepts numbers and the strings "inf", "+inf", "-inf".
double number_from_json(const json& j, const std::string& where);

SpacePtr space_from_json(const json& j);
json space_to_json(const FiniteMetricSpace& space);

DiscreteMeasure measure_from_json(const json& j, const SpacePtr& space, const std::string& where);
json measure_to_json(const DiscreteMeasure& mu);

LogLikelihood likelihood_from_json(const json& j, const SpacePtr& space, const std::string& where);
json likelihood_to_json(const LogLikelihood& phi);

json divergence_to_json(const DivergenceValue& d);
json report_to_json(const BoundReport& r);

GaussianSpectralPair spectral_pair_from_json(const json& j);
json spectral_pair_to_json(const GaussianSpectralPair& p);

}  // namespace poststab
