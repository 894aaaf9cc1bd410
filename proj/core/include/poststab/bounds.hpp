#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poststab/bayes.hpp"
#include "poststab/divergence.hpp"

namespace poststab {

// lhs <= rhs + 1e-10 max(1, rhs)
bool within_tolerance(double lhs, double rhs);

struct SideCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = true;
};

struct BoundReport {
  std::string theorem_id;
  DivergenceValue lhs;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = true;
  std::map<std::string, double> ingredients;
  std::vector<SideCheck> side_checks;

  // Main inequality and every side inequality hold.
  bool all_hold() const;
};

// [t]_- = min(0, t)
struct NegPart {
  explicit NegPart(double t) : value(t < 0.0 ? t : 0.0) {}
  double value;
};

double lp_norm_diff(const LogLikelihood& phi, const LogLikelihood& phi_tilde, const DiscreteMeasure& mu, int p);
double lp_norm(const LogLikelihood& phi, const DiscreteMeasure& mu, int p);

// exp(-|Phi|_{L1} - |Phi - Phi~|_{L1}), a lower bound for min(Z, Z~).
double evidence_lower_bound(const LogLikelihood& phi, const LogLikelihood& phi_tilde, const DiscreteMeasure& mu);

enum class KlDirection { Forward, Reverse };
enum class BoundForm { Sharp, Simplified };

BoundReport hellinger_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde);
BoundReport hellinger_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi);
BoundReport tv_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde);
BoundReport tv_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi);
BoundReport kl_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde,
                         KlDirection direction);
BoundReport kl_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi,
                           KlDirection direction = KlDirection::Forward);
BoundReport w1_phi_bound(const DiscreteMeasure& mu, const LogLikelihood& phi, const LogLikelihood& phi_tilde,
                         BoundForm form);
BoundReport w1_prior_bound(const DiscreteMeasure& mu, const DiscreteMeasure& mu_tilde, const LogLikelihood& phi,
                           BoundForm form);

enum class TableSide { Likelihood, Prior };

struct TableEntry {
  DivergenceKind kind;
  TableSide side;
  double constant;
  double radius;  // +inf when the constant holds for every r
  int p;          // L^p norm the likelihood-side constant multiplies
};

// Local Lipschitz constants C(r) for likelihood and prior perturbations of
// size r. Prior rows throw RadiusExceeded once r reaches their radius. The
// W1 prior row needs a bounded metric and is left out otherwise.
std::vector<TableEntry> lipschitz_table(const DiscreteMeasure& mu, const LogLikelihood& phi, double r);
TableEntry lipschitz_table_entry(const DiscreteMeasure& mu, const LogLikelihood& phi, double r, DivergenceKind kind,
                                 TableSide side);

struct DataPerturbation {
  std::vector<Eigen::VectorXd> G;
  Eigen::VectorXd y;
  Eigen::VectorXd y_tilde;
  Eigen::MatrixXd Sigma;
  int p = 1;
  // Optional per-point majorant M with |l(y-G)-l(y~-G)| <= M |y-y~|.
  std::vector<double> majorant;
  // Optional bounded set A with positive prior mass.
  std::vector<std::size_t> set_A;
};

enum class DataForm { Remark, Corollary };

BoundReport data_perturbation_bound(const DiscreteMeasure& mu, const DataPerturbation& data, DataForm form);

std::string to_string(KlDirection d);
std::string to_string(BoundForm f);
std::string to_string(TableSide s);

}  // namespace poststab
