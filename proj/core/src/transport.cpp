#include "poststab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

namespace {

void check_order(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) fail(ErrorCode::Domain, "Wasserstein order q must be >= 1");
}

double power_cost(double d, double q) { return q == 1.0 ? d : (q == 2.0 ? d * d : std::pow(d, q)); }

struct Cell {
  std::size_t i;
  std::size_t j;
  double x;
};

class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> a, std::vector<double> b, std::vector<double> cost, std::size_t max_pivots)
      : n_(a.size()), m_(b.size()), a_(std::move(a)), b_(std::move(b)), c_(std::move(cost)),
        max_pivots_(max_pivots), adj_(n_ + m_), u_(n_), v_(m_) {
    double cmax = 0.0;
    for (double c : c_) cmax = std::max(cmax, c);
    tol_ = 1e-11 * std::max(1.0, cmax);
  }

  void run() {
    northwest_corner();
    std::size_t degenerate_run = 0;
    for (;;) {
      compute_potentials();
      const bool bland = degenerate_run > 2 * (n_ + m_);
      std::size_t ei = 0, ej = 0;
      if (!price(bland, ei, ej)) return;
      if (pivots_ >= max_pivots_) {
        std::ostringstream os;
        os << "transportation simplex hit the pivot cap (" << max_pivots_ << ")";
        fail(ErrorCode::SolverFailure, os.str());
      }
      const double theta = pivot(ei, ej, bland);
      ++pivots_;
      degenerate_run = theta == 0.0 ? degenerate_run + 1 : 0;
    }
  }

  const std::vector<Cell>& basis() const { return cells_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t pivots() const { return pivots_; }

 private:
  double cost(std::size_t i, std::size_t j) const { return c_[i * m_ + j]; }

  void add_cell(std::size_t slot, std::size_t i, std::size_t j, double x) {
    cells_[slot] = {i, j, x};
    adj_[i].push_back(slot);
    adj_[n_ + j].push_back(slot);
  }

  void drop_cell(std::size_t slot) {
    for (std::size_t node : {cells_[slot].i, n_ + cells_[slot].j}) {
      auto& lst = adj_[node];
      auto it = std::find(lst.begin(), lst.end(), slot);
      *it = lst.back();
      lst.pop_back();
    }
  }

  void northwest_corner() {
    cells_.resize(n_ + m_ - 1);
    std::size_t i = 0, j = 0, slot = 0;
    double ra = a_[0], rb = b_[0];
    for (;;) {
      const double x = std::min(ra, rb);
      add_cell(slot++, i, j, x);
      ra -= x;
      rb -= x;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (i == n_ - 1 || (j < m_ - 1 && ra > 0.0)) {
        ++j;
        rb = b_[j];
      } else {
        ++i;
        ra = a_[i];
      }
    }
  }

  void compute_potentials() {
    std::vector<char> seen(n_ + m_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    u_[0] = 0.0;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t slot : adj_[node]) {
        const Cell& c = cells_[slot];
        if (node < n_) {
          if (seen[n_ + c.j]) continue;
          v_[c.j] = cost(c.i, c.j) - u_[c.i];
          seen[n_ + c.j] = 1;
          stack.push_back(n_ + c.j);
        } else {
          if (seen[c.i]) continue;
          u_[c.i] = cost(c.i, c.j) - v_[c.j];
          seen[c.i] = 1;
          stack.push_back(c.i);
        }
      }
    }
  }

  bool price(bool bland, std::size_t& ei, std::size_t& ej) const {
    double best = -tol_;
    bool found = false;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const double r = cost(i, j) - u_[i] - v_[j];
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
          found = true;
          if (bland) return true;
        }
      }
    }
    return found;
  }

  // Returns the step length theta.
  double pivot(std::size_t ei, std::size_t ej, bool bland) {
    // Tree path from row node ei to column node n+ej.
    const std::size_t none = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> parent_slot(n_ + m_, none);
    std::vector<char> seen(n_ + m_, 0);
    std::vector<std::size_t> stack{ei};
    seen[ei] = 1;
    const std::size_t goal = n_ + ej;
    while (!stack.empty() && !seen[goal]) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t slot : adj_[node]) {
        const Cell& c = cells_[slot];
        const std::size_t other = node < n_ ? n_ + c.j : c.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_slot[other] = slot;
        stack.push_back(other);
      }
    }
    if (!seen[goal]) fail(ErrorCode::SolverFailure, "basis is not a spanning tree");

    std::vector<std::size_t> path;
    for (std::size_t node = goal; node != ei;) {
      const std::size_t slot = parent_slot[node];
      path.push_back(slot);
      const Cell& c = cells_[slot];
      node = node < n_ ? n_ + c.j : c.i;
    }

    // Odd positions along the path (counted from the entering column) lose flow.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = none;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell& c = cells_[path[k]];
      bool better = c.x < theta;
      if (bland && leave != none && c.x == theta) {
        const Cell& l = cells_[leave];
        better = c.i * m_ + c.j < l.i * m_ + l.j;
      }
      if (better) {
        theta = c.x;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      Cell& c = cells_[path[k]];
      c.x = k % 2 == 0 ? std::max(0.0, c.x - theta) : c.x + theta;
    }
    drop_cell(leave);
    add_cell(leave, ei, ej, theta);
    return theta;
  }

  std::size_t n_, m_;
  std::vector<double> a_, b_, c_;
  std::size_t max_pivots_;
  std::vector<Cell> cells_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> u_, v_;
  std::size_t pivots_ = 0;
  double tol_ = 0.0;
};

}  // namespace

double TransportPlan::distance() const { return std::pow(std::max(0.0, cost), 1.0 / q); }

TransportPlan solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q,
                              const TransportOptions& opts) {
  require_same_space(mu, nu);
  check_order(q);
  const auto& sp = mu.space();
  TransportPlan plan;
  plan.q = q;
  plan.source_support = mu.support();
  plan.target_support = nu.support();
  const auto& rs = plan.source_support;
  const auto& cs = plan.target_support;
  const std::size_t n = rs.size(), m = cs.size();
  if (n * m > opts.max_variables) {
    std::ostringstream os;
    os << "coupling has " << n * m << " variables, cap is " << opts.max_variables;
    fail(ErrorCode::SizeCapExceeded, os.str());
  }

  std::vector<double> a(n), b(m), c(n * m);
  for (std::size_t i = 0; i < n; ++i) a[i] = mu[rs[i]];
  for (std::size_t j = 0; j < m; ++j) b[j] = nu[cs[j]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) c[i * m + j] = power_cost(sp.distance(rs[i], cs[j]), q);

  const std::size_t cap = opts.max_pivots ? opts.max_pivots : 100000 + 20 * n * m;
  TransportSimplex simplex(a, b, c, cap);
  simplex.run();

  std::vector<double> row(n, 0.0), col(m, 0.0);
  plan.source_potential.assign(sp.size(), 0.0);
  plan.target_potential.assign(sp.size(), 0.0);
  for (const Cell& cell : simplex.basis()) {
    row[cell.i] += cell.x;
    col[cell.j] += cell.x;
    plan.cost += cell.x * c[cell.i * m + cell.j];
    if (cell.x > 0.0) plan.coupling.push_back({rs[cell.i], cs[cell.j], cell.x});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(row[i] - a[i]) > 1e-12) fail(ErrorCode::SolverFailure, "plan violates a source marginal");
    plan.source_potential[rs[i]] = simplex.u()[i];
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(col[j] - b[j]) > 1e-12) fail(ErrorCode::SolverFailure, "plan violates a target marginal");
    plan.target_potential[cs[j]] = simplex.v()[j];
  }
  std::sort(plan.coupling.begin(), plan.coupling.end(), [](const CouplingEntry& x, const CouplingEntry& y) {
    return x.from != y.from ? x.from < y.from : x.to < y.to;
  });
  plan.pivots = simplex.pivots();
  return plan;
}

DivergenceValue wasserstein_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q,
                               const TransportOptions& opts) {
  const TransportPlan plan = solve_transport(mu, nu, q, opts);
  return DivergenceValue::finite_value(DivergenceKind::Wasserstein, plan.distance(), q);
}

DivergenceValue wasserstein_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q) {
  require_same_space(mu, nu);
  check_order(q);
  const auto& sp = mu.space();
  if (sp.kind() != MetricKind::Euclidean) fail(ErrorCode::Precondition, "exact 1-D solver needs an untruncated euclidean metric; use the LP");
  if (sp.dimension() != 1) fail(ErrorCode::Precondition, "exact 1-D solver needs scalar points");

  auto sorted = [&](const DiscreteMeasure& m) {
    std::vector<std::pair<double, double>> v;
    for (std::size_t i : m.support()) v.emplace_back(sp.coordinate(i), m[i]);
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto xa = sorted(mu);
  const auto xb = sorted(nu);
  std::size_t i = 0, j = 0;
  double ra = xa[0].second, rb = xb[0].second, acc = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double w = std::min(ra, rb);
    acc += w * power_cost(std::abs(xa[i].first - xb[j].first), q);
    ra -= w;
    rb -= w;
    if (ra <= 0.0 && ++i < xa.size()) ra = xa[i].second;
    if (rb <= 0.0 && ++j < xb.size()) rb = xb[j].second;
  }
  return DivergenceValue::finite_value(DivergenceKind::Wasserstein, std::pow(acc, 1.0 / q), q);
}

DivergenceValue wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double q) {
  if (mu.space().is_scalar_line()) return wasserstein_1d(mu, nu, q);
  return wasserstein_lp(mu, nu, q);
}

std::vector<double> kantorovich_potential(const TransportPlan& plan, const FiniteMetricSpace& space) {
  if (plan.q != 1.0) fail(ErrorCode::Precondition, "Kantorovich potential needs a W1 plan");
  std::vector<double> f(space.size(), std::numeric_limits<double>::infinity());
  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t j : plan.target_support)
      f[x] = std::min(f[x], space.distance(x, j) - plan.target_potential[j]);
  return f;
}

}  // namespace poststab
