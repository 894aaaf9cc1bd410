#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "poststab/divergence.hpp"
#include "poststab/error.hpp"
#include "poststab/experiments.hpp"
#include "poststab/parallel.hpp"

namespace poststab {

void LikelihoodModel::validate() const {
  const auto nx = static_cast<Eigen::Index>(x.size());
  const auto ny = static_cast<Eigen::Index>(y.size());
  if (nx == 0 || ny == 0) fail(ErrorCode::Domain, "likelihood model needs nonempty grids");
  if (width.size() != y.size()) fail(ErrorCode::Domain, "one cell width per data point is required");
  if (L.rows() != nx || L.cols() != ny) fail(ErrorCode::Domain, "density matrix does not match the grids");
  for (double w : width)
    if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorCode::Domain, "cell widths must be positive");
  const Eigen::Map<const Eigen::VectorXd> wv(width.data(), ny);
  for (Eigen::Index i = 0; i < nx; ++i) {
    if (!(L.row(i).minCoeff() > 0.0) || !L.row(i).allFinite()) {
      std::ostringstream os;
      os << "density row " << i << " must be strictly positive and finite";
      fail(ErrorCode::Domain, os.str());
    }
    const double mass = L.row(i).dot(wv);
    if (std::abs(mass - 1.0) > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "density row " << i << " integrates to " << mass;
      fail(ErrorCode::Domain, os.str());
    }
  }
}

LikelihoodModel gaussian_likelihood_model(const std::vector<double>& x, const std::vector<double>& y, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorCode::Domain, "noise level must be positive");
  if (y.size() < 2) fail(ErrorCode::Domain, "data grid needs at least two points");
  if (!std::is_sorted(y.begin(), y.end())) fail(ErrorCode::Domain, "data grid must be sorted");
  LikelihoodModel m;
  m.x = x;
  m.y = y;
  const std::size_t ny = y.size();
  m.width.resize(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double lo = j == 0 ? y[0] - 0.5 * (y[1] - y[0]) : 0.5 * (y[j - 1] + y[j]);
    const double hi = j + 1 == ny ? y[ny - 1] + 0.5 * (y[ny - 1] - y[ny - 2]) : 0.5 * (y[j] + y[j + 1]);
    m.width[j] = hi - lo;
  }
  m.L.resize(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double mass = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      const double z = (y[j] - x[i]) / sigma;
      const double v = std::exp(-0.5 * z * z);
      m.L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      mass += v * m.width[j];
    }
    m.L.row(static_cast<Eigen::Index>(i)) /= mass;
  }
  m.validate();
  return m;
}

namespace {

// Adversarial perturbation of one density row. Rows outside the target give
// up ball mass to the farthest data cell; target rows pull mass from the far
// cells into the ball, spread with constant density.
void perturb_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, const std::vector<double>& width, const std::vector<char>& in_ball,
                 const std::vector<std::size_t>& far_order, double ball_measure, double budget, double floor,
                 bool is_target) {
  const std::size_t ny = width.size();
  if (!is_target) {
    double mass_b = 0.0;
    for (std::size_t j = 0; j < ny; ++j)
      if (in_ball[j]) mass_b += row[static_cast<Eigen::Index>(j)] * width[j];
    const double f = std::min(1.0 - floor, budget / mass_b);
    double moved = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      if (!in_ball[j]) continue;
      const auto jj = static_cast<Eigen::Index>(j);
      moved += f * row[jj] * width[j];
      row[jj] *= 1.0 - f;
    }
    const std::size_t far = far_order.front();
    row[static_cast<Eigen::Index>(far)] += moved / width[far];
    return;
  }
  double taken = 0.0;
  for (std::size_t j : far_order) {
    if (taken >= budget) break;
    const auto jj = static_cast<Eigen::Index>(j);
    const double avail = (1.0 - floor) * row[jj] * width[j];
    const double take = std::min(avail, budget - taken);
    row[jj] -= take / width[j];
    taken += take;
  }
  const double density = taken / ball_measure;
  for (std::size_t j = 0; j < ny; ++j)
    if (in_ball[j]) row[static_cast<Eigen::Index>(j)] += density;
}

}  // namespace

BrittlenessReport brittleness_demo(const LikelihoodModel& model, const DiscreteMeasure& mu, double y_center,
                                   const std::vector<double>& deltas, const std::vector<std::size_t>& target,
                                   const BrittlenessOptions& opts) {
  model.validate();
  const std::size_t nx = model.x.size(), ny = model.y.size();
  if (mu.size() != nx) fail(ErrorCode::Domain, "prior must live on the parameter grid");
  // eps = 0 leaves L untouched, which gives the all-zero reference rows.
  if (!(opts.eps >= 0.0) || !std::isfinite(opts.eps)) fail(ErrorCode::Domain, "perturbation budget eps must be nonnegative");
  if (!(opts.positivity_floor > 0.0 && opts.positivity_floor < 1.0))
    fail(ErrorCode::Domain, "positivity floor must lie in (0,1)");
  std::vector<char> is_target(nx, 0);
  for (std::size_t i : target) {
    if (i >= nx) fail(ErrorCode::Domain, "target index outside the parameter grid");
    is_target[i] = 1;
  }

  BrittlenessReport rep;
  rep.rows.resize(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t r) {
    const double delta = deltas[r];
    std::vector<char> in_ball(ny, 0);
    BrittlenessRow row;
    row.delta = delta;
    for (std::size_t j = 0; j < ny; ++j) {
      if (std::abs(model.y[j] - y_center) <= delta + 1e-12) {
        in_ball[j] = 1;
        ++row.cells_in_ball;
        row.ball_measure += model.width[j];
      }
    }
    if (row.cells_in_ball == 0) {
      std::ostringstream os;
      os << "ball of radius " << delta << " around " << y_center << " contains no data cell";
      fail(ErrorCode::Domain, os.str());
    }
    if (row.cells_in_ball == ny) fail(ErrorCode::Domain, "ball covers the whole data grid");
    std::vector<std::size_t> far_order;
    for (std::size_t j = 0; j < ny; ++j)
      if (!in_ball[j]) far_order.push_back(j);
    std::stable_sort(far_order.begin(), far_order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(model.y[a] - y_center) > std::abs(model.y[b] - y_center);
    });

    // the small margin keeps the summed L1 gap at or below eps after rounding
    const double budget = 0.5 * opts.eps * (1.0 - 1e-12);
    Eigen::MatrixXd Lt = model.L;
    for (std::size_t i = 0; i < nx; ++i)
      perturb_row(Lt.row(static_cast<Eigen::Index>(i)), model.width, in_ball, far_order, row.ball_measure, budget,
                  opts.positivity_floor, is_target[i] != 0);

    const Eigen::MatrixXd diff = (model.L - Lt).cwiseAbs();
    std::vector<double> lik(nx), lik_t(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double dl = 0.0;
      for (std::size_t j = 0; j < ny; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        dl += diff(ii, jj) * model.width[j];
        if (in_ball[j]) {
          lik[i] += model.L(ii, jj) * model.width[j];
          lik_t[i] += Lt(ii, jj) * model.width[j];
        }
      }
      row.d_L = std::max(row.d_L, dl);
    }
    double fub = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < nx; ++i) col += diff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * mu[i];
      row.d_hat_L = std::max(row.d_hat_L, col);
      if (in_ball[j]) fub += model.width[j] * col;
    }
    std::vector<double> post(nx), post_t(nx);
    for (std::size_t i = 0; i < nx; ++i) {
      post[i] = lik[i] * mu[i];
      post_t[i] = lik_t[i] * mu[i];
      row.Z_L += post[i];
      row.Z_L_tilde += post_t[i];
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < nx; ++i) tv += std::abs(post[i] / row.Z_L - post_t[i] / row.Z_L_tilde);
    row.d_TV = 0.5 * tv;
    row.stability_rhs = row.d_hat_L / row.Z_L;
    row.fubini_rhs = fub / row.Z_L;
    row.holds = row.d_TV <= row.stability_rhs;
    rep.rows[r] = row;
  });

  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    const auto& row = rep.rows[r];
    rep.d_L_within_eps = rep.d_L_within_eps && row.d_L <= opts.eps + 1e-12 * std::max(1.0, opts.eps);
    rep.inequality_holds = rep.inequality_holds && row.holds;
    if (r > 0) rep.d_TV_increasing = rep.d_TV_increasing && row.d_TV > rep.rows[r - 1].d_TV;
  }
  return rep;
}

}  // namespace poststab
