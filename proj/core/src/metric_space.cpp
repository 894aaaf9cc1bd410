#include "poststab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "poststab/error.hpp"

namespace poststab {

namespace {

constexpr double kSymTol = 1e-12;

std::vector<double> flatten(const std::vector<std::vector<double>>& pts, std::size_t& dim) {
  if (pts.empty()) fail(ErrorCode::InvalidMetric, "space needs at least one point");
  dim = pts.front().size();
  if (dim == 0) fail(ErrorCode::InvalidMetric, "points need at least one coordinate");
  std::vector<double> flat;
  flat.reserve(pts.size() * dim);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].size() != dim) {
      std::ostringstream os;
      os << "point " << i << " has " << pts[i].size() << " coordinates, expected " << dim;
      fail(ErrorCode::InvalidMetric, os.str());
    }
    for (double c : pts[i]) {
      if (!std::isfinite(c)) fail(ErrorCode::NonFinite, "point coordinates must be finite");
      flat.push_back(c);
    }
  }
  return flat;
}

}  // namespace

SpacePtr FiniteMetricSpace::euclidean(std::vector<std::vector<double>> points) {
  auto s = std::shared_ptr<FiniteMetricSpace>(new FiniteMetricSpace());
  s->kind_ = MetricKind::Euclidean;
  s->n_ = points.size();
  s->coords_ = flatten(points, s->dim_);
  s->validate_points();
  return s;
}

SpacePtr FiniteMetricSpace::euclidean_truncated(std::vector<std::vector<double>> points, double D) {
  if (!(D > 0.0) || !std::isfinite(D)) fail(ErrorCode::InvalidMetric, "truncation level D must be positive and finite");
  auto s = std::shared_ptr<FiniteMetricSpace>(new FiniteMetricSpace());
  s->kind_ = MetricKind::EuclideanTruncated;
  s->n_ = points.size();
  s->coords_ = flatten(points, s->dim_);
  s->truncation_ = D;
  s->validate_points();
  return s;
}

SpacePtr FiniteMetricSpace::explicit_matrix(Eigen::MatrixXd d) {
  auto s = std::shared_ptr<FiniteMetricSpace>(new FiniteMetricSpace());
  s->kind_ = MetricKind::Explicit;
  s->n_ = static_cast<std::size_t>(d.rows());
  s->matrix_ = std::move(d);
  s->validate_matrix();
  return s;
}

SpacePtr FiniteMetricSpace::line(const std::vector<double>& xs) {
  std::vector<std::vector<double>> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back({x});
  return euclidean(std::move(pts));
}

SpacePtr FiniteMetricSpace::line_truncated(const std::vector<double>& xs, double D) {
  std::vector<std::vector<double>> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back({x});
  return euclidean_truncated(std::move(pts), D);
}

double FiniteMetricSpace::distance(std::size_t i, std::size_t j) const {
  if (kind_ == MetricKind::Explicit) return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  if (i == j) return 0.0;
  double acc = 0.0;
  const double* a = coords(i);
  const double* b = coords(j);
  if (dim_ == 1) {
    acc = std::abs(a[0] - b[0]);
  } else {
    for (std::size_t k = 0; k < dim_; ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
    acc = std::sqrt(acc);
  }
  if (truncation_) acc = std::min(acc, *truncation_);
  return acc;
}

std::optional<double> FiniteMetricSpace::bound() const {
  if (kind_ == MetricKind::EuclideanTruncated) return truncation_;
  if (kind_ == MetricKind::Explicit) return n_ > 1 ? matrix_.maxCoeff() : 0.0;
  return std::nullopt;
}

bool FiniteMetricSpace::same_as(const FiniteMetricSpace& other) const {
  if (this == &other) return true;
  if (kind_ != other.kind_ || n_ != other.n_ || dim_ != other.dim_) return false;
  if (truncation_ != other.truncation_) return false;
  if (kind_ == MetricKind::Explicit) return matrix_ == other.matrix_;
  return coords_ == other.coords_;
}

void FiniteMetricSpace::validate_points() const {
  // Coincident points would give zero distance between distinct points.
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (std::equal(coords(i), coords(i) + dim_, coords(j))) {
        std::ostringstream os;
        os << "points " << i << " and " << j << " coincide";
        fail(ErrorCode::InvalidMetric, os.str());
      }
    }
  }
}

void FiniteMetricSpace::validate_matrix() const {
  const auto n = static_cast<Eigen::Index>(n_);
  if (n == 0 || matrix_.cols() != n) fail(ErrorCode::InvalidMetric, "distance matrix must be square and nonempty");
  if (!matrix_.allFinite()) fail(ErrorCode::NonFinite, "distance matrix entries must be finite");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  const double tol = kSymTol * scale;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (matrix_(i, i) != 0.0) fail(ErrorCode::InvalidMetric, "distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (matrix_(i, j) != matrix_(j, i)) {
        std::ostringstream os;
        os << "distance matrix not symmetric at (" << i << "," << j << ")";
        fail(ErrorCode::InvalidMetric, os.str());
      }
      if (!(matrix_(i, j) > 0.0)) {
        std::ostringstream os;
        os << "distinct points " << i << " and " << j << " must have positive distance";
        fail(ErrorCode::InvalidMetric, os.str());
      }
    }
  }
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (matrix_(i, j) > matrix_(i, k) + matrix_(k, j) + tol) {
          std::ostringstream os;
          os << "triangle inequality fails for (" << i << "," << j << ") via " << k;
          fail(ErrorCode::InvalidMetric, os.str());
        }
}

}  // namespace poststab
