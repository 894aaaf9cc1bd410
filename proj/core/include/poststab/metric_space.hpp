#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace poststab {

enum class MetricKind { Euclidean, EuclideanTruncated, Explicit };

class FiniteMetricSpace;
using SpacePtr = std::shared_ptr<const FiniteMetricSpace>;

// Finite point set with an immutable metric. Coordinate metrics are evaluated
// on demand; explicit matrices are stored and checked once at construction.
class FiniteMetricSpace {
 public:
  static SpacePtr euclidean(std::vector<std::vector<double>> points);
  static SpacePtr euclidean_truncated(std::vector<std::vector<double>> points, double D);
  static SpacePtr explicit_matrix(Eigen::MatrixXd distances);

  // Points on the real line.
  static SpacePtr line(const std::vector<double>& xs);
  static SpacePtr line_truncated(const std::vector<double>& xs, double D);

  std::size_t size() const { return n_; }
  MetricKind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }

  double distance(std::size_t i, std::size_t j) const;

  // Truncation level, or the largest entry of an explicit matrix. Empty for
  // plain euclidean spaces, which are treated as unbounded.
  std::optional<double> bound() const;
  std::optional<double> truncation() const { return truncation_; }

  bool is_scalar_line() const { return kind_ == MetricKind::Euclidean && dim_ == 1; }
  const double* coords(std::size_t i) const { return coords_.data() + i * dim_; }
  double coordinate(std::size_t i) const { return coords_[i * dim_]; }

  const std::vector<double>& raw_coords() const { return coords_; }
  const Eigen::MatrixXd& raw_matrix() const { return matrix_; }

  bool same_as(const FiniteMetricSpace& other) const;

 private:
  FiniteMetricSpace() = default;
  void validate_points() const;
  void validate_matrix() const;

  MetricKind kind_ = MetricKind::Euclidean;
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  Eigen::MatrixXd matrix_;
  std::optional<double> truncation_;
};

}  // namespace poststab
