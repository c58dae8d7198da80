#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tndipw::glm {

double expit(double x) noexcept;
double logit(double p) noexcept;

/// Dense regressor matrix with one label per column.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> column_labels);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& column_labels() const noexcept { return labels_; }

  /// Index of the column with the given label; throws DimensionError if absent.
  std::size_t column_index(const std::string& label) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
};

struct FitOptions {
  double step_tolerance = 1e-8;
  /// Score-norm tolerance per unit of total weight (floored at one unit).
  double score_tolerance = 1e-8;
  int max_iterations = 100;
  double coefficient_guard = 30.0;
  double rank_tolerance = 1e-10;
};

struct FitResult {
  Eigen::VectorXd coefficients;
  /// Inverse of the weighted observed information at the optimum.
  Eigen::MatrixXd covariance;
  std::vector<std::string> column_labels;
  bool converged = false;
  int iterations = 0;
  double final_score_norm = 0.0;
  /// Absolute tolerance the score norm was held to: score_tolerance * max(1, sum of weights).
  double score_tolerance = 0.0;

  double coefficient(const std::string& label) const;
  double standard_error(std::size_t index) const;
};

/// Weighted maximum (quasi-)likelihood logistic regression by Newton/IRLS with
/// step halving. Responses may be fractional in [0, 1].
///
/// Throws RankDeficientError when the weighted design is singular,
/// SeparationError when a coefficient leaves [-guard, guard], and
/// NonConvergenceError when the iteration limit is reached.
FitResult fit_weighted_logistic(const DesignMatrix& design, std::span<const double> response,
                                std::span<const double> weights, const FitOptions& options = {});

/// Unit-weight convenience overload.
FitResult fit_logistic(const DesignMatrix& design, std::span<const double> response,
                       const FitOptions& options = {});

std::vector<double> predict(const FitResult& fit, const DesignMatrix& design);

/// Weighted score sum_i w_i d_i (r_i - expit(d_i' b)).
Eigen::VectorXd weighted_score(const DesignMatrix& design, std::span<const double> response,
                               std::span<const double> weights, const Eigen::VectorXd& coefficients);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double value) const noexcept { return lower <= value && value <= upper; }
  double width() const noexcept { return upper - lower; }
};

/// Two-sided standard normal quantile z such that P(|Z| <= z) = level.
double normal_two_sided_quantile(double level);

Interval wald_interval(const FitResult& fit, std::size_t coefficient_index, double level);

}  // namespace tndipw::glm
