#include "tndipw/glm.hpp"

#include "tndipw/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tndipw::glm {

namespace {

// log(1 + e^eta) without overflow.
double log1pexp(double eta) noexcept {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double quasi_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& r, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& b) {
  const Eigen::VectorXd eta = x * b;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (w[i] > 0.0) total += w[i] * (r[i] * eta[i] - log1pexp(eta[i]));
  }
  return total;
}

void check_inputs(const DesignMatrix& design, std::span<const double> response,
                  std::span<const double> weights) {
  if (design.cols() == 0) throw DimensionError("design has no columns");
  if (response.size() != design.rows() || weights.size() != design.rows()) {
    throw DimensionError(fmt::format("design has {} rows but response has {} and weights {}",
                                     design.rows(), response.size(), weights.size()));
  }
  bool any_positive = false;
  for (std::size_t i = 0; i < response.size(); ++i) {
    if (!(response[i] >= 0.0 && response[i] <= 1.0)) {
      throw DimensionError(fmt::format("response {} = {} is outside [0, 1]", i, response[i]));
    }
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw DimensionError(fmt::format("weight {} = {} is not a finite nonnegative value", i, weights[i]));
    }
    any_positive = any_positive || weights[i] > 0.0;
  }
  if (!any_positive) throw RankDeficientError("no observation has positive weight");
}

}  // namespace

double expit(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

DesignMatrix::DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> column_labels)
    : values_(std::move(values)), labels_(std::move(column_labels)) {
  if (labels_.size() != static_cast<std::size_t>(values_.cols())) {
    throw DimensionError(fmt::format("{} column labels for {} columns", labels_.size(), values_.cols()));
  }
}

std::size_t DesignMatrix::column_index(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw DimensionError("no design column labelled '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

double FitResult::coefficient(const std::string& label) const {
  const auto it = std::find(column_labels.begin(), column_labels.end(), label);
  if (it == column_labels.end()) throw DimensionError("no coefficient labelled '" + label + "'");
  return coefficients[it - column_labels.begin()];
}

double FitResult::standard_error(std::size_t index) const {
  if (index >= static_cast<std::size_t>(covariance.rows())) {
    throw DimensionError(fmt::format("coefficient index {} out of range", index));
  }
  return std::sqrt(std::max(0.0, covariance(index, index)));
}

Eigen::VectorXd weighted_score(const DesignMatrix& design, std::span<const double> response,
                               std::span<const double> weights, const Eigen::VectorXd& coefficients) {
  if (static_cast<std::size_t>(coefficients.size()) != design.cols()) {
    throw DimensionError("coefficient length does not match design columns");
  }
  const Eigen::Map<const Eigen::VectorXd> r(response.data(), static_cast<Eigen::Index>(response.size()));
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const Eigen::VectorXd eta = design.values() * coefficients;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = w[i] * (r[i] - expit(eta[i]));
  return design.values().transpose() * resid;
}

FitResult fit_weighted_logistic(const DesignMatrix& design, std::span<const double> response,
                                std::span<const double> weights, const FitOptions& options) {
  check_inputs(design, response, weights);

  const Eigen::MatrixXd& x = design.values();
  const auto n = static_cast<Eigen::Index>(design.rows());
  const auto p = static_cast<Eigen::Index>(design.cols());
  const Eigen::Map<const Eigen::VectorXd> r_map(response.data(), n);
  const Eigen::Map<const Eigen::VectorXd> w_map(weights.data(), n);
  const Eigen::VectorXd r = r_map;
  const Eigen::VectorXd w = w_map;

  // Rank of the prior-weighted cross-product, pivoted, relative threshold.
  {
    const Eigen::MatrixXd cross = x.transpose() * w.asDiagonal() * x;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cross);
    qr.setThreshold(options.rank_tolerance);
    if (qr.rank() < p) {
      throw RankDeficientError(fmt::format("weighted design has rank {} < {} columns", qr.rank(), p));
    }
  }

  const double total_weight = w.sum();
  FitResult result;
  result.column_labels = design.column_labels();
  result.score_tolerance = options.score_tolerance * std::max(1.0, total_weight);

  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  double loglik = quasi_loglik(x, r, w, b);
  Eigen::VectorXd mu(n);
  Eigen::VectorXd info_weight(n);
  Eigen::MatrixXd info(p, p);

  auto evaluate = [&](const Eigen::VectorXd& coef, Eigen::VectorXd& grad) {
    const Eigen::VectorXd eta = x * coef;
    for (Eigen::Index i = 0; i < n; ++i) {
      mu[i] = expit(eta[i]);
      info_weight[i] = w[i] * mu[i] * (1.0 - mu[i]);
    }
    grad = x.transpose() * (w.array() * (r - mu).array()).matrix();
    info = x.transpose() * info_weight.asDiagonal() * x;
  };

  Eigen::VectorXd grad(p);
  bool step_converged = false;
  int iter = 0;
  while (iter < options.max_iterations) {
    ++iter;
    evaluate(b, grad);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw SeparationError("information matrix lost positive definiteness (fitted probabilities at 0/1)");
    }
    const Eigen::VectorXd delta = ldlt.solve(grad);

    // Step halving on the concave quasi-log-likelihood.
    double step = 1.0;
    Eigen::VectorXd candidate = b + delta;
    double candidate_loglik = quasi_loglik(x, r, w, candidate);
    const double slack = 1e-12 * (std::abs(loglik) + 1.0);
    for (int halving = 0; halving < 40 && !(candidate_loglik >= loglik - slack); ++halving) {
      step *= 0.5;
      candidate = b + step * delta;
      candidate_loglik = quasi_loglik(x, r, w, candidate);
    }

    if (candidate.cwiseAbs().maxCoeff() > options.coefficient_guard) {
      Eigen::Index worst = 0;
      candidate.cwiseAbs().maxCoeff(&worst);
      throw SeparationError(fmt::format("coefficient '{}' reached {:.3g}, beyond the guard of {}; the MLE "
                                        "does not exist (separation)",
                                        design.column_labels()[static_cast<std::size_t>(worst)],
                                        candidate[worst], options.coefficient_guard));
    }

    const double change = (candidate - b).cwiseAbs().maxCoeff();
    b = candidate;
    loglik = candidate_loglik;
    if (change < options.step_tolerance) {
      step_converged = true;
      break;
    }
  }

  evaluate(b, grad);
  result.iterations = iter;
  result.final_score_norm = grad.norm();
  if (!step_converged) {
    throw NonConvergenceError(fmt::format("IRLS did not converge in {} iterations (score norm {:.3g})", iter,
                                          result.final_score_norm),
                              iter, result.final_score_norm);
  }

  result.coefficients = b;
  result.converged = result.final_score_norm <= result.score_tolerance;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  result.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  result.covariance = 0.5 * (result.covariance + result.covariance.transpose()).eval();
  return result;
}

FitResult fit_logistic(const DesignMatrix& design, std::span<const double> response, const FitOptions& options) {
  const std::vector<double> ones(design.rows(), 1.0);
  return fit_weighted_logistic(design, response, ones, options);
}

std::vector<double> predict(const FitResult& fit, const DesignMatrix& design) {
  if (static_cast<std::size_t>(fit.coefficients.size()) != design.cols()) {
    throw DimensionError(fmt::format("fit has {} coefficients but design has {} columns", fit.coefficients.size(),
                                     design.cols()));
  }
  const Eigen::VectorXd eta = design.values() * fit.coefficients;
  std::vector<double> out(static_cast<std::size_t>(eta.size()));
  for (Eigen::Index i = 0; i < eta.size(); ++i) out[static_cast<std::size_t>(i)] = expit(eta[i]);
  return out;
}

double normal_two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DimensionError(fmt::format("level {} is not in (0, 1)", level));
  const boost::math::normal standard;
  return boost::math::quantile(standard, 0.5 + level / 2.0);
}

Interval wald_interval(const FitResult& fit, std::size_t coefficient_index, double level) {
  if (!fit.converged) throw NonConvergenceError("Wald interval requested for a non-converged fit", fit.iterations,
                                                fit.final_score_norm);
  const double z = normal_two_sided_quantile(level);
  const double est = fit.coefficients[static_cast<Eigen::Index>(coefficient_index)];
  const double se = fit.standard_error(coefficient_index);
  return {est - z * se, est + z * se};
}

}  // namespace tndipw::glm
