#pragma once

#include <Eigen/Core>
#include <optional>

#include "pfd/design.hpp"

namespace pfd {

enum class EstimatorBranch { ols, ridge, null };

const char* branch_name(EstimatorBranch b);

struct EstimationResult {
  Eigen::VectorXd beta_hat;
  EstimatorBranch branch = EstimatorBranch::null;
  double eigen_sum = 0.0;   // sum_i 1/lambda_i(X^T X); +inf when singular
  double lambda_min = 0.0;  // of X^T X
};

/// OLS with spectral truncation: returns the zero vector whenever
/// sum_i 1/lambda_i(X^T X) exceeds B^2 / sigma^2 or X^T X is singular.
/// Optional per-row weights implement the weighted least squares
/// pre-transform (rows of X and Y scaled by w_t = 1/sigma_t).
EstimationResult truncated_ols(
    const FeatureMatrix& features, const Eigen::VectorXd& y, double B,
    double sigma,
    const std::optional<Eigen::VectorXd>& row_weights = std::nullopt);

/// OLS when well-conditioned, otherwise ridge with the analytic penalty
/// lambda = sigma^2 tr(X^T X) / (B^2 lambda_min); the zero vector in the
/// singular limit.
EstimationResult ols_ridge(
    const FeatureMatrix& features, const Eigen::VectorXd& y, double B,
    double sigma,
    const std::optional<Eigen::VectorXd>& row_weights = std::nullopt);

/// Squared l2 error ||beta_hat - beta_true||^2.
double mse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true);

}  // namespace pfd
