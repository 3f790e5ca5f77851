#include "pfd/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pfd/kernels.hpp"

namespace pfd {

namespace {

constexpr double kSingularRel = 1e-10;

struct SpectralGram {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;
  Eigen::VectorXd xty;
  double eigen_sum = 0.0;  // +inf when singular
  double lambda_min = 0.0;
  double trace = 0.0;
  bool singular = false;
};

SpectralGram spectral_gram(const FeatureMatrix& features,
                           const Eigen::VectorXd& y,
                           const std::optional<Eigen::VectorXd>& row_weights) {
  const auto n = features.rows();
  const auto K = features.cols();
  if (y.size() != n)
    throw std::invalid_argument("estimator: Y length does not match X rows");
  if (n < 1) throw std::invalid_argument("estimator: empty design");

  const FeatureMatrix* X = &features;
  Eigen::VectorXd yw = y;
  FeatureMatrix Xw;
  if (row_weights) {
    if (row_weights->size() != n)
      throw std::invalid_argument("estimator: weight length does not match X");
    Xw = row_weights->asDiagonal() * features;
    yw = row_weights->cwiseProduct(y);
    X = &Xw;
  }

  SpectralGram out;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(K, K);
  {
    // X^T X and X^T y through the dispatched kernels.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Gr =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                      Eigen::RowMajor>::Zero(K, K);
    kernels::gram(Gr.data(), X->data(), static_cast<std::size_t>(n),
                  static_cast<std::size_t>(K));
    G = Gr;
    out.xty = Eigen::VectorXd::Zero(K);
    kernels::xty(out.xty.data(), X->data(), yw.data(),
                 static_cast<std::size_t>(n), static_cast<std::size_t>(K));
  }

  auto [evals, evecs] = eigh(G);
  out.eigenvalues = evals;
  out.eigenvectors = evecs;
  out.trace = G.trace();
  out.lambda_min = evals[0];
  const double tol = kSingularRel * std::max(1.0, evals[K - 1]);
  out.eigen_sum = 0.0;
  for (Eigen::Index i = 0; i < K; ++i) {
    if (evals[i] <= tol) {
      out.singular = true;
      out.eigen_sum = std::numeric_limits<double>::infinity();
      break;
    }
    out.eigen_sum += 1.0 / evals[i];
  }
  return out;
}

Eigen::VectorXd solve_shifted(const SpectralGram& g, double shift) {
  // (G + shift I)^{-1} X^T y from the spectral factorization.
  Eigen::VectorXd z = g.eigenvectors.transpose() * g.xty;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z[i] /= (g.eigenvalues[i] + shift);
  return g.eigenvectors * z;
}

}  // namespace

const char* branch_name(EstimatorBranch b) {
  switch (b) {
    case EstimatorBranch::ols:
      return "ols";
    case EstimatorBranch::ridge:
      return "ridge";
    case EstimatorBranch::null:
      return "null";
  }
  return "?";
}

EstimationResult truncated_ols(
    const FeatureMatrix& features, const Eigen::VectorXd& y, double B,
    double sigma, const std::optional<Eigen::VectorXd>& row_weights) {
  if (B <= 0.0 || sigma < 0.0)
    throw std::invalid_argument(
        "truncated_ols: B must be positive and sigma nonnegative");
  SpectralGram g = spectral_gram(features, y, row_weights);
  EstimationResult r;
  r.eigen_sum = g.eigen_sum;
  r.lambda_min = g.lambda_min;
  if (g.singular || g.eigen_sum > B * B / (sigma * sigma)) {
    r.branch = EstimatorBranch::null;
    r.beta_hat = Eigen::VectorXd::Zero(features.cols());
  } else {
    r.branch = EstimatorBranch::ols;
    r.beta_hat = solve_shifted(g, 0.0);
  }
  return r;
}

EstimationResult ols_ridge(
    const FeatureMatrix& features, const Eigen::VectorXd& y, double B,
    double sigma, const std::optional<Eigen::VectorXd>& row_weights) {
  if (B <= 0.0 || sigma < 0.0)
    throw std::invalid_argument(
        "ols_ridge: B must be positive and sigma nonnegative");
  const auto K = features.cols();
  SpectralGram g = spectral_gram(features, y, row_weights);
  const auto n = features.rows();
  EstimationResult r;
  r.eigen_sum = g.eigen_sum;
  r.lambda_min = g.lambda_min;
  if (g.singular) {
    // Divergent penalty limit.
    r.branch = EstimatorBranch::ridge;
    r.beta_hat = Eigen::VectorXd::Zero(K);
    return r;
  }
  const double lmin = g.lambda_min;
  const double Kns2 = static_cast<double>(K) * n * sigma * sigma;
  if (1.0 / lmin <= (B * B * n) / (B * B * lmin + Kns2)) {
    r.branch = EstimatorBranch::ols;
    r.beta_hat = solve_shifted(g, 0.0);
  } else {
    r.branch = EstimatorBranch::ridge;
    const double penalty = sigma * sigma * g.trace / (B * B * lmin);
    r.beta_hat = solve_shifted(g, penalty);
  }
  return r;
}

double mse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true) {
  if (beta_hat.size() != beta_true.size())
    throw std::invalid_argument("mse: length mismatch");
  return (beta_hat - beta_true).squaredNorm();
}

}  // namespace pfd
