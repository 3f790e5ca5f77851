#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "pfd/rng.hpp"
#include "pfd/subset_index.hpp"

namespace pfd {

/// Per-treatment probabilities of assignment; entries must lie in [0, 1].
class Dosage {
 public:
  explicit Dosage(Eigen::VectorXd d);
  static Dosage half(int p) { return Dosage(Eigen::VectorXd::Constant(p, 0.5)); }
  static Dosage uniform(int p, double value) {
    return Dosage(Eigen::VectorXd::Constant(p, value));
  }

  int p() const { return static_cast<int>(d_.size()); }
  double operator[](int i) const { return d_[i]; }
  const Eigen::VectorXd& vec() const { return d_; }

 private:
  Eigen::VectorXd d_;
};

/// Assignments are +-1 matrices with one unit per row.
using AssignmentMatrix = Eigen::MatrixXd;

/// Row-major so the per-unit feature rows feed the accumulation kernels
/// contiguously.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct DesignMatrix {
  AssignmentMatrix assignments;  // n x p
  FeatureMatrix features;        // n x K, features(m, j) = phi_{S_j}(x_m)
};

/// Independent product-Bernoulli draws: entry (m, i) is +1 with probability d_i.
AssignmentMatrix sample_assignments(const Dosage& d, int n, Rng& rng);

DesignMatrix design_matrix(const AssignmentMatrix& assignments,
                           const SubsetIndex& index);

/// Expected per-sample Gram matrix: Sigma(d)_{S,S'} = prod over the symmetric
/// difference of S and S' of (2 d_i - 1).
Eigen::MatrixXd sigma_of_d(const Dosage& d, const SubsetIndex& index);

/// Eigenvalues of a symmetric matrix, ascending. Throws on asymmetric input.
Eigen::VectorXd spectrum(const Eigen::MatrixXd& M);

/// Spectrum plus eigenvectors (columns, matching the ascending order).
std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigh(const Eigen::MatrixXd& M);

/// One generator per extra factor: the target column equals the product of
/// the (1-based) source columns in every row.
struct Generator {
  int target;
  std::vector<int> sources;
};

/// Two-level fractional factorial: full factorial on the non-generated
/// factors, generated columns filled from the defining products.
AssignmentMatrix fractional_design(int p, const std::vector<Generator>& generators);

/// Standard Resolution V choices used by the harness.
AssignmentMatrix resolution_v_design(int p);  // p = 5 (2^{5-1}) or p = 8 (2^{8-2})
bool has_resolution_v_design(int p);

void write_assignments_csv(const AssignmentMatrix& assignments, std::ostream& os);

}  // namespace pfd
