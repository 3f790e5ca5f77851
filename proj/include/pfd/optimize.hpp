#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "pfd/design.hpp"
#include "pfd/subset_index.hpp"

namespace pfd {

/// Running (1/n)-scaled Gram mass of the rounds observed so far.
class ExperimentState {
 public:
  ExperimentState(const SubsetIndex& index, int n_per_round);

  /// Fold in one round of features; weight scales the round's Gram
  /// contribution (1/sigma_t^2 in the heteroskedastic case).
  void add_round(const FeatureMatrix& features, double weight = 1.0);

  const SubsetIndex& index() const { return *index_; }
  const Eigen::MatrixXd& gram_mass() const { return P_; }
  int rounds() const { return rounds_; }
  int n_per_round() const { return n_; }

 private:
  const SubsetIndex* index_;
  Eigen::MatrixXd P_;
  int rounds_ = 0;
  int n_;
};

enum class AcquisitionObjective { eigen_sum, min_eig_proxy };

struct AcquisitionOptions {
  AcquisitionObjective objective = AcquisitionObjective::eigen_sum;
  int restarts = 5;
  int max_iters = 500;
  double tol = 1e-6;
  std::optional<double> supply_limit;  // sum_i d_i <= L when set
  std::uint64_t seed = 0;              // for the random restarts
  /// The proxy is markedly faster at larger p; mirror that default.
  static AcquisitionOptions defaults_for(int p);
};

struct ActiveResult {
  Dosage dosage;
  double objective = 0.0;
  bool converged = true;  // false when every restart hit max_iters
};

/// Near-optimal passive design: the half dosage.
Dosage passive_dosage(int p);

/// Near-optimal passive design under sum_i d_i <= L: uniform L/p entries,
/// or the half dosage when it is feasible (L >= p/2).
Dosage constrained_passive_dosage(int p, double L);

/// Analytic minimum eigenvalue of Sigma(d) for the uniform L/p dosage at
/// k = 1 (conjectured to carry the same optimality for k > 1).
double min_eig_additive_uniform(int p, double L);

/// Minimize the acquisition objective over dosages; the half dosage is
/// always evaluated as a candidate, so the result never does worse than it.
ActiveResult active_dosage(const ExperimentState& state,
                           const AcquisitionOptions& opts);

/// Heteroskedastic variant: state rounds were added with weights 1/sigma_t^2
/// and the current round's Sigma(d) is scaled by 1/sigma_T^2.
ActiveResult hetero_active_dosage(const ExperimentState& state, double sigma_T,
                                  const AcquisitionOptions& opts);

/// Cardinality-limited design: half dosage on D, zero elsewhere, plus the
/// column reduction X = X_D Gamma_D.
struct CardinalityDesign {
  Dosage dosage;
  SubsetIndex reduced;              // subsets of D, |S| <= k, canonical order
  std::vector<int> reduced_column;  // full column j -> reduced column
  std::vector<double> column_sign;  // (-1)^{|S \ D|}
};
CardinalityDesign cardinality_design(int p, int k,
                                     const std::vector<int>& treatments,
                                     int limit);

/// Explicit distribution over {-1,+1}^p, indexed by the p-bit integer
/// encoding of the combination (set bit = +1).
struct CombinationDistribution {
  int p = 0;
  std::vector<double> prob;  // size 2^p
};

/// Marginal-matching dosage: d_i = P_q(treatment i applied).
Dosage emulate_dosage(const CombinationDistribution& q);

/// KL(q || product Bernoulli of d) in nats, by the explicit outcome sum;
/// +infinity when q puts mass outside the support of d.
double kl_divergence(const CombinationDistribution& q, const Dosage& d);

}  // namespace pfd
