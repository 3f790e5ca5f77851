#include "pfd/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pfd/kernels.hpp"

namespace pfd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEigenFloor = 1e-12;
constexpr double kGapFloor = 1e-6;  // below this, eigenvalue crossing: use FD

// Leave-one-out product over the set bits of diff, excluding bit j.
double loo_product(std::uint64_t diff, int j, const Eigen::VectorXd& t) {
  double v = 1.0;
  std::uint64_t m = diff & ~(std::uint64_t{1} << j);
  while (m) {
    v *= t[__builtin_ctzll(m)];
    m &= m - 1;
  }
  return v;
}

struct ObjectiveContext {
  const SubsetIndex* index;
  const Eigen::MatrixXd* P;
  double sigma_scale = 1.0;  // multiplies Sigma(d)
  AcquisitionObjective objective;

  Eigen::MatrixXd system_matrix(const Eigen::VectorXd& d) const {
    return sigma_scale * sigma_of_d(Dosage(d), *index) + *P;
  }

  double value(const Eigen::VectorXd& d) const {
    Eigen::VectorXd evals = spectrum(system_matrix(d));
    if (evals[0] <= kEigenFloor) return kInf;
    if (objective == AcquisitionObjective::min_eig_proxy) return 1.0 / evals[0];
    double s = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) s += 1.0 / evals[i];
    return s;
  }

  // Objective and gradient in one pass. For the eigen-sum, dF = -tr(M^-2 dM)
  // holds regardless of eigenvalue multiplicity; the proxy needs a simple
  // minimum eigenvalue and falls back to central differences near crossings.
  double value_grad(const Eigen::VectorXd& d, Eigen::VectorXd& grad) const {
    const int p = index->p();
    const int K = index->size();
    auto [evals, evecs] = eigh(system_matrix(d));
    grad = Eigen::VectorXd::Zero(p);
    if (evals[0] <= kEigenFloor) return kInf;

    Eigen::VectorXd t(p);
    for (int i = 0; i < p; ++i) t[i] = 2.0 * d[i] - 1.0;

    if (objective == AcquisitionObjective::min_eig_proxy) {
      const double lmin = evals[0];
      if (K > 1 && evals[1] - evals[0] < kGapFloor) {
        finite_difference_grad(d, grad);
        return 1.0 / lmin;
      }
      const Eigen::VectorXd v = evecs.col(0);
      accumulate_quadratic_grad(t, v, grad);
      grad *= -sigma_scale / (lmin * lmin);
      return 1.0 / lmin;
    }

    double value = 0.0;
    for (Eigen::Index i = 0; i < K; ++i) value += 1.0 / evals[i];
    // M^-2 through the factorization already at hand.
    Eigen::MatrixXd Minv2 = evecs *
                            evals.array().square().inverse().matrix().asDiagonal() *
                            evecs.transpose();
    accumulate_trace_grad(t, Minv2, grad);
    grad *= -sigma_scale;
    return value;
  }

  // grad_j += 2 sum_{a<b} W_ab dSigma_ab/dd_j, with
  // dSigma_ab/dd_j = 2 prod_{l in diff \ j} t_l for j in the pair's
  // symmetric difference.
  void accumulate_trace_grad(const Eigen::VectorXd& t, const Eigen::MatrixXd& W,
                             Eigen::VectorXd& grad) const {
    const int K = index->size();
    for (int a = 0; a < K; ++a) {
      for (int b = a + 1; b < K; ++b) {
        std::uint64_t diff = index->mask(a) ^ index->mask(b);
        const double w = 4.0 * W(a, b);
        std::uint64_t m = diff;
        while (m) {
          int j = __builtin_ctzll(m);
          m &= m - 1;
          grad[j] += w * loo_product(diff, j, t);
        }
      }
    }
  }

  void accumulate_quadratic_grad(const Eigen::VectorXd& t,
                                 const Eigen::VectorXd& v,
                                 Eigen::VectorXd& grad) const {
    const int K = index->size();
    for (int a = 0; a < K; ++a) {
      for (int b = a + 1; b < K; ++b) {
        std::uint64_t diff = index->mask(a) ^ index->mask(b);
        const double w = 4.0 * v[a] * v[b];
        std::uint64_t m = diff;
        while (m) {
          int j = __builtin_ctzll(m);
          m &= m - 1;
          grad[j] += w * loo_product(diff, j, t);
        }
      }
    }
  }

  void finite_difference_grad(const Eigen::VectorXd& d,
                              Eigen::VectorXd& grad) const {
    const double h = 1e-6;
    Eigen::VectorXd probe = d;
    for (int j = 0; j < d.size(); ++j) {
      const double lo = std::max(0.0, d[j] - h);
      const double hi = std::min(1.0, d[j] + h);
      probe[j] = hi;
      const double fp = value(probe);
      probe[j] = lo;
      const double fm = value(probe);
      probe[j] = d[j];
      grad[j] = (fp - fm) / (hi - lo);
    }
  }
};

// Euclidean projection onto [0,1]^p intersected with sum d_i <= L.
Eigen::VectorXd project_feasible(Eigen::VectorXd d,
                                 const std::optional<double>& limit) {
  d = d.cwiseMax(0.0).cwiseMin(1.0);
  if (!limit || d.sum() <= *limit) return d;
  double lo = 0.0, hi = d.maxCoeff();
  for (int it = 0; it < 100; ++it) {
    const double theta = 0.5 * (lo + hi);
    const double s =
        (d.array() - theta).cwiseMax(0.0).cwiseMin(1.0).sum();
    if (s > *limit)
      lo = theta;
    else
      hi = theta;
  }
  return (d.array() - hi).cwiseMax(0.0).cwiseMin(1.0);
}

struct LocalSearchResult {
  Eigen::VectorXd d;
  double value;
  bool hit_max_iters;
};

LocalSearchResult projected_gradient(const ObjectiveContext& ctx,
                                     Eigen::VectorXd d,
                                     const AcquisitionOptions& opts) {
  d = project_feasible(std::move(d), opts.supply_limit);
  Eigen::VectorXd grad;
  double f = ctx.value_grad(d, grad);
  double step = 0.1;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    bool improved = false;
    for (int bt = 0; bt < 30; ++bt) {
      Eigen::VectorXd cand =
          project_feasible(d - step * grad, opts.supply_limit);
      const double fc = ctx.value(cand);
      if (fc < f - 1e-15) {
        const double gain = f - fc;
        d = std::move(cand);
        f = ctx.value_grad(d, grad);
        step *= 2.0;
        improved = true;
        if (gain < opts.tol) return {d, f, false};
        break;
      }
      step *= 0.5;
      if (step < 1e-12) return {d, f, false};
    }
    if (!improved) return {d, f, false};
  }
  return {d, f, true};
}

ActiveResult optimize_dosage(const ObjectiveContext& ctx,
                             const AcquisitionOptions& opts) {
  if (opts.restarts < 1 || opts.tol <= 0.0)
    throw std::invalid_argument("active_dosage: bad options");
  const int p = ctx.index->p();

  // The half dosage (projected when constrained) is always a candidate, so
  // the returned objective can never exceed it.
  Eigen::VectorXd half =
      project_feasible(Eigen::VectorXd::Constant(p, 0.5), opts.supply_limit);
  const double half_value = ctx.value(half);

  Eigen::VectorXd best = half;
  double best_value = half_value;
  bool any_converged = false;

  Rng rng(mix64(opts.seed ^ 0x616374697665ULL));
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd start(p);
    if (r == 0) {
      start = half;
    } else {
      for (int i = 0; i < p; ++i) start[i] = rng.uniform();
    }
    LocalSearchResult local = projected_gradient(ctx, std::move(start), opts);
    if (!local.hit_max_iters) any_converged = true;
    if (local.value < best_value - 1e-12 * std::max(1.0, std::abs(best_value))) {
      best = std::move(local.d);
      best_value = local.value;
    }
  }
  return ActiveResult{Dosage(best), best_value, any_converged};
}

}  // namespace

ExperimentState::ExperimentState(const SubsetIndex& index, int n_per_round)
    : index_(&index),
      P_(Eigen::MatrixXd::Zero(index.size(), index.size())),
      n_(n_per_round) {
  if (n_per_round < 1)
    throw std::invalid_argument("ExperimentState: n_per_round must be >= 1");
}

void ExperimentState::add_round(const FeatureMatrix& features, double weight) {
  if (features.cols() != index_->size())
    throw std::invalid_argument("ExperimentState: feature width mismatch");
  const auto K = features.cols();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> G =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                    Eigen::RowMajor>::Zero(K, K);
  kernels::gram(G.data(), features.data(),
                static_cast<std::size_t>(features.rows()),
                static_cast<std::size_t>(K));
  P_ += (weight / static_cast<double>(n_)) * G;
  ++rounds_;
}

AcquisitionOptions AcquisitionOptions::defaults_for(int p) {
  AcquisitionOptions opts;
  opts.objective = p >= 15 ? AcquisitionObjective::min_eig_proxy
                           : AcquisitionObjective::eigen_sum;
  return opts;
}

Dosage passive_dosage(int p) { return Dosage::half(p); }

Dosage constrained_passive_dosage(int p, double L) {
  if (L <= 0.0)
    throw std::invalid_argument("constrained_passive_dosage: L must be > 0");
  if (L >= p / 2.0) return Dosage::half(p);
  return Dosage::uniform(p, L / p);
}

double min_eig_additive_uniform(int p, double L) {
  const double r = 2.0 * L / p - 1.0;
  const double c = 1.0 - r * r;
  const double a = c + 1.0 + p * (1.0 - c);
  return 0.5 * (a - std::sqrt(a * a - 4.0 * c));
}

ActiveResult active_dosage(const ExperimentState& state,
                           const AcquisitionOptions& opts) {
  ObjectiveContext ctx{&state.index(), &state.gram_mass(), 1.0, opts.objective};
  return optimize_dosage(ctx, opts);
}

ActiveResult hetero_active_dosage(const ExperimentState& state, double sigma_T,
                                  const AcquisitionOptions& opts) {
  if (sigma_T <= 0.0)
    throw std::invalid_argument("hetero_active_dosage: sigma_T must be > 0");
  ObjectiveContext ctx{&state.index(), &state.gram_mass(),
                       1.0 / (sigma_T * sigma_T), opts.objective};
  return optimize_dosage(ctx, opts);
}

CardinalityDesign cardinality_design(int p, int k,
                                     const std::vector<int>& treatments,
                                     int limit) {
  if (treatments.empty())
    throw std::invalid_argument("cardinality_design: empty treatment set");
  if (static_cast<int>(treatments.size()) > limit)
    throw std::invalid_argument("cardinality_design: |D| exceeds the limit");
  std::uint64_t dmask = 0;
  for (int v : treatments) {
    if (v < 1 || v > p)
      throw std::invalid_argument("cardinality_design: treatment out of range");
    const std::uint64_t bit = std::uint64_t{1} << (v - 1);
    if (dmask & bit)
      throw std::invalid_argument("cardinality_design: duplicate treatment");
    dmask |= bit;
  }

  Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
  std::vector<int> sorted = treatments;
  std::sort(sorted.begin(), sorted.end());
  for (int v : sorted) d[v - 1] = 0.5;

  // Relabel: i-th smallest member of D becomes treatment i in the reduced
  // problem.
  std::vector<int> relabel(p + 1, -1);
  for (std::size_t i = 0; i < sorted.size(); ++i)
    relabel[sorted[i]] = static_cast<int>(i) + 1;

  const int pd = static_cast<int>(sorted.size());
  SubsetIndex full(p, k);
  SubsetIndex reduced(pd, std::min(k, pd));

  CardinalityDesign out{Dosage(d), reduced, {}, {}};
  out.reduced_column.resize(full.size());
  out.column_sign.resize(full.size());
  for (int j = 0; j < full.size(); ++j) {
    const std::uint64_t s = full.mask(j);
    std::uint64_t inter = s & dmask;
    std::uint64_t reduced_mask = 0;
    while (inter) {
      int b = __builtin_ctzll(inter);
      inter &= inter - 1;
      reduced_mask |= std::uint64_t{1} << (relabel[b + 1] - 1);
    }
    out.reduced_column[j] = out.reduced.column_of(reduced_mask);
    const int outside = __builtin_popcountll(s & ~dmask);
    out.column_sign[j] = (outside % 2 == 0) ? 1.0 : -1.0;
  }
  return out;
}

Dosage emulate_dosage(const CombinationDistribution& q) {
  if (q.p < 1 || q.p > 16)
    throw std::invalid_argument("emulate_dosage: p must be in [1, 16]");
  if (q.prob.size() != (std::size_t{1} << q.p))
    throw std::invalid_argument("emulate_dosage: probability table size != 2^p");
  double total = 0.0;
  for (double v : q.prob) {
    if (v < 0.0)
      throw std::invalid_argument("emulate_dosage: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("emulate_dosage: probabilities must sum to 1");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(q.p);
  for (std::size_t x = 0; x < q.prob.size(); ++x)
    for (int i = 0; i < q.p; ++i)
      if ((x >> i) & 1) d[i] += q.prob[x];
  return Dosage(d.cwiseMax(0.0).cwiseMin(1.0));
}

double kl_divergence(const CombinationDistribution& q, const Dosage& d) {
  if (d.p() != q.p)
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  if (q.prob.size() != (std::size_t{1} << q.p))
    throw std::invalid_argument("kl_divergence: probability table size != 2^p");
  double kl = 0.0;
  for (std::size_t x = 0; x < q.prob.size(); ++x) {
    const double qx = q.prob[x];
    if (qx == 0.0) continue;
    double px = 1.0;
    for (int i = 0; i < q.p; ++i) px *= ((x >> i) & 1) ? d[i] : 1.0 - d[i];
    if (px == 0.0) return kInf;
    kl += qx * std::log(qx / px);
  }
  return std::max(kl, 0.0);
}

}  // namespace pfd
