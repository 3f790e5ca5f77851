#include "pfd/design.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace pfd {

Dosage::Dosage(Eigen::VectorXd d) : d_(std::move(d)) {
  if (d_.size() == 0) throw std::invalid_argument("Dosage: empty vector");
  for (Eigen::Index i = 0; i < d_.size(); ++i) {
    if (!(d_[i] >= 0.0 && d_[i] <= 1.0))
      throw std::invalid_argument("Dosage: entries must lie in [0, 1]");
  }
}

AssignmentMatrix sample_assignments(const Dosage& d, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_assignments: n must be >= 1");
  AssignmentMatrix x(n, d.p());
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < d.p(); ++i) x(m, i) = rng.rademacher(d[i]);
  return x;
}

DesignMatrix design_matrix(const AssignmentMatrix& assignments,
                           const SubsetIndex& index) {
  const int n = static_cast<int>(assignments.rows());
  const int p = index.p();
  if (assignments.cols() != p)
    throw std::invalid_argument("design_matrix: assignment width != p");
  const int K = index.size();
  FeatureMatrix features(n, K);
  for (int m = 0; m < n; ++m) {
    std::uint64_t bits = 0;
    for (int i = 0; i < p; ++i) {
      const double v = assignments(m, i);
      if (v != 1.0 && v != -1.0)
        throw std::invalid_argument("design_matrix: entries must be +-1");
      if (v > 0) bits |= std::uint64_t{1} << i;
    }
    for (int j = 0; j < K; ++j) features(m, j) = phi_bits(index.mask(j), bits);
  }
  return DesignMatrix{assignments, std::move(features)};
}

Eigen::MatrixXd sigma_of_d(const Dosage& d, const SubsetIndex& index) {
  if (d.p() != index.p())
    throw std::invalid_argument("sigma_of_d: dosage length != p");
  const int K = index.size();
  Eigen::VectorXd t(d.p());
  for (int i = 0; i < d.p(); ++i) t[i] = 2.0 * d[i] - 1.0;
  Eigen::MatrixXd sigma(K, K);
  for (int a = 0; a < K; ++a) {
    sigma(a, a) = 1.0;
    for (int b = a + 1; b < K; ++b) {
      std::uint64_t diff = index.mask(a) ^ index.mask(b);
      double v = 1.0;
      while (diff) {
        v *= t[__builtin_ctzll(diff)];
        diff &= diff - 1;
      }
      sigma(a, b) = v;
      sigma(b, a) = v;
    }
  }
  return sigma;
}

static void check_symmetric(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("spectrum: matrix not square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("spectrum: matrix not symmetric");
}

Eigen::VectorXd spectrum(const Eigen::MatrixXd& M) {
  check_symmetric(M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M,
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> eigh(const Eigen::MatrixXd& M) {
  check_symmetric(M);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

AssignmentMatrix fractional_design(int p, const std::vector<Generator>& generators) {
  const int m = static_cast<int>(generators.size());
  if (p <= 0 || m >= p)
    throw std::invalid_argument("fractional_design: need 0 <= generators < p");
  const int base = p - m;
  std::vector<bool> generated(p + 1, false);
  for (const auto& g : generators) {
    if (g.target < 1 || g.target > p || generated[g.target])
      throw std::invalid_argument("fractional_design: bad generator target");
    generated[g.target] = true;
    if (g.sources.empty())
      throw std::invalid_argument("fractional_design: empty generator");
    for (int s : g.sources)
      if (s < 1 || s > p || s == g.target)
        throw std::invalid_argument("fractional_design: bad generator source");
  }
  // Base factors are the non-generated ones; sources must come from them.
  std::vector<int> base_cols;
  for (int i = 1; i <= p; ++i)
    if (!generated[i]) base_cols.push_back(i);
  if (static_cast<int>(base_cols.size()) != base)
    throw std::invalid_argument("fractional_design: inconsistent generators");
  for (const auto& g : generators)
    for (int s : g.sources)
      if (generated[s])
        throw std::invalid_argument(
            "fractional_design: generator source is itself generated");

  const int n = 1 << base;
  AssignmentMatrix x(n, p);
  for (int row = 0; row < n; ++row) {
    for (int b = 0; b < base; ++b)
      x(row, base_cols[b] - 1) = (row >> b) & 1 ? 1.0 : -1.0;
    for (const auto& g : generators) {
      double v = 1.0;
      for (int s : g.sources) v *= x(row, s - 1);
      x(row, g.target - 1) = v;
    }
  }
  return x;
}

bool has_resolution_v_design(int p) { return p == 5 || p == 8; }

AssignmentMatrix resolution_v_design(int p) {
  // Minimum-aberration generators: 2^{5-1} with E = ABCD, and 2^{8-2} with
  // G = ABCD, H = ABEF.
  if (p == 5) return fractional_design(5, {{5, {1, 2, 3, 4}}});
  if (p == 8) return fractional_design(8, {{7, {1, 2, 3, 4}}, {8, {1, 2, 5, 6}}});
  throw std::invalid_argument(
      "resolution_v_design: supported p values are 5 and 8");
}

void write_assignments_csv(const AssignmentMatrix& assignments, std::ostream& os) {
  const int p = static_cast<int>(assignments.cols());
  for (int i = 0; i < p; ++i) os << (i ? "," : "") << "t" << (i + 1);
  os << "\n";
  for (int m = 0; m < assignments.rows(); ++m) {
    for (int i = 0; i < p; ++i)
      os << (i ? "," : "") << static_cast<int>(assignments(m, i));
    os << "\n";
  }
}

}  // namespace pfd
