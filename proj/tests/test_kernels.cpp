#include <doctest.h>

#include <stdexcept>

#include <Eigen/Core>
#include <string>
#include <vector>

#include "pfd/kernels.hpp"
#include "pfd/rng.hpp"

using namespace pfd;

namespace {

struct BackendGuard {
  std::string saved;
  BackendGuard() : saved(kernels::active().name) {}
  ~BackendGuard() { kernels::set_backend(saved); }
};

bool avx2_available() {
#ifdef __x86_64__
  return kernels::avx2_backend.gram != nullptr &&
         __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace

TEST_CASE("scalar gram matches the Eigen reference") {
  Rng rng(1);
  for (auto [n, K] : {std::pair{1, 1}, {3, 4}, {17, 11}, {64, 37}}) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X(n,
                                                                             K);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < K; ++c) X(r, c) = rng.uniform(-2.0, 2.0);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C =
        Eigen::MatrixXd::Zero(K, K);
    kernels::scalar_backend.gram(C.data(), X.data(), n, K);
    Eigen::MatrixXd expect = X.transpose() * X;
    CHECK((C - expect).cwiseAbs().maxCoeff() < 1e-12 * n);
    // accumulation semantics: a second call doubles the result
    kernels::scalar_backend.gram(C.data(), X.data(), n, K);
    CHECK((C - 2.0 * expect).cwiseAbs().maxCoeff() < 1e-12 * n);
  }
}

TEST_CASE("scalar xty and dot match the Eigen reference") {
  Rng rng(2);
  const int n = 23, K = 9;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X(n,
                                                                           K);
  Eigen::VectorXd y(n);
  for (int r = 0; r < n; ++r) {
    y[r] = rng.normal();
    for (int c = 0; c < K; ++c) X(r, c) = rng.normal();
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  kernels::scalar_backend.xty(b.data(), X.data(), y.data(), n, K);
  CHECK((b - X.transpose() * y).cwiseAbs().maxCoeff() < 1e-12 * n);

  const double d = kernels::scalar_backend.dot(y.data(), y.data(), n);
  CHECK(d == doctest::Approx(y.squaredNorm()).epsilon(1e-13));
}

TEST_CASE("avx2 backend agrees with the scalar backend") {
  if (!avx2_available()) {
    MESSAGE("avx2 not available on this host; skipping");
    return;
  }
  Rng rng(3);
  // Sizes chosen to exercise the vector tail handling (K mod 4 in
  // {0,1,2,3}, n odd and even).
  for (auto [n, K] :
       {std::pair{1, 1}, {2, 4}, {7, 5}, {16, 16}, {33, 37}, {200, 56}}) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X(n,
                                                                             K);
    Eigen::VectorXd y(n);
    for (int r = 0; r < n; ++r) {
      y[r] = rng.uniform(-3.0, 3.0);
      for (int c = 0; c < K; ++c) X(r, c) = rng.uniform(-3.0, 3.0);
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
        Cs = Eigen::MatrixXd::Zero(K, K),
        Cv = Eigen::MatrixXd::Zero(K, K);
    kernels::scalar_backend.gram(Cs.data(), X.data(), n, K);
    kernels::avx2_backend.gram(Cv.data(), X.data(), n, K);
    // FMA reassociation perturbs the last bits only.
    CHECK((Cs - Cv).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, n * 9.0));

    Eigen::VectorXd bs = Eigen::VectorXd::Zero(K), bv = Eigen::VectorXd::Zero(K);
    kernels::scalar_backend.xty(bs.data(), X.data(), y.data(), n, K);
    kernels::avx2_backend.xty(bv.data(), X.data(), y.data(), n, K);
    CHECK((bs - bv).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, n * 9.0));

    const double ds = kernels::scalar_backend.dot(y.data(), y.data(), n);
    const double dv = kernels::avx2_backend.dot(y.data(), y.data(), n);
    CHECK(ds == doctest::Approx(dv).epsilon(1e-12));
  }
}

TEST_CASE("backend selection") {
  BackendGuard guard;
  kernels::set_backend("scalar");
  CHECK(std::string(kernels::active().name) == "scalar");
  if (avx2_available()) {
    kernels::set_backend("avx2");
    CHECK(std::string(kernels::active().name) == "avx2");
  }
  CHECK_THROWS_AS(kernels::set_backend("neon"), std::invalid_argument);
}
