#include "pfd/kernels.hpp"

namespace pfd::kernels {
namespace {

void gram_scalar(double* C, const double* X, std::size_t n, std::size_t K) {
  // Upper triangle of rank-n update, mirrored at the end.
  for (std::size_t m = 0; m < n; ++m) {
    const double* row = X + m * K;
    for (std::size_t i = 0; i < K; ++i) {
      const double xi = row[i];
      double* ci = C + i * K;
      for (std::size_t j = i; j < K; ++j) ci[j] += xi * row[j];
    }
  }
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) C[j * K + i] = C[i * K + j];
}

void xty_scalar(double* b, const double* X, const double* y, std::size_t n,
                std::size_t K) {
  for (std::size_t m = 0; m < n; ++m) {
    const double* row = X + m * K;
    const double ym = y[m];
    for (std::size_t j = 0; j < K; ++j) b[j] += ym * row[j];
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const Backend scalar_backend = {gram_scalar, xty_scalar, dot_scalar, "scalar"};

}  // namespace pfd::kernels
