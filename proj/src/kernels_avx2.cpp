#include "pfd/kernels.hpp"

#if defined(PFD_KERNELS_AVX2) && defined(__x86_64__)
#include <immintrin.h>

namespace pfd::kernels {
namespace {

void gram_avx2(double* C, const double* X, std::size_t n, std::size_t K) {
  for (std::size_t m = 0; m < n; ++m) {
    const double* row = X + m * K;
    for (std::size_t i = 0; i < K; ++i) {
      const __m256d xi = _mm256_set1_pd(row[i]);
      double* ci = C + i * K;
      std::size_t j = i;
      for (; j + 4 <= K; j += 4) {
        __m256d c = _mm256_loadu_pd(ci + j);
        c = _mm256_fmadd_pd(xi, _mm256_loadu_pd(row + j), c);
        _mm256_storeu_pd(ci + j, c);
      }
      for (; j < K; ++j) ci[j] += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) C[j * K + i] = C[i * K + j];
}

void xty_avx2(double* b, const double* X, const double* y, std::size_t n,
              std::size_t K) {
  for (std::size_t m = 0; m < n; ++m) {
    const double* row = X + m * K;
    const __m256d ym = _mm256_set1_pd(y[m]);
    std::size_t j = 0;
    for (; j + 4 <= K; j += 4) {
      __m256d v = _mm256_loadu_pd(b + j);
      v = _mm256_fmadd_pd(ym, _mm256_loadu_pd(row + j), v);
      _mm256_storeu_pd(b + j, v);
    }
    for (; j < K; ++j) b[j] += y[m] * row[j];
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double lanes[4];
  _mm256_storeu_pd(lanes, acc);
  double s = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

const Backend avx2_backend = {gram_avx2, xty_avx2, dot_avx2, "avx2"};

}  // namespace pfd::kernels

#elif defined(__x86_64__)

namespace pfd::kernels {
const Backend avx2_backend = {nullptr, nullptr, nullptr, "avx2-unavailable"};
}

#endif
