#pragma once

#include <cstddef>
#include <string>

namespace pfd::kernels {

// Inner loops of design-matrix accumulation. Each kernel has a scalar
// reference implementation and an AVX2 variant; the active backend is
// picked at startup from cpuid and can be forced for testing.

struct Backend {
  // C (K x K, row major) += X^T X for row-major X (n x K).
  void (*gram)(double* C, const double* X, std::size_t n, std::size_t K);
  // b (K) += X^T y.
  void (*xty)(double* b, const double* X, const double* y, std::size_t n,
              std::size_t K);
  double (*dot)(const double* a, const double* b, std::size_t n);
  const char* name;
};

extern const Backend scalar_backend;
#ifdef __x86_64__
extern const Backend avx2_backend;  // null pointers when not compiled in
#endif

const Backend& active();

/// Force a backend by name ("scalar" or "avx2"); throws on unknown or
/// unavailable names. Intended for tests and benchmarking.
void set_backend(const std::string& name);

inline void gram(double* C, const double* X, std::size_t n, std::size_t K) {
  active().gram(C, X, n, K);
}
inline void xty(double* b, const double* X, const double* y, std::size_t n,
                std::size_t K) {
  active().xty(b, X, y, n, K);
}
inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}

}  // namespace pfd::kernels
