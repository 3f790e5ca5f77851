#include "pfd/kernels.hpp"

#include <stdexcept>

namespace pfd::kernels {
namespace {

const Backend* detect() {
#if defined(__x86_64__)
  if (avx2_backend.gram != nullptr && __builtin_cpu_supports("avx2") &&
      __builtin_cpu_supports("fma"))
    return &avx2_backend;
#endif
  return &scalar_backend;
}

const Backend*& current() {
  static const Backend* b = detect();
  return b;
}

}  // namespace

const Backend& active() { return *current(); }

void set_backend(const std::string& name) {
  if (name == "scalar") {
    current() = &scalar_backend;
    return;
  }
#if defined(__x86_64__)
  if (name == "avx2") {
    if (avx2_backend.gram == nullptr || !__builtin_cpu_supports("avx2"))
      throw std::runtime_error("avx2 backend unavailable on this machine");
    current() = &avx2_backend;
    return;
  }
#endif
  throw std::invalid_argument("unknown kernel backend: " + name);
}

}  // namespace pfd::kernels
