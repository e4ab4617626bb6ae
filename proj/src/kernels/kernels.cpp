#include "hypolab/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace hypolab::kernels {
namespace {

std::string forced;

const Kernels* select() {
  if (forced == "scalar") return &scalar();
#if defined(HYPOLAB_BUILD_AVX2)
  if (forced == "avx2") return &avx2();
#endif
  if (!forced.empty()) throw std::runtime_error("unknown kernel backend: " + forced);
  if (const char* env = std::getenv("HYPOLAB_KERNELS")) {
    forced = env;
    const Kernels* k = select();
    forced.clear();
    return k;
  }
#if defined(HYPOLAB_BUILD_AVX2)
  if (__builtin_cpu_supports("avx2")) return &avx2();
#endif
  return &scalar();
}

}  // namespace

const Kernels& active() { return *select(); }

void force_backend(const std::string& name) { forced = name; }

}  // namespace hypolab::kernels
