#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace fplap::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(FPLAP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level initial_level() noexcept {
  Level level = detected_level();
  if (const char* env = std::getenv("FPLAP_SIMD")) {
    const std::string name(env);
    if (name == "scalar") level = Level::Scalar;
    else if (name == "avx2" && supported(Level::Avx2)) level = Level::Avx2;
    else if (name == "neon" && supported(Level::Neon)) level = Level::Neon;
  }
  return level;
}

std::atomic<Level>& current() noexcept {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
    case Level::Neon: return "neon";
  }
  return "unknown";
}

bool supported(Level level) noexcept {
  switch (level) {
    case Level::Scalar: return true;
    case Level::Avx2: return cpu_has_avx2();
    case Level::Neon:
#if defined(FPLAP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Level detected_level() noexcept {
  if (supported(Level::Avx2)) return Level::Avx2;
  if (supported(Level::Neon)) return Level::Neon;
  return Level::Scalar;
}

Level active_level() noexcept { return current().load(std::memory_order_relaxed); }

void set_active_level(Level level) {
  if (!supported(level)) throw std::invalid_argument("SIMD level not supported: " + std::string(to_string(level)));
  current().store(level, std::memory_order_relaxed);
}

const RowKernels& kernels(Level level) {
  switch (level) {
    case Level::Scalar: return detail::kScalarKernels;
#if defined(FPLAP_HAVE_AVX2)
    case Level::Avx2:
      if (supported(level)) return detail::kAvx2Kernels;
      break;
#endif
#if defined(FPLAP_HAVE_NEON)
    case Level::Neon: return detail::kNeonKernels;
#endif
    default: break;
  }
  throw std::invalid_argument("SIMD level not supported: " + std::string(to_string(level)));
}

const RowKernels& kernels() noexcept {
  switch (active_level()) {
#if defined(FPLAP_HAVE_AVX2)
    case Level::Avx2: return detail::kAvx2Kernels;
#endif
#if defined(FPLAP_HAVE_NEON)
    case Level::Neon: return detail::kNeonKernels;
#endif
    default: return detail::kScalarKernels;
  }
}

}  // namespace fplap::simd
