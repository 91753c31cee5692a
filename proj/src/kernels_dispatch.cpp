#include "tkgqa/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace tkgqa::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Ops* pick_avx2_or_null() {
#ifdef TKGQA_BUILD_AVX2
  if (cpu_has_avx2()) return &avx2();
#endif
  return nullptr;
}

const Ops* select() {
  const char* want = std::getenv("TKGQA_KERNEL");
  const Ops* vec = pick_avx2_or_null();
  if (want && std::strcmp(want, "scalar") == 0) return &scalar();
  if (want && std::strcmp(want, "avx2") == 0) {
    if (vec) return vec;
    std::fprintf(stderr, "tkgqa: TKGQA_KERNEL=avx2 unavailable, using scalar kernels\n");
    return &scalar();
  }
  return vec ? vec : &scalar();
}

}  // namespace

const Ops& active() {
  static const Ops* ops = select();
  return *ops;
}

std::vector<const Ops*> available() {
  std::vector<const Ops*> v{&scalar()};
  if (const Ops* vec = pick_avx2_or_null()) v.push_back(vec);
  return v;
}

}  // namespace tkgqa::kernels
