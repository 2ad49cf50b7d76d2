#include "hgauge/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace hgauge::kernels {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("HGAUGE_KERNELS");
    if (forced && std::strcmp(forced, "scalar") == 0) return scalar_table();
    if (cpu_has_avx2()) {
        if (const KernelTable* t = avx2_table()) return *t;
    }
    return scalar_table();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace hgauge::kernels
