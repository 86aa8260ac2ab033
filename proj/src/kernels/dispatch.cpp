#include <atomic>
#include <cstdlib>
#include <string>

#include "qmarg/kernels.hpp"

namespace qmarg::kernels {

namespace {

const KernelTable* detect() {
    if (const char* env = std::getenv("QMARG_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && avx2_table() != nullptr) return avx2_table();
    }
    if (const KernelTable* t = avx2_table()) return t;
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> current{detect()};
    return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

bool set_backend(Backend b) {
    const KernelTable* t = b == Backend::Scalar ? &scalar_table() : avx2_table();
    if (t == nullptr) return false;
    slot().store(t, std::memory_order_release);
    return true;
}

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace qmarg::kernels
