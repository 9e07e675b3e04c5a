#include "canopy/numerics/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "canopy/numerics/error.hpp"

namespace canopy::numerics::kernels {
namespace {

const KernelTable* pick_default() {
    if (const char* env = std::getenv("CANOPY_ISA")) {
        const std::string_view want(env);
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && isa_supported(Isa::avx2)) return avx2_table();
    }
    if (isa_supported(Isa::avx2)) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{pick_default()};
    return table;
}

}  // namespace

const char* isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
            return avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
                   __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
    if (!isa_supported(isa)) throw Error(std::string("ISA not supported on this CPU: ") + isa_name(isa));
    slot().store(isa == Isa::avx2 ? avx2_table() : &scalar_table(), std::memory_order_relaxed);
}

}  // namespace canopy::numerics::kernels
