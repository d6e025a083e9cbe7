#include "ragbench/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ragbench/errors.hpp"

namespace ragbench::kernels {

namespace {

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
constexpr bool kHaveAvx2Build = true;
#else
constexpr bool kHaveAvx2Build = false;
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
constexpr bool kHaveNeonBuild = true;
#else
constexpr bool kHaveNeonBuild = false;
#endif

using PairKernel = float (*)(const float*, const float*, std::size_t);

struct KernelTable {
    Isa isa;
    PairKernel l2_squared;
    PairKernel dot;
};

KernelTable table_for(Isa isa) {
    switch (isa) {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
        case Isa::avx2:
            return {Isa::avx2, &avx2::l2_squared, &avx2::dot};
#endif
#if defined(__aarch64__) || defined(_M_ARM64)
        case Isa::neon:
            return {Isa::neon, &neon::l2_squared, &neon::dot};
#endif
        default:
            return {Isa::scalar, &scalar::l2_squared, &scalar::dot};
    }
}

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* forced = std::getenv("RAGBENCH_KERNELS")) {
        if (std::string(forced) == "scalar") return Isa::scalar;
    }
    if (kHaveAvx2Build && cpu_has_avx2()) return Isa::avx2;
    if (kHaveNeonBuild) return Isa::neon;
    return Isa::scalar;
}

const KernelTable& active() {
    static const KernelTable table = table_for(detect());
    return table;
}

void check_sizes(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw ValidationError("kernel operands differ in length: " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
    }
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
        case Isa::scalar: break;
    }
    return "scalar";
}

Isa active_isa() { return active().isa; }

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return kHaveAvx2Build && cpu_has_avx2();
        case Isa::neon: return kHaveNeonBuild;
    }
    return false;
}

float l2_squared(std::span<const float> a, std::span<const float> b) {
    check_sizes(a, b);
    return active().l2_squared(a.data(), b.data(), a.size());
}

float dot(std::span<const float> a, std::span<const float> b) {
    check_sizes(a, b);
    return active().dot(a.data(), b.data(), a.size());
}

void l2_squared_batch(std::span<const float> query, std::span<const float> rows,
                      std::span<float> out) {
    const std::size_t dim = query.size();
    if (rows.size() < out.size() * dim) {
        throw ValidationError("l2_squared_batch: rows span too short");
    }
    const PairKernel kernel = active().l2_squared;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = kernel(query.data(), rows.data() + i * dim, dim);
    }
}

float l2_squared_with(Isa isa, std::span<const float> a, std::span<const float> b) {
    check_sizes(a, b);
    if (!isa_available(isa)) throw ValidationError("kernel variant not available on this CPU");
    return table_for(isa).l2_squared(a.data(), b.data(), a.size());
}

float dot_with(Isa isa, std::span<const float> a, std::span<const float> b) {
    check_sizes(a, b);
    if (!isa_available(isa)) throw ValidationError("kernel variant not available on this CPU");
    return table_for(isa).dot(a.data(), b.data(), a.size());
}

}  // namespace ragbench::kernels
