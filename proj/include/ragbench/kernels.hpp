#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Distance kernels used by the flat index and the relevance metric.
//
// Every kernel exists as a portable scalar reference plus an optional SIMD
// variant (AVX2+FMA on x86-64, NEON on AArch64). The variant is picked once at
// first use from the running CPU; RAGBENCH_KERNELS=scalar forces the reference.
// Variants agree with the reference to float rounding, not bitwise, because the
// SIMD paths reassociate the sums.

namespace ragbench::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// The ISA the dispatching entry points below use.
Isa active_isa();

/// True when `isa` was compiled in and the CPU supports it.
bool isa_available(Isa isa);

/// Squared Euclidean distance. a.size() must equal b.size().
float l2_squared(std::span<const float> a, std::span<const float> b);

float dot(std::span<const float> a, std::span<const float> b);

/// out[i] = l2_squared(query, rows[i*dim .. (i+1)*dim)) for i < out.size().
void l2_squared_batch(std::span<const float> query, std::span<const float> rows,
                      std::span<float> out);

namespace scalar {
float l2_squared(const float* a, const float* b, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
namespace avx2 {
float l2_squared(const float* a, const float* b, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
namespace neon {
float l2_squared(const float* a, const float* b, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
}  // namespace neon
#endif

/// Runs the named variant directly, bypassing dispatch. Used by equivalence tests.
float l2_squared_with(Isa isa, std::span<const float> a, std::span<const float> b);
float dot_with(Isa isa, std::span<const float> a, std::span<const float> b);

}  // namespace ragbench::kernels
