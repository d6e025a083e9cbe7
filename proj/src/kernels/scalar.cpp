#include "ragbench/kernels.hpp"

namespace ragbench::kernels::scalar {

// Reference kernels. Accumulate in double so they double as the accuracy
// baseline for the SIMD variants.

float l2_squared(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return static_cast<float>(acc);
}

float dot(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return static_cast<float>(acc);
}

}  // namespace ragbench::kernels::scalar
