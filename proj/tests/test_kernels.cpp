#include <doctest.h>

#include <cmath>
#include <random>

#include "ragbench/kernels.hpp"
#include "support.hpp"

using namespace ragbench;

namespace {

double ref_l2(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        s += d * d;
    }
    return s;
}

double ref_dot(const std::vector<float>& a, const std::vector<float>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

std::vector<kernels::Isa> available_isas() {
    std::vector<kernels::Isa> out;
    for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2, kernels::Isa::neon}) {
        if (kernels::isa_available(isa)) out.push_back(isa);
    }
    return out;
}

}  // namespace

TEST_CASE("scalar kernels match double-precision references") {
    std::mt19937_64 rng(11);
    for (std::size_t n : {0u, 1u, 7u, 8u, 31u, 32u, 33u, 768u}) {
        const auto a = testsupport::random_vector(rng, n);
        const auto b = testsupport::random_vector(rng, n);
        CHECK(kernels::l2_squared_with(kernels::Isa::scalar, a, b) ==
              doctest::Approx(ref_l2(a, b)).epsilon(1e-6));
        CHECK(kernels::dot_with(kernels::Isa::scalar, a, b) == doctest::Approx(ref_dot(a, b)).epsilon(1e-5));
    }
}

TEST_CASE("every available SIMD variant agrees with the scalar reference") {
    std::mt19937_64 rng(12);
    const auto isas = available_isas();
    REQUIRE(!isas.empty());
    for (int trial = 0; trial < 500; ++trial) {
        // Lengths around the 32-lane unroll and 8-lane tail boundaries.
        const std::size_t n = trial < 100 ? static_cast<std::size_t>(trial) : 1 + rng() % 1024;
        const auto a = testsupport::random_vector(rng, n);
        const auto b = testsupport::random_vector(rng, n);
        const float l2_ref = kernels::l2_squared_with(kernels::Isa::scalar, a, b);
        const float dot_ref = kernels::dot_with(kernels::Isa::scalar, a, b);
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) abs_sum += std::fabs(static_cast<double>(a[i]) * b[i]);
        for (auto isa : isas) {
            CAPTURE(kernels::isa_name(isa));
            CAPTURE(n);
            CHECK(kernels::l2_squared_with(isa, a, b) == doctest::Approx(l2_ref).epsilon(1e-5));
            // Dot products can cancel; bound the error by the magnitude of the terms.
            CHECK(std::fabs(kernels::dot_with(isa, a, b) - dot_ref) <= 1e-5 * abs_sum + 1e-6);
        }
    }
}

TEST_CASE("dispatching entry points match the reference and the batch form") {
    std::mt19937_64 rng(13);
    const std::size_t dim = 768;
    const std::size_t rows = 37;
    const auto q = testsupport::random_vector(rng, dim);
    const auto data = testsupport::random_vector(rng, dim * rows);
    std::vector<float> out(rows);
    kernels::l2_squared_batch(q, data, out);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::span<const float> row(data.data() + r * dim, dim);
        CHECK(out[r] == kernels::l2_squared(q, row));
        CHECK(out[r] == doctest::Approx(kernels::l2_squared_with(kernels::Isa::scalar, q, row)).epsilon(1e-5));
    }
    const char* env = std::getenv("RAGBENCH_KERNELS");
    if (env != nullptr && std::string(env) == "scalar") CHECK(kernels::active_isa() == kernels::Isa::scalar);
    CHECK(kernels::isa_available(kernels::active_isa()));
}

TEST_CASE("distance identities") {
    std::mt19937_64 rng(14);
    for (auto isa : available_isas()) {
        const auto a = testsupport::random_vector(rng, 768);
        CHECK(kernels::l2_squared_with(isa, a, a) == 0.0f);
        std::vector<float> e1(768, 0.0f), e2(768, 0.0f);
        e1[0] = 1.0f;
        e2[1] = 1.0f;
        CHECK(kernels::l2_squared_with(isa, e1, e2) == 2.0f);
        CHECK(kernels::dot_with(isa, e1, e2) == 0.0f);
    }
}
