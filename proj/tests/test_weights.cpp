#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fraclap/error.hpp"
#include "fraclap/symbol_weights.hpp"

#include <cmath>
#include <numbers>

using namespace fraclap;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("three-point weights for the local order") {
    const WeightStencil w = compute_weights(FractionalOrder::local_baseline(), {1.0}, 8, 8);
    CHECK(w.at(0L) == 2.0);
    CHECK(w.at(1L) == -1.0);
    CHECK(w.at(-1L) == -1.0);
    for (long m = 2; m <= 8; ++m) CHECK(w.at(m) == 0.0);
}

TEST_CASE("s = 1/2 weights match the analytic values") {
    const WeightStencil w = compute_weights(FractionalOrder::fractional(0.5), {1.0}, 64, 8);
    CHECK(w.at(0L) == doctest::Approx(4.0 / pi).epsilon(1e-10));
    CHECK(w.at(1L) == doctest::Approx(-4.0 / (3.0 * pi)).epsilon(1e-10));
    CHECK(closed_form_weights_1d(FractionalOrder::fractional(0.5), 0) == doctest::Approx(4.0 / pi).epsilon(1e-14));
    CHECK(closed_form_weights_1d(FractionalOrder::fractional(0.5), 1) ==
          doctest::Approx(-4.0 / (3.0 * pi)).epsilon(1e-14));
}

TEST_CASE("FFT weights agree with the Gamma-ratio closed form") {
    for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        CAPTURE(s);
        const FractionalOrder order = FractionalOrder::fractional(s);
        const WeightStencil w = compute_weights(order, {1.0}, 64, 8);
        for (long m = 0; m <= 64; ++m) {
            const double ref = closed_form_weights_1d(order, m);
            CHECK(std::abs(w.at(m) - ref) <= 1e-8 * std::abs(ref));
        }
    }
}

TEST_CASE("weights scale like h^-2s") {
    const FractionalOrder order = FractionalOrder::fractional(0.3);
    const WeightStencil a = compute_weights(order, {0.1, 0.2}, 8, 4);
    const WeightStencil b = compute_weights(order, {0.3, 0.6}, 8, 4);
    const double factor = std::pow(3.0, -0.6);
    for (long i = 0; i <= 8; ++i) {
        for (long j = 0; j <= 8; ++j) CHECK(b.at(i, j) == doctest::Approx(factor * a.at(i, j)).epsilon(1e-13));
    }
}

TEST_CASE("far-field decay follows m^(-1-2s)") {
    for (double s : {0.25, 0.5, 0.75}) {
        const FractionalOrder order = FractionalOrder::fractional(s);
        const double slope = std::log(closed_form_weights_1d(order, 256) / closed_form_weights_1d(order, 32)) /
                             std::log(256.0 / 32.0);
        CHECK(slope == doctest::Approx(-1.0 - 2.0 * s).epsilon(0.02));
    }
}

TEST_CASE("off-diagonal weights are negative and nearly balance the centre") {
    const WeightStencil w = compute_weights(FractionalOrder::fractional(0.6), {1.0, 1.0}, 16, 4);
    CHECK(w.at(0L, 0L) > 0.0);
    for (long i = 0; i <= 16; ++i) {
        for (long j = 0; j <= 16; ++j) {
            if (i || j) CHECK(w.at(i, j) < 0.0);
        }
    }
    // sigma(0) = 0: the full lattice sum vanishes, the truncated one is a small positive tail
    CHECK(w.weight_sum() > 0.0);
    CHECK(w.weight_sum() < 0.1 * w.at(0L, 0L));
}

TEST_CASE("strongly anisotropic spacing still meets the aliasing bound") {
    WeightOptions opts;
    opts.oversample = 4;
    opts.precision_tol = 1e-5;
    const WeightStencil w = compute_weights(FractionalOrder::fractional(0.25), {1.0, 64.0}, {62, 62}, opts);
    CHECK(w.precision_estimate <= 1e-5);
    CHECK(w.levels_used >= 3);
}

TEST_CASE("invalid arguments are rejected") {
    CHECK_THROWS_AS(FractionalOrder::fractional(0.0), DomainError);
    CHECK_THROWS_AS(FractionalOrder::fractional(1.0), DomainError);
    CHECK_THROWS_AS(compute_weights(FractionalOrder::fractional(0.5), {-1.0}, 4, 8), Error);
    CHECK_THROWS_AS(compute_weights(FractionalOrder::fractional(0.5), {1.0}, 4, 2), DomainError);
}
