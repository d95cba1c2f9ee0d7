#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fraclap/error.hpp"
#include "fraclap/nonlocal_form.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fraclap;

namespace {

GridFunction random_on(const LatticeGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    GridFunction u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = normal(rng);
    return u;
}

LatticeGrid box(double hx, double lt, double ht) {
    return LatticeGrid::with_spacing(BoxDomain({-1.0, -lt}, {1.0, lt}), {hx, ht});
}

} // namespace

TEST_CASE("zero has zero energy") {
    const LatticeGrid g = box(0.125, 2.0, 0.125);
    for (FormKind k : {FormKind::full, FormKind::tensor, FormKind::slice_x, FormKind::slice_t}) {
        CHECK(NonlocalForm(k, FractionalOrder::fractional(0.4), g).energy(GridFunction(g)) == 0.0);
    }
}

TEST_CASE("the local order reduces to the three-point Laplacian") {
    const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, 19);
    const double h = g.spacing(0);
    const NonlocalForm form = NonlocalForm::full(FractionalOrder::local_baseline(), g);
    GridFunction e(g);
    e[9] = 1.0;
    const GridFunction t = form.apply(e);
    CHECK(t[9] == doctest::Approx(2.0 / (h * h)));
    CHECK(t[8] == doctest::Approx(-1.0 / (h * h)));
    CHECK(t[10] == doctest::Approx(-1.0 / (h * h)));
    CHECK(t[7] == 0.0);
    CHECK(form.pairing(e, e) == doctest::Approx(2.0 / h));
}

TEST_CASE("single node pairing is h^(d-2s) w_0") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain::interval(-40.0, 40.0), {1.0});
    GridFunction e(g);
    e[40] = 1.0;
    CHECK(NonlocalForm::full(FractionalOrder::fractional(0.5), g).pairing(e, e) ==
          doctest::Approx(4.0 / std::numbers::pi).epsilon(1e-9));
}

TEST_CASE("lattice energy of the Gaussian approximates Gamma(s + 1/2)") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain::interval(-12.0, 12.0), {0.05});
    const GridFunction u = GridFunction::sample(g, [](std::span<const double> x) { return std::exp(-0.5 * x[0] * x[0]); });
    for (double s : {0.25, 0.5, 0.75}) {
        const double e = NonlocalForm::full(FractionalOrder::fractional(s), g).energy(u);
        CHECK(e == doctest::Approx(std::tgamma(s + 0.5)).epsilon(0.01));
    }
}

TEST_CASE("split-form bounds on random vectors") {
    const LatticeGrid g = box(0.125, 2.0, 0.125);
    for (double s : {0.25, 0.5, 0.75}) {
        const FractionalOrder order = FractionalOrder::fractional(s);
        const NonlocalForm full = NonlocalForm::full(order, g);
        const NonlocalForm tensor = NonlocalForm::tensor(order, g);
        for (unsigned seed = 0; seed < 20; ++seed) {
            const GridFunction u = random_on(g, seed);
            const double e = full.energy(u);
            const double et = tensor.energy(u);
            CHECK(std::pow(2.0, s - 1.0) * et <= e * (1.0 + 1e-12));
            CHECK(e <= et * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("slice energies add up to the tensor energy") {
    const LatticeGrid g = box(0.25, 1.5, 0.1);
    const FractionalOrder order = FractionalOrder::fractional(0.35);
    const NonlocalForm tensor = NonlocalForm::tensor(order, g);
    const GridFunction u = random_on(g, 7);
    const double sx = slice_energy_sum(tensor, u, Axis::x);
    const double st = slice_energy_sum(tensor, u, Axis::t);
    CHECK(sx + st == doctest::Approx(tensor.energy(u)).epsilon(1e-12));
    CHECK(NonlocalForm(FormKind::slice_x, order, g).energy(u) == doctest::Approx(sx).epsilon(1e-12));
    CHECK(NonlocalForm(FormKind::slice_t, order, g).energy(u) == doctest::Approx(st).epsilon(1e-12));
}

TEST_CASE("separable functions factor over the slices") {
    const LatticeGrid g = box(0.25, 1.0, 0.125);
    const LatticeGrid gx = g.axis_grid(0);
    const LatticeGrid gt = g.axis_grid(1);
    const FractionalOrder order = FractionalOrder::fractional(0.6);
    auto a = [](double x) { return 1.0 - x * x; };
    auto b = [](double t) { return std::cos(0.5 * std::numbers::pi * t) + 0.3 * t; };
    const GridFunction u = GridFunction::sample(g, [&](std::span<const double> p) { return a(p[0]) * b(p[1]); });
    const GridFunction ua = GridFunction::sample(gx, [&](std::span<const double> p) { return a(p[0]); });
    const GridFunction ub = GridFunction::sample(gt, [&](std::span<const double> p) { return b(p[0]); });
    const double expected = NonlocalForm::full(order, gx).energy(ua) * l2_inner(ub, ub);
    CHECK(slice_energy_sum(NonlocalForm::full(order, g), u, Axis::x) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("direct and FFT matvecs agree") {
    const LatticeGrid g = box(0.125, 1.0, 0.0625);
    const NonlocalForm form = NonlocalForm::full(FractionalOrder::fractional(0.45), g);
    const GridFunction u = random_on(g, 3);
    const GridFunction a = form.apply_direct(u);
    const GridFunction b = form.apply_fft(u);
    CHECK(l2_norm(a - b) <= 1e-12 * l2_norm(a));
}

TEST_CASE("one-dimensional energy matches the pairing") {
    const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, 101);
    for (double s : {0.2, 0.5, 0.9}) {
        const NonlocalForm form = NonlocalForm::full(FractionalOrder::fractional(s), g);
        const GridFunction u = random_on(g, 11);
        CHECK(form.energy(u) == doctest::Approx(form.pairing(u, u)).epsilon(1e-12));
    }
}

TEST_CASE("scaled energy") {
    const LatticeGrid unit = box(0.25, 1.0, 0.125);
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    const GridFunction v = random_on(unit, 5);
    SUBCASE("ell = 1 is the energy per unit axial length") {
        CHECK(scaled_energy(order, unit, 1.0, v) ==
              doctest::Approx(NonlocalForm::full(order, unit).energy(v) / 2.0).epsilon(1e-13));
    }
    SUBCASE("zero") { CHECK(scaled_energy(order, unit, 4.0, GridFunction(unit)) == 0.0); }
    SUBCASE("tensor variant decreases in ell") {
        double previous = INFINITY;
        for (double ell : {1.0, 2.0, 4.0, 8.0}) {
            const double e = scaled_energy(order, unit, ell, v, FormKind::tensor);
            CHECK(e < previous);
            previous = e;
        }
    }
}

TEST_CASE("functions on another grid are rejected") {
    const LatticeGrid g = LatticeGrid::interval(0.0, 1.0, 7);
    const NonlocalForm form = NonlocalForm::full(FractionalOrder::fractional(0.5), g);
    CHECK_THROWS_AS(form.apply(GridFunction(LatticeGrid::interval(0.0, 1.0, 8))), ShapeError);
}
