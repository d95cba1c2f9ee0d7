#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fraclap/error.hpp"
#include "fraclap/oracles.hpp"
#include "fraclap/solvers.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace fraclap;

TEST_CASE("zero load gives the zero solution") {
    const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, 31);
    const SolveResult r = cg_solve(NonlocalForm::full(FractionalOrder::fractional(0.5), g), GridFunction(g));
    CHECK(l2_norm(r.solution) == 0.0);
    CHECK(r.report.iterations <= 1);
}

TEST_CASE("a manufactured load is inverted") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain({-1.0, -1.0}, {1.0, 1.0}), {0.125, 0.125});
    const NonlocalForm form = NonlocalForm::full(FractionalOrder::fractional(0.3), g);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GridFunction w(g);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = unit(rng);
    const SolveResult r = cg_solve(form, form.apply(w), 1e-12, 500);
    CHECK(l2_norm(r.solution - w) <= 1e-10 * l2_norm(w));
    CHECK(r.report.relative_residual <= 1e-12);
}

TEST_CASE("three-point Poisson solution is exact for quadratics") {
    const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, 39);
    const SolveResult r =
        cg_solve(NonlocalForm::full(FractionalOrder::local_baseline(), g), GridFunction::constant(g, 1.0), 1e-13, 500);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.coordinate(0, j);
        CHECK(std::abs(r.solution[j] - 0.5 * (1.0 - x * x)) <= 1e-10);
    }
}

TEST_CASE("iteration limits raise a convergence error carrying the best iterate") {
    const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, 63);
    CgOptions opts;
    opts.max_iter = 1;
    opts.precondition = false;
    try {
        cg_solve(NonlocalForm::full(FractionalOrder::fractional(0.7), g), GridFunction::constant(g, 1.0), opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_iterate().size() == g.size());
        CHECK(e.report().iterations == 1);
    }
}

TEST_CASE("three-point eigenvalue matches the closed form and tends to pi^2/4") {
    double previous = INFINITY;
    for (std::size_t n : {49u, 99u, 199u}) {
        const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, n);
        const EigenPair p = smallest_eigenpair(NonlocalForm::full(FractionalOrder::local_baseline(), g), 1e-10);
        const double h = g.spacing(0);
        const double closed = 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 4.0), 2);
        CHECK(std::abs(p.value - closed) <= 1e-12 * closed);
        const double distance = std::abs(p.value - std::numbers::pi * std::numbers::pi / 4.0);
        CHECK(distance < previous);
        previous = distance;
        CHECK(p.gap_certified());
        CHECK(p.min_component > 0.0);
    }
    CHECK(previous < 1e-4);
}

TEST_CASE("eigenvalues scale like ell^-2s on dilated grids") {
    for (double s : {0.25, 0.5, 0.75}) {
        const FractionalOrder order = FractionalOrder::fractional(s);
        const double base = smallest_eigenpair(NonlocalForm::full(order, LatticeGrid::interval(-1.0, 1.0, 63)), 1e-11).value;
        for (double ell : {2.0, 4.0}) {
            const double lambda =
                smallest_eigenpair(NonlocalForm::full(order, LatticeGrid::interval(-ell, ell, 63)), 1e-11).value;
            CHECK(std::pow(ell, 2.0 * s) * lambda == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("tensor eigenvalue is the sum of the axis eigenvalues") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain({-1.0, -2.0}, {1.0, 2.0}), {0.0625, 0.0625});
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    const double lx = smallest_eigenpair(NonlocalForm::full(order, g.axis_grid(0)), 1e-10).value;
    const double lt = smallest_eigenpair(NonlocalForm::full(order, g.axis_grid(1)), 1e-10).value;
    const double tensor = smallest_eigenpair(NonlocalForm::tensor(order, g), 1e-10).value;
    CHECK(tensor_min_eigenvalue(2.0, 3.0) == 5.0);
    CHECK(tensor == doctest::Approx(tensor_min_eigenvalue(lx, lt)).epsilon(1e-10));
}

TEST_CASE("full-form eigenvalue lies between the section and tensor values") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain({-1.0, -2.0}, {1.0, 2.0}), {0.125, 0.125});
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    const double lx = smallest_eigenpair(NonlocalForm::full(order, g.axis_grid(0)), 1e-10).value;
    const EigenPair full = smallest_eigenpair(NonlocalForm::full(order, g), 1e-10);
    const double tensor = smallest_eigenpair(NonlocalForm::tensor(order, g), 1e-10).value;
    CHECK(lx < full.value);
    CHECK(full.value < tensor);
    CHECK(full.gap_certified());
    CHECK(full.min_component > 0.0);
    // eigenvector has unit discrete L2 norm
    CHECK(l2_norm(full.vector) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("self-convergence of the s = 1/2 eigenvalue") {
    std::vector<double> lambda;
    for (int k : {5, 6, 7}) {
        const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain::interval(-1.0, 1.0), {std::ldexp(1.0, -k)});
        lambda.push_back(smallest_eigenpair(NonlocalForm::full(FractionalOrder::fractional(0.5), g), 1e-10).value);
    }
    CHECK(lambda[0] > lambda[1]);
    CHECK(lambda[1] > lambda[2]);
    const double coarse = 2.0 * lambda[1] - lambda[0];
    const double fine = 2.0 * lambda[2] - lambda[1];
    CHECK(std::abs(coarse - fine) <= 1e-3 * std::abs(fine));
}
