#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fraclap/error.hpp"
#include "fraclap/reduction.hpp"

#include <cmath>
#include <random>

using namespace fraclap;

namespace {

const LatticeGrid kSection = LatticeGrid::interval(-1.0, 1.0, 31); // h = 1/16

GridFunction random_on(const LatticeGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    GridFunction u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = normal(rng);
    return u;
}

} // namespace

TEST_CASE("cylinder grids keep the section and mesh B_ell with spacing ht") {
    const LatticeGrid cyl = cylinder_grid(kSection, 4.0, 0.0625);
    CHECK(cyl.axis_grid(0) == kSection);
    CHECK(cyl.nodes(1) == 127);
    CHECK(cyl.domain().extent(1) == doctest::Approx(8.0));
    const LatticeGrid unit = unit_cylinder_grid(kSection, 4.0, 0.0625);
    CHECK(unit.nodes(1) == 127);
    CHECK(unit.domain().extent(1) == doctest::Approx(2.0));
}

TEST_CASE("averaging over the axial direction") {
    const LatticeGrid cyl = cylinder_grid(kSection, 2.0, 0.25);
    const double nt = static_cast<double>(cyl.nodes(1));
    SUBCASE("constants lose the two boundary cells of the zero extension") {
        const GridFunction r = average_rho(GridFunction::constant(cyl, 3.0));
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(3.0 * nt / (nt + 1.0)));
    }
    SUBCASE("separable functions") {
        auto a = [](double x) { return 1.0 - x * x; };
        auto b = [](double t) { return 2.0 + std::sin(t); };
        const GridFunction v = GridFunction::sample(cyl, [&](std::span<const double> p) { return a(p[0]) * b(p[1]); });
        double mean = 0.0;
        for (std::size_t j = 0; j < cyl.nodes(1); ++j) mean += b(cyl.coordinate(1, j));
        mean *= cyl.spacing(1) / cyl.domain().extent(1);
        const GridFunction r = average_rho(v);
        for (std::size_t i = 0; i < r.size(); ++i) {
            CHECK(r[i] == doctest::Approx(a(kSection.coordinate(0, i)) * mean).epsilon(1e-14));
        }
    }
}

TEST_CASE("averaging chain on random vectors") {
    for (double s : {0.25, 0.5, 0.75}) {
        const FractionalOrder order = FractionalOrder::fractional(s);
        const LatticeGrid cyl = cylinder_grid(kSection, 2.0, 0.0625);
        const double measure = cyl.domain().extent(1);
        const NonlocalForm section = NonlocalForm::full(order, kSection);
        const NonlocalForm full = NonlocalForm::full(order, cyl);
        for (unsigned seed = 0; seed < 5; ++seed) {
            const GridFunction v = random_on(cyl, seed);
            const double averaged = section.energy(average_rho(v).on_grid(kSection));
            const double slices = slice_energy_sum(full, v, Axis::x) / measure;
            const double total = full.energy(v) / measure;
            CHECK(averaged <= slices + 1e-12 * slices);
            CHECK(slices <= total + 1e-12 * total);
        }
    }
}

TEST_CASE("axial rescaling") {
    const LatticeGrid unit = unit_cylinder_grid(kSection, 1.0, 0.125);
    const GridFunction v = random_on(unit, 3);
    CHECK(l2_norm(breve_rescale(v, 1.0) - v.on_grid(breve_rescale(v, 1.0).grid())) == 0.0);
    const GridFunction stretched = breve_rescale(v, 4.0);
    CHECK(l2_inner(stretched, stretched) == doctest::Approx(4.0 * l2_inner(v, v)).epsilon(1e-14));
    CHECK(l2_norm(breve_unscale(stretched, 4.0) - v) == 0.0);
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    CHECK(scaled_energy(order, unit, 4.0, v) ==
          doctest::Approx(NonlocalForm::full(order, stretched.grid()).energy(stretched) / 8.0).epsilon(1e-13));
}

TEST_CASE("cylinder problems") {
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    SUBCASE("zero load") {
        LoadSpec zero;
        zero.alpha = 1.0;
        const LatticeGrid cyl = cylinder_grid(kSection, 1.0, 0.0625);
        const NonlocalForm form = NonlocalForm::full(order, cyl);
        CHECK(l2_norm(cg_solve(form, GridFunction(cyl)).solution) == 0.0);
    }
    SUBCASE("principal eigenfunction load") {
        const LatticeGrid cyl = cylinder_grid(kSection, 1.0, 0.0625);
        const NonlocalForm form = NonlocalForm::full(order, cyl);
        const EigenPair e = smallest_eigenpair(form, 1e-11);
        const GridFunction u = cg_solve(form, e.vector).solution;
        CHECK(l2_norm(u - (1.0 / e.value) * e.vector) <= 1e-8 * l2_norm(u));
    }
    SUBCASE("energy identity") {
        LoadSpec load;
        const SolveResult r = solve_dirichlet_cylinder(order, kSection, 2.0, 0.0625, load);
        const LatticeGrid& cyl = r.solution.grid();
        const GridFunction f = cylinder_load(load, cyl, 2.0);
        CHECK(NonlocalForm::full(order, cyl).energy(r.solution) ==
              doctest::Approx(l2_inner(f, r.solution)).epsilon(1e-11));
    }
}

TEST_CASE("section problem") {
    SUBCASE("zero load") {
        CHECK(l2_norm(solve_dirichlet_section(FractionalOrder::fractional(0.5), kSection, GridFunction(kSection))
                          .solution) == 0.0);
    }
    SUBCASE("three-point scheme is exact for (1 - x^2)/2") {
        const SolveResult r = solve_dirichlet_section(FractionalOrder::local_baseline(), kSection,
                                                      GridFunction::constant(kSection, 1.0), 1e-13);
        for (std::size_t j = 0; j < kSection.size(); ++j) {
            const double x = kSection.coordinate(0, j);
            CHECK(std::abs(r.solution[j] - 0.5 * (1.0 - x * x)) <= 1e-10);
        }
    }
    SUBCASE("Rayleigh bound") {
        const FractionalOrder order = FractionalOrder::fractional(0.4);
        const NonlocalForm form = NonlocalForm::full(order, kSection);
        const double lambda = smallest_eigenpair(form, 1e-11).value;
        const GridFunction u = solve_dirichlet_section(order, kSection, section_load(LoadSpec{}, kSection)).solution;
        CHECK(form.energy(u) >= lambda * l2_inner(u, u));
    }
}

TEST_CASE("reduction error") {
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    const LatticeGrid cyl = cylinder_grid(kSection, 1.0, 0.125);
    const GridFunction u_inf = GridFunction::sample(kSection, [](std::span<const double> x) { return 1.0 - x[0] * x[0]; });
    SUBCASE("t-independent extension averages back exactly up to the zero-extension factor") {
        const double nt = static_cast<double>(cyl.nodes(1));
        const GridFunction ext = GridFunction::sample(cyl, [](std::span<const double> p) { return 1.0 - p[0] * p[0]; });
        const ReductionError e = reduction_error(order, (nt + 1.0) / nt * ext, u_inf);
        CHECK(e.hs_error <= 1e-12);
        CHECK(e.l2_error <= 1e-12);
    }
    SUBCASE("triangle sanity") {
        const LatticeGrid big = cylinder_grid(kSection, 1.0, 0.125);
        std::mt19937_64 rng(2);
        std::normal_distribution<double> normal;
        GridFunction v(big);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = normal(rng);
        const ReductionError e = reduction_error(order, v, u_inf);
        const NonlocalForm section = NonlocalForm::full(order, kSection);
        const double bound = 2.0 * (section.energy(average_rho(v).on_grid(kSection)) + section.energy(u_inf));
        CHECK(e.hs_error * e.hs_error <= bound);
    }
}

TEST_CASE("recovery sequence") {
    const LatticeGrid t_grid = LatticeGrid::interval(-1.0, 1.0, 63); // node 31 sits at t = 0
    const GridFunction u = GridFunction::sample(kSection, [](std::span<const double> x) { return std::cos(x[0]); });
    for (double ell : {2.0, 8.0}) {
        const GridFunction v = recovery_sequence(u, ell, t_grid);
        for (std::size_t i = 0; i < kSection.size(); ++i) CHECK(v[i * 63 + 31] == u[i]);
        double mean = 0.0;
        for (std::size_t j = 0; j < 63; ++j) mean += recovery_cutoff(t_grid.coordinate(0, j), ell);
        mean *= t_grid.spacing(0) / 2.0;
        const GridFunction r = average_rho(v);
        for (std::size_t i = 0; i < kSection.size(); ++i) CHECK(r[i] == doctest::Approx(u[i] * mean).epsilon(1e-13));
    }
    CHECK(bump(0.0) == 1.0);
    CHECK(bump(1.0) == 0.0);
}

TEST_CASE("energy functionals") {
    const FractionalOrder order = FractionalOrder::fractional(0.5);
    LoadSpec load;
    SUBCASE("zero") {
        CHECK(functional_I(order, kInfiniteEll, GridFunction(kSection), load) == 0.0);
        const LatticeGrid unit = unit_cylinder_grid(kSection, 2.0, 0.125);
        CHECK(functional_I(order, 2.0, GridFunction(unit), load) == 0.0);
    }
    SUBCASE("the computed solution minimizes the rescaled functional") {
        const double ell = 2.0;
        const double ht = 0.125;
        const SolveResult r = solve_dirichlet_cylinder(order, kSection, ell, ht, load);
        const GridFunction u_breve = breve_unscale(r.solution, ell);
        const double at_min = functional_I(order, ell, u_breve, load);
        const GridFunction f = cylinder_load(load, r.solution.grid(), ell);
        CHECK(at_min == doctest::Approx(rescaled_minimum(r.solution, f)).epsilon(1e-10));
        std::mt19937_64 rng(9);
        std::normal_distribution<double> normal;
        for (int k = 0; k < 5; ++k) {
            GridFunction w = u_breve;
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.01 * normal(rng);
            CHECK(at_min <= functional_I(order, ell, w, load));
        }
        const double lambda = smallest_eigenpair(NonlocalForm::full(order, kSection), 1e-11).value;
        const double load_norm = l2_norm(f) / std::sqrt(ell);
        const CoercivityBounds b = coercivity_bounds(at_min, load_norm, lambda, 2.0);
        CHECK(l2_norm(u_breve) <= b.l2_bound);
        CHECK(NonlocalForm::full(order, kSection).energy(average_rho(r.solution).on_grid(kSection)) <=
              b.section_energy_bound);
    }
    SUBCASE("section minimum") {
        const GridFunction f = section_load(load, kSection);
        const GridFunction u = solve_dirichlet_section(order, kSection, f).solution;
        CHECK(functional_I(order, kInfiniteEll, u, load) == doctest::Approx(section_minimum(u, f)).epsilon(1e-10));
    }
}

TEST_CASE("load names") {
    CHECK(parse_profile("parabola") == Profile::parabola);
    CHECK(to_string(Perturbation::cosine) == "cosine");
    CHECK_THROWS_AS(parse_profile("square"), ConfigError);
    CHECK_THROWS_AS(parse_perturbation("quadratic"), ConfigError);
}

TEST_CASE("perturbed loads converge to the section load") {
    LoadSpec load;
    load.perturbation = Perturbation::linear;
    double previous = INFINITY;
    for (double ell : {1.0, 2.0, 4.0}) {
        const double r = load_residual(load, unit_cylinder_grid(kSection, ell, 0.125), ell);
        CHECK(r < previous);
        previous = r;
    }
}
