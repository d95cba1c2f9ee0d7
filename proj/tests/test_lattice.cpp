#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fraclap/error.hpp"
#include "fraclap/lattice.hpp"

using namespace fraclap;

TEST_CASE("l2_inner is the Riemann sum of the product") {
    const LatticeGrid g = LatticeGrid::interval(-1.0, 1.0, 99);
    CHECK(g.spacing(0) == doctest::Approx(0.02).epsilon(1e-15));
    const GridFunction one = GridFunction::constant(g, 1.0);
    CHECK(l2_inner(one, one) == doctest::Approx(1.98).epsilon(1e-14));
    CHECK(l2_inner(GridFunction(g), one) == 0.0);
}

TEST_CASE("single node mass on a 2-D grid") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain({0.0, 0.0}, {1.0, 1.0}), {0.1, 0.1});
    CHECK(g.nodes(0) == 9);
    CHECK(g.nodes(1) == 9);
    GridFunction e(g);
    e[40] = 1.0;
    CHECK(l2_inner(e, e) == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("product grids concatenate axes") {
    const LatticeGrid gx = LatticeGrid::interval(0.0, 1.0, 3);
    const LatticeGrid gt = LatticeGrid::interval(-2.0, 2.0, 5);
    const LatticeGrid p = product_grid(gx, gt);
    CHECK(p.size() == 15);
    CHECK(p.dimension() == 2);
    CHECK(p.spacing(0) == gx.spacing(0));
    CHECK(p.spacing(1) == gt.spacing(0));
    CHECK(p.axis_grid(0) == gx);
    CHECK(p.axis_grid(1) == gt);

    const LatticeGrid slab = product_grid(gx, LatticeGrid::interval(0.0, 1.0, 1));
    CHECK(slab.size() == gx.size());
}

TEST_CASE("with_spacing requires commensurate extents") {
    CHECK(LatticeGrid::with_spacing(BoxDomain::interval(-1.0, 1.0), {0.25}).nodes(0) == 7);
    CHECK_THROWS_AS(LatticeGrid::with_spacing(BoxDomain::interval(-1.0, 1.0), {0.3}), Error);
}

TEST_CASE("stretching scales spacing and domain but keeps nodes") {
    const LatticeGrid g = LatticeGrid::with_spacing(BoxDomain({-1.0, -1.0}, {1.0, 1.0}), {0.5, 0.25});
    const LatticeGrid s = g.stretched(1, 4.0);
    CHECK(s.nodes_per_axis() == g.nodes_per_axis());
    CHECK(s.spacing(1) == doctest::Approx(1.0));
    CHECK(s.domain().extent(1) == doctest::Approx(8.0));
    CHECK(s.spacing(0) == g.spacing(0));
}

TEST_CASE("grid functions on different grids do not mix") {
    const LatticeGrid a = LatticeGrid::interval(0.0, 1.0, 4);
    const LatticeGrid b = LatticeGrid::interval(0.0, 2.0, 4);
    const GridFunction u = GridFunction::constant(a, 1.0);
    const GridFunction v = GridFunction::constant(b, 1.0);
    CHECK_THROWS_AS(l2_inner(u, v), ShapeError);
    // reinterpretation on a grid with the same node layout keeps the values
    const GridFunction w = u.on_grid(b);
    CHECK(w[3] == 1.0);
    CHECK(l2_inner(w, v) == doctest::Approx(4.0 * 0.4));
}

TEST_CASE("row-major layout with x outermost") {
    const LatticeGrid g = product_grid(LatticeGrid::interval(0.0, 1.0, 3), LatticeGrid::interval(0.0, 1.0, 4));
    const GridFunction u = GridFunction::sample(g, [](std::span<const double> x) { return 10.0 * x[0] + x[1]; });
    // node (i, j) sits at i * 4 + j
    CHECK(u[1 * 4 + 2] == doctest::Approx(10.0 * 0.5 + 0.6));
}
