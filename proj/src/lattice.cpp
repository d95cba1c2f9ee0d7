#include "fraclap/lattice.hpp"

#include "fraclap/error.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace fraclap {

BoxDomain::BoxDomain(std::vector<double> lo, std::vector<double> hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.empty() || lo_.size() != hi_.size()) {
        throw ShapeError("BoxDomain: lo and hi must have the same nonzero length");
    }
    for (std::size_t i = 0; i < lo_.size(); ++i) {
        if (!(lo_[i] < hi_[i])) {
            throw DomainError("BoxDomain: lo must be < hi on axis " + std::to_string(i));
        }
    }
}

double BoxDomain::measure() const {
    double m = 1.0;
    for (std::size_t i = 0; i < lo_.size(); ++i) m *= hi_[i] - lo_[i];
    return m;
}

LatticeGrid::LatticeGrid(BoxDomain domain, std::vector<std::size_t> nodes_per_axis)
    : domain_(std::move(domain)), nodes_(std::move(nodes_per_axis)) {
    if (nodes_.size() != domain_.dimension()) {
        throw ShapeError("LatticeGrid: node counts do not match the domain dimension");
    }
    spacing_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i] == 0) throw DomainError("LatticeGrid: every axis needs at least one node");
        spacing_[i] = domain_.extent(i) / static_cast<double>(nodes_[i] + 1);
    }
}

LatticeGrid LatticeGrid::interval(double a, double b, std::size_t nodes) {
    return LatticeGrid(BoxDomain::interval(a, b), {nodes});
}

LatticeGrid LatticeGrid::with_spacing(BoxDomain domain, std::vector<double> spacing) {
    if (spacing.size() != domain.dimension()) {
        throw ShapeError("LatticeGrid::with_spacing: spacing length does not match the domain");
    }
    std::vector<std::size_t> nodes(spacing.size());
    for (std::size_t i = 0; i < spacing.size(); ++i) {
        if (!(spacing[i] > 0.0)) throw DomainError("LatticeGrid::with_spacing: spacing must be > 0");
        const double cells = domain.extent(i) / spacing[i];
        const double rounded = std::round(cells);
        if (rounded < 2.0 || std::abs(cells - rounded) > 1e-9 * rounded) {
            throw DomainError("LatticeGrid::with_spacing: extent on axis " + std::to_string(i) +
                              " is not a multiple (>= 2) of the spacing");
        }
        nodes[i] = static_cast<std::size_t>(rounded) - 1;
    }
    return LatticeGrid(std::move(domain), std::move(nodes));
}

std::size_t LatticeGrid::size() const {
    return std::accumulate(nodes_.begin(), nodes_.end(), std::size_t{1}, std::multiplies<>());
}

double LatticeGrid::cell_volume() const {
    return std::accumulate(spacing_.begin(), spacing_.end(), 1.0, std::multiplies<>());
}

double LatticeGrid::coordinate(std::size_t axis, std::size_t j) const {
    return domain_.lo(axis) + static_cast<double>(j + 1) * spacing_.at(axis);
}

LatticeGrid LatticeGrid::axis_grid(std::size_t axis) const {
    return LatticeGrid(BoxDomain::interval(domain_.lo(axis), domain_.hi(axis)), {nodes_.at(axis)});
}

LatticeGrid LatticeGrid::stretched(std::size_t axis, double factor) const {
    if (!(factor > 0.0)) throw DomainError("LatticeGrid::stretched: factor must be > 0");
    auto lo = domain_.lo();
    auto hi = domain_.hi();
    lo.at(axis) *= factor;
    hi.at(axis) *= factor;
    LatticeGrid g(BoxDomain(std::move(lo), std::move(hi)), nodes_);
    // keep the spacing an exact multiple so that stretching by powers of two is lossless
    g.spacing_[axis] = spacing_[axis] * factor;
    return g;
}

LatticeGrid product_grid(const LatticeGrid& gx, const LatticeGrid& gt) {
    auto lo = gx.domain().lo();
    auto hi = gx.domain().hi();
    auto nodes = gx.nodes_per_axis();
    lo.insert(lo.end(), gt.domain().lo().begin(), gt.domain().lo().end());
    hi.insert(hi.end(), gt.domain().hi().begin(), gt.domain().hi().end());
    nodes.insert(nodes.end(), gt.nodes_per_axis().begin(), gt.nodes_per_axis().end());
    return LatticeGrid(BoxDomain(std::move(lo), std::move(hi)), std::move(nodes));
}

GridFunction::GridFunction(LatticeGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

GridFunction::GridFunction(LatticeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ShapeError("GridFunction: value count " + std::to_string(values_.size()) +
                         " does not match grid size " + std::to_string(grid_.size()));
    }
}

GridFunction GridFunction::sample(const LatticeGrid& grid,
                                  const std::function<double(std::span<const double>)>& f) {
    GridFunction out(grid);
    const std::size_t d = grid.dimension();
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        for (std::size_t a = 0; a < d; ++a) x[a] = grid.coordinate(a, idx[a]);
        out.values_[flat] = f(x);
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] < grid.nodes(a)) break;
            idx[a] = 0;
        }
    }
    return out;
}

GridFunction GridFunction::constant(const LatticeGrid& grid, double c) {
    return GridFunction(grid, std::vector<double>(grid.size(), c));
}

GridFunction GridFunction::on_grid(LatticeGrid grid) const& {
    return GridFunction(std::move(grid), values_);
}

GridFunction GridFunction::on_grid(LatticeGrid grid) && {
    return GridFunction(std::move(grid), std::move(values_));
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same_grid(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double c, GridFunction a) { return a *= c; }

void require_same_grid(const GridFunction& u, const GridFunction& v) {
    if (!(u.grid() == v.grid())) throw ShapeError("grid functions live on different grids");
}

double l2_inner(const GridFunction& u, const GridFunction& v) {
    require_same_grid(u, v);
    const auto a = u.values();
    const auto b = v.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum * u.grid().cell_volume();
}

double l2_norm(const GridFunction& u) { return std::sqrt(l2_inner(u, u)); }

} // namespace fraclap
