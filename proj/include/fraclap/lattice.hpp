#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fraclap {

/// Axis-aligned box [lo_1,hi_1] x ... x [lo_d,hi_d].
class BoxDomain {
public:
    BoxDomain(std::vector<double> lo, std::vector<double> hi);

    static BoxDomain interval(double a, double b) { return BoxDomain({a}, {b}); }

    std::size_t dimension() const { return lo_.size(); }
    double lo(std::size_t axis) const { return lo_.at(axis); }
    double hi(std::size_t axis) const { return hi_.at(axis); }
    double extent(std::size_t axis) const { return hi_.at(axis) - lo_.at(axis); }
    double measure() const;

    const std::vector<double>& lo() const { return lo_; }
    const std::vector<double>& hi() const { return hi_; }

    bool operator==(const BoxDomain&) const = default;

private:
    std::vector<double> lo_;
    std::vector<double> hi_;
};

/// Uniform node-centered lattice over a box. Only interior nodes carry
/// unknowns: node j on axis i sits at lo_i + (j+1) h_i, h_i = extent_i/(N_i+1).
class LatticeGrid {
public:
    LatticeGrid(BoxDomain domain, std::vector<std::size_t> nodes_per_axis);

    static LatticeGrid interval(double a, double b, std::size_t nodes);

    /// Grid with the given spacing on every axis; the extents must be integer
    /// multiples of the spacing (within 1e-9 relative).
    static LatticeGrid with_spacing(BoxDomain domain, std::vector<double> spacing);

    const BoxDomain& domain() const { return domain_; }
    std::size_t dimension() const { return nodes_.size(); }
    std::size_t nodes(std::size_t axis) const { return nodes_.at(axis); }
    double spacing(std::size_t axis) const { return spacing_.at(axis); }
    const std::vector<std::size_t>& nodes_per_axis() const { return nodes_; }
    const std::vector<double>& spacing() const { return spacing_; }

    /// Total number of interior nodes.
    std::size_t size() const;
    /// Product of the spacings (the discrete volume element).
    double cell_volume() const;
    double coordinate(std::size_t axis, std::size_t j) const;

    /// Sub-grid made of a single axis.
    LatticeGrid axis_grid(std::size_t axis) const;

    /// Same nodes, axis `axis` stretched by `factor` (domain and spacing scale).
    LatticeGrid stretched(std::size_t axis, double factor) const;

    bool operator==(const LatticeGrid&) const = default;

private:
    BoxDomain domain_;
    std::vector<std::size_t> nodes_;
    std::vector<double> spacing_;
};

/// Tensor grid over the product box. Flattening is row-major with the axes of
/// `gx` outermost.
LatticeGrid product_grid(const LatticeGrid& gx, const LatticeGrid& gt);

/// Real values on the interior nodes of a grid; zero outside the domain.
class GridFunction {
public:
    explicit GridFunction(LatticeGrid grid);
    GridFunction(LatticeGrid grid, std::vector<double> values);

    /// Samples `f` at the interior nodes; `f` receives the node coordinates.
    static GridFunction sample(const LatticeGrid& grid,
                               const std::function<double(std::span<const double>)>& f);
    static GridFunction constant(const LatticeGrid& grid, double c);

    const LatticeGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Reinterprets the same values on another grid with identical node counts.
    GridFunction on_grid(LatticeGrid grid) const&;
    GridFunction on_grid(LatticeGrid grid) &&;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double c);

private:
    LatticeGrid grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double c, GridFunction a);

/// Throws ShapeError unless both functions live on the same grid.
void require_same_grid(const GridFunction& u, const GridFunction& v);

/// Discrete L2 pairing: sum_j u_j v_j times the cell volume.
double l2_inner(const GridFunction& u, const GridFunction& v);
double l2_norm(const GridFunction& u);

} // namespace fraclap
