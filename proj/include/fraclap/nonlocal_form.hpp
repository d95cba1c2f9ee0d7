#pragma once

#include "fraclap/lattice.hpp"
#include "fraclap/symbol_weights.hpp"

#include <memory>
#include <string_view>

namespace fraclap {

enum class FormKind { full, tensor, slice_x, slice_t };
enum class Axis { x = 0, t = 1 };

std::string_view to_string(FormKind kind);

struct FormOptions {
    WeightOptions weights{.oversample = 4, .levels = 0, .precision_tol = 1e-5};
    /// Matvec strategy for the full form; `automatic` uses FFT convolution for
    /// every grid of dimension >= 2 and for long 1-D grids.
    enum class Matvec { automatic, direct, fft } matvec = Matvec::automatic;
};

/// Quadratic form u -> Prod(h) u^T T u of the lattice fractional Laplacian on
/// the interior nodes of a box grid, with u = 0 outside the box.
///
/// * full:    T_{jk} = w_{k-j} with the d-dimensional stencil of the grid.
/// * tensor:  T = T_x (x) I + I (x) T_t built from 1-D stencils (two-axis grids).
/// * slice_x: T_x (x) I, the slice energies integrated over t.
/// * slice_t: I (x) T_t, the slice energies integrated over x.
///
/// Stencils are retained out to offset N_i - 1 on every axis, which covers
/// all pairs of interior nodes: the restricted operator has no truncation.
/// Forms are immutable and cheap to copy.
class NonlocalForm {
public:
    NonlocalForm(FormKind kind, FractionalOrder order, LatticeGrid grid, const FormOptions& options = {});

    static NonlocalForm full(FractionalOrder order, LatticeGrid grid, const FormOptions& options = {}) {
        return NonlocalForm(FormKind::full, order, std::move(grid), options);
    }
    static NonlocalForm tensor(FractionalOrder order, LatticeGrid grid, const FormOptions& options = {}) {
        return NonlocalForm(FormKind::tensor, order, std::move(grid), options);
    }

    FormKind kind() const;
    FractionalOrder order() const;
    const LatticeGrid& grid() const;
    const FormOptions& options() const;

    /// Stencil of the full form (d-dimensional). Throws for other kinds.
    const WeightStencil& stencil() const;
    /// 1-D stencil of the given axis (tensor and slice kinds, and 1-D full forms).
    const WeightStencil& axis_stencil(std::size_t axis) const;

    /// The operator value T u as a grid function, so that
    /// l2_inner(apply(u), v) == pairing(u, v).
    GridFunction apply(const GridFunction& u) const;
    /// Reference matvec by explicit stencil summation.
    GridFunction apply_direct(const GridFunction& u) const;
    /// Matvec by zero-padded FFT convolution (full kind only).
    GridFunction apply_fft(const GridFunction& u) const;

    double pairing(const GridFunction& u, const GridFunction& v) const;
    double energy(const GridFunction& u) const;

    /// Approximate inverse of T used as a CG preconditioner: exact for 1-D full
    /// forms and for tensor/slice kinds, the inverse of the tensor form for 2-D
    /// full forms.
    GridFunction precondition(const GridFunction& r) const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

GridFunction apply(const NonlocalForm& form, const GridFunction& u);
double energy(const NonlocalForm& form, const GridFunction& u);

/// Sum over slices of the 1-D full-form energy along `axis`, weighted by the
/// transverse spacing. `form` supplies order, grid and options (any kind on a
/// two-axis grid).
double slice_energy_sum(const NonlocalForm& form, const GridFunction& u, Axis axis);

/// |B_ell|^{-1} times the energy of the t-stretched function: the values of u
/// on `grid_unit` (omega x B_1) are placed on the lattice with spacing
/// (h_x, ell h_t). kind is full (default) or tensor.
double scaled_energy(FractionalOrder order, const LatticeGrid& grid_unit, double ell, const GridFunction& u,
                     FormKind kind = FormKind::full, const FormOptions& options = {});

} // namespace fraclap
