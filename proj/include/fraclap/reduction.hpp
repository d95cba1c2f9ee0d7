#pragma once

#include "fraclap/lattice.hpp"
#include "fraclap/nonlocal_form.hpp"
#include "fraclap/solvers.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fraclap {

enum class Profile { one, parabola, cosine, eigenfunction };
enum class Perturbation { none, linear, cosine };

std::string_view to_string(Profile p);
std::string_view to_string(Perturbation p);
Profile parse_profile(std::string_view name);
Perturbation parse_perturbation(std::string_view name);

/// Loads f_ell(x, t) = a(x) + ell^-alpha g(x, t / ell) on omega x B_ell, with
/// a one of 1, 1 - x^2, cos(pi x / 2) or nodal values of an eigenfunction, and
/// g(x, tau) = a(x) tau or a(x) cos(pi tau / 2). Without a perturbation the
/// load does not depend on t and its limit is f_inf = a.
struct LoadSpec {
    Profile profile = Profile::one;
    Perturbation perturbation = Perturbation::none;
    double alpha = 1.0;
    /// Nodal values of a(x) on the section grid, used by Profile::eigenfunction.
    std::vector<double> nodal;

    /// a at section node j with coordinate x.
    double profile_at(std::size_t j, double x) const;
    /// g(x, tau) / a(x).
    double perturbation_factor(double tau) const;
};

/// Grid policy: the section grid is kept and B_ell = (-ell, ell) is meshed with
/// spacing ht, so the t node count 2 ell / ht - 1 grows linearly with ell.
LatticeGrid cylinder_grid(const LatticeGrid& omega_grid, double ell, double ht);
/// The same nodes on omega x B_1 (t spacing ht / ell).
LatticeGrid unit_cylinder_grid(const LatticeGrid& omega_grid, double ell, double ht);

/// f_inf = a on the section grid.
GridFunction section_load(const LoadSpec& load, const LatticeGrid& omega_grid);
/// f_ell sampled on omega x B_ell.
GridFunction cylinder_load(const LoadSpec& load, const LatticeGrid& cylinder, double ell);
/// f_ell(x, ell tau) sampled on omega x B_1.
GridFunction rescaled_load(const LoadSpec& load, const LatticeGrid& unit_cylinder, double ell);
/// ||rescaled_load - f_inf||_{L2(omega x B_1)}.
double load_residual(const LoadSpec& load, const LatticeGrid& unit_cylinder, double ell);

/// Mean over t nodes at each x node (uniform weights).
GridFunction average_rho(const GridFunction& v);
/// v(x, t / ell): the same values with the t spacing multiplied by ell.
GridFunction breve_rescale(const GridFunction& v, double ell);
/// Inverse of breve_rescale.
GridFunction breve_unscale(const GridFunction& v, double ell);

/// u_ell solving the discrete Dirichlet problem on omega x B_ell.
SolveResult solve_dirichlet_cylinder(FractionalOrder order, const LatticeGrid& omega_grid, double ell, double ht,
                                     const LoadSpec& load, double tol = 1e-12, const FormOptions& options = {});
/// u_inf solving the section problem with load f_inf.
SolveResult solve_dirichlet_section(FractionalOrder order, const LatticeGrid& omega_grid, const GridFunction& f_inf,
                                    double tol = 1e-12, const FormOptions& options = {});

struct ReductionError {
    double hs_error = 0.0; ///< sqrt of the section energy of rho(u_ell) - u_inf
    double l2_error = 0.0;
};

ReductionError reduction_error(FractionalOrder order, const GridFunction& u_ell, const GridFunction& u_inf,
                               const FormOptions& options = {});

/// Standard bump exp(1 - 1 / (1 - r^2)) on |r| < 1, with phi(0) = 1.
double bump(double r);
/// phi(|t|^ell).
double recovery_cutoff(double t, double ell);
/// u(x) phi(|t|^ell) on section x t_grid.
GridFunction recovery_sequence(const GridFunction& u, double ell, const LatticeGrid& t_grid);

inline constexpr double kInfiniteEll = std::numeric_limits<double>::infinity();

/// I_ell(v) = 1/2 scaled energy - |B_1|^-1 (f_ell(x, ell tau), v) for v on omega x B_1,
/// or I_inf(u) = 1/2 E(u) - (f_inf, u) for u on the section grid when ell is infinite.
double functional_I(FractionalOrder order, double ell, const GridFunction& v, const LoadSpec& load,
                    const FormOptions& options = {});

/// Minimum values: M_ell / |B_ell| from u_ell on omega x B_ell, and M_inf from u_inf.
double rescaled_minimum(const GridFunction& u_ell, const GridFunction& f_ell);
double section_minimum(const GridFunction& u_inf, const GridFunction& f_inf);

/// Explicit a-priori bounds for a function v on omega x B_1 in terms of I_ell(v).
struct CoercivityBounds {
    double l2_bound = 0.0;             ///< bound on ||v||_{L2(omega x B_1)}
    double section_energy_bound = 0.0; ///< bound on E(rho(v)) (and on the scaled energy of v)
};

/// With n = ||v||, F = ||f_ell(x, ell tau)|| on omega x B_1 and B = |B_1|:
/// lambda(omega) n^2 / B <= E_ell(v) = 2 I + 2 G_ell(v) <= 2 I + 2 F n / B, which
/// gives n <= (F + sqrt(F^2 + 2 lambda I B)) / lambda, and E(rho v) <= E_ell(v).
CoercivityBounds coercivity_bounds(double I_value, double load_norm, double lambda_omega, double b1_measure);

} // namespace fraclap
