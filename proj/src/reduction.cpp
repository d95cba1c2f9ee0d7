#include "fraclap/reduction.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace fraclap {

namespace {

void require_cylinder(const LatticeGrid& grid, const char* who) {
    if (grid.dimension() != 2) throw ShapeError(std::string(who) + ": expected a two-axis grid");
}

void require_ell(double ell, const char* who) {
    if (!(ell > 0.0) || !std::isfinite(ell)) {
        std::ostringstream msg;
        msg << who << ": ell must be positive and finite (got " << ell << ")";
        throw DomainError(msg.str());
    }
}

// a(x) (1 + ell^-alpha g(x, tau) / a(x)) at the nodes of a two-axis grid,
// with tau = t * t_to_tau.
GridFunction sample_load(const LoadSpec& load, const LatticeGrid& grid, double ell, double t_to_tau) {
    const std::size_t nx = grid.nodes(0);
    const std::size_t nt = grid.nodes(1);
    if (load.profile == Profile::eigenfunction && load.nodal.size() != nx) {
        throw ShapeError("load: eigenfunction profile has the wrong number of nodal values");
    }
    const double amplitude = load.perturbation == Perturbation::none ? 0.0 : std::pow(ell, -load.alpha);
    std::vector<double> factor(nt);
    for (std::size_t j = 0; j < nt; ++j) {
        factor[j] = 1.0 + amplitude * load.perturbation_factor(grid.coordinate(1, j) * t_to_tau);
    }
    GridFunction f(grid);
    for (std::size_t i = 0; i < nx; ++i) {
        const double a = load.profile_at(i, grid.coordinate(0, i));
        for (std::size_t j = 0; j < nt; ++j) f[i * nt + j] = a * factor[j];
    }
    return f;
}

} // namespace

std::string_view to_string(Profile p) {
    switch (p) {
    case Profile::one: return "one";
    case Profile::parabola: return "parabola";
    case Profile::cosine: return "cosine";
    case Profile::eigenfunction: return "eigenfunction";
    }
    return "?";
}

std::string_view to_string(Perturbation p) {
    switch (p) {
    case Perturbation::none: return "none";
    case Perturbation::linear: return "linear";
    case Perturbation::cosine: return "cosine";
    }
    return "?";
}

Profile parse_profile(std::string_view name) {
    for (Profile p : {Profile::one, Profile::parabola, Profile::cosine, Profile::eigenfunction}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError("unknown load profile '" + std::string(name) + "'");
}

Perturbation parse_perturbation(std::string_view name) {
    for (Perturbation p : {Perturbation::none, Perturbation::linear, Perturbation::cosine}) {
        if (to_string(p) == name) return p;
    }
    throw ConfigError("unknown load perturbation '" + std::string(name) + "'");
}

double LoadSpec::profile_at(std::size_t j, double x) const {
    switch (profile) {
    case Profile::one: return 1.0;
    case Profile::parabola: return 1.0 - x * x;
    case Profile::cosine: return std::cos(std::numbers::pi * x / 2.0);
    case Profile::eigenfunction: return nodal.at(j);
    }
    return 0.0;
}

double LoadSpec::perturbation_factor(double tau) const {
    switch (perturbation) {
    case Perturbation::none: return 0.0;
    case Perturbation::linear: return tau;
    case Perturbation::cosine: return std::cos(std::numbers::pi * tau / 2.0);
    }
    return 0.0;
}

LatticeGrid cylinder_grid(const LatticeGrid& omega_grid, double ell, double ht) {
    require_ell(ell, "cylinder_grid");
    if (omega_grid.dimension() != 1) throw ShapeError("cylinder_grid: section grid must be one-dimensional");
    const BoxDomain domain({omega_grid.domain().lo(0), -ell}, {omega_grid.domain().hi(0), ell});
    return LatticeGrid::with_spacing(domain, {omega_grid.spacing(0), ht});
}

LatticeGrid unit_cylinder_grid(const LatticeGrid& omega_grid, double ell, double ht) {
    return cylinder_grid(omega_grid, ell, ht).stretched(1, 1.0 / ell);
}

GridFunction section_load(const LoadSpec& load, const LatticeGrid& omega_grid) {
    if (omega_grid.dimension() != 1) throw ShapeError("section_load: section grid must be one-dimensional");
    if (load.profile == Profile::eigenfunction && load.nodal.size() != omega_grid.size()) {
        throw ShapeError("section_load: eigenfunction profile has the wrong number of nodal values");
    }
    GridFunction f(omega_grid);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = load.profile_at(i, omega_grid.coordinate(0, i));
    return f;
}

GridFunction cylinder_load(const LoadSpec& load, const LatticeGrid& cylinder, double ell) {
    require_cylinder(cylinder, "cylinder_load");
    require_ell(ell, "cylinder_load");
    return sample_load(load, cylinder, ell, 1.0 / ell);
}

GridFunction rescaled_load(const LoadSpec& load, const LatticeGrid& unit_cylinder, double ell) {
    require_cylinder(unit_cylinder, "rescaled_load");
    require_ell(ell, "rescaled_load");
    return sample_load(load, unit_cylinder, ell, 1.0);
}

double load_residual(const LoadSpec& load, const LatticeGrid& unit_cylinder, double ell) {
    GridFunction diff = rescaled_load(load, unit_cylinder, ell);
    const std::size_t nt = unit_cylinder.nodes(1);
    for (std::size_t i = 0; i < unit_cylinder.nodes(0); ++i) {
        const double a = load.profile_at(i, unit_cylinder.coordinate(0, i));
        for (std::size_t j = 0; j < nt; ++j) diff[i * nt + j] -= a;
    }
    return l2_norm(diff);
}

// The t-mean of the function extended by zero: h_t sum_j v(x, t_j) / |B|.
// With this normalization E(rho v) <= mean slice energy <= scaled energy hold
// for every v, not only up to O(1/N_t).
GridFunction average_rho(const GridFunction& v) {
    const LatticeGrid& grid = v.grid();
    require_cylinder(grid, "average_rho");
    const std::size_t nx = grid.nodes(0);
    const std::size_t nt = grid.nodes(1);
    const double weight = grid.spacing(1) / grid.domain().extent(1);
    GridFunction out(grid.axis_grid(0));
    for (std::size_t i = 0; i < nx; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < nt; ++j) sum += v[i * nt + j];
        out[i] = weight * sum;
    }
    return out;
}

GridFunction breve_rescale(const GridFunction& v, double ell) {
    require_cylinder(v.grid(), "breve_rescale");
    require_ell(ell, "breve_rescale");
    if (ell == 1.0) return v;
    return v.on_grid(v.grid().stretched(1, ell));
}

GridFunction breve_unscale(const GridFunction& v, double ell) {
    require_ell(ell, "breve_unscale");
    return breve_rescale(v, 1.0 / ell);
}

SolveResult solve_dirichlet_cylinder(FractionalOrder order, const LatticeGrid& omega_grid, double ell, double ht,
                                     const LoadSpec& load, double tol, const FormOptions& options) {
    const LatticeGrid grid = cylinder_grid(omega_grid, ell, ht);
    const NonlocalForm form = NonlocalForm::full(order, grid, options);
    return cg_solve(form, cylinder_load(load, grid, ell), CgOptions{.tol = tol, .max_iter = 2000, .precondition = true});
}

SolveResult solve_dirichlet_section(FractionalOrder order, const LatticeGrid& omega_grid, const GridFunction& f_inf,
                                    double tol, const FormOptions& options) {
    if (omega_grid.dimension() != 1) throw ShapeError("solve_dirichlet_section: section grid must be one-dimensional");
    const NonlocalForm form = NonlocalForm::full(order, omega_grid, options);
    return cg_solve(form, f_inf.on_grid(omega_grid), CgOptions{.tol = tol, .max_iter = 2000, .precondition = true});
}

ReductionError reduction_error(FractionalOrder order, const GridFunction& u_ell, const GridFunction& u_inf,
                               const FormOptions& options) {
    require_cylinder(u_ell.grid(), "reduction_error");
    const LatticeGrid& section = u_inf.grid();
    const LatticeGrid axis = u_ell.grid().axis_grid(0);
    if (section.dimension() != 1 || section.nodes(0) != axis.nodes(0) ||
        std::abs(section.spacing(0) - axis.spacing(0)) > 1e-12 * section.spacing(0)) {
        throw ShapeError("reduction_error: section grids do not match");
    }
    const GridFunction diff = average_rho(u_ell).on_grid(section) - u_inf;
    const double e = NonlocalForm::full(order, section, options).energy(diff);
    return {std::sqrt(std::max(e, 0.0)), l2_norm(diff)};
}

double bump(double r) {
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double recovery_cutoff(double t, double ell) { return bump(std::pow(std::abs(t), ell)); }

GridFunction recovery_sequence(const GridFunction& u, double ell, const LatticeGrid& t_grid) {
    if (u.grid().dimension() != 1 || t_grid.dimension() != 1) {
        throw ShapeError("recovery_sequence: expected one-dimensional section and t grids");
    }
    if (!(ell >= 1.0)) throw DomainError("recovery_sequence: ell must be >= 1");
    const LatticeGrid grid = product_grid(u.grid(), t_grid);
    const std::size_t nt = t_grid.size();
    std::vector<double> phi(nt);
    for (std::size_t j = 0; j < nt; ++j) phi[j] = recovery_cutoff(t_grid.coordinate(0, j), ell);
    GridFunction v(grid);
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < nt; ++j) v[i * nt + j] = u[i] * phi[j];
    }
    return v;
}

double functional_I(FractionalOrder order, double ell, const GridFunction& v, const LoadSpec& load,
                    const FormOptions& options) {
    if (std::isinf(ell)) {
        if (v.grid().dimension() != 1) throw ShapeError("functional_I: the limit functional lives on the section");
        const double e = NonlocalForm::full(order, v.grid(), options).energy(v);
        return 0.5 * e - l2_inner(section_load(load, v.grid()), v);
    }
    require_ell(ell, "functional_I");
    if (v.grid().dimension() != 2) throw ShapeError("functional_I: finite ell needs a function on omega x B_1");
    const double b1 = v.grid().domain().extent(1);
    const double e = scaled_energy(order, v.grid(), ell, v, FormKind::full, options);
    return 0.5 * e - l2_inner(rescaled_load(load, v.grid(), ell), v) / b1;
}

double rescaled_minimum(const GridFunction& u_ell, const GridFunction& f_ell) {
    require_cylinder(u_ell.grid(), "rescaled_minimum");
    return -0.5 * l2_inner(f_ell, u_ell) / u_ell.grid().domain().extent(1);
}

double section_minimum(const GridFunction& u_inf, const GridFunction& f_inf) { return -0.5 * l2_inner(f_inf, u_inf); }

CoercivityBounds coercivity_bounds(double I_value, double load_norm, double lambda_omega, double b1_measure) {
    if (!(lambda_omega > 0.0) || !(b1_measure > 0.0)) throw DomainError("coercivity_bounds: invalid constants");
    const double disc = load_norm * load_norm + 2.0 * lambda_omega * I_value * b1_measure;
    const double n = (load_norm + std::sqrt(std::max(disc, 0.0))) / lambda_omega;
    return {n, 2.0 * I_value + 2.0 * load_norm * n / b1_measure};
}

} // namespace fraclap
