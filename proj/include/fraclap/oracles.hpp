#pragma once

#include "fraclap/lattice.hpp"
#include "fraclap/symbol_weights.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace fraclap {

/// A function of one variable used as an independent reference.
///
/// `fourier` is the unitary transform (2 pi)^{-1/2} int f(x) e^{-i x xi} dx when
/// known in closed form; otherwise it is computed by quadrature over `support`.
struct AnalyticFunction {
    std::string name;
    std::function<double(double)> evaluate;
    double support_lo = -1.0;
    double support_hi = 1.0;
    std::function<double(double)> fourier; ///< real (the functions are even)
    std::function<double(double)> closed_form_energy; ///< s -> E^s(f), when known

    /// e^{-x^2/2}; the transform is e^{-xi^2/2} and E^s = Gamma(s + 1/2).
    /// Evaluated on the truncation box (-12, 12).
    static AnalyticFunction gaussian();
    /// exp(1 - 1 / (1 - x^2)) on (-1, 1).
    static AnalyticFunction bump();
    static AnalyticFunction zero();

    GridFunction sample(const LatticeGrid& grid) const;
};

/// int |xi|^{2s} |F f(xi)|^2 d xi over [-cutoff, cutoff]; quad_points sets the
/// number of panels. Throws PrecisionError when the integral over
/// [cutoff, 2 cutoff] exceeds 1e-10 of the total.
double fourier_energy(const AnalyticFunction& f, FractionalOrder order, double cutoff = 40.0,
                      std::size_t quad_points = 200);

struct MonteCarloEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// C_{1,s}/2 times the Gagliardo double integral of f extended by zero outside
/// support_box = (a, b): a Monte-Carlo estimate of the interior x interior part
/// (offsets drawn with density proportional to r^{1-2s}) plus the exterior part
/// C_{1,s} int f^2 kappa by quadrature. Deterministic given the seed.
/// Reliable for s up to about 0.9: closer to 1 most of the integral comes
/// from offsets too small for f(z) - f(eta) to be resolved in double precision.
MonteCarloEstimate montecarlo_gagliardo(const AnalyticFunction& f, FractionalOrder order, double a, double b,
                                        std::size_t samples, std::uint64_t seed);

/// int over R \ (a, b) of |x - y|^{-1-2s} dy = ((x-a)^{-2s} + (b-x)^{-2s}) / (2s).
double tail_kappa(double x, double a, double b, FractionalOrder order);

/// s 2^{2s} Gamma((d + 2s)/2) / (Gamma(1 - s) pi^{d/2}).
double gagliardo_constant(std::size_t d, FractionalOrder order);

/// Smallest eigenvalue of the three-point Laplacian on a 1-D grid,
/// (4 / h^2) sin^2(pi h / (2 L)).
double local_baseline_lambda(const LatticeGrid& grid);

} // namespace fraclap
