#include "fraclap/oracles.hpp"

#include "fraclap/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace fraclap {

namespace {

using boost::math::quadrature::gauss;
using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

double bump_value(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

// Unitary cosine transform of an even function supported in (lo, hi).
double transform_by_quadrature(const AnalyticFunction& f, double xi) {
    auto integrand = [&](double x) { return f.evaluate(x) * std::cos(x * xi); };
    // split so that each panel holds at most a few oscillations
    const double width = f.support_hi - f.support_lo;
    const auto panels = static_cast<std::size_t>(std::ceil(std::max(8.0, std::abs(xi) * width / 4.0)));
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = f.support_lo + width * static_cast<double>(p) / static_cast<double>(panels);
        const double b = f.support_lo + width * static_cast<double>(p + 1) / static_cast<double>(panels);
        sum += gauss<double, 40>::integrate(integrand, a, b);
    }
    return sum / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace

AnalyticFunction AnalyticFunction::gaussian() {
    AnalyticFunction f;
    f.name = "gaussian";
    f.evaluate = [](double x) { return std::exp(-0.5 * x * x); };
    f.support_lo = -12.0;
    f.support_hi = 12.0;
    f.fourier = [](double xi) { return std::exp(-0.5 * xi * xi); };
    f.closed_form_energy = [](double s) { return std::tgamma(s + 0.5); };
    return f;
}

AnalyticFunction AnalyticFunction::bump() {
    AnalyticFunction f;
    f.name = "bump";
    f.evaluate = bump_value;
    f.support_lo = -1.0;
    f.support_hi = 1.0;
    return f;
}

AnalyticFunction AnalyticFunction::zero() {
    AnalyticFunction f;
    f.name = "zero";
    f.evaluate = [](double) { return 0.0; };
    f.fourier = [](double) { return 0.0; };
    f.closed_form_energy = [](double) { return 0.0; };
    return f;
}

GridFunction AnalyticFunction::sample(const LatticeGrid& grid) const {
    return GridFunction::sample(grid, [this](std::span<const double> x) { return evaluate(x[0]); });
}

double fourier_energy(const AnalyticFunction& f, FractionalOrder order, double cutoff, std::size_t quad_points) {
    if (!(cutoff > 0.0)) throw DomainError("fourier_energy: cutoff must be positive");
    if (quad_points < 1) throw DomainError("fourier_energy: quad_points must be >= 1");
    const double s = order.value();
    auto transform = [&](double xi) { return f.fourier ? f.fourier(xi) : transform_by_quadrature(f, xi); };
    auto integrand = [&](double xi) {
        const double g = transform(xi);
        return (xi == 0.0 ? 0.0 : std::pow(xi, 2.0 * s)) * g * g;
    };
    // even integrand: twice the half line; tanh-sinh absorbs the xi^{2s} cusp at 0
    auto half_line = [&](double lo, double hi) {
        double sum = 0.0;
        double a = lo;
        if (lo == 0.0) {
            const double first = std::min(hi, 1.0);
            tanh_sinh<double> ts;
            sum += ts.integrate(integrand, 0.0, first);
            a = first;
        }
        const double width = (hi - a) / static_cast<double>(quad_points);
        for (std::size_t p = 0; p < quad_points && width > 0.0; ++p) {
            const double pa = a + width * static_cast<double>(p);
            // one Kronrod rule per narrow panel: adaptive refinement would only
            // chase the roundoff noise of computed transforms
            sum += gauss_kronrod<double, 31>::integrate(integrand, pa, pa + width, 0);
        }
        return 2.0 * sum;
    };
    const double total = half_line(0.0, cutoff);
    const double tail = half_line(cutoff, 2.0 * cutoff);
    if (std::abs(tail) > 1e-10 * std::max(std::abs(total), 1e-300) && std::abs(tail) > 1e-300) {
        std::ostringstream msg;
        msg << "fourier_energy: tail beyond cutoff " << cutoff << " is " << tail << " (total " << total << ")";
        throw PrecisionError(msg.str());
    }
    return total;
}

MonteCarloEstimate montecarlo_gagliardo(const AnalyticFunction& f, FractionalOrder order, double a, double b,
                                        std::size_t samples, std::uint64_t seed) {
    if (order.is_local()) throw DomainError("montecarlo_gagliardo: needs 0 < s < 1 (C_{d,s} has a pole at s = 1)");
    if (!(a < b)) throw DomainError("montecarlo_gagliardo: empty support box");
    if (samples < 2) throw DomainError("montecarlo_gagliardo: need at least two samples");
    const double s = order.value();
    const double c = gagliardo_constant(1, order);
    const double length = b - a;

    // Interior x interior: z uniform on (a, b), eta = z +- r with r drawn with
    // density p r^{p-1} / L^p on (0, L], p = 2 - 2 min(s, 0.9); pairs leaving
    // (a, b) are rejected. For s <= 0.9 the weight is (f(z) - f(eta))^2 / r^2,
    // which stays bounded; capping p keeps offsets far above roundoff as s -> 1.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double p = 2.0 - 2.0 * std::min(s, 0.9);
    const double proposal_norm = 2.0 * std::pow(length, p + 1.0) / p;
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const double z = a + length * unit(rng);
        const double r = length * std::pow(1.0 - unit(rng), 1.0 / p);
        const double eta = unit(rng) < 0.5 ? z - r : z + r;
        double value = 0.0;
        if (eta > a && eta < b && r > 0.0) {
            const double du = f.evaluate(z) - f.evaluate(eta);
            value = proposal_norm * du * du * std::pow(r, -2.0 * s - p);
        }
        const double delta = value - mean;
        mean += delta / static_cast<double>(k + 1);
        m2 += delta * (value - mean);
    }
    const double variance = m2 / static_cast<double>(samples - 1);
    const double interior = 0.5 * c * mean;
    const double interior_err = 0.5 * c * std::sqrt(variance / static_cast<double>(samples));

    // Exterior part: f(z)^2 kappa(z), integrable since f vanishes at the ends
    // (or is negligible there for the truncated Gaussian).
    auto integrand = [&](double z) {
        if (!(z > a && z < b)) return 0.0;
        const double v = f.evaluate(z);
        if (v == 0.0) return 0.0;
        const double term = v * v * tail_kappa(z, a, b, order);
        return std::isfinite(term) ? term : 0.0;
    };
    tanh_sinh<double> ts;
    const double exterior = c * ts.integrate(integrand, a, b);
    return {interior + exterior, interior_err};
}

double tail_kappa(double x, double a, double b, FractionalOrder order) {
    if (!(x > a && x < b)) throw DomainError("tail_kappa: x must lie inside (a, b)");
    const double s = order.value();
    if (order.is_local()) throw DomainError("tail_kappa: needs 0 < s < 1");
    return (std::pow(x - a, -2.0 * s) + std::pow(b - x, -2.0 * s)) / (2.0 * s);
}

double gagliardo_constant(std::size_t d, FractionalOrder order) {
    if (order.is_local()) throw DomainError("gagliardo_constant: C_{d,s} has a pole at s = 1");
    const double s = order.value();
    const double dd = static_cast<double>(d);
    return s * std::pow(2.0, 2.0 * s) / std::tgamma(1.0 - s) * std::tgamma((dd + 2.0 * s) / 2.0) /
           std::pow(std::numbers::pi, dd / 2.0);
}

double local_baseline_lambda(const LatticeGrid& grid) {
    if (grid.dimension() != 1) throw ShapeError("local_baseline_lambda: expected a one-dimensional grid");
    const double h = grid.spacing(0);
    const double length = grid.domain().extent(0);
    const double sn = std::sin(std::numbers::pi * h / (2.0 * length));
    return 4.0 / (h * h) * sn * sn;
}

} // namespace fraclap
