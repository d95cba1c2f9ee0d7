#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace fraclap {

/// Exponent s of (-Delta)^s. Fractional orders satisfy 0 < s < 1; s = 1 is
/// only available through local_baseline().
class FractionalOrder {
public:
    static FractionalOrder fractional(double s);
    static FractionalOrder local_baseline() { return FractionalOrder(1.0); }
    /// Accepts (0,1), and s == 1 when `allow_baseline` is set.
    static FractionalOrder from_value(double s, bool allow_baseline);

    double value() const { return s_; }
    bool is_local() const { return s_ == 1.0; }

    bool operator==(const FractionalOrder&) const = default;

private:
    explicit FractionalOrder(double s) : s_(s) {}
    double s_;
};

struct WeightOptions {
    /// Sampling factor: the coarsest symbol grid has oversample*(2R_i+2) points per axis.
    std::size_t oversample = 8;
    /// Number of sampling levels (M, 2M, 4M, ...) combined by Richardson
    /// extrapolation; 0 selects 4 in one dimension and 3 otherwise, refining
    /// further (bounded sample budget) when the aliasing check fails.
    std::size_t levels = 0;
    /// Bound on the change caused by doubling the oversample factor, measured
    /// as sum_m |delta w_m| / w_0 (a bound on the relative operator change).
    double precision_tol = 1e-8;

    bool operator==(const WeightOptions&) const = default;
};

/// Translation-invariant weights w_m of the lattice fractional Laplacian with
/// symbol sigma(theta)^s, sigma(theta) = sum_i 4 sin^2(theta_i/2) / h_i^2.
///
/// The symbol is even in every coordinate, so only the non-negative quadrant
/// of offsets is stored; at() folds signs, which makes w_m = w_{-m} exact.
class WeightStencil {
public:
    WeightStencil(FractionalOrder order, std::vector<double> spacing, std::vector<std::size_t> radius,
                  std::vector<double> quadrant);

    FractionalOrder order() const { return order_; }
    std::size_t dimension() const { return spacing_.size(); }
    const std::vector<double>& spacing() const { return spacing_; }
    std::size_t radius(std::size_t axis) const { return radius_.at(axis); }
    const std::vector<std::size_t>& radius() const { return radius_; }

    /// Weight at an offset in {-R..R}^d; zero outside the retained box.
    double at(std::span<const long> offset) const;
    double at(long m) const;
    double at(long m1, long m2) const;

    /// Quadrant storage, row-major over non-negative offsets 0..R_i.
    std::span<const double> quadrant() const { return quadrant_; }

    /// Sum of all retained weights over {-R..R}^d. Equals the kernel mass
    /// beyond the truncation radius (the weights sum to zero on the full lattice).
    double weight_sum() const;
    /// Sum of |w_m| over {-R..R}^d; bounds the l2 norm of the Toeplitz operator.
    double absolute_sum() const;

    double precision_estimate = 0.0;
    std::size_t levels_used = 1;
    std::vector<std::size_t> base_sampling;

private:
    FractionalOrder order_;
    std::vector<double> spacing_;
    std::vector<std::size_t> radius_;
    std::vector<double> quadrant_;
};

/// Weights on {-R..R}^d by sampling the symbol and a discrete Fourier sum,
/// refined over doubled sampling grids. Throws PrecisionError when the
/// aliasing check or the sign pattern fails.
WeightStencil compute_weights(FractionalOrder order, const std::vector<double>& spacing, std::size_t radius,
                              std::size_t oversample);
WeightStencil compute_weights(FractionalOrder order, const std::vector<double>& spacing,
                              const std::vector<std::size_t>& radius, const WeightOptions& options);

/// Memoized compute_weights keyed by (s, spacing, radius, options). Safe to
/// call from several threads.
std::shared_ptr<const WeightStencil> cached_weights(FractionalOrder order, const std::vector<double>& spacing,
                                                    const std::vector<std::size_t>& radius,
                                                    const WeightOptions& options = {});
void clear_weight_cache();
std::size_t weight_cache_size();

/// Closed-form 1-D weight at unit spacing (Gamma-ratio kernel), 0 < s < 1.
double closed_form_weights_1d(FractionalOrder order, long m);

/// CSV with columns offset_1..offset_d,weight over the full offset box.
void write_stencil_csv(const WeightStencil& stencil, std::ostream& out);

} // namespace fraclap
