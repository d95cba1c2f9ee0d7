#include "fraclap/symbol_weights.hpp"

#include "fraclap/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

namespace fraclap {

namespace {

// FFTW planning is not thread-safe; execution on distinct arrays is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(double* p) const { fftw_free(p); }
};

// Symbol samples on the half-period grid theta_q = 2 pi q / M_i, q = 0..M_i/2,
// followed by a d-dimensional REDFT00. Because the symbol is even in every
// coordinate this equals the full-period discrete Fourier sum.
std::vector<double> sampled_weights(double s, const std::vector<double>& spacing,
                                    const std::vector<std::size_t>& radius,
                                    const std::vector<std::size_t>& sampling) {
    const std::size_t d = spacing.size();
    std::vector<int> n(d);
    std::size_t total = 1;
    std::vector<std::vector<double>> axis_symbol(d);
    double norm = 1.0;
    for (std::size_t a = 0; a < d; ++a) {
        const std::size_t half = sampling[a] / 2;
        n[a] = static_cast<int>(half + 1);
        total *= half + 1;
        norm *= static_cast<double>(sampling[a]);
        axis_symbol[a].resize(half + 1);
        const double inv_h2 = 1.0 / (spacing[a] * spacing[a]);
        for (std::size_t q = 0; q <= half; ++q) {
            const double sn = std::sin(std::numbers::pi * static_cast<double>(q) / static_cast<double>(sampling[a]));
            axis_symbol[a][q] = 4.0 * sn * sn * inv_h2;
        }
    }

    std::unique_ptr<double, FftwFree> buf(static_cast<double*>(fftw_malloc(sizeof(double) * total)));
    if (!buf) throw Error("compute_weights: out of memory for symbol samples");
    double* data = buf.get();

    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double sigma = 0.0;
        for (std::size_t a = 0; a < d; ++a) sigma += axis_symbol[a][idx[a]];
        data[flat] = (s == 1.0) ? sigma : std::pow(sigma, s);
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] < static_cast<std::size_t>(n[a])) break;
            idx[a] = 0;
        }
    }

    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        std::vector<fftw_r2r_kind> kinds(d, FFTW_REDFT00);
        plan = fftw_plan_r2r(static_cast<int>(d), n.data(), data, data, kinds.data(), FFTW_ESTIMATE);
    }
    if (plan == nullptr) throw Error("compute_weights: FFTW planning failed");
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }

    // gather offsets 0..R_i
    std::size_t out_total = 1;
    for (std::size_t a = 0; a < d; ++a) out_total *= radius[a] + 1;
    std::vector<double> out(out_total);
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t flat = 0; flat < out_total; ++flat) {
        std::size_t src = 0;
        for (std::size_t a = 0; a < d; ++a) src = src * static_cast<std::size_t>(n[a]) + idx[a];
        out[flat] = data[src] / norm;
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] <= radius[a]) break;
            idx[a] = 0;
        }
    }
    return out;
}

void check_spacing(const std::vector<double>& spacing) {
    if (spacing.empty()) throw ShapeError("compute_weights: empty spacing");
    for (double h : spacing) {
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("compute_weights: spacing must be positive");
    }
}

} // namespace

FractionalOrder FractionalOrder::fractional(double s) {
    if (!(s > 0.0 && s < 1.0)) {
        std::ostringstream msg;
        msg << "fractional order must lie in (0,1), got " << s;
        throw DomainError(msg.str());
    }
    return FractionalOrder(s);
}

FractionalOrder FractionalOrder::from_value(double s, bool allow_baseline) {
    if (s == 1.0 && allow_baseline) return local_baseline();
    return fractional(s);
}

WeightStencil::WeightStencil(FractionalOrder order, std::vector<double> spacing, std::vector<std::size_t> radius,
                             std::vector<double> quadrant)
    : order_(order), spacing_(std::move(spacing)), radius_(std::move(radius)), quadrant_(std::move(quadrant)) {
    if (spacing_.size() != radius_.size()) throw ShapeError("WeightStencil: spacing/radius length mismatch");
    std::size_t total = 1;
    for (std::size_t r : radius_) total *= r + 1;
    if (total != quadrant_.size()) throw ShapeError("WeightStencil: quadrant size mismatch");
}

double WeightStencil::at(std::span<const long> offset) const {
    if (offset.size() != radius_.size()) throw ShapeError("WeightStencil::at: offset dimension mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < offset.size(); ++a) {
        const auto m = static_cast<std::size_t>(std::labs(offset[a]));
        if (m > radius_[a]) return 0.0;
        flat = flat * (radius_[a] + 1) + m;
    }
    return quadrant_[flat];
}

double WeightStencil::at(long m) const {
    const long off[1] = {m};
    return at(std::span<const long>(off));
}

double WeightStencil::at(long m1, long m2) const {
    const long off[2] = {m1, m2};
    return at(std::span<const long>(off));
}

double WeightStencil::absolute_sum() const {
    const std::size_t d = radius_.size();
    std::vector<std::size_t> idx(d, 0);
    double sum = 0.0;
    for (double w : quadrant_) {
        double mult = 1.0;
        for (std::size_t a = 0; a < d; ++a) mult *= (idx[a] == 0) ? 1.0 : 2.0;
        sum += mult * std::abs(w);
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] <= radius_[a]) break;
            idx[a] = 0;
        }
    }
    return sum;
}

double WeightStencil::weight_sum() const {
    // each quadrant entry stands for 2^(number of nonzero coordinates) offsets
    const std::size_t d = radius_.size();
    std::vector<std::size_t> idx(d, 0);
    double sum = 0.0;
    for (double w : quadrant_) {
        double mult = 1.0;
        for (std::size_t a = 0; a < d; ++a) mult *= (idx[a] == 0) ? 1.0 : 2.0;
        sum += mult * w;
        for (std::size_t a = d; a-- > 0;) {
            if (++idx[a] <= radius_[a]) break;
            idx[a] = 0;
        }
    }
    return sum;
}

WeightStencil compute_weights(FractionalOrder order, const std::vector<double>& spacing, std::size_t radius,
                              std::size_t oversample) {
    WeightOptions opts;
    opts.oversample = oversample;
    return compute_weights(order, spacing, std::vector<std::size_t>(spacing.size(), radius), opts);
}

namespace {

WeightStencil compute_weights_once(FractionalOrder order, const std::vector<double>& spacing,
                                   const std::vector<std::size_t>& radius, const WeightOptions& options) {
    check_spacing(spacing);
    const std::size_t d = spacing.size();
    if (radius.size() != d) throw ShapeError("compute_weights: radius length does not match spacing");
    for (std::size_t r : radius) {
        if (r < 1) throw DomainError("compute_weights: radius must be >= 1");
    }
    if (options.oversample < 4) throw DomainError("compute_weights: oversample must be >= 4");

    const double s = order.value();
    std::vector<std::size_t> base(d);
    for (std::size_t a = 0; a < d; ++a) base[a] = options.oversample * (2 * radius[a] + 2);

    // The symbol of the local operator is a trigonometric polynomial of degree
    // one per axis, so a single sampling level is already exact.
    std::size_t levels = options.levels != 0 ? options.levels : (d == 1 ? 4 : 3);
    if (order.is_local()) levels = 1;
    if (!order.is_local() && levels < 2) {
        throw DomainError("compute_weights: fractional orders need at least two sampling levels");
    }

    // sigma scales as h^-2, so weights are computed for spacing / h_0 and scaled
    // by h_0^-2s afterwards: congruent grids then get exactly proportional weights.
    const double h0 = spacing.front();
    std::vector<double> shape(spacing);
    for (double& h : shape) h /= h0;
    const double scale = std::pow(h0, -2.0 * s);

    std::vector<std::vector<double>> table;
    table.reserve(levels);
    for (std::size_t level = 0; level < levels; ++level) {
        std::vector<std::size_t> sampling(base);
        for (auto& m : sampling) m <<= level;
        table.push_back(sampled_weights(s, shape, radius, sampling));
    }

    // Trapezoidal sums of a symbol with a homogeneous singularity of degree 2s
    // at the origin carry errors in powers M^-(d+2s+2j); eliminate them in turn.
    std::vector<double> previous;
    for (std::size_t j = 0; j + 1 < levels; ++j) {
        const double factor = std::pow(2.0, static_cast<double>(d) + 2.0 * s + 2.0 * static_cast<double>(j));
        if (j + 2 == levels) previous = table[1];
        for (std::size_t i = 0; i + 1 < table.size(); ++i) {
            for (std::size_t k = 0; k < table[i].size(); ++k) {
                table[i][k] = (factor * table[i + 1][k] - table[i][k]) / (factor - 1.0);
            }
        }
        table.pop_back();
    }
    std::vector<double> weights = std::move(table.front());
    for (double& w : weights) w *= scale;
    if (!previous.empty()) {
        for (double& w : previous) w *= scale;
    }

    if (order.is_local()) {
        // The sampled sum reproduces the three-point weights only up to
        // roundoff, which the cancellation in small eigenvalues would amplify.
        std::fill(weights.begin(), weights.end(), 0.0);
        std::size_t stride = 1;
        for (std::size_t a = d; a-- > 0;) {
            const double inv = 1.0 / (spacing[a] * spacing[a]);
            weights[0] += 2.0 * inv;
            weights[stride] = -inv;
            stride *= radius[a] + 1;
        }
    }

    // ||T' - T||_2 <= sum_m |w'_m - w_m| and ||T||_2 >= w_0
    const double w0 = weights.front();
    double estimate = 0.0;
    if (!previous.empty()) {
        std::vector<double> delta(weights.size());
        for (std::size_t k = 0; k < weights.size(); ++k) delta[k] = weights[k] - previous[k];
        WeightStencil change(order, spacing, radius, std::move(delta));
        estimate = change.absolute_sum() / std::abs(w0);
    }
    if (estimate > options.precision_tol) {
        std::ostringstream msg;
        msg << "compute_weights: aliasing check failed (relative change " << estimate << " > "
            << options.precision_tol << "); increase oversample or levels";
        throw PrecisionError(msg.str());
    }

    if (!(w0 > 0.0)) throw PrecisionError("compute_weights: central weight is not positive");
    for (std::size_t k = 1; k < weights.size(); ++k) {
        const bool ok = order.is_local() ? weights[k] <= 0.0 : weights[k] < 0.0;
        if (!ok) {
            std::ostringstream msg;
            msg << "compute_weights: off-diagonal weight " << k << " has the wrong sign (" << weights[k] << ")";
            throw PrecisionError(msg.str());
        }
    }

    WeightStencil stencil(order, spacing, radius, std::move(weights));
    stencil.precision_estimate = estimate;
    stencil.levels_used = levels;
    stencil.base_sampling = base;
    return stencil;
}

} // namespace

WeightStencil compute_weights(FractionalOrder order, const std::vector<double>& spacing,
                              const std::vector<std::size_t>& radius, const WeightOptions& options) {
    if (options.levels != 0 || order.is_local()) return compute_weights_once(order, spacing, radius, options);
    // Automatic mode: strongly anisotropic spacings reach the asymptotic
    // regime late, so refine (one more level, then a doubled oversample)
    // while the finest symbol grid stays below a fixed sample budget.
    constexpr double kSampleBudget = 1 << 25;
    WeightOptions attempt = options;
    attempt.levels = spacing.size() == 1 ? 4 : 3;
    for (;;) {
        try {
            return compute_weights_once(order, spacing, radius, attempt);
        } catch (const PrecisionError&) {
            WeightOptions next = attempt;
            if (next.levels == (spacing.size() == 1 ? 4u : 3u)) {
                ++next.levels;
            } else {
                next.oversample *= 2;
            }
            double samples = 1.0;
            for (std::size_t r : radius) {
                samples *= static_cast<double>(next.oversample * (2 * r + 2)) * std::ldexp(1.0, int(next.levels) - 1);
            }
            if (samples > kSampleBudget) throw;
            attempt = next;
        }
    }
}

namespace {

using CacheKey = std::tuple<double, std::vector<double>, std::vector<std::size_t>, std::size_t, std::size_t, double>;

struct WeightCache {
    std::mutex mutex;
    std::map<CacheKey, std::shared_ptr<const WeightStencil>> entries;
};

WeightCache& weight_cache() {
    static WeightCache cache;
    return cache;
}

} // namespace

std::shared_ptr<const WeightStencil> cached_weights(FractionalOrder order, const std::vector<double>& spacing,
                                                    const std::vector<std::size_t>& radius,
                                                    const WeightOptions& options) {
    CacheKey key{order.value(), spacing, radius, options.oversample, options.levels, options.precision_tol};
    auto& cache = weight_cache();
    {
        std::lock_guard lock(cache.mutex);
        if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
    }
    // computed outside the lock; a concurrent duplicate yields an identical value
    auto stencil = std::make_shared<const WeightStencil>(compute_weights(order, spacing, radius, options));
    std::lock_guard lock(cache.mutex);
    auto [it, inserted] = cache.entries.emplace(std::move(key), std::move(stencil));
    return it->second;
}

void clear_weight_cache() {
    auto& cache = weight_cache();
    std::lock_guard lock(cache.mutex);
    cache.entries.clear();
}

std::size_t weight_cache_size() {
    auto& cache = weight_cache();
    std::lock_guard lock(cache.mutex);
    return cache.entries.size();
}

double closed_form_weights_1d(FractionalOrder order, long m) {
    const double s = order.value();
    if (!(s > 0.0 && s < 1.0)) throw DomainError("closed_form_weights_1d: s must lie in (0,1)");
    const double am = static_cast<double>(std::labs(m));
    if (am == 0.0) return std::exp(std::lgamma(2.0 * s + 1.0) - 2.0 * std::lgamma(s + 1.0));
    // |Gamma(-s)| = Gamma(1-s)/s on (0,1)
    const double log_pref = s * std::log(4.0) + std::lgamma(0.5 + s) - 0.5 * std::log(std::numbers::pi) -
                            (std::lgamma(1.0 - s) - std::log(s));
    return -std::exp(log_pref + std::lgamma(am - s) - std::lgamma(am + 1.0 + s));
}

void write_stencil_csv(const WeightStencil& stencil, std::ostream& out) {
    const std::size_t d = stencil.dimension();
    for (std::size_t a = 0; a < d; ++a) out << "offset_" << (a + 1) << ',';
    out << "weight\n";
    std::vector<long> off(d);
    for (std::size_t a = 0; a < d; ++a) off[a] = -static_cast<long>(stencil.radius(a));
    const auto old_precision = out.precision(17);
    while (true) {
        for (std::size_t a = 0; a < d; ++a) out << off[a] << ',';
        out << stencil.at(std::span<const long>(off)) << '\n';
        std::size_t a = d;
        while (a-- > 0) {
            if (++off[a] <= static_cast<long>(stencil.radius(a))) break;
            off[a] = -static_cast<long>(stencil.radius(a));
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
    out.precision(old_precision);
}

} // namespace fraclap
