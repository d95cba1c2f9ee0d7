#include "fraclap/nonlocal_form.hpp"

#include "fraclap/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <optional>

namespace fraclap {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <typename T>
struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
        if (data == nullptr) throw Error("FFT buffer allocation failed");
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* data;
};

/// Multiplication by a multilevel Toeplitz matrix through circulant embedding
/// into a grid of 2 N_i points per axis.
class FftConvolver {
public:
    FftConvolver(const WeightStencil& stencil, const std::vector<std::size_t>& nodes) : nodes_(nodes) {
        const std::size_t d = nodes.size();
        padded_.resize(d);
        real_total_ = 1;
        for (std::size_t a = 0; a < d; ++a) {
            padded_[a] = 2 * nodes[a];
            real_total_ *= padded_[a];
        }
        complex_total_ = real_total_ / padded_.back() * (padded_.back() / 2 + 1);

        FftwBuffer<double> kernel(real_total_);
        FftwBuffer<fftw_complex> freq(complex_total_);
        std::vector<int> n(padded_.begin(), padded_.end());
        {
            std::lock_guard lock(planner_mutex());
            forward_ = fftw_plan_dft_r2c(static_cast<int>(d), n.data(), kernel.data, freq.data, FFTW_ESTIMATE);
            backward_ = fftw_plan_dft_c2r(static_cast<int>(d), n.data(), freq.data, kernel.data, FFTW_ESTIMATE);
        }
        if (forward_ == nullptr || backward_ == nullptr) throw Error("FFTW planning failed");

        std::vector<std::size_t> idx(d, 0);
        std::vector<long> offset(d);
        for (std::size_t flat = 0; flat < real_total_; ++flat) {
            bool zero = false;
            for (std::size_t a = 0; a < d; ++a) {
                const auto k = static_cast<long>(idx[a]);
                const auto na = static_cast<long>(nodes[a]);
                if (k == na) zero = true;
                offset[a] = k < na ? k : k - static_cast<long>(padded_[a]);
            }
            kernel.data[flat] = zero ? 0.0 : stencil.at(std::span<const long>(offset));
            for (std::size_t a = d; a-- > 0;) {
                if (++idx[a] < padded_[a]) break;
                idx[a] = 0;
            }
        }
        fftw_execute_dft_r2c(forward_, kernel.data, freq.data);
        // the embedded kernel is even, so its spectrum is real
        spectrum_.resize(complex_total_);
        const double scale = 1.0 / static_cast<double>(real_total_);
        for (std::size_t i = 0; i < complex_total_; ++i) spectrum_[i] = freq.data[i][0] * scale;
    }

    ~FftConvolver() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    FftConvolver(const FftConvolver&) = delete;
    FftConvolver& operator=(const FftConvolver&) = delete;

    void apply(std::span<const double> in, std::span<double> out) const {
        const std::size_t d = nodes_.size();
        FftwBuffer<double> buf(real_total_);
        FftwBuffer<fftw_complex> freq(complex_total_);
        std::fill(buf.data, buf.data + real_total_, 0.0);
        for_each_interior([&](std::size_t src, std::size_t dst) { buf.data[dst] = in[src]; }, d);
        fftw_execute_dft_r2c(forward_, buf.data, freq.data);
        for (std::size_t i = 0; i < complex_total_; ++i) {
            freq.data[i][0] *= spectrum_[i];
            freq.data[i][1] *= spectrum_[i];
        }
        fftw_execute_dft_c2r(backward_, freq.data, buf.data);
        for_each_interior([&](std::size_t dst, std::size_t src) { out[dst] = buf.data[src]; }, d);
    }

private:
    // Calls f(interior flat index, padded flat index) for every interior node.
    template <typename F>
    void for_each_interior(F&& f, std::size_t d) const {
        std::size_t total = 1;
        for (std::size_t n : nodes_) total *= n;
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t flat = 0; flat < total; ++flat) {
            std::size_t padded = 0;
            for (std::size_t a = 0; a < d; ++a) padded = padded * padded_[a] + idx[a];
            f(flat, padded);
            for (std::size_t a = d; a-- > 0;) {
                if (++idx[a] < nodes_[a]) break;
                idx[a] = 0;
            }
        }
    }

    std::vector<std::size_t> nodes_;
    std::vector<std::size_t> padded_;
    std::size_t real_total_ = 0;
    std::size_t complex_total_ = 0;
    std::vector<double> spectrum_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

Eigen::MatrixXd dense_toeplitz(const WeightStencil& stencil, std::size_t n) {
    Eigen::MatrixXd t(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            t(i, j) = stencil.at(static_cast<long>(i) - static_cast<long>(j));
        }
    }
    return t;
}

std::vector<std::size_t> exact_radius(const LatticeGrid& grid) {
    std::vector<std::size_t> r(grid.dimension());
    for (std::size_t a = 0; a < r.size(); ++a) r[a] = std::max<std::size_t>(1, grid.nodes(a) - 1);
    return r;
}

constexpr std::size_t kDenseLimit = 4096;
constexpr std::size_t kCholeskyLimit = 2048;

} // namespace

struct NonlocalForm::Impl {
    FormKind kind;
    FractionalOrder order;
    LatticeGrid grid;
    FormOptions options;

    std::shared_ptr<const WeightStencil> stencil;
    std::vector<std::shared_ptr<const WeightStencil>> axis;
    std::vector<Eigen::MatrixXd> dense;
    std::unique_ptr<FftConvolver> fft;

    struct Preconditioner {
        std::optional<Eigen::LLT<Eigen::MatrixXd>> cholesky;
        std::vector<Eigen::MatrixXd> basis;
        std::vector<Eigen::VectorXd> eigenvalues;
    };
    mutable std::once_flag precond_once;
    mutable Preconditioner precond;

    Impl(FormKind k, FractionalOrder o, LatticeGrid g, const FormOptions& opts)
        : kind(k), order(o), grid(std::move(g)), options(opts) {}

    std::shared_ptr<const WeightStencil> axis_weights(std::size_t a) const {
        const std::vector<double> h{grid.spacing(a)};
        const std::vector<std::size_t> r{std::max<std::size_t>(1, grid.nodes(a) - 1)};
        return cached_weights(order, h, r, options.weights);
    }

    void build_axes() {
        for (std::size_t a = 0; a < grid.dimension(); ++a) {
            axis.push_back(axis_weights(a));
            if (grid.nodes(a) > kDenseLimit) throw ShapeError("NonlocalForm: axis too long for a dense factor");
            dense.push_back(dense_toeplitz(*axis.back(), grid.nodes(a)));
        }
    }

    bool use_fft() const {
        switch (options.matvec) {
        case FormOptions::Matvec::direct: return false;
        case FormOptions::Matvec::fft: return true;
        case FormOptions::Matvec::automatic: break;
        }
        return grid.dimension() >= 2 || grid.size() > 256;
    }

    void build_preconditioner() const {
        const std::size_t d = grid.dimension();
        if (kind == FormKind::full && d == 1 && grid.size() <= kCholeskyLimit) {
            precond.cholesky.emplace(dense_toeplitz(*stencil, grid.size()));
            if (precond.cholesky->info() != Eigen::Success) {
                throw PrecisionError("NonlocalForm: Toeplitz matrix is not positive definite");
            }
            return;
        }
        if (d != 2) return;
        for (std::size_t a = 0; a < 2; ++a) {
            const Eigen::MatrixXd t =
                dense.empty() ? dense_toeplitz(*axis_weights(a), grid.nodes(a)) : dense[a];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            if (es.info() != Eigen::Success) throw PrecisionError("NonlocalForm: eigendecomposition failed");
            precond.basis.push_back(es.eigenvectors());
            precond.eigenvalues.push_back(es.eigenvalues());
        }
    }
};

std::string_view to_string(FormKind kind) {
    switch (kind) {
    case FormKind::full: return "full";
    case FormKind::tensor: return "tensor";
    case FormKind::slice_x: return "slice_x";
    case FormKind::slice_t: return "slice_t";
    }
    return "unknown";
}

NonlocalForm::NonlocalForm(FormKind kind, FractionalOrder order, LatticeGrid grid, const FormOptions& options) {
    if (kind != FormKind::full && grid.dimension() != 2) {
        throw ShapeError("NonlocalForm: tensor and slice forms need a two-axis product grid");
    }
    auto impl = std::make_shared<Impl>(kind, order, std::move(grid), options);
    if (kind == FormKind::full) {
        impl->stencil = cached_weights(order, impl->grid.spacing(), exact_radius(impl->grid), options.weights);
        if (impl->grid.dimension() == 1) impl->axis.push_back(impl->stencil);
        if (impl->use_fft()) impl->fft = std::make_unique<FftConvolver>(*impl->stencil, impl->grid.nodes_per_axis());
    } else {
        impl->build_axes();
    }
    impl_ = std::move(impl);
}

FormKind NonlocalForm::kind() const { return impl_->kind; }
FractionalOrder NonlocalForm::order() const { return impl_->order; }
const LatticeGrid& NonlocalForm::grid() const { return impl_->grid; }
const FormOptions& NonlocalForm::options() const { return impl_->options; }

const WeightStencil& NonlocalForm::stencil() const {
    if (!impl_->stencil) throw ShapeError("NonlocalForm::stencil: only full forms carry a d-dimensional stencil");
    return *impl_->stencil;
}

const WeightStencil& NonlocalForm::axis_stencil(std::size_t axis) const {
    if (axis >= impl_->axis.size()) throw ShapeError("NonlocalForm::axis_stencil: no stencil for this axis");
    return *impl_->axis[axis];
}

GridFunction NonlocalForm::apply(const GridFunction& u) const {
    if (impl_->kind == FormKind::full) return impl_->use_fft() ? apply_fft(u) : apply_direct(u);
    return apply_direct(u);
}

GridFunction NonlocalForm::apply_direct(const GridFunction& u) const {
    if (!(u.grid() == impl_->grid)) throw ShapeError("NonlocalForm::apply: function is not on the form's grid");
    const auto& g = impl_->grid;
    GridFunction out(g);
    auto in = u.values();
    auto res = out.values();

    if (impl_->kind != FormKind::full) {
        const auto nx = static_cast<Eigen::Index>(g.nodes(0));
        const auto nt = static_cast<Eigen::Index>(g.nodes(1));
        Eigen::Map<const RowMajorMatrix> uu(in.data(), nx, nt);
        Eigen::Map<RowMajorMatrix> rr(res.data(), nx, nt);
        switch (impl_->kind) {
        case FormKind::tensor: rr.noalias() = impl_->dense[0] * uu + uu * impl_->dense[1]; break;
        case FormKind::slice_x: rr.noalias() = impl_->dense[0] * uu; break;
        case FormKind::slice_t: rr.noalias() = uu * impl_->dense[1]; break;
        case FormKind::full: break;
        }
        return out;
    }

    const auto& w = *impl_->stencil;
    const std::size_t d = g.dimension();
    if (d == 1) {
        const auto n = static_cast<long>(g.nodes(0));
        const auto r = static_cast<long>(w.radius(0));
        for (long j = 0; j < n; ++j) {
            double acc = 0.0;
            const long lo = std::max(0L, j - r);
            const long hi = std::min(n - 1, j + r);
            for (long k = lo; k <= hi; ++k) acc += w.at(k - j) * in[static_cast<std::size_t>(k)];
            res[static_cast<std::size_t>(j)] = acc;
        }
        return out;
    }

    const std::size_t total = g.size();
    std::vector<std::size_t> jdx(d, 0);
    std::vector<std::size_t> kdx(d, 0);
    std::vector<long> offset(d);
    for (std::size_t j = 0; j < total; ++j) {
        double acc = 0.0;
        std::fill(kdx.begin(), kdx.end(), 0);
        for (std::size_t k = 0; k < total; ++k) {
            for (std::size_t a = 0; a < d; ++a) offset[a] = static_cast<long>(kdx[a]) - static_cast<long>(jdx[a]);
            acc += w.at(std::span<const long>(offset)) * in[k];
            for (std::size_t a = d; a-- > 0;) {
                if (++kdx[a] < g.nodes(a)) break;
                kdx[a] = 0;
            }
        }
        res[j] = acc;
        for (std::size_t a = d; a-- > 0;) {
            if (++jdx[a] < g.nodes(a)) break;
            jdx[a] = 0;
        }
    }
    return out;
}

GridFunction NonlocalForm::apply_fft(const GridFunction& u) const {
    if (!(u.grid() == impl_->grid)) throw ShapeError("NonlocalForm::apply: function is not on the form's grid");
    if (impl_->kind != FormKind::full) throw ShapeError("NonlocalForm::apply_fft: only full forms use convolution");
    if (!impl_->fft) {
        // forms built with the direct strategy still honour explicit requests
        FftConvolver conv(*impl_->stencil, impl_->grid.nodes_per_axis());
        GridFunction out(impl_->grid);
        conv.apply(u.values(), out.values());
        return out;
    }
    GridFunction out(impl_->grid);
    impl_->fft->apply(u.values(), out.values());
    return out;
}

double NonlocalForm::pairing(const GridFunction& u, const GridFunction& v) const {
    return l2_inner(apply(u), v);
}

namespace {

// On small one-dimensional grids the energy is summed in difference form,
// h [sum_i r_i u_i^2 + sum_{i<j} |w_{j-i}| (u_i - u_j)^2] with row sums r_i,
// so that every term is nonnegative and no cancellation against the large
// diagonal weight occurs.
constexpr std::size_t kDifferenceFormNodes = 8192;

double difference_energy(const WeightStencil& w, const GridFunction& u) {
    const std::size_t n = u.size();
    std::vector<double> prefix(n, 0.0); // prefix[k] = w_1 + ... + w_k
    for (std::size_t k = 1; k < n; ++k) prefix[k] = prefix[k - 1] + w.at(static_cast<long>(k));
    const double w0 = w.at(0L);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double row = w0 + prefix[i] + prefix[n - 1 - i];
        sum += row * u[i] * u[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = u[i] - u[j];
            sum -= w.at(static_cast<long>(j - i)) * d * d;
        }
    }
    return sum * u.grid().cell_volume();
}

} // namespace

double NonlocalForm::energy(const GridFunction& u) const {
    if (impl_->grid.dimension() == 1 && impl_->kind == FormKind::full && u.size() <= kDifferenceFormNodes) {
        if (!(u.grid() == impl_->grid)) throw ShapeError("NonlocalForm::energy: function is not on the form's grid");
        return difference_energy(stencil(), u);
    }
    return pairing(u, u);
}

GridFunction NonlocalForm::precondition(const GridFunction& r) const {
    if (!(r.grid() == impl_->grid)) throw ShapeError("NonlocalForm::precondition: function is not on the form's grid");
    std::call_once(impl_->precond_once, [this] { impl_->build_preconditioner(); });
    const auto& p = impl_->precond;
    const auto& g = impl_->grid;
    GridFunction out(g);
    if (p.cholesky) {
        Eigen::Map<const Eigen::VectorXd> rr(r.values().data(), static_cast<Eigen::Index>(r.size()));
        Eigen::Map<Eigen::VectorXd>(out.values().data(), static_cast<Eigen::Index>(out.size())) = p.cholesky->solve(rr);
        return out;
    }
    if (p.basis.empty()) {
        const double diag = impl_->stencil ? impl_->stencil->at(std::vector<long>(g.dimension(), 0)) : 1.0;
        for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i] / diag;
        return out;
    }
    const auto nx = static_cast<Eigen::Index>(g.nodes(0));
    const auto nt = static_cast<Eigen::Index>(g.nodes(1));
    Eigen::Map<const RowMajorMatrix> rr(r.values().data(), nx, nt);
    Eigen::Map<RowMajorMatrix> oo(out.values().data(), nx, nt);
    const auto& qx = p.basis[0];
    const auto& qt = p.basis[1];
    switch (impl_->kind) {
    case FormKind::slice_x: {
        Eigen::MatrixXd y = qx.transpose() * rr;
        y.array().colwise() /= p.eigenvalues[0].array();
        oo.noalias() = qx * y;
        break;
    }
    case FormKind::slice_t: {
        Eigen::MatrixXd y = rr * qt;
        y.array().rowwise() /= p.eigenvalues[1].transpose().array();
        oo.noalias() = y * qt.transpose();
        break;
    }
    case FormKind::full:
    case FormKind::tensor: {
        Eigen::MatrixXd y = qx.transpose() * rr * qt;
        for (Eigen::Index i = 0; i < nx; ++i) {
            for (Eigen::Index j = 0; j < nt; ++j) y(i, j) /= p.eigenvalues[0](i) + p.eigenvalues[1](j);
        }
        oo.noalias() = qx * y * qt.transpose();
        break;
    }
    }
    return out;
}

GridFunction apply(const NonlocalForm& form, const GridFunction& u) { return form.apply(u); }
double energy(const NonlocalForm& form, const GridFunction& u) { return form.energy(u); }

double slice_energy_sum(const NonlocalForm& form, const GridFunction& u, Axis axis) {
    if (form.grid().dimension() != 2) throw ShapeError("slice_energy_sum: needs a two-axis product grid");
    const FormKind kind = axis == Axis::x ? FormKind::slice_x : FormKind::slice_t;
    if (form.kind() == kind) return form.energy(u);
    return NonlocalForm(kind, form.order(), form.grid(), form.options()).energy(u);
}

double scaled_energy(FractionalOrder order, const LatticeGrid& grid_unit, double ell, const GridFunction& u,
                     FormKind kind, const FormOptions& options) {
    if (!(ell > 0.0)) throw DomainError("scaled_energy: ell must be > 0");
    if (grid_unit.dimension() != 2) throw ShapeError("scaled_energy: needs a two-axis product grid");
    if (!(u.grid() == grid_unit)) throw ShapeError("scaled_energy: function is not on the unit grid");
    const LatticeGrid stretched = grid_unit.stretched(1, ell);
    const NonlocalForm form(kind, order, stretched, options);
    const double measure_b_ell = ell * grid_unit.domain().extent(1);
    return form.energy(u.on_grid(stretched)) / measure_b_ell;
}

} // namespace fraclap
