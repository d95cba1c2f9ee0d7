#include "fraclap/solvers.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace fraclap {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Low sine modes of the box, ordered by their continuous Dirichlet eigenvalue.
std::vector<GridFunction> start_block(const LatticeGrid& grid, std::size_t count) {
    std::vector<GridFunction> block;
    block.push_back(GridFunction::constant(grid, 1.0));
    if (count <= 1) return block;

    const std::size_t d = grid.dimension();
    struct Mode {
        std::vector<std::size_t> k;
        double lambda;
    };
    std::vector<Mode> modes;
    const std::size_t kmax = count + 1;
    std::vector<std::size_t> k(d, 1);
    while (true) {
        bool valid = true;
        double lambda = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            if (k[a] > grid.nodes(a)) valid = false;
            const double kk = static_cast<double>(k[a]) / grid.domain().extent(a);
            lambda += kk * kk;
        }
        if (valid) modes.push_back({k, lambda});
        std::size_t a = d;
        while (a-- > 0) {
            if (++k[a] <= kmax) break;
            k[a] = 1;
        }
        if (a == static_cast<std::size_t>(-1)) break;
    }
    std::stable_sort(modes.begin(), modes.end(), [](const Mode& x, const Mode& y) { return x.lambda < y.lambda; });
    // the all-ones column already carries the (1,...,1) mode
    for (std::size_t m = 1; m < modes.size() && block.size() < count; ++m) {
        const auto kk = modes[m].k;
        block.push_back(GridFunction::sample(grid, [&](std::span<const double> x) {
            double v = 1.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double u = (x[a] - grid.domain().lo(a)) / grid.domain().extent(a);
                v *= std::sin(std::numbers::pi * static_cast<double>(kk[a]) * u);
            }
            return v;
        }));
    }
    return block;
}

} // namespace

SolveResult cg_solve(const NonlocalForm& form, const GridFunction& rhs, double tol, std::size_t max_iter) {
    CgOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return cg_solve(form, rhs, opts);
}

SolveResult cg_solve(const NonlocalForm& form, const GridFunction& rhs, const CgOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    if (!(rhs.grid() == form.grid())) throw ShapeError("cg_solve: right-hand side is not on the form's grid");
    if (!(options.tol > 0.0)) throw DomainError("cg_solve: tol must be > 0");

    GridFunction x(form.grid());
    SolveReport report;
    const double rhs_norm = norm(rhs.values());
    if (rhs_norm == 0.0) {
        report.elapsed = seconds_since(start);
        return {std::move(x), report};
    }

    auto precondition = [&](const GridFunction& r) { return options.precondition ? form.precondition(r) : r; };

    GridFunction r = rhs;
    GridFunction z = precondition(r);
    GridFunction p = z;
    double rz = dot(r.values(), z.values());
    double best = 1.0;
    GridFunction best_x = x;

    for (std::size_t it = 1; it <= options.max_iter; ++it) {
        const GridFunction q = form.apply(p);
        const double alpha = rz / dot(p.values(), q.values());
        axpy(alpha, p.values(), x.values());
        axpy(-alpha, q.values(), r.values());
        double rel = norm(r.values()) / rhs_norm;
        report.iterations = it;

        if (rel <= options.tol) {
            // guard against drift of the recursive residual
            GridFunction true_r = rhs - form.apply(x);
            rel = norm(true_r.values()) / rhs_norm;
            if (rel <= options.tol) {
                report.relative_residual = rel;
                report.elapsed = seconds_since(start);
                return {std::move(x), report};
            }
            r = std::move(true_r);
            z = precondition(r);
            p = z;
            rz = dot(r.values(), z.values());
            continue;
        }
        if (rel < best) {
            best = rel;
            best_x = x;
        }
        z = precondition(r);
        const double rz_next = dot(r.values(), z.values());
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
    }
    report.relative_residual = best;
    report.elapsed = seconds_since(start);
    std::ostringstream msg;
    msg << "cg_solve: no convergence after " << options.max_iter << " iterations (relative residual " << best
        << ")";
    throw ConvergenceError(msg.str(), std::move(best_x), report);
}

EigenPair smallest_eigenpair(const NonlocalForm& form, double tol) {
    EigenOptions opts;
    opts.tol = tol;
    return smallest_eigenpair(form, opts);
}

EigenPair smallest_eigenpair(const NonlocalForm& form, const EigenOptions& options) {
    const LatticeGrid& grid = form.grid();
    const auto n = static_cast<Eigen::Index>(grid.size());
    const auto p = static_cast<Eigen::Index>(std::min<std::size_t>(std::max<std::size_t>(options.block, 2), grid.size()));

    Eigen::MatrixXd x(n, p);
    {
        const auto start = start_block(grid, static_cast<std::size_t>(p));
        for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(start.size()); ++c) {
            x.col(c) = Eigen::Map<const Eigen::VectorXd>(start[static_cast<std::size_t>(c)].values().data(), n);
        }
        // grids too small for enough distinct modes: fill with coordinate vectors
        for (auto c = static_cast<Eigen::Index>(start.size()); c < p; ++c) {
            x.col(c).setZero();
            x(c % n, c) = 1.0;
        }
    }

    auto apply_cols = [&](const Eigen::MatrixXd& v, bool precondition) {
        Eigen::MatrixXd out(n, v.cols());
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            GridFunction u(grid, std::vector<double>(v.col(c).data(), v.col(c).data() + n));
            const GridFunction tu = precondition ? form.precondition(u) : form.apply(u);
            out.col(c) = Eigen::Map<const Eigen::VectorXd>(tu.values().data(), n);
        }
        return out;
    };

    // LOBPCG: Rayleigh-Ritz over [X, T^-1 R, P], where the search directions
    // are orthonormalised against X and rank-trimmed before each projection.
    x = Eigen::HouseholderQR<Eigen::MatrixXd>(x).householderQ() * Eigen::MatrixXd::Identity(n, p);
    Eigen::MatrixXd tx = apply_cols(x, false);
    Eigen::MatrixXd dir(n, 0);
    Eigen::VectorXd theta;
    Eigen::MatrixXd ritz;
    Eigen::MatrixXd t_ritz;
    double prev_theta = 0.0;
    std::size_t it = 0;
    for (; it < options.max_outer; ++it) {
        Eigen::MatrixXd basis(n, p);
        basis = x;
        Eigen::MatrixXd t_basis = tx;
        if (it > 0) {
            const Eigen::MatrixXd residual = t_ritz - ritz * theta.asDiagonal();
            Eigen::MatrixXd extra(n, residual.cols() + dir.cols());
            extra << apply_cols(residual, true), dir;
            for (Eigen::Index c = 0; c < extra.cols(); ++c) {
                const double nc = extra.col(c).norm();
                if (nc > 0.0) extra.col(c) /= nc;
            }
            for (int pass = 0; pass < 2; ++pass) extra -= x * (x.transpose() * extra);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(extra);
            qr.setThreshold(1e-10);
            const Eigen::Index rank = qr.rank();
            if (rank > 0) {
                Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
                q -= x * (x.transpose() * q);
                q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(n, rank);
                basis.conservativeResize(n, p + rank);
                basis.rightCols(rank) = q;
                t_basis.conservativeResize(n, p + rank);
                t_basis.rightCols(rank) = apply_cols(q, false);
            }
        }
        Eigen::MatrixXd h = basis.transpose() * t_basis;
        h = 0.5 * (h + h.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        theta = es.eigenvalues().head(p);
        const Eigen::MatrixXd coef = es.eigenvectors().leftCols(p);
        ritz = basis * coef;
        t_ritz = t_basis * coef;
        const Eigen::Index m = basis.cols() - p;
        dir = basis.rightCols(m) * coef.bottomRows(m);
        // re-orthonormalise to stop Ritz vectors drifting from the basis
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(ritz);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
        tx = apply_cols(x, false);

        const double r1 = (t_ritz.col(0) - theta(0) * ritz.col(0)).norm();
        const bool settled = it > 0 && std::abs(theta(0) - prev_theta) <= 1e-3 * options.tol * theta(0);
        prev_theta = theta(0);
        if (r1 <= options.tol * theta(0) && settled) break;
    }
    if (it == options.max_outer) {
        GridFunction best(grid, std::vector<double>(ritz.col(0).data(), ritz.col(0).data() + n));
        std::ostringstream msg;
        msg << "smallest_eigenpair: no convergence after " << options.max_outer << " iterations";
        throw ConvergenceError(msg.str(), std::move(best), SolveReport{it, 0.0, 0.0});
    }

    Eigen::VectorXd v = ritz.col(0);
    Eigen::VectorXd tv = t_ritz.col(0);
    if (v.sum() < 0.0) {
        v = -v;
        tv = -tv;
    }
    // Ritz vectors have unit Euclidean norm; rescale to unit discrete L2 norm.
    // The L2 residual of the rescaled pair equals the Euclidean residual here.
    const double residual = (tv - theta(0) * v).norm();
    v /= std::sqrt(grid.cell_volume());
    double second = 0.0;
    double gap = 0.0;
    if (p >= 2) {
        second = theta(1);
        const double r2 = (t_ritz.col(1) - theta(1) * ritz.col(1)).norm();
        gap = (theta(1) - r2) - (theta(0) + residual);
    }
    const double min_component = v.minCoeff();
    GridFunction vector(grid, std::vector<double>(v.data(), v.data() + n));
    // same Rayleigh quotient as theta(0), but evaluated by the form's energy,
    // which avoids cancellation on one-dimensional grids
    const double value = form.energy(vector) / l2_inner(vector, vector);
    return EigenPair{
        .value = value,
        .vector = std::move(vector),
        .residual = residual,
        .second_value = second,
        .gap_estimate = gap,
        .min_component = min_component,
        .iterations = it + 1,
    };
}

} // namespace fraclap
