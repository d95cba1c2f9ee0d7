#pragma once

#include "fraclap/error.hpp"
#include "fraclap/lattice.hpp"
#include "fraclap/nonlocal_form.hpp"

#include <cstddef>

namespace fraclap {

struct SolveReport {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    double elapsed = 0.0; ///< seconds
};

struct SolveResult {
    GridFunction solution;
    SolveReport report;
};

/// Iteration limit reached; carries the best iterate found so far.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, GridFunction best, SolveReport report)
        : Error(what), best_(std::move(best)), report_(report) {}

    const GridFunction& best_iterate() const { return best_; }
    const SolveReport& report() const { return report_; }

private:
    GridFunction best_;
    SolveReport report_;
};

struct CgOptions {
    double tol = 1e-12;
    std::size_t max_iter = 2000;
    bool precondition = true;
};

/// Preconditioned conjugate gradients for T u = rhs, where T is the operator
/// of `form` (so that l2_inner(T u, v) is the energy pairing). Stops when
/// ||T u - rhs|| <= tol ||rhs||. Throws ConvergenceError after max_iter steps.
SolveResult cg_solve(const NonlocalForm& form, const GridFunction& rhs, const CgOptions& options = {});
SolveResult cg_solve(const NonlocalForm& form, const GridFunction& rhs, double tol, std::size_t max_iter);

struct EigenPair {
    double value = 0.0;          ///< smallest eigenvalue, units length^{-2s}
    GridFunction vector;         ///< unit L2 norm, nonnegative mean
    double residual = 0.0;       ///< ||T v - value v||_{L2}
    double second_value = 0.0;   ///< second Ritz value
    double gap_estimate = 0.0;   ///< (second - its residual) - (value + residual)
    double min_component = 0.0;  ///< smallest nodal value of `vector`
    std::size_t iterations = 0;
    bool gap_certified() const { return gap_estimate > 0.0; }
};

struct EigenOptions {
    double tol = 1e-10;          ///< relative residual ||T v - lambda v|| / lambda
    std::size_t block = 6;
    std::size_t max_outer = 400;
};

/// Smallest eigenpair of the form by block LOBPCG preconditioned with the
/// form's own preconditioner; the first start column is the all-ones vector.
/// The second Ritz value certifies the gap.
EigenPair smallest_eigenpair(const NonlocalForm& form, const EigenOptions& options = {});
EigenPair smallest_eigenpair(const NonlocalForm& form, double tol);

/// Smallest eigenvalue of T_x (x) I + I (x) T_t from those of its factors.
inline double tensor_min_eigenvalue(double lambda_x, double lambda_t) { return lambda_x + lambda_t; }

} // namespace fraclap
