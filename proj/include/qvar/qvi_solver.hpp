#pragma once

/**
 * @file qvi_solver.hpp
 * @brief Outer solvers for y = S(f, Phi(y)): plain fixed-point iteration,
 *        monotone iterations towards the minimal and maximal solutions, and
 *        regularized problems with A + eps*I (+ delta*R).
 */

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvar/grid.hpp"
#include "qvar/obstacle.hpp"
#include "qvar/operators.hpp"
#include "qvar/vi_solver.hpp"

namespace qvar {

struct QVIProblem {
    OperatorPtr op;
    GridFunction f;
    ObstacleMap obstacle;
    /// Upper force for the supersolution A^{-1}(F); requires f <= F.
    std::optional<GridFunction> F;

    /// Throws PreconditionError on inconsistent meshes, non-finite data or f > F.
    void validate() const;
    QVIProblem with_operator(OperatorPtr other) const;
};

struct OuterParams {
    double tol = 1e-8;
    int max_iter = 200;
};

enum class MonotoneTrace { increasing, decreasing, none };
std::string_view to_string(MonotoneTrace trace);

struct QVIReport {
    GridFunction solution;
    int outer_iterations = 0;
    /// sup-norm of y^{k+1} - y^k, one entry per outer step.
    std::vector<double> step_norms{};
    /// step_norms[k+1] / step_norms[k].
    std::vector<double> ratios{};
    /// Largest ratio after discarding the first two; 0 when none remain.
    double rho_observed = 0.0;
    bool converged = false;
    MonotoneTrace monotone_trace = MonotoneTrace::none;
    int inner_iterations = 0;

    /// `outer_iter,step_norm,ratio` rows followed by a `# summary` line.
    void write_csv(std::ostream& out) const;
};

struct ContractionCertificate {
    double c = 0.0;
    double L_A = 0.0;
    double L_N = 0.0;
    double gamma = 0.0;
    double L_phi = 0.0;
    /// (L_A + L_N) L_phi / (c - gamma); +inf when gamma >= c.
    double rho = 0.0;
    bool smallness_ok = false;

    /// Denominator c - gamma - (L_A + L_N) L_phi of the stability bound.
    double stability_margin() const noexcept { return c - gamma - (L_A + L_N) * L_phi; }
};

ContractionCertificate contraction_certificate(const OperatorConstants& constants, double L_phi);

/// y^{k+1} = S(f, Phi(y^k)) until the sup-norm step is <= outer.tol. A fixed
/// obstacle map stops after the first correction. Inner non-convergence
/// throws SolverError.
QVIReport solve_qvi_fixed_point(const QVIProblem& problem, const GridFunction& y0, const OuterParams& outer,
                                const VIParams& inner);

/// Increasing iteration from 0. Throws PreconditionError if f has negative
/// entries and OrderingViolationError if an iterate decreases by more than 1e-9.
QVIReport solve_qvi_minimal(const QVIProblem& problem, const OuterParams& outer, const VIParams& inner);

/// Supersolution A^{-1}(F). Throws PreconditionError when F is absent.
GridFunction supersolution(const QVIProblem& problem, const VIParams& inner);

/// Decreasing iteration from the supersolution. When `minimal` is given,
/// also checks minimal <= result (OrderingViolationError otherwise).
QVIReport solve_qvi_maximal(const QVIProblem& problem, const OuterParams& outer, const VIParams& inner,
                            const GridFunction* minimal = nullptr);

/// Fixed-point iteration from 0 on op + eps*I + delta*R.
QVIReport solve_qvi_regularized(const QVIProblem& problem, double eps, double delta,
                                const std::optional<LinearEllipticOperator>& regularizer, const OuterParams& outer,
                                const VIParams& inner);

}  // namespace qvar
