#pragma once

/**
 * @file vi_solver.hpp
 * @brief Upper-obstacle problems S(f, psi): find y <= psi with
 *        0 <= (f - A y) complementary to (psi - y) >= 0.
 *
 * Linear operators go through projected SOR; nonlinear ones through a
 * damped projected Newton iteration whose linearized subproblems are again
 * solved with projected SOR. A brute-force active-set enumeration serves as
 * the reference for small instances.
 */

#include <optional>
#include <string>

#include "qvar/grid.hpp"
#include "qvar/operators.hpp"

namespace qvar {

struct VIParams {
    double tol = 1e-10;
    int max_iter = 10000;
    /// Relaxation in (0,2). Unset selects 2/(1+sin(pi h)), the optimal SOR
    /// factor for the model Laplacian on the mesh.
    std::optional<double> omega;
    /// Initial damping of the nonlinear path. Unset means a full step (1).
    std::optional<double> tau;
};

struct VISolveReport {
    GridFunction solution;
    int iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;

    /// `iterations,kkt_residual,converged`
    std::string csv_row() const;
};

double optimal_omega(const Mesh& mesh);

/// max_i |min(psi_i - y_i, (f - op(y))_i)|
double kkt_residual(const Operator& op, const GridFunction& f, const GridFunction& psi, const GridFunction& y);

/// Tridiagonal direct solve of op u = f.
GridFunction solve_unconstrained(const LinearEllipticOperator& op, const GridFunction& f);

/// Projected SOR from lattice_min(0, psi), ascending dof order. Throws
/// ParameterError when omega is outside (0,2). Returns converged=false on
/// max_iter exhaustion.
VISolveReport solve_vi_psor(const LinearEllipticOperator& op, const GridFunction& f, const GridFunction& psi,
                            const VIParams& params);

/// Same iteration from a caller-supplied start (clipped to psi).
VISolveReport solve_vi_psor_from(const LinearEllipticOperator& op, const GridFunction& f,
                                 const GridFunction& psi, const GridFunction& start, const VIParams& params);

/// Damped projected Newton for nonlinear operators: the linearized obstacle
/// problem at y gives a trial point z, and y moves to y + tau (z - y) with
/// tau halved until the KKT residual does not increase. Throws
/// StagnationError when tau drops below 1e-12.
VISolveReport solve_vi_projected(const Operator& op, const GridFunction& f, const GridFunction& psi,
                                 const VIParams& params);

/// PSOR for linear operators, projected Newton otherwise.
VISolveReport solve_vi(const Operator& op, const GridFunction& f, const GridFunction& psi, const VIParams& params);

/// Solution of op(u) = f without constraint (direct for linear operators).
GridFunction solve_unconstrained_any(const Operator& op, const GridFunction& f, const VIParams& params);

struct ActiveSetEnumeration {
    GridFunction solution;
    int accepted_sets = 0;
};

/// Enumerates all 2^dofs active sets. Throws OracleTooLargeError above 20
/// dofs and InfeasibleError when no set (or two disagreeing sets) pass.
ActiveSetEnumeration enumerate_active_sets(const LinearEllipticOperator& op, const GridFunction& f,
                                           const GridFunction& psi);

GridFunction solve_vi_active_set_oracle(const LinearEllipticOperator& op, const GridFunction& f,
                                        const GridFunction& psi);

}  // namespace qvar
