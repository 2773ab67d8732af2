#pragma once

/**
 * @file problems.hpp
 * @brief Named built-in problems and random obstacle instances.
 *
 *   example1d         Neumann -u''+u, f = 1, Phi(y) = 1/2 + 1/4 * integral(y)
 *   plaplacian        Dirichlet p-Laplacian (p = 3, eps = 1e-3), kernel obstacle with k = 1
 *   kernel_qvi        Dirichlet -u'', Gaussian kernel obstacle
 *   nonmonotone_sine  example1d with 0.1 * sin(y) added to the operator
 *   fixed_obstacle    Dirichlet -u'', f = 1, psi = 0.05
 */

#include <cstdint>
#include <optional>
#include <random>

#include "qvar/config.hpp"
#include "qvar/qvi_solver.hpp"
#include "qvar/studies.hpp"

namespace qvar {

struct BuiltProblem {
    QVIProblem problem;
    /// Known limit of the eps -> 0 regularization path, when available.
    std::optional<GridFunction> exact_limit;
};

/// Throws ParameterError / EllipticityError on inconsistent overrides.
BuiltProblem build_problem(const ProblemSpec& spec);

/// Same problem family with the cell count replaced by n.
ProblemTemplate problem_template(const ProblemSpec& spec);

struct ObstacleInstance {
    LinearEllipticOperator op;
    GridFunction f;
    GridFunction psi;
};

/// Random symmetric positive definite tridiagonal obstacle problem with
/// between 1 and max_dofs unknowns (random diffusion, reaction, force,
/// obstacle and boundary condition).
ObstacleInstance random_obstacle_instance(std::mt19937_64& rng, int max_dofs);

}  // namespace qvar
