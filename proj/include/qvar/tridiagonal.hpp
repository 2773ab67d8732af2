#pragma once

#include <span>
#include <vector>

namespace qvar {

/// Thomas algorithm for a tridiagonal system. lower[0] and upper[n-1] are
/// ignored. Throws SolverError on a vanishing pivot.
std::vector<double> thomas_solve(std::span<const double> lower,
                                 std::span<const double> diag,
                                 std::span<const double> upper,
                                 std::span<const double> rhs);

}  // namespace qvar
