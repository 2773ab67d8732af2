#include "qvar/tridiagonal.hpp"

#include <cmath>
#include <limits>

#include "qvar/error.hpp"

namespace qvar {

std::vector<double> thomas_solve(std::span<const double> lower,
                                 std::span<const double> diag,
                                 std::span<const double> upper,
                                 std::span<const double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw SolverError("thomas_solve: band lengths differ");
    }
    std::vector<double> c(n), d(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(diag[i]));
    const double tiny = scale * 1e-15;

    double pivot = diag[0];
    if (!(std::abs(pivot) > tiny)) throw SolverError("thomas_solve: singular matrix");
    c[0] = n > 1 ? upper[0] / pivot : 0.0;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (!(std::abs(pivot) > tiny)) throw SolverError("thomas_solve: singular matrix");
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace qvar
