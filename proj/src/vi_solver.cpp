#include "qvar/vi_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "qvar/error.hpp"
#include "qvar/tridiagonal.hpp"

namespace qvar {

std::string VISolveReport::csv_row() const {
    return std::to_string(iterations) + ',' + format_real(kkt_residual) + ',' + (converged ? "true" : "false");
}

double optimal_omega(const Mesh& mesh) { return 2.0 / (1.0 + std::sin(std::numbers::pi * mesh.h())); }

double kkt_residual(const Operator& op, const GridFunction& f, const GridFunction& psi, const GridFunction& y) {
    require_same_mesh(f, psi);
    require_same_mesh(f, y);
    const GridFunction Ay = op.apply(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        worst = std::max(worst, std::abs(std::min(psi[i] - y[i], f[i] - Ay[i])));
    }
    return worst;
}

GridFunction solve_unconstrained(const LinearEllipticOperator& op, const GridFunction& f) {
    if (!(f.mesh() == op.mesh())) throw IncompatibleGridError("force is not on the operator's mesh");
    return GridFunction(op.mesh(), thomas_solve(op.lower(), op.diag(), op.upper(), f.values()));
}

namespace {

double resolve_omega(const VIParams& params, const Mesh& mesh) {
    const double omega = params.omega.value_or(optimal_omega(mesh));
    if (!(omega > 0.0 && omega < 2.0)) {
        throw ParameterError("relaxation omega must lie in (0,2), got " + format_real(omega));
    }
    return omega;
}

void check_params(const VIParams& params) {
    if (!(params.tol > 0.0)) throw ParameterError("VI tolerance must be positive");
    if (params.max_iter <= 0) throw ParameterError("VI max_iter must be positive");
}

}  // namespace

VISolveReport solve_vi_psor_from(const LinearEllipticOperator& op, const GridFunction& f,
                                 const GridFunction& psi, const GridFunction& start, const VIParams& params) {
    check_params(params);
    const double omega = resolve_omega(params, op.mesh());
    if (!(f.mesh() == op.mesh())) throw IncompatibleGridError("force is not on the operator's mesh");
    require_same_mesh(f, psi);
    require_same_mesh(f, start);

    const auto& lo = op.lower();
    const auto& di = op.diag();
    const auto& up = op.upper();
    const std::size_t n = di.size();

    VISolveReport report{lattice_min(start, psi)};
    std::span<double> y = report.solution.values();
    report.kkt_residual = kkt_residual(op, f, psi, report.solution);
    while (report.kkt_residual > params.tol && report.iterations < params.max_iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double Ay = di[i] * y[i];
            if (i > 0) Ay += lo[i] * y[i - 1];
            if (i + 1 < n) Ay += up[i] * y[i + 1];
            y[i] = std::min(psi[i], y[i] + omega * (f[i] - Ay) / di[i]);
        }
        ++report.iterations;
        report.kkt_residual = kkt_residual(op, f, psi, report.solution);
    }
    report.converged = report.kkt_residual <= params.tol;
    return report;
}

VISolveReport solve_vi_psor(const LinearEllipticOperator& op, const GridFunction& f, const GridFunction& psi,
                            const VIParams& params) {
    return solve_vi_psor_from(op, f, psi, GridFunction(psi.mesh()), params);
}

VISolveReport solve_vi_projected(const Operator& op, const GridFunction& f, const GridFunction& psi,
                                 const VIParams& params) {
    check_params(params);
    const double tau0 = params.tau.value_or(1.0);
    if (!(tau0 > 0.0)) throw ParameterError("damping tau must be positive");
    if (!(f.mesh() == op.mesh())) throw IncompatibleGridError("force is not on the operator's mesh");

    VIParams linearized = params;
    linearized.tol = 0.1 * params.tol;

    VISolveReport report{lattice_min(GridFunction(psi.mesh()), psi)};
    GridFunction& y = report.solution;
    report.kkt_residual = kkt_residual(op, f, psi, y);
    while (report.kkt_residual > params.tol && report.iterations < params.max_iter) {
        const LinearEllipticOperator J = op.jacobian(y);
        const GridFunction rhs = J.apply(y) - op.apply(y) + f;
        const GridFunction z = solve_vi_psor_from(J, rhs, psi, y, linearized).solution;
        const GridFunction step = z - y;
        double tau = tau0;
        for (;;) {
            GridFunction trial = y + tau * step;
            const double r = kkt_residual(op, f, psi, trial);
            if (r <= report.kkt_residual || r <= params.tol) {
                y = std::move(trial);
                report.kkt_residual = r;
                break;
            }
            tau *= 0.5;
            if (tau < 1e-12) {
                throw StagnationError("projected Newton stagnated at KKT residual " +
                                      format_real(report.kkt_residual));
            }
        }
        ++report.iterations;
    }
    report.converged = report.kkt_residual <= params.tol;
    return report;
}

VISolveReport solve_vi(const Operator& op, const GridFunction& f, const GridFunction& psi, const VIParams& params) {
    if (const auto* lin = dynamic_cast<const LinearEllipticOperator*>(&op)) return solve_vi_psor(*lin, f, psi, params);
    return solve_vi_projected(op, f, psi, params);
}

GridFunction solve_unconstrained_any(const Operator& op, const GridFunction& f, const VIParams& params) {
    if (const auto* lin = dynamic_cast<const LinearEllipticOperator*>(&op)) return solve_unconstrained(*lin, f);
    const GridFunction no_obstacle(op.mesh(), 1e30);
    auto report = solve_vi_projected(op, f, no_obstacle, params);
    if (!report.converged) throw SolverError("unconstrained nonlinear solve did not converge");
    return std::move(report.solution);
}

ActiveSetEnumeration enumerate_active_sets(const LinearEllipticOperator& op, const GridFunction& f,
                                           const GridFunction& psi) {
    const std::size_t n = op.mesh().dofs();
    if (n > 20) throw OracleTooLargeError("active-set oracle is limited to 20 dofs, got " + std::to_string(n));
    require_same_mesh(f, psi);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, i) = op.diag()[i];
        if (i > 0) A(i, i - 1) = op.lower()[i];
        if (i + 1 < n) A(i, i + 1) = op.upper()[i];
    }
    constexpr double tol = 1e-10;
    std::optional<GridFunction> accepted;
    int count = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<Eigen::Index> free;
        Eigen::VectorXd y(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                y(i) = psi[i];
            } else {
                free.push_back(static_cast<Eigen::Index>(i));
                y(i) = 0.0;
            }
        }
        if (!free.empty()) {
            const auto m = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd Aff(m, m);
            Eigen::VectorXd rhs(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                rhs(r) = f[free[r]] - A.row(free[r]).dot(y);
                for (Eigen::Index c = 0; c < m; ++c) Aff(r, c) = A(free[r], free[c]);
            }
            const Eigen::VectorXd yf = Aff.partialPivLu().solve(rhs);
            for (Eigen::Index r = 0; r < m; ++r) y(free[r]) = yf(r);
        }
        const Eigen::VectorXd residual = Eigen::Map<const Eigen::VectorXd>(f.values().data(), n) - A * y;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            if (!(y(i) <= psi[i] + tol)) ok = false;
            if ((mask & (1u << i)) && !(residual(i) >= -tol)) ok = false;
        }
        if (!ok) continue;
        GridFunction candidate(op.mesh(), std::vector<double>(y.data(), y.data() + n));
        if (accepted && norm(candidate - *accepted, Norm::sup) > 1e-8) {
            throw InfeasibleError("active-set oracle accepted two different points");
        }
        if (!accepted) accepted = std::move(candidate);
        ++count;
    }
    if (!accepted) throw InfeasibleError("active-set oracle found no admissible active set");
    return {std::move(*accepted), count};
}

GridFunction solve_vi_active_set_oracle(const LinearEllipticOperator& op, const GridFunction& f,
                                        const GridFunction& psi) {
    return enumerate_active_sets(op, f, psi).solution;
}

}  // namespace qvar
