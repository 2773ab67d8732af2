#include "qvar/qvi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qvar/error.hpp"

namespace qvar {

void QVIProblem::validate() const {
    if (!op) throw PreconditionError("QVI problem has no operator");
    if (!(f.mesh() == op->mesh()) || !(obstacle.mesh() == op->mesh())) {
        throw PreconditionError("QVI problem data live on different meshes");
    }
    if (!f.all_finite()) throw PreconditionError("force must be finite");
    if (F) {
        if (!(F->mesh() == op->mesh())) throw PreconditionError("upper force lives on a different mesh");
        if (!leq(f, *F, 0.0)) throw PreconditionError("upper force must dominate f");
    }
}

QVIProblem QVIProblem::with_operator(OperatorPtr other) const {
    QVIProblem out(*this);
    out.op = std::move(other);
    return out;
}

std::string_view to_string(MonotoneTrace trace) {
    switch (trace) {
        case MonotoneTrace::increasing: return "increasing";
        case MonotoneTrace::decreasing: return "decreasing";
        case MonotoneTrace::none: return "none";
    }
    return "?";
}

void QVIReport::write_csv(std::ostream& out) const {
    out << "outer_iter,step_norm,ratio\n";
    for (std::size_t k = 0; k < step_norms.size(); ++k) {
        out << k + 1 << ',' << format_real(step_norms[k]) << ',';
        if (k > 0) out << format_real(ratios[k - 1]);
        out << '\n';
    }
    out << "# summary outer_iterations=" << outer_iterations << " converged=" << (converged ? "true" : "false")
        << " rho_observed=" << format_real(rho_observed) << " monotone=" << to_string(monotone_trace)
        << " inner_iterations=" << inner_iterations << '\n';
}

ContractionCertificate contraction_certificate(const OperatorConstants& constants, double L_phi) {
    ContractionCertificate cert;
    cert.c = constants.c;
    cert.L_A = constants.L;
    cert.L_N = constants.L_nonlinear;
    cert.gamma = constants.gamma;
    cert.L_phi = L_phi;
    if (cert.gamma < cert.c) {
        cert.rho = (cert.L_A + cert.L_N) * L_phi / (cert.c - cert.gamma);
        cert.smallness_ok = cert.rho < 1.0;
    } else {
        cert.rho = std::numeric_limits<double>::infinity();
        cert.smallness_ok = false;
    }
    return cert;
}

namespace {

enum class Ordering { any, increasing, decreasing };

constexpr double kOrderTol = 1e-9;

QVIReport iterate(const QVIProblem& problem, const GridFunction& y0, const OuterParams& outer,
                  const VIParams& inner, Ordering required) {
    problem.validate();
    if (!(y0.mesh() == problem.op->mesh())) throw IncompatibleGridError("start iterate is on a different mesh");
    if (!(outer.tol > 0.0) || outer.max_iter <= 0) throw ParameterError("invalid outer iteration parameters");

    QVIReport report{.solution = y0};
    bool increasing = true;
    bool decreasing = true;
    for (int k = 1; k <= outer.max_iter; ++k) {
        const GridFunction psi = eval_obstacle(problem.obstacle, report.solution);
        VISolveReport step = solve_vi(*problem.op, problem.f, psi, inner);
        report.inner_iterations += step.iterations;
        if (!step.converged) {
            throw SolverError("inner obstacle solve did not converge at outer step " + std::to_string(k) +
                              " (KKT residual " + format_real(step.kkt_residual) + ")");
        }
        const bool up = leq(report.solution, step.solution, kOrderTol);
        const bool down = leq(step.solution, report.solution, kOrderTol);
        if (required == Ordering::increasing && !up) {
            throw OrderingViolationError("iterate " + std::to_string(k) + " is not above its predecessor");
        }
        if (required == Ordering::decreasing && !down) {
            throw OrderingViolationError("iterate " + std::to_string(k) + " is not below its predecessor");
        }
        increasing = increasing && up;
        decreasing = decreasing && down;

        const double dist = norm(step.solution - report.solution, Norm::sup);
        if (!report.step_norms.empty()) {
            const double prev = report.step_norms.back();
            report.ratios.push_back(prev > 0.0 ? dist / prev : 0.0);
        }
        report.step_norms.push_back(dist);
        report.solution = std::move(step.solution);
        report.outer_iterations = k;
        if (problem.obstacle.is_fixed() || dist <= outer.tol) {
            report.converged = true;
            break;
        }
    }
    for (std::size_t r = 2; r < report.ratios.size(); ++r) {
        report.rho_observed = std::max(report.rho_observed, report.ratios[r]);
    }
    report.monotone_trace = increasing ? MonotoneTrace::increasing
                            : decreasing ? MonotoneTrace::decreasing
                                         : MonotoneTrace::none;
    return report;
}

}  // namespace

QVIReport solve_qvi_fixed_point(const QVIProblem& problem, const GridFunction& y0, const OuterParams& outer,
                                const VIParams& inner) {
    return iterate(problem, y0, outer, inner, Ordering::any);
}

QVIReport solve_qvi_minimal(const QVIProblem& problem, const OuterParams& outer, const VIParams& inner) {
    for (double v : problem.f.values()) {
        if (v < 0.0) throw PreconditionError("minimal-solution iteration needs f >= 0");
    }
    return iterate(problem, GridFunction(problem.f.mesh()), outer, inner, Ordering::increasing);
}

GridFunction supersolution(const QVIProblem& problem, const VIParams& inner) {
    if (!problem.F) throw PreconditionError("maximal-solution iteration needs an upper force F");
    problem.validate();
    return solve_unconstrained_any(*problem.op, *problem.F, inner);
}

QVIReport solve_qvi_maximal(const QVIProblem& problem, const OuterParams& outer, const VIParams& inner,
                            const GridFunction* minimal) {
    const GridFunction top = supersolution(problem, inner);
    QVIReport report = iterate(problem, top, outer, inner, Ordering::decreasing);
    if (minimal != nullptr && !leq(*minimal, report.solution, 1e-8)) {
        throw OrderingViolationError("minimal solution is not below the maximal one");
    }
    return report;
}

QVIReport solve_qvi_regularized(const QVIProblem& problem, double eps, double delta,
                                const std::optional<LinearEllipticOperator>& regularizer, const OuterParams& outer,
                                const VIParams& inner) {
    const QVIProblem regularized = problem.with_operator(add_regularization(problem.op, eps, delta, regularizer));
    return solve_qvi_fixed_point(regularized, GridFunction(problem.f.mesh()), outer, inner);
}

}  // namespace qvar
