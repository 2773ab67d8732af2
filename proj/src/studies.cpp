#include "qvar/studies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qvar/error.hpp"
#include "qvar/parallel.hpp"

namespace qvar {

RateFit fit_rate(std::span<const std::pair<double, double>> points, double exclude_zero_below) {
    RateFit fit;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0)) throw ParameterError("rate fit parameters must be positive");
        if (!(y >= 0.0)) throw ParameterError("rate fit errors must be nonnegative");
        if (y > exclude_zero_below) {
            fit.points.emplace_back(x, y);
        } else {
            ++fit.exact_hits;
        }
    }
    const std::size_t m = fit.points.size();
    if (m < 3) {
        throw InsufficientDataError("rate fit needs at least 3 nonzero points, got " + std::to_string(m));
    }
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : fit.points) {
        sx += std::log10(x);
        sy += std::log10(y);
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : fit.points) {
        const double dx = std::log10(x) - mx, dy = std::log10(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("rate fit needs at least two distinct parameters");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ss_res = std::max(syy - fit.slope * sxy, 0.0);
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

// ---------------------------------------------------------------------------

bool StudyResult::all_verdicts() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.second; });
}

bool StudyResult::all_converged() const {
    return std::all_of(rows.begin(), rows.end(), [](const StudyRow& r) { return r.converged; });
}

bool StudyResult::verdict(const std::string& key) const {
    for (const auto& [k, v] : verdicts) {
        if (k == key) return v;
    }
    throw std::out_of_range("no verdict named " + key);
}

void StudyResult::write_csv(std::ostream& out) const {
    out << "# study=" << name << " seed=" << seed << " reference=" << reference << '\n';
    out << "parameter,error";
    for (const auto& a : aux_names) out << ',' << a;
    out << ",converged\n";
    for (const auto& row : rows) {
        out << format_real(row.parameter) << ',' << format_real(row.error);
        for (double a : row.aux) out << ',' << format_real(a);
        out << ',' << (row.converged ? "true" : "false") << '\n';
    }
    if (fit) {
        out << "# fit slope=" << format_real(fit->slope) << " r2=" << format_real(fit->r2) << '\n';
    } else {
        out << "# fit none\n";
    }
    out << "# exact_hits=" << exact_hits << '\n';
    for (const auto& [k, v] : verdicts) out << "# verdict " << k << '=' << (v ? "true" : "false") << '\n';
}

std::string StudyResult::to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

namespace {

void require_decreasing(const std::vector<double>& list, const char* what) {
    if (list.size() < 4) {
        throw InsufficientDataError(std::string(what) + " needs at least 4 entries, got " +
                                    std::to_string(list.size()));
    }
    for (std::size_t k = 0; k + 1 < list.size(); ++k) {
        if (!(list[k + 1] < list[k])) throw ParameterError(std::string(what) + " must be strictly decreasing");
    }
    for (double v : list) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " entries must be >= 0");
    }
}

// Fills fit and exact hits from the rows; fewer than 3 usable errors leave the fit empty.
void attach_fit(StudyResult& result, double threshold) {
    std::vector<std::pair<double, double>> points;
    result.exact_hits = 0;
    for (const auto& row : result.rows) {
        if (!row.converged || !std::isfinite(row.error)) continue;
        if (row.error <= threshold) {
            ++result.exact_hits;
        } else if (row.parameter > 0.0) {
            points.emplace_back(row.parameter, row.error);
        }
    }
    if (points.size() >= 3) result.fit = fit_rate(points, threshold);
}

struct PointSolve {
    std::optional<QVIReport> report;
};

// Runs solve(i) for every index, turning solver failures into unconverged rows.
template <typename Solve>
std::vector<PointSolve> solve_points(std::size_t count, int jobs, Solve&& solve) {
    std::vector<PointSolve> out(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        try {
            out[i].report = solve(i);
        } catch (const SolverError&) {
            out[i].report.reset();
        }
    });
    return out;
}

StudyRow distance_row(double parameter, const PointSolve& point, const GridFunction& reference) {
    StudyRow row;
    row.parameter = parameter;
    if (!point.report || !point.report->converged) {
        row.error = std::numeric_limits<double>::quiet_NaN();
        row.aux = {std::numeric_limits<double>::quiet_NaN(),
                   point.report ? static_cast<double>(point.report->outer_iterations) : 0.0};
        row.converged = false;
        return row;
    }
    const GridFunction diff = point.report->solution - reference;
    row.error = norm(diff, Norm::h1);
    row.aux = {norm(diff, Norm::sup), static_cast<double>(point.report->outer_iterations)};
    return row;
}

// y[k+1] >= y[k] - tol for consecutive converged solutions.
bool nondecreasing_chain(const std::vector<PointSolve>& points, double tol) {
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        if (!points[k].report || !points[k + 1].report) return false;
        if (!leq(points[k].report->solution, points[k + 1].report->solution, tol)) return false;
    }
    return true;
}

QVIReport require_converged(QVIReport report, const char* what) {
    if (!report.converged) throw SolverError(std::string(what) + " did not converge");
    return report;
}

}  // namespace

// ---------------------------------------------------------------------------

StudyResult run_regularization_path(const QVIProblem& problem, const std::vector<double>& eps_list,
                                    const RegularizationReference& reference, const StudyOptions& options) {
    require_decreasing(eps_list, "eps_list");
    StudyResult result;
    result.name = "regpath";
    result.seed = options.seed;
    result.aux_names = {"error_sup", "outer_iterations"};

    GridFunction ref(problem.f.mesh());
    if (reference.exact) {
        ref = *reference.exact;
        result.reference = "exact";
    } else {
        ref = require_converged(
                  solve_qvi_regularized(problem, reference.eps, 0.0, std::nullopt, options.outer, options.inner),
                  "reference solve")
                  .solution;
        result.reference = "eps:" + format_real(reference.eps);
    }
    require_same_mesh(ref, problem.f);

    const auto points = solve_points(eps_list.size(), options.jobs, [&](std::size_t i) {
        return solve_qvi_regularized(problem, eps_list[i], 0.0, std::nullopt, options.outer, options.inner);
    });
    for (std::size_t i = 0; i < points.size(); ++i) result.rows.push_back(distance_row(eps_list[i], points[i], ref));

    // Larger eps sits below smaller eps.
    result.verdicts.emplace_back("eps_monotone", nondecreasing_chain(points, 1e-8));
    bool nonincreasing = true;
    for (std::size_t k = 0; k + 1 < result.rows.size(); ++k) {
        if (!(result.rows[k + 1].error <= result.rows[k].error + 1e-12)) nonincreasing = false;
    }
    result.verdicts.emplace_back("errors_nonincreasing", nonincreasing);
    attach_fit(result, options.exact_threshold);
    return result;
}

PerturbationFamily parse_perturbation_family(const std::string& text) {
    if (text == "scaled_identity") return PerturbationFamily::scaled_identity;
    if (text == "coefficient") return PerturbationFamily::coefficient;
    throw ParameterError("unknown perturbation family '" + text + "'");
}

StudyResult run_operator_perturbation(const QVIProblem& problem, PerturbationFamily family,
                                      const std::vector<double>& delta_list, const StudyOptions& options) {
    require_decreasing(delta_list, "delta_list");
    const auto* lin = dynamic_cast<const LinearEllipticOperator*>(problem.op.get());
    if (family == PerturbationFamily::coefficient && lin == nullptr) {
        throw ParameterError("the coefficient family needs a linear operator");
    }
    StudyResult result;
    result.name = "perturb";
    result.seed = options.seed;
    result.reference = "delta:0";
    result.aux_names = {"error_sup", "outer_iterations"};

    auto perturbed = [&](double delta) -> OperatorPtr {
        if (family == PerturbationFamily::coefficient) {
            return std::make_shared<LinearEllipticOperator>(lin->with_reaction_shift(delta));
        }
        if (lin != nullptr) {
            return std::make_shared<LinearEllipticOperator>(
                lin->plus(LinearEllipticOperator::identity(lin->mesh(), 1.0), delta));
        }
        return add_regularization(problem.op, delta);
    };

    const GridFunction ref =
        require_converged(solve_qvi_minimal(problem, options.outer, options.inner), "reference solve").solution;
    const auto points = solve_points(delta_list.size(), options.jobs, [&](std::size_t i) {
        return solve_qvi_minimal(problem.with_operator(perturbed(delta_list[i])), options.outer, options.inner);
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
        result.rows.push_back(distance_row(delta_list[i], points[i], ref));
    }
    if (family == PerturbationFamily::scaled_identity) {
        result.verdicts.emplace_back("ordered_solutions", nondecreasing_chain(points, 1e-8));
    }
    attach_fit(result, options.exact_threshold);
    return result;
}

StudyResult run_mesh_refinement(const ProblemTemplate& make_problem, const std::vector<int>& n_list,
                                const StudyOptions& options) {
    if (n_list.empty()) throw InsufficientDataError("n_list is empty");
    const int finest = n_list.back();
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] < 2) throw ParameterError("mesh sizes must be >= 2");
        if (k + 1 < n_list.size() && !(n_list[k] < n_list[k + 1])) {
            throw NestingError("n_list must be strictly increasing");
        }
        if (finest % n_list[k] != 0) {
            throw NestingError("n = " + std::to_string(n_list[k]) + " does not divide the finest n = " +
                               std::to_string(finest));
        }
    }
    if (n_list.size() < 4) throw InsufficientDataError("n_list needs at least 4 entries");

    StudyResult result;
    result.name = "refine";
    result.seed = options.seed;
    result.reference = "finest:n=" + std::to_string(finest);
    result.aux_names = {"n", "outer_iterations"};

    const auto points = solve_points(n_list.size(), options.jobs, [&](std::size_t i) {
        const QVIProblem p = make_problem(n_list[i]);
        return solve_qvi_fixed_point(p, GridFunction(p.f.mesh()), options.outer, options.inner);
    });
    if (!points.back().report || !points.back().report->converged) {
        throw SolverError("reference solve on the finest mesh did not converge");
    }
    const GridFunction& fine = points.back().report->solution;
    const Mesh& fine_mesh = fine.mesh();
    const auto fine_dof = [&](int node) {
        return static_cast<std::size_t>(fine_mesh.bc() == BoundaryCondition::dirichlet ? node - 1 : node);
    };

    for (std::size_t k = 0; k + 1 < n_list.size(); ++k) {
        StudyRow row;
        row.parameter = 1.0 / n_list[k];
        const auto& point = points[k];
        if (!point.report || !point.report->converged) {
            row.error = std::numeric_limits<double>::quiet_NaN();
            row.aux = {static_cast<double>(n_list[k]), 0.0};
            row.converged = false;
            result.rows.push_back(row);
            continue;
        }
        const GridFunction& coarse = point.report->solution;
        const int ratio = finest / n_list[k];
        GridFunction injected(coarse.mesh());
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            injected[i] = fine[fine_dof(coarse.mesh().node_index(i) * ratio)];
        }
        row.error = norm(coarse - injected, Norm::l2);
        row.aux = {static_cast<double>(n_list[k]), static_cast<double>(point.report->outer_iterations)};
        result.rows.push_back(row);
    }
    attach_fit(result, options.exact_threshold);
    return result;
}

StudyResult run_data_robustness(const QVIProblem& problem, const std::vector<double>& f_deltas,
                                const std::vector<double>& phi_deltas, double eps, const StudyOptions& options) {
    if (f_deltas.empty() && phi_deltas.empty()) throw InsufficientDataError("no perturbations given");
    if (!f_deltas.empty()) require_decreasing(f_deltas, "f_deltas");
    if (!phi_deltas.empty()) require_decreasing(phi_deltas, "phi_deltas");
    if (!f_deltas.empty() && !phi_deltas.empty() && f_deltas.size() != phi_deltas.size()) {
        throw ParameterError("f_deltas and phi_deltas must have equal length");
    }
    const std::size_t count = std::max(f_deltas.size(), phi_deltas.size());
    const auto f_delta = [&](std::size_t i) { return f_deltas.empty() ? 0.0 : f_deltas[i]; };
    const auto phi_delta = [&](std::size_t i) { return phi_deltas.empty() ? 0.0 : phi_deltas[i]; };

    StudyResult result;
    result.name = "robust";
    result.seed = options.seed;
    result.reference = "unperturbed:eps=" + format_real(eps);
    result.aux_names = {"error_sup", "outer_iterations"};

    const GridFunction ref =
        require_converged(solve_qvi_regularized(problem, eps, 0.0, std::nullopt, options.outer, options.inner),
                          "reference solve")
            .solution;
    const auto points = solve_points(count, options.jobs, [&](std::size_t i) {
        QVIProblem p = problem;
        const GridFunction shift(problem.f.mesh(), f_delta(i));
        p.f += shift;
        if (p.F) *p.F += shift;
        p.obstacle = problem.obstacle.shifted(phi_delta(i));
        return solve_qvi_regularized(p, eps, 0.0, std::nullopt, options.outer, options.inner);
    });
    for (std::size_t i = 0; i < count; ++i) {
        result.rows.push_back(distance_row(f_delta(i) + phi_delta(i), points[i], ref));
    }
    if (!f_deltas.empty()) {
        // Larger forces first: the chain must decrease towards the reference.
        bool monotone = true;
        for (std::size_t k = 0; k < count && monotone; ++k) {
            if (!points[k].report) {
                monotone = false;
                break;
            }
            if (!leq(ref, points[k].report->solution, 1e-8)) monotone = false;
            if (k + 1 < count && points[k + 1].report &&
                !leq(points[k + 1].report->solution, points[k].report->solution, 1e-8)) {
                monotone = false;
            }
        }
        result.verdicts.emplace_back("monotone_in_f", monotone);
    }
    attach_fit(result, options.exact_threshold);
    return result;
}

StudyResult run_stability_bound_check(const QVIProblem& problem,
                                      const std::vector<std::pair<GridFunction, GridFunction>>& force_pairs,
                                      const StudyOptions& options, int constant_trials) {
    problem.validate();
    const OperatorConstants constants = estimate_constants(*problem.op, Norm::h1, constant_trials, options.seed);
    const ContractionCertificate cert = contraction_certificate(constants, lipschitz_bound(problem.obstacle, Norm::l2));
    if (!cert.smallness_ok || !(cert.stability_margin() > 0.0)) {
        throw PreconditionError("stability bound needs a passing contraction certificate (rho = " +
                                format_real(cert.rho) + ")");
    }
    StudyResult result;
    result.name = "stability";
    result.seed = options.seed;
    result.reference = "pairwise";
    result.aux_names = {"bound", "ratio", "rho_certificate"};

    std::vector<std::optional<QVIReport>> first(force_pairs.size()), second(force_pairs.size());
    const GridFunction zero(problem.f.mesh());
    parallel_for(force_pairs.size(), options.jobs, [&](std::size_t i) {
        QVIProblem p = problem;
        p.F.reset();
        p.f = force_pairs[i].first;
        first[i] = solve_qvi_fixed_point(p, zero, options.outer, options.inner);
        p.f = force_pairs[i].second;
        second[i] = solve_qvi_fixed_point(p, zero, options.outer, options.inner);
    });

    bool holds = true;
    for (std::size_t i = 0; i < force_pairs.size(); ++i) {
        StudyRow row;
        const double force_gap = dual_norm(force_pairs[i].first - force_pairs[i].second, Norm::h1);
        row.parameter = force_gap;
        row.converged = first[i]->converged && second[i]->converged;
        row.error = norm(first[i]->solution - second[i]->solution, Norm::h1);
        const double bound = force_gap / cert.stability_margin();
        double ratio = 0.0;
        if (bound > 0.0) {
            ratio = row.error / bound;
        } else if (row.error > 1e-12) {
            ratio = std::numeric_limits<double>::infinity();
        }
        row.aux = {bound, ratio, cert.rho};
        holds = holds && row.converged && ratio <= 1.05;
        result.rows.push_back(row);
    }
    result.verdicts.emplace_back("bound_holds", holds);
    return result;
}

}  // namespace qvar
