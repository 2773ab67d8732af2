#pragma once

/**
 * @file studies.hpp
 * @brief Parameter studies turning convergence statements into measured
 *        errors, ordered tables and fitted log-log slopes.
 *
 * Every study is deterministic for fixed inputs: rows are ordered by
 * parameter index whatever the number of worker threads.
 */

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qvar/qvi_solver.hpp"

namespace qvar {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    /// Points used in the fit.
    std::vector<std::pair<double, double>> points;
    /// Points excluded because their error was at or below the threshold.
    int exact_hits = 0;
};

/// Ordinary least squares on (log10 x, log10 y) over points with
/// y > exclude_zero_below. Throws InsufficientDataError with fewer than 3
/// usable points and ParameterError on nonpositive x or negative y.
RateFit fit_rate(std::span<const std::pair<double, double>> points, double exclude_zero_below);

struct StudyRow {
    double parameter = 0.0;
    double error = 0.0;
    std::vector<double> aux;
    bool converged = true;
};

struct StudyResult {
    std::string name;
    std::uint64_t seed = 0;
    std::string reference;
    std::vector<std::string> aux_names;
    std::vector<StudyRow> rows;
    std::optional<RateFit> fit;
    int exact_hits = 0;
    std::vector<std::pair<std::string, bool>> verdicts;

    bool all_verdicts() const;
    bool all_converged() const;
    /// Throws std::out_of_range for an unknown verdict.
    bool verdict(const std::string& name) const;

    void write_csv(std::ostream& out) const;
    std::string to_csv() const;
};

struct StudyOptions {
    OuterParams outer;
    VIParams inner;
    int jobs = 1;
    std::uint64_t seed = 42;
    /// Errors at or below this are exact hits and stay out of fits.
    double exact_threshold = 1e-10;
};

/// Either a known solution or a solve at a reference epsilon.
struct RegularizationReference {
    std::optional<GridFunction> exact;
    double eps = 1e-6;
};

/// Solves the eps-regularized problem for each eps (strictly decreasing, at
/// least 4 entries) and measures the h1 distance to the reference.
/// Verdicts: eps_monotone, errors_nonincreasing.
StudyResult run_regularization_path(const QVIProblem& problem, const std::vector<double>& eps_list,
                                    const RegularizationReference& reference, const StudyOptions& options);

enum class PerturbationFamily { scaled_identity, coefficient };
PerturbationFamily parse_perturbation_family(const std::string& text);

/// Minimal solutions of A + delta*I (scaled_identity) or of A with reaction
/// a0 + delta (coefficient, linear operators only) against the delta = 0
/// minimal solution. Verdict ordered_solutions for scaled_identity.
StudyResult run_operator_perturbation(const QVIProblem& problem, PerturbationFamily family,
                                      const std::vector<double>& delta_list, const StudyOptions& options);

using ProblemTemplate = std::function<QVIProblem(int n)>;

/// Self-convergence against the finest mesh (last entry of n_list). Coarse
/// solutions are compared at shared nodes in the coarse discrete l2 norm.
/// Throws NestingError unless every n divides the finest one.
StudyResult run_mesh_refinement(const ProblemTemplate& make_problem, const std::vector<int>& n_list,
                                const StudyOptions& options);

/// Perturbs f by +delta and/or the obstacle base level by +delta, solving
/// the eps-regularized problem. Verdict monotone_in_f when f is perturbed.
StudyResult run_data_robustness(const QVIProblem& problem, const std::vector<double>& f_deltas,
                                const std::vector<double>& phi_deltas, double eps, const StudyOptions& options);

/// Checks |y1 - y2|_h1 <= |f1 - f2|_{h1'} / (c - gamma - (L_A + L_N) L_phi)
/// per pair with slack 1.05 (verdict bound_holds). Throws PreconditionError
/// when the contraction certificate fails.
StudyResult run_stability_bound_check(const QVIProblem& problem,
                                      const std::vector<std::pair<GridFunction, GridFunction>>& force_pairs,
                                      const StudyOptions& options, int constant_trials = 200);

}  // namespace qvar
