#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "qvar/error.hpp"
#include "qvar/problems.hpp"
#include "qvar/studies.hpp"

using namespace qvar;
using qvar::testing::random_function;

namespace {

ProblemSpec spec_for(const std::string& name, int n) {
    ProblemSpec spec;
    spec.name = name;
    spec.n = n;
    return spec;
}

QVIProblem named(const std::string& name, int n = 32) { return build_problem(spec_for(name, n)).problem; }

std::vector<double> halving(double start, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(start / std::pow(2.0, i));
    return out;
}

}  // namespace

TEST_CASE("fit_rate on exact power laws") {
    const std::vector<std::pair<double, double>> line = {{1, 1}, {2, 2}, {4, 4}};
    const RateFit a = fit_rate(line, 0.0);
    CHECK(a.slope == doctest::Approx(1.0));
    CHECK(a.r2 == doctest::Approx(1.0));
    const std::vector<std::pair<double, double>> quad = {{1, 1}, {4, 16}, {16, 256}};
    CHECK(fit_rate(quad, 0.0).slope == doctest::Approx(2.0));
    const std::vector<std::pair<double, double>> noisy = {{1, 1}, {2, 2.1}, {4, 3.9}};
    const RateFit c = fit_rate(noisy, 0.0);
    CHECK(c.slope > 0.9);
    CHECK(c.slope < 1.1);
    CHECK(c.r2 > 0.99);
}

TEST_CASE("fit_rate counts exact hits and needs three usable points") {
    const std::vector<std::pair<double, double>> pts = {{1, 1}, {2, 2}, {4, 4}, {8, 0.0}, {16, 1e-14}};
    const RateFit fit = fit_rate(pts, 1e-10);
    CHECK(fit.exact_hits == 2);
    CHECK(fit.points.size() == 3);
    const std::vector<std::pair<double, double>> two = {{1, 1}, {2, 2}, {4, 0.0}};
    CHECK_THROWS_AS(fit_rate(two, 1e-10), InsufficientDataError);
}

TEST_CASE("fit_rate recovers planted slopes under noise") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    for (double s : {0.5, 1.0, 2.0}) {
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 8; ++i) {
            const double x = std::pow(2.0, -i);
            pts.emplace_back(x, 3.0 * std::pow(x, s) * (1.0 + noise(rng)));
        }
        const RateFit fit = fit_rate(pts, 0.0);
        CHECK(std::abs(fit.slope - s) <= 0.1);
        CHECK(fit.r2 >= 0.99);
    }
}

TEST_CASE("regularization path on the one-dimensional example") {
    const BuiltProblem built = build_problem(spec_for("example1d", 32));
    RegularizationReference ref;
    ref.exact = built.exact_limit;
    const StudyResult r = run_regularization_path(built.problem, {1.0, 0.75, 0.6, 0.5, 0.25, 0.1}, ref, {});
    const double expected[] = {1.0 / 6.0, 2.0 / 21.0, 1.0 / 24.0, 0.0, 0.0, 0.0};
    REQUIRE(r.rows.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(r.rows[i].error - expected[i]) <= 1e-6);
    CHECK(r.verdict("eps_monotone"));
    CHECK(r.verdict("errors_nonincreasing"));
    CHECK(r.reference == "exact");

    CHECK_THROWS_AS(run_regularization_path(built.problem, {0.5, 0.25}, ref, {}), InsufficientDataError);
    CHECK_THROWS_AS(run_regularization_path(built.problem, {0.5, 0.25, 0.5, 0.1}, ref, {}), ParameterError);
}

TEST_CASE("regularization path on a fixed obstacle is linear in eps") {
    const StudyResult r = run_regularization_path(named("fixed_obstacle", 64), halving(0.5, 6), {}, {});
    REQUIRE(r.fit);
    CHECK(r.fit->slope >= 0.9);
    CHECK(r.all_verdicts());
}

TEST_CASE("scaled identity perturbation coincides with the regularization path") {
    const QVIProblem p = named("example1d", 32);
    const std::vector<double> deltas = {0.4, 0.2, 0.1, 0.05};
    const StudyResult perturb = run_operator_perturbation(p, PerturbationFamily::scaled_identity, deltas, {});
    RegularizationReference ref;
    ref.eps = 0.0;
    const StudyResult path = run_regularization_path(p, deltas, ref, {});
    REQUIRE(perturb.rows.size() == path.rows.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        CHECK(std::abs(perturb.rows[i].error - path.rows[i].error) <= 1e-12);
        CHECK(std::abs(perturb.rows[i].error - (2.0 / 3.0 - std::min(1.0 / (1.0 + deltas[i]), 2.0 / 3.0))) <= 1e-6);
    }
    CHECK(perturb.verdict("ordered_solutions"));
}

TEST_CASE("coefficient perturbation rate") {
    const StudyResult r = run_operator_perturbation(named("fixed_obstacle", 64), PerturbationFamily::coefficient,
                                                    halving(0.4, 5), {});
    REQUIRE(r.fit);
    CHECK(r.fit->slope >= 0.9);
    CHECK(r.fit->r2 >= 0.98);
    CHECK_THROWS_AS(run_operator_perturbation(named("fixed_obstacle"), PerturbationFamily::coefficient, {0.0}, {}),
                    InsufficientDataError);
}

TEST_CASE("mesh refinement") {
    const StudyResult r =
        run_mesh_refinement(problem_template(spec_for("fixed_obstacle", 8)), {8, 16, 32, 64, 128, 256}, {});
    REQUIRE(r.fit);
    CHECK(r.fit->slope >= 1.0);
    CHECK(r.rows.size() == 5);

    const StudyResult exact = run_mesh_refinement(problem_template(spec_for("example1d", 8)), {8, 16, 32, 64}, {});
    for (const StudyRow& row : exact.rows) CHECK(row.error < 1e-10);
    CHECK_FALSE(exact.fit);
    CHECK(exact.exact_hits == 3);

    CHECK_THROWS_AS(run_mesh_refinement(problem_template(spec_for("fixed_obstacle", 8)), {8, 12}, {}), NestingError);
    CHECK_THROWS_AS(run_mesh_refinement(problem_template(spec_for("fixed_obstacle", 8)), {8, 12, 16, 24}, {}),
                    NestingError);
}

TEST_CASE("data robustness on the one-dimensional example") {
    const std::vector<double> deltas = {0.2, 0.1, 0.05, 0.025};
    const StudyResult r = run_data_robustness(named("example1d"), deltas, {}, 1.0, {});
    for (std::size_t i = 0; i < deltas.size(); ++i) CHECK(std::abs(r.rows[i].error - deltas[i] / 2.0) <= 1e-6);
    CHECK(r.verdict("monotone_in_f"));
    REQUIRE(r.fit);
    CHECK(r.fit->slope == doctest::Approx(1.0).epsilon(1e-3));

    const StudyResult fixed = run_data_robustness(named("fixed_obstacle", 64), deltas, {}, 0.0, {});
    REQUIRE(fixed.fit);
    CHECK(fixed.fit->slope >= 0.9);
}

TEST_CASE("monotone in f over seeded kernel instances") {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const Mesh m(24, BoundaryCondition::dirichlet);
        const GridFunction psi = random_function(m, rng, 0.0, 0.1);
        QVIProblem p{std::make_shared<LinearEllipticOperator>(
                         assemble_linear(m, [](double) { return 1.0; }, [](double) { return 0.0; })),
                     GridFunction(m, 0.5 + 2.0 * u(rng)),
                     ObstacleMap::kernel(psi, 0.5 * u(rng), named_kernel("gauss(0.2)")), std::nullopt};
        const StudyResult r = run_data_robustness(p, {0.4, 0.2, 0.1, 0.05}, {}, 0.01, {});
        CHECK(r.verdict("monotone_in_f"));
    }
}

TEST_CASE("stability bound") {
    const QVIProblem p = named("example1d");
    const Mesh& m = p.f.mesh();
    const GridFunction f(m, 1.0);
    const StudyResult same = run_stability_bound_check(p, {{f, f}}, {});
    CHECK(same.rows[0].error == 0.0);
    CHECK(same.rows[0].aux[1] == 0.0);
    CHECK(same.verdict("bound_holds"));

    const StudyResult shifted = run_stability_bound_check(p, {{f, f + GridFunction(m, 0.1)}}, {});
    CHECK(shifted.rows[0].error <= shifted.rows[0].aux[0]);
    CHECK(shifted.verdict("bound_holds"));

    std::mt19937_64 rng(10);
    std::vector<std::pair<GridFunction, GridFunction>> pairs;
    const QVIProblem sine = named("nonmonotone_sine");
    for (int i = 0; i < 10; ++i) {
        pairs.emplace_back(random_function(sine.f.mesh(), rng, 0.0, 2.0), random_function(sine.f.mesh(), rng, 0.0, 2.0));
    }
    CHECK(run_stability_bound_check(sine, pairs, {}).verdict("bound_holds"));

    CHECK_THROWS_AS(run_stability_bound_check(named("plaplacian"), {{f, f}}, {}), PreconditionError);
}

TEST_CASE("studies are deterministic and independent of the job count") {
    const QVIProblem p = named("kernel_qvi");
    StudyOptions serial;
    StudyOptions parallel;
    parallel.jobs = 3;
    const std::string a = run_regularization_path(p, halving(0.5, 5), {}, serial).to_csv();
    const std::string b = run_regularization_path(p, halving(0.5, 5), {}, serial).to_csv();
    const std::string c = run_regularization_path(p, halving(0.5, 5), {}, parallel).to_csv();
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.rfind("# study=regpath seed=42 reference=eps:", 0) == 0);
    CHECK(a.find("\nparameter,error,error_sup,outer_iterations,converged\n") != std::string::npos);
    CHECK(a.find("# verdict eps_monotone=true") != std::string::npos);
}
