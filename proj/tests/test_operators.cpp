#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "qvar/error.hpp"
#include "qvar/operators.hpp"

using namespace qvar;
using qvar::testing::hat;
using qvar::testing::random_function;

namespace {

auto constant(double c) {
    return [c](double) { return c; };
}

void check_close(const GridFunction& u, std::initializer_list<double> expected, double tol) {
    REQUIRE(u.size() == expected.size());
    std::size_t i = 0;
    for (double e : expected) CHECK(std::abs(u[i++] - e) <= tol);
}

}  // namespace

TEST_CASE("linear stencil on simple inputs") {
    const Mesh n8(8, BoundaryCondition::neumann);
    const auto A = assemble_linear(n8, constant(1.0), constant(1.0));
    CHECK(norm(A.apply(GridFunction(n8, 1.0)) - GridFunction(n8, 1.0), Norm::sup) == 0.0);

    const Mesh d4(4, BoundaryCondition::dirichlet);
    const auto L = assemble_linear(d4, constant(1.0), constant(0.0));
    check_close(L.apply(hat(d4)), {-16.0, 32.0, -16.0}, 1e-12);
}

TEST_CASE("assembly rejects non-elliptic coefficients") {
    const Mesh m(8, BoundaryCondition::dirichlet);
    CHECK_THROWS_AS(assemble_linear(m, constant(0.0), constant(1.0)), EllipticityError);
    CHECK_THROWS_AS(assemble_linear(m, constant(-1.0), constant(1.0)), EllipticityError);
    CHECK_THROWS_AS(assemble_linear(m, constant(1.0), constant(-0.5)), EllipticityError);
    CHECK_THROWS_AS(assemble_linear(Mesh(8, BoundaryCondition::neumann), constant(1.0), constant(0.0)),
                    EllipticityError);
}

TEST_CASE("linear operators are symmetric and positive in the weighted pairing") {
    std::mt19937_64 rng(17);
    for (BoundaryCondition bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
        const Mesh m(20, bc);
        const auto A = assemble_linear(m, [](double x) { return 1.0 + x * x; }, [](double x) { return 0.5 + x; });
        for (int t = 0; t < 25; ++t) {
            const GridFunction u = random_function(m, rng, -1.0, 1.0);
            const GridFunction v = random_function(m, rng, -1.0, 1.0);
            const double uv = inner(A.apply(u), v);
            const double vu = inner(u, A.apply(v));
            CHECK(std::abs(uv - vu) <= 1e-10 * (1.0 + std::abs(uv)));
            CHECK(inner(A.apply(u), u) > 0.0);
        }
    }
}

TEST_CASE("p-Laplacian evaluations") {
    const Mesh d4(4, BoundaryCondition::dirichlet);
    const PLaplacianOperator p4(d4, 4.0, 0.0);
    check_close(p4.apply(hat(d4)), {-256.0, 512.0, -256.0}, 1e-9);

    std::mt19937_64 rng(2);
    const Mesh m(16, BoundaryCondition::dirichlet);
    const PLaplacianOperator p2(m, 2.0, 0.7);
    const auto lin = assemble_linear(m, constant(1.0), constant(0.0));
    for (int t = 0; t < 10; ++t) {
        const GridFunction u = random_function(m, rng, -1.0, 1.0);
        CHECK(norm(p2.apply(u) - lin.apply(u), Norm::sup) <= 1e-9);
    }

    CHECK_THROWS_AS(PLaplacianOperator(m, 1.5, 0.0), ParameterError);
    CHECK_THROWS_AS(PLaplacianOperator(m, 3.0, -1.0), ParameterError);
    CHECK_THROWS(PLaplacianOperator(Mesh(16, BoundaryCondition::neumann), 3.0, 0.0));
}

TEST_CASE("unregularized p-Laplacian is homogeneous of degree p - 1") {
    std::mt19937_64 rng(8);
    const Mesh m(24, BoundaryCondition::dirichlet);
    for (double p : {3.0, 4.0}) {
        const PLaplacianOperator op(m, p, 0.0);
        for (int t = 0; t < 10; ++t) {
            const GridFunction u = random_function(m, rng, -1.0, 1.0);
            for (double s : {0.5, 2.0, 3.0}) {
                const GridFunction lhs = op.apply(s * u);
                const GridFunction rhs = std::pow(s, p - 1.0) * op.apply(u);
                CHECK(norm(lhs - rhs, Norm::sup) <= 1e-9 * (1.0 + norm(rhs, Norm::sup)));
            }
        }
    }
}

TEST_CASE("jacobians match finite differences") {
    std::mt19937_64 rng(23);
    const Mesh m(12, BoundaryCondition::dirichlet);
    const PLaplacianOperator plap(m, 3.0, 1e-2);
    const NonMonotoneOperator sine(assemble_linear(m, constant(1.0), constant(0.5)), 0.3);
    const Operator* ops[] = {&plap, &sine};
    for (const Operator* op : ops) {
        const GridFunction u = random_function(m, rng, -1.0, 1.0);
        const GridFunction v = random_function(m, rng, -1.0, 1.0);
        const double step = 1e-6;
        const GridFunction fd = (1.0 / (2.0 * step)) * (op->apply(u + step * v) - op->apply(u - step * v));
        const GridFunction jv = op->jacobian(u).apply(v);
        CHECK(norm(fd - jv, Norm::sup) <= 1e-5 * (1.0 + norm(jv, Norm::sup)));
    }
}

TEST_CASE("regularized p-Laplacian converges as eps decreases") {
    const Mesh m(64, BoundaryCondition::dirichlet);
    const GridFunction v = GridFunction::from_function(m, [](double x) { return std::sin(M_PI * x); });
    const GridFunction limit = PLaplacianOperator(m, 3.0, 0.0).apply(v);
    double previous = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const double gap = dual_norm(PLaplacianOperator(m, 3.0, eps).apply(v) - limit, Norm::h1);
        CHECK(gap <= previous);
        previous = gap;
    }
    CHECK(previous <= 1e-3);
}

TEST_CASE("regularization") {
    const Mesh m(16, BoundaryCondition::neumann);
    const OperatorPtr A = std::make_shared<LinearEllipticOperator>(assemble_linear(m, constant(1.0), constant(1.0)));
    CHECK(add_regularization(A, 0.0) == A);
    CHECK_THROWS_AS(add_regularization(A, 0.1, 0.2), MissingRegularizerError);

    const OperatorPtr reg = add_regularization(A, 0.25);
    REQUIRE(reg->is_linear());
    const GridFunction one(m, 1.0);
    CHECK(norm(reg->apply(one) - GridFunction(m, 1.25), Norm::sup) <= 1e-14);

    const auto R = LinearEllipticOperator::identity(m, 2.0);
    const OperatorPtr both = add_regularization(A, 0.25, 0.5, R);
    CHECK(norm(both->apply(one) - GridFunction(m, 2.25), Norm::sup) <= 1e-14);

    const Mesh d(16, BoundaryCondition::dirichlet);
    const OperatorPtr plap = std::make_shared<PLaplacianOperator>(d, 3.0, 1e-3);
    const OperatorPtr preg = add_regularization(plap, 0.5);
    std::mt19937_64 rng(4);
    const GridFunction u = random_function(d, rng, -1.0, 1.0);
    CHECK(norm(preg->apply(u) - plap->apply(u) - 0.5 * u, Norm::sup) <= 1e-14 * norm(plap->apply(u), Norm::sup));
}

TEST_CASE("estimated constants") {
    const Mesh n32(32, BoundaryCondition::neumann);
    const auto A = assemble_linear(n32, constant(1.0), constant(1.0));
    const OperatorConstants k = estimate_constants(A, Norm::l2, 50, 1);
    CHECK(k.c == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(k.gamma == 0.0);
    CHECK(k.method == "eig");

    const auto I3 = LinearEllipticOperator::identity(n32, 3.0);
    const OperatorConstants ki = estimate_constants(I3, Norm::l2, 50, 1);
    CHECK(ki.c == doctest::Approx(3.0));
    CHECK(ki.L == doctest::Approx(3.0));

    // sin nonlinearity on a zero linear part
    const auto zero = LinearEllipticOperator::from_stencil(n32, std::vector<double>(32, 0.0),
                                                           std::vector<double>(n32.dofs(), 0.0));
    const NonMonotoneOperator sine(zero, 0.3);
    const OperatorConstants ks = estimate_constants(sine, Norm::l2, 200, 9);
    CHECK(ks.method == "sampled");
    CHECK(ks.gamma <= 0.3 + 1e-9);
    CHECK(ks.L_nonlinear <= 0.3 + 1e-9);
    CHECK(ks.L_nonlinear > 0.0);

    CHECK_THROWS_AS(estimate_constants(A, Norm::sup, 10, 1), ParameterError);
}

TEST_CASE("estimated constants are deterministic under a seed") {
    const Mesh m(32, BoundaryCondition::neumann);
    const NonMonotoneOperator op(assemble_linear(m, constant(1.0), constant(1.0)), 0.1);
    const OperatorConstants a = estimate_constants(op, Norm::h1, 50, 42);
    const OperatorConstants b = estimate_constants(op, Norm::h1, 50, 42);
    CHECK(a.csv_row() == b.csv_row());
}
