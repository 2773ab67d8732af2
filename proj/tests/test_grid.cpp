#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "qvar/error.hpp"
#include "qvar/grid.hpp"

using namespace qvar;
using qvar::testing::hat;
using qvar::testing::random_function;

TEST_CASE("mesh sizes follow the boundary condition") {
    const Mesh d = make_mesh(4, BoundaryCondition::dirichlet);
    CHECK(d.dofs() == 3);
    CHECK(d.h() == doctest::Approx(0.25));
    CHECK(d.x(0) == doctest::Approx(0.25));
    const Mesh n = make_mesh(4, BoundaryCondition::neumann);
    CHECK(n.dofs() == 5);
    CHECK(n.h() == doctest::Approx(0.25));
    CHECK(n.weight(0) == 0.5);
    CHECK(n.weight(2) == 1.0);
    CHECK(n.weight(4) == 0.5);
    CHECK_THROWS_AS(make_mesh(1, BoundaryCondition::dirichlet), InvalidMeshError);
}

TEST_CASE("grid function construction validates its input") {
    const Mesh m(4, BoundaryCondition::dirichlet);
    CHECK_THROWS_AS(GridFunction(m, std::vector<double>{1.0, 2.0}), IncompatibleGridError);
    CHECK_THROWS_AS(GridFunction(m, std::vector<double>{1.0, NAN, 2.0}), ParameterError);
    const GridFunction a(m, 1.0);
    const GridFunction b(Mesh(8, BoundaryCondition::dirichlet), 1.0);
    CHECK_THROWS_AS(a + b, IncompatibleGridError);
    CHECK_THROWS_AS(inner(a, b), IncompatibleGridError);
}

TEST_CASE("trapezoid integral") {
    for (int n : {2, 5, 64}) {
        CHECK(trapezoid_integral(GridFunction(Mesh(n, BoundaryCondition::neumann), 1.0)) == doctest::Approx(1.0));
    }
    const Mesh n4(4, BoundaryCondition::neumann);
    CHECK(trapezoid_integral(GridFunction::from_function(n4, [](double x) { return x; })) == doctest::Approx(0.5));
    CHECK(trapezoid_integral(GridFunction(Mesh(4, BoundaryCondition::dirichlet), 1.0)) == doctest::Approx(0.75));
}

TEST_CASE("norms of simple functions") {
    const Mesh n8(8, BoundaryCondition::neumann);
    const GridFunction c(n8, -1.5);
    CHECK(norm(c, Norm::l2) == doctest::Approx(1.5));
    CHECK(norm(c, Norm::h1) == doctest::Approx(1.5));
    CHECK(norm(c, Norm::sup) == doctest::Approx(1.5));

    const GridFunction zero(n8);
    for (Norm k : {Norm::l2, Norm::h1, Norm::sup}) CHECK(norm(zero, k) == 0.0);

    // hat (0,1,0) on h = 1/4: l2^2 = h, h1^2 = h + 2 / h
    const GridFunction u = hat(Mesh(4, BoundaryCondition::dirichlet));
    CHECK(norm(u, Norm::sup) == 1.0);
    CHECK(norm(u, Norm::l2) == doctest::Approx(0.5));
    CHECK(norm(u, Norm::h1) == doctest::Approx(std::sqrt(8.25)));
}

TEST_CASE("dual norms satisfy the pairing inequality") {
    std::mt19937_64 rng(3);
    for (BoundaryCondition bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
        const Mesh m(16, bc);
        for (int t = 0; t < 20; ++t) {
            const GridFunction r = random_function(m, rng, -1.0, 1.0);
            const GridFunction v = random_function(m, rng, -1.0, 1.0);
            for (Norm k : {Norm::l2, Norm::h1}) {
                CHECK(std::abs(inner(r, v)) <= dual_norm(r, k) * norm(v, k) * (1.0 + 1e-12));
            }
            CHECK(dual_norm(r, Norm::l2) == doctest::Approx(norm(r, Norm::l2)));
            CHECK(dual_norm(r, Norm::h1) <= dual_norm(r, Norm::l2) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("lattice operations") {
    const Mesh m(10, BoundaryCondition::neumann);
    CHECK(norm(pos_part(GridFunction(m, -1.0)), Norm::sup) == 0.0);

    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        const GridFunction u = random_function(m, rng, -1.0, 1.0);
        const GridFunction v = random_function(m, rng, -1.0, 1.0);
        CHECK(norm(lattice_min(u, u) - u, Norm::sup) == 0.0);
        CHECK(norm(lattice_max(u, u) - u, Norm::sup) == 0.0);
        // min + max = u + v, u = u+ - (-u)+
        CHECK(norm(lattice_min(u, v) + lattice_max(u, v) - u - v, Norm::sup) <= 1e-15);
        CHECK(norm(pos_part(u) - pos_part(-1.0 * u) - u, Norm::sup) <= 1e-15);
        CHECK(leq(lattice_min(u, v), lattice_max(u, v), 0.0));
        CHECK(leq(lattice_min(u, v), u, 0.0));
        CHECK(leq(u, lattice_max(u, v), 0.0));
    }
    const GridFunction a(m, 1.0);
    CHECK(leq(a, GridFunction(m, 1.0 - 1e-10), 1e-9));
    CHECK_FALSE(leq(a, GridFunction(m, 0.9), 1e-9));
}

TEST_CASE("csv round trip") {
    std::mt19937_64 rng(5);
    for (BoundaryCondition bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
        const GridFunction u = random_function(Mesh(12, bc), rng, -3.0, 3.0);
        std::istringstream in(to_csv(u));
        const GridFunction back = read_csv(in, bc);
        CHECK(back.mesh() == u.mesh());
        CHECK(norm(back - u, Norm::sup) <= 1e-15);
    }
    const std::string text = to_csv(GridFunction(Mesh(2, BoundaryCondition::dirichlet), 0.5));
    CHECK(text == "x,value\n0,0\n0.5,0.5\n1,0\n");
    std::istringstream bad("x,value\n0,1\n");
    CHECK_THROWS(read_csv(bad, BoundaryCondition::neumann));
}
