#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "qvar/error.hpp"
#include "qvar/obstacle.hpp"

using namespace qvar;
using qvar::testing::random_function;

TEST_CASE("constant-mean map") {
    const Mesh m(32, BoundaryCondition::neumann);
    const ObstacleMap phi = ObstacleMap::constant_mean(m, 0.5, 0.25);
    CHECK(norm(eval_obstacle(phi, GridFunction(m)) - GridFunction(m, 0.5), Norm::sup) <= 1e-15);
    CHECK(norm(eval_obstacle(phi, GridFunction(m, 2.0 / 3.0)) - GridFunction(m, 2.0 / 3.0), Norm::sup) <= 1e-15);
    CHECK(lipschitz_bound(phi, Norm::l2) == doctest::Approx(0.25));
    CHECK_THROWS_AS(ObstacleMap::constant_mean(m, 0.5, -0.5), ParameterError);
}

TEST_CASE("kernel map with k = 1 reduces to the constant-mean map on nonnegative inputs") {
    std::mt19937_64 rng(6);
    const Mesh m(24, BoundaryCondition::neumann);
    const ObstacleMap kernel = ObstacleMap::kernel(GridFunction(m, 0.5), 0.25, named_kernel("one"));
    const ObstacleMap mean = ObstacleMap::constant_mean(m, 0.5, 0.25);
    for (int t = 0; t < 20; ++t) {
        const GridFunction y = random_function(m, rng, 0.0, 2.0);
        CHECK(norm(eval_obstacle(kernel, y) - eval_obstacle(mean, y), Norm::sup) <= 1e-12);
    }
    CHECK(lipschitz_bound(kernel, Norm::l2) == doctest::Approx(0.25));
}

TEST_CASE("kernel map only sees the positive part") {
    const Mesh m(16, BoundaryCondition::dirichlet);
    const ObstacleMap phi = ObstacleMap::kernel(GridFunction(m, 0.1), 0.5, named_kernel("gauss(0.2)"));
    CHECK(norm(eval_obstacle(phi, GridFunction(m, -3.0)) - GridFunction(m, 0.1), Norm::sup) <= 1e-15);
}

TEST_CASE("fixed map ignores its argument") {
    const Mesh m(16, BoundaryCondition::dirichlet);
    const GridFunction psi = GridFunction::from_function(m, [](double x) { return x; });
    const ObstacleMap phi = ObstacleMap::fixed(psi);
    CHECK(norm(eval_obstacle(phi, GridFunction(m, 5.0)) - psi, Norm::sup) == 0.0);
    CHECK(lipschitz_bound(phi, Norm::l2) == 0.0);
    CHECK(lipschitz_bound(phi, Norm::h1) == 0.0);
    CHECK(phi.is_fixed());
}

TEST_CASE("obstacle maps are order preserving") {
    const Mesh m(16, BoundaryCondition::dirichlet);
    CHECK(check_order_preserving(ObstacleMap::constant_mean(m, 0.5, 0.25), 100, 1));
    CHECK(check_order_preserving(ObstacleMap::kernel(GridFunction(m, 0.1), 0.5, named_kernel("gauss(0.2)")), 100, 1));
    CHECK(check_order_preserving(ObstacleMap::fixed(GridFunction(m, 0.1)), 100, 1));

    std::vector<double> samples(m.dofs() * m.dofs(), 1.0);
    samples[3 * m.dofs() + 7] = -2.0;
    CHECK_FALSE(check_order_preserving(ObstacleMap::kernel_from_samples(GridFunction(m, 0.1), 0.5, samples), 100, 1));
}

TEST_CASE("kernel maps reject negative kernels and bad specs") {
    const Mesh m(8, BoundaryCondition::dirichlet);
    CHECK_THROWS_AS(ObstacleMap::kernel(GridFunction(m), 0.5, [](double, double) { return -1.0; }), ParameterError);
    CHECK_THROWS(named_kernel("gauss(-1)"));
    CHECK_THROWS(named_kernel("triangle"));
}

TEST_CASE("obstacle monotonicity over random pairs") {
    std::mt19937_64 rng(31);
    const Mesh m(20, BoundaryCondition::dirichlet);
    const ObstacleMap maps[] = {
        ObstacleMap::constant_mean(m, 0.2, 0.4),
        ObstacleMap::kernel(GridFunction(m, 0.05), 0.5, named_kernel("gauss(0.2)")),
    };
    for (const ObstacleMap& phi : maps) {
        for (int t = 0; t < 50; ++t) {
            const GridFunction y1 = random_function(m, rng, -1.0, 1.0);
            const GridFunction y2 = y1 + random_function(m, rng, 0.0, 1.0);
            CHECK(leq(eval_obstacle(phi, y1), eval_obstacle(phi, y2), 1e-14));
            // the Lipschitz bound holds in l2
            const double lhs = norm(eval_obstacle(phi, y2) - eval_obstacle(phi, y1), Norm::l2);
            CHECK(lhs <= lipschitz_bound(phi, Norm::l2) * norm(y2 - y1, Norm::l2) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("shifted raises the base level") {
    const Mesh m(8, BoundaryCondition::neumann);
    const ObstacleMap phi = ObstacleMap::constant_mean(m, 0.5, 0.25).shifted(0.1);
    CHECK(phi.c0() == doctest::Approx(0.6));
    CHECK(phi.base_level_min() == doctest::Approx(0.6));
}
