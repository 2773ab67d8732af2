#pragma once

#include <random>

#include "qvar/grid.hpp"

namespace qvar::testing {

inline GridFunction random_function(const Mesh& mesh, std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    GridFunction u(mesh);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = dist(rng);
    return u;
}

inline GridFunction hat(const Mesh& mesh) {
    GridFunction u(mesh);
    u[u.size() / 2] = 1.0;
    return u;
}

}  // namespace qvar::testing
