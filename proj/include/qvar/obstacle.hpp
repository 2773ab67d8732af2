#pragma once

/**
 * @file obstacle.hpp
 * @brief Solution-dependent obstacle maps y -> Phi(y), the quasi-variational
 *        coupling of the constraint set K(Phi(y)) = { v : v <= Phi(y) }.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvar/grid.hpp"

namespace qvar {

using KernelFunction = std::function<double(double, double)>;

/// Built-in kernels: `one` and `gauss(sigma)`.
KernelFunction named_kernel(std::string_view spec);

class ObstacleMap {
public:
    enum class Kind { constant_mean, kernel, fixed };

    /// Phi(y) = c0 + alpha * integral(y), a constant function.
    static ObstacleMap constant_mean(const Mesh& mesh, double c0, double alpha);
    /// Phi(y)_i = psi_i + alpha * sum_j w_j h k(x_i, x_j) max(y_j, 0).
    static ObstacleMap kernel(const GridFunction& psi_base, double alpha, const KernelFunction& k);
    /// Same, from a dofs x dofs sample matrix (row-major). Entries are not
    /// sign-checked; check_order_preserving detects negative ones.
    static ObstacleMap kernel_from_samples(const GridFunction& psi_base, double alpha,
                                           std::vector<double> samples);
    /// Phi(y) = psi for every y.
    static ObstacleMap fixed(const GridFunction& psi);

    Kind kind() const noexcept { return kind_; }
    const Mesh& mesh() const noexcept { return mesh_; }
    double c0() const noexcept { return c0_; }
    double alpha() const noexcept { return alpha_; }
    const std::optional<GridFunction>& psi_base() const noexcept { return psi_; }
    const std::vector<double>& kernel_samples() const noexcept { return kernel_; }
    bool is_fixed() const noexcept { return kind_ == Kind::fixed; }

    /// Copy with the base level (c0 or psi_base) raised by delta.
    ObstacleMap shifted(double delta) const;
    /// Smallest base level: c0 or min psi_base.
    double base_level_min() const;

private:
    ObstacleMap(Kind kind, const Mesh& mesh) : kind_(kind), mesh_(mesh) {}

    Kind kind_;
    Mesh mesh_;
    double c0_ = 0.0;
    double alpha_ = 0.0;
    std::optional<GridFunction> psi_;
    std::vector<double> kernel_;
};

std::string_view to_string(ObstacleMap::Kind kind);

GridFunction eval_obstacle(const ObstacleMap& map, const GridFunction& y);

/// Lipschitz bound of Phi from the given norm to itself.
double lipschitz_bound(const ObstacleMap& map, Norm norm_tag);

/// Samples `trials` ordered pairs y1 <= y2 (plus, for kernel maps, one unit
/// bump per dof) and reports whether Phi(y1) <= Phi(y2) + 1e-12 held.
bool check_order_preserving(const ObstacleMap& map, int trials, std::uint64_t seed);

}  // namespace qvar
