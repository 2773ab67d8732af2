#pragma once

/**
 * @file operators.hpp
 * @brief Discrete elliptic operators on a 1-D mesh.
 *
 * Every operator acts in strong (nodal) form: apply(u)_i is the value at
 * dof i, and the duality pairing is the trapezoid-weighted inner product
 * from grid.hpp. With that pairing the linear stencils are symmetric, the
 * added regularization term eps*u is the mass-scaled identity, and the
 * sine nonlinearity acts as a dual-space element.
 */

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qvar/grid.hpp"

namespace qvar {

class LinearEllipticOperator;

/// Structural constants of an operator A + N in a matched norm pair (V, V').
///
/// c and L describe the linear (or whole, when there is no linear part)
/// operator, L_nonlinear and gamma the nonlinear remainder. method is "eig"
/// when every entry is an eigenvalue computation and "sampled" when any
/// entry is an empirical bound over random pairs.
struct OperatorConstants {
    double c = 0.0;
    double L = 0.0;
    double L_nonlinear = 0.0;
    double gamma = 0.0;
    Norm norm_tag = Norm::h1;
    std::string method = "eig";

    double lipschitz_total() const noexcept { return L + L_nonlinear; }
    /// `c,L,gamma,norm_tag,method` with L the Lipschitz constant of the whole operator.
    std::string csv_row() const;
};

class Operator {
public:
    virtual ~Operator() = default;

    virtual const Mesh& mesh() const noexcept = 0;
    virtual GridFunction apply(const GridFunction& u) const = 0;
    /// Tridiagonal linearization at u.
    virtual LinearEllipticOperator jacobian(const GridFunction& u) const = 0;

    virtual bool is_linear() const noexcept { return false; }
    /// Linear part of an A + N decomposition, if the operator has one.
    virtual const LinearEllipticOperator* linear_part() const noexcept { return nullptr; }
    /// apply(u) minus the linear part applied to u. Only meaningful when
    /// linear_part() is not null.
    virtual GridFunction apply_nonlinear(const GridFunction& u) const;

    virtual std::string describe() const = 0;

protected:
    void require_mesh(const GridFunction& u) const;
};

using OperatorPtr = std::shared_ptr<const Operator>;

/// Three-point operator u -> -(a u')' + a0 u with symmetric flux stencil.
class LinearEllipticOperator final : public Operator {
public:
    /// Validated assembly from edge-midpoint diffusion samples (n entries)
    /// and nodal reaction samples (one per dof). Throws EllipticityError if
    /// some a <= 0, some a0 < 0, or the operator is singular (Neumann, a0 == 0).
    static LinearEllipticOperator from_coefficients(const Mesh& mesh, std::vector<double> edge_a,
                                                    std::vector<double> reaction);
    /// Unvalidated variant used for linearizations (edge_a >= 0, reaction of any sign).
    static LinearEllipticOperator from_stencil(const Mesh& mesh, std::vector<double> edge_a,
                                               std::vector<double> reaction);
    /// s * I in strong form.
    static LinearEllipticOperator identity(const Mesh& mesh, double scale = 1.0);

    const Mesh& mesh() const noexcept override { return mesh_; }
    GridFunction apply(const GridFunction& u) const override;
    LinearEllipticOperator jacobian(const GridFunction&) const override { return *this; }
    bool is_linear() const noexcept override { return true; }
    const LinearEllipticOperator* linear_part() const noexcept override { return this; }
    GridFunction apply_nonlinear(const GridFunction& u) const override;
    std::string describe() const override;

    const std::vector<double>& lower() const noexcept { return lower_; }
    const std::vector<double>& diag() const noexcept { return diag_; }
    const std::vector<double>& upper() const noexcept { return upper_; }
    const std::vector<double>& edge_coefficients() const noexcept { return edge_a_; }
    const std::vector<double>& reaction() const noexcept { return reaction_; }

    /// this + s * other, band by band.
    LinearEllipticOperator plus(const LinearEllipticOperator& other, double s) const;
    /// Same diffusion, reaction a0 + delta (re-assembled).
    LinearEllipticOperator with_reaction_shift(double delta) const;

private:
    LinearEllipticOperator(const Mesh& mesh, std::vector<double> edge_a, std::vector<double> reaction);

    Mesh mesh_;
    std::vector<double> edge_a_;
    std::vector<double> reaction_;
    std::vector<double> lower_, diag_, upper_;
};

using CoefficientFunction = std::function<double(double)>;

/// Samples a at edge midpoints and a0 at the dofs, then assembles.
LinearEllipticOperator assemble_linear(const Mesh& mesh, const CoefficientFunction& a,
                                       const CoefficientFunction& a0);

/// Regularized p-Laplacian -(( |u'|^2 + eps )^{(p-2)/2} u')' on a Dirichlet mesh,
/// with edge-midpoint difference quotients.
class PLaplacianOperator final : public Operator {
public:
    PLaplacianOperator(const Mesh& mesh, double p, double eps);

    const Mesh& mesh() const noexcept override { return mesh_; }
    GridFunction apply(const GridFunction& u) const override;
    LinearEllipticOperator jacobian(const GridFunction& u) const override;
    std::string describe() const override;

    double p() const noexcept { return p_; }
    double eps() const noexcept { return eps_; }

private:
    std::vector<double> edge_gradients(const GridFunction& u) const;

    Mesh mesh_;
    double p_;
    double eps_;
};

/// Composite A + N with N(y)_i = lambda * sin(y_i).
class NonMonotoneOperator final : public Operator {
public:
    NonMonotoneOperator(LinearEllipticOperator base, double lambda);

    const Mesh& mesh() const noexcept override { return base_.mesh(); }
    GridFunction apply(const GridFunction& u) const override;
    LinearEllipticOperator jacobian(const GridFunction& u) const override;
    const LinearEllipticOperator* linear_part() const noexcept override { return &base_; }
    GridFunction apply_nonlinear(const GridFunction& u) const override;
    std::string describe() const override;

    double lambda() const noexcept { return lambda_; }
    const LinearEllipticOperator& base() const noexcept { return base_; }

private:
    LinearEllipticOperator base_;
    double lambda_;
};

/// u -> inner(u) + eps*u + delta*R(u) for a nonlinear inner operator.
class RegularizedOperator final : public Operator {
public:
    RegularizedOperator(OperatorPtr inner, double eps, double delta,
                        std::optional<LinearEllipticOperator> regularizer);

    const Mesh& mesh() const noexcept override { return inner_->mesh(); }
    GridFunction apply(const GridFunction& u) const override;
    LinearEllipticOperator jacobian(const GridFunction& u) const override;
    const LinearEllipticOperator* linear_part() const noexcept override;
    GridFunction apply_nonlinear(const GridFunction& u) const override;
    std::string describe() const override;

private:
    LinearEllipticOperator shift_term() const;

    OperatorPtr inner_;
    double eps_;
    double delta_;
    std::optional<LinearEllipticOperator> regularizer_;
    std::optional<LinearEllipticOperator> linear_;
};

/// Returns op + eps*M + delta*R. Linear inputs stay linear (bands are summed).
/// Throws MissingRegularizerError when delta > 0 and R is absent.
OperatorPtr add_regularization(OperatorPtr op, double eps, double delta = 0.0,
                               const std::optional<LinearEllipticOperator>& regularizer = std::nullopt);

struct SamplingOptions {
    /// Random pairs are smooth mode sums with coefficients up to this size.
    double amplitude = 2.0;
    int modes = 5;
};

/**
 * Empirical structural constants.
 *
 * Linear parts: extreme generalized Rayleigh quotients <Au,u>/|u|^2 from a
 * dense symmetric-definite eigensolve. Nonlinear parts: extrema of
 * <Nu-Nv,u-v>/|u-v|^2 and dual norm of Nu-Nv over |u-v| over `trials` seeded random
 * pairs; these are empirical bounds, reported with method "sampled".
 */
OperatorConstants estimate_constants(const Operator& op, Norm norm_tag, int trials,
                                     std::uint64_t seed, const SamplingOptions& sampling = {});

/// Random smooth grid function: sine modes (Dirichlet) or cosine modes
/// (Neumann) with coefficients uniform in [-amplitude, amplitude].
GridFunction random_smooth_function(const Mesh& mesh, std::mt19937_64& rng, double amplitude,
                                    int modes);

}  // namespace qvar
