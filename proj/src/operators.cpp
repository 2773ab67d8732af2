#include "qvar/operators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qvar/error.hpp"

namespace qvar {

std::string OperatorConstants::csv_row() const {
    std::ostringstream os;
    os << format_real(c) << ',' << format_real(lipschitz_total()) << ',' << format_real(gamma) << ','
       << to_string(norm_tag) << ',' << method;
    return os.str();
}

GridFunction Operator::apply_nonlinear(const GridFunction& u) const {
    const LinearEllipticOperator* lin = linear_part();
    if (lin == nullptr) return apply(u);
    return apply(u) - lin->apply(u);
}

void Operator::require_mesh(const GridFunction& u) const {
    if (!(u.mesh() == mesh())) throw IncompatibleGridError("grid function is not on the operator's mesh");
}

// ---------------------------------------------------------------------------
// LinearEllipticOperator

LinearEllipticOperator::LinearEllipticOperator(const Mesh& mesh, std::vector<double> edge_a,
                                               std::vector<double> reaction)
    : mesh_(mesh), edge_a_(std::move(edge_a)), reaction_(std::move(reaction)) {
    const std::size_t n = mesh_.dofs();
    if (edge_a_.size() != static_cast<std::size_t>(mesh_.cells()) || reaction_.size() != n) {
        throw IncompatibleGridError("coefficient samples do not match the mesh");
    }
    const double h = mesh_.h();
    const double inv_h2 = 1.0 / (h * h);
    lower_.assign(n, 0.0);
    diag_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int k = mesh_.node_index(i);
        const bool has_left = k > 0;
        const bool has_right = k < mesh_.cells();
        // Neumann end rows carry the half trapezoid weight.
        const double row_scale = inv_h2 / mesh_.weight(i);
        const double a_left = has_left ? edge_a_[k - 1] : 0.0;
        const double a_right = has_right ? edge_a_[k] : 0.0;
        diag_[i] = (a_left + a_right) * row_scale + reaction_[i];
        if (i > 0) lower_[i] = -a_left * row_scale;
        if (i + 1 < n) upper_[i] = -a_right * row_scale;
    }
}

LinearEllipticOperator LinearEllipticOperator::from_coefficients(const Mesh& mesh,
                                                                 std::vector<double> edge_a,
                                                                 std::vector<double> reaction) {
    for (double a : edge_a) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw EllipticityError("diffusion coefficient must be positive, got " + format_real(a));
        }
    }
    double reaction_max = 0.0;
    for (double a0 : reaction) {
        if (!(a0 >= 0.0) || !std::isfinite(a0)) {
            throw EllipticityError("reaction coefficient must be nonnegative, got " + format_real(a0));
        }
        reaction_max = std::max(reaction_max, a0);
    }
    if (mesh.bc() == BoundaryCondition::neumann && reaction_max == 0.0) {
        throw EllipticityError("Neumann operator with zero reaction is singular");
    }
    return LinearEllipticOperator(mesh, std::move(edge_a), std::move(reaction));
}

LinearEllipticOperator LinearEllipticOperator::from_stencil(const Mesh& mesh, std::vector<double> edge_a,
                                                            std::vector<double> reaction) {
    return LinearEllipticOperator(mesh, std::move(edge_a), std::move(reaction));
}

LinearEllipticOperator LinearEllipticOperator::identity(const Mesh& mesh, double scale) {
    return LinearEllipticOperator(mesh, std::vector<double>(mesh.cells(), 0.0),
                                  std::vector<double>(mesh.dofs(), scale));
}

GridFunction LinearEllipticOperator::apply(const GridFunction& u) const {
    require_mesh(u);
    GridFunction out(mesh_);
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag_[i] * u[i];
        if (i > 0) s += lower_[i] * u[i - 1];
        if (i + 1 < n) s += upper_[i] * u[i + 1];
        out[i] = s;
    }
    return out;
}

GridFunction LinearEllipticOperator::apply_nonlinear(const GridFunction& u) const {
    require_mesh(u);
    return GridFunction(mesh_);
}

std::string LinearEllipticOperator::describe() const {
    return "linear(" + std::string(to_string(mesh_.bc())) + ", n=" + std::to_string(mesh_.cells()) + ")";
}

LinearEllipticOperator LinearEllipticOperator::plus(const LinearEllipticOperator& other, double s) const {
    if (!(other.mesh_ == mesh_)) throw IncompatibleGridError("operators live on different meshes");
    LinearEllipticOperator out(*this);
    for (std::size_t e = 0; e < edge_a_.size(); ++e) out.edge_a_[e] += s * other.edge_a_[e];
    for (std::size_t i = 0; i < diag_.size(); ++i) {
        out.reaction_[i] += s * other.reaction_[i];
        out.lower_[i] += s * other.lower_[i];
        out.diag_[i] += s * other.diag_[i];
        out.upper_[i] += s * other.upper_[i];
    }
    return out;
}

LinearEllipticOperator LinearEllipticOperator::with_reaction_shift(double delta) const {
    std::vector<double> shifted(reaction_);
    for (double& a0 : shifted) a0 += delta;
    return from_coefficients(mesh_, edge_a_, std::move(shifted));
}

LinearEllipticOperator assemble_linear(const Mesh& mesh, const CoefficientFunction& a,
                                       const CoefficientFunction& a0) {
    std::vector<double> edge(mesh.cells());
    for (int e = 0; e < mesh.cells(); ++e) edge[e] = a((e + 0.5) * mesh.h());
    std::vector<double> reaction(mesh.dofs());
    for (std::size_t i = 0; i < reaction.size(); ++i) reaction[i] = a0(mesh.x(i));
    return LinearEllipticOperator::from_coefficients(mesh, std::move(edge), std::move(reaction));
}

// ---------------------------------------------------------------------------
// PLaplacianOperator

namespace {

// Newton linearizations at flat points of the unregularized p-Laplacian use
// this floor in place of eps.
constexpr double kJacobianEpsFloor = 1e-8;

}  // namespace

PLaplacianOperator::PLaplacianOperator(const Mesh& mesh, double p, double eps)
    : mesh_(mesh), p_(p), eps_(eps) {
    if (mesh.bc() != BoundaryCondition::dirichlet) {
        throw ParameterError("p-Laplacian is only provided on Dirichlet meshes");
    }
    if (!(p >= 2.0) || !std::isfinite(p)) throw ParameterError("p-Laplacian needs p >= 2");
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw ParameterError("p-Laplacian needs eps >= 0");
}

std::vector<double> PLaplacianOperator::edge_gradients(const GridFunction& u) const {
    const int n = mesh_.cells();
    std::vector<double> g(n);
    const double h = mesh_.h();
    for (int e = 0; e < n; ++e) {
        const double left = e == 0 ? 0.0 : u[e - 1];
        const double right = e == n - 1 ? 0.0 : u[e];
        g[e] = (right - left) / h;
    }
    return g;
}

GridFunction PLaplacianOperator::apply(const GridFunction& u) const {
    require_mesh(u);
    const auto g = edge_gradients(u);
    std::vector<double> flux(g.size());
    const double expo = 0.5 * (p_ - 2.0);
    for (std::size_t e = 0; e < g.size(); ++e) flux[e] = std::pow(g[e] * g[e] + eps_, expo) * g[e];
    GridFunction out(mesh_);
    const double h = mesh_.h();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (flux[i] - flux[i + 1]) / h;
    return out;
}

LinearEllipticOperator PLaplacianOperator::jacobian(const GridFunction& u) const {
    require_mesh(u);
    const auto g = edge_gradients(u);
    std::vector<double> k(g.size());
    const double eps = p_ > 2.0 ? std::max(eps_, kJacobianEpsFloor) : eps_;
    for (std::size_t e = 0; e < g.size(); ++e) {
        const double s = g[e] * g[e] + eps;
        // d/dg [ (g^2+eps)^{(p-2)/2} g ]
        k[e] = p_ == 2.0 ? 1.0
                         : std::pow(s, 0.5 * (p_ - 2.0)) + (p_ - 2.0) * g[e] * g[e] * std::pow(s, 0.5 * (p_ - 4.0));
    }
    return LinearEllipticOperator::from_stencil(mesh_, std::move(k), std::vector<double>(mesh_.dofs(), 0.0));
}

std::string PLaplacianOperator::describe() const {
    std::ostringstream os;
    os << "plaplacian(p=" << p_ << ", eps=" << eps_ << ", n=" << mesh_.cells() << ")";
    return os.str();
}

// ---------------------------------------------------------------------------
// NonMonotoneOperator

NonMonotoneOperator::NonMonotoneOperator(LinearEllipticOperator base, double lambda)
    : base_(std::move(base)), lambda_(lambda) {
    if (!std::isfinite(lambda)) throw ParameterError("nonlinearity amplitude must be finite");
}

GridFunction NonMonotoneOperator::apply(const GridFunction& u) const {
    GridFunction out = base_.apply(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += lambda_ * std::sin(u[i]);
    return out;
}

GridFunction NonMonotoneOperator::apply_nonlinear(const GridFunction& u) const {
    require_mesh(u);
    GridFunction out(u.mesh());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda_ * std::sin(u[i]);
    return out;
}

LinearEllipticOperator NonMonotoneOperator::jacobian(const GridFunction& u) const {
    require_mesh(u);
    std::vector<double> cosines(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) cosines[i] = std::cos(u[i]);
    const auto diag_part =
        LinearEllipticOperator::from_stencil(mesh(), std::vector<double>(mesh().cells(), 0.0), std::move(cosines));
    return base_.plus(diag_part, lambda_);
}

std::string NonMonotoneOperator::describe() const {
    std::ostringstream os;
    os << "nonmonotone(" << base_.describe() << " + " << lambda_ << "*sin)";
    return os.str();
}

// ---------------------------------------------------------------------------
// RegularizedOperator

RegularizedOperator::RegularizedOperator(OperatorPtr inner, double eps, double delta,
                                         std::optional<LinearEllipticOperator> regularizer)
    : inner_(std::move(inner)), eps_(eps), delta_(delta), regularizer_(std::move(regularizer)) {
    if (!inner_) throw ParameterError("regularized operator needs an inner operator");
    if (const auto* lin = inner_->linear_part()) linear_ = lin->plus(shift_term(), 1.0);
}

LinearEllipticOperator RegularizedOperator::shift_term() const {
    auto term = LinearEllipticOperator::identity(mesh(), eps_);
    if (delta_ > 0.0) term = term.plus(*regularizer_, delta_);
    return term;
}

GridFunction RegularizedOperator::apply(const GridFunction& u) const {
    GridFunction out = inner_->apply(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += eps_ * u[i];
    if (delta_ > 0.0) out += delta_ * regularizer_->apply(u);
    return out;
}

LinearEllipticOperator RegularizedOperator::jacobian(const GridFunction& u) const {
    return inner_->jacobian(u).plus(shift_term(), 1.0);
}

const LinearEllipticOperator* RegularizedOperator::linear_part() const noexcept {
    return linear_ ? &*linear_ : nullptr;
}

GridFunction RegularizedOperator::apply_nonlinear(const GridFunction& u) const {
    if (linear_) return inner_->apply_nonlinear(u);
    return apply(u);
}

std::string RegularizedOperator::describe() const {
    std::ostringstream os;
    os << inner_->describe() << " + " << eps_ << "*I";
    if (delta_ > 0.0) os << " + " << delta_ << "*R";
    return os.str();
}

OperatorPtr add_regularization(OperatorPtr op, double eps, double delta,
                               const std::optional<LinearEllipticOperator>& regularizer) {
    if (!(eps >= 0.0) || !(delta >= 0.0)) throw ParameterError("regularization weights must be nonnegative");
    if (delta > 0.0 && !regularizer) throw MissingRegularizerError("delta > 0 needs a regularizer R");
    if (eps == 0.0 && delta == 0.0) return op;
    if (const auto* lin = dynamic_cast<const LinearEllipticOperator*>(op.get())) {
        auto out = lin->plus(LinearEllipticOperator::identity(lin->mesh(), eps), 1.0);
        if (delta > 0.0) out = out.plus(*regularizer, delta);
        return std::make_shared<LinearEllipticOperator>(std::move(out));
    }
    return std::make_shared<RegularizedOperator>(std::move(op), eps, delta, regularizer);
}

// ---------------------------------------------------------------------------
// Constants

GridFunction random_smooth_function(const Mesh& mesh, std::mt19937_64& rng, double amplitude, int modes) {
    std::uniform_real_distribution<double> coef(-amplitude, amplitude);
    std::vector<double> a(modes);
    for (double& c : a) c = coef(rng);
    const bool dirichlet = mesh.bc() == BoundaryCondition::dirichlet;
    GridFunction u(mesh);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = mesh.x(i);
        double s = 0.0;
        for (int k = 0; k < modes; ++k) {
            s += dirichlet ? a[k] * std::sin((k + 1) * std::numbers::pi * x)
                           : a[k] * std::cos(k * std::numbers::pi * x);
        }
        u[i] = s;
    }
    return u;
}

namespace {

struct Extremes {
    double lo;
    double hi;
};

Extremes rayleigh_extremes(const LinearEllipticOperator& op, Norm norm_tag) {
    const Mesh& m = op.mesh();
    const auto n = static_cast<Eigen::Index>(m.dofs());
    const double h = m.h();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hw = h * m.weight(static_cast<std::size_t>(i));
        K(i, i) = hw * op.diag()[i];
        if (i > 0) K(i, i - 1) = hw * op.lower()[i];
        if (i + 1 < n) K(i, i + 1) = hw * op.upper()[i];
        G(i, i) = hw;
        if (norm_tag == Norm::h1) {
            const bool end = m.bc() == BoundaryCondition::neumann && (i == 0 || i + 1 == n);
            G(i, i) += end ? 1.0 / h : 2.0 / h;
            if (i > 0) G(i, i - 1) = -1.0 / h;
            if (i + 1 < n) G(i, i + 1) = -1.0 / h;
        }
    }
    const Eigen::MatrixXd Ks = 0.5 * (K + K.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Ks, G, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw SolverError("generalized eigensolve failed");
    const auto& ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.cwiseAbs().maxCoeff()};
}

// Sampled extremes of the monotonicity and Lipschitz quotients of map.
template <typename Map>
Extremes sample_quotients(const Mesh& mesh, Map&& map, Norm norm_tag, int trials, std::uint64_t seed,
                          const SamplingOptions& sampling, double& lipschitz_max) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> scale(0.0, 1.0);
    double mono_min = std::numeric_limits<double>::infinity();
    double mono_max = -std::numeric_limits<double>::infinity();
    lipschitz_max = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double su = sampling.amplitude * scale(rng);
        const double sv = sampling.amplitude * scale(rng);
        GridFunction u = random_smooth_function(mesh, rng, su, sampling.modes);
        GridFunction v = random_smooth_function(mesh, rng, sv, sampling.modes);
        const GridFunction d = u - v;
        const double dn = norm(d, norm_tag);
        if (!(dn > 1e-12)) continue;
        const GridFunction r = map(u) - map(v);
        const double mono = inner(r, d) / (dn * dn);
        mono_min = std::min(mono_min, mono);
        mono_max = std::max(mono_max, mono);
        lipschitz_max = std::max(lipschitz_max, dual_norm(r, norm_tag) / dn);
    }
    if (!std::isfinite(mono_min)) return {0.0, 0.0};
    return {mono_min, mono_max};
}

}  // namespace

OperatorConstants estimate_constants(const Operator& op, Norm norm_tag, int trials, std::uint64_t seed,
                                     const SamplingOptions& sampling) {
    if (norm_tag == Norm::sup) throw ParameterError("constants are defined for l2 or h1 only");
    if (trials < 1) throw ParameterError("estimate_constants needs trials >= 1");
    OperatorConstants out;
    out.norm_tag = norm_tag;
    if (const LinearEllipticOperator* lin = op.linear_part()) {
        const auto ex = rayleigh_extremes(*lin, norm_tag);
        out.c = ex.lo;
        out.L = ex.hi;
        if (!op.is_linear()) {
            double lip = 0.0;
            const auto mono = sample_quotients(
                op.mesh(), [&](const GridFunction& u) { return op.apply_nonlinear(u); }, norm_tag, trials, seed,
                sampling, lip);
            out.L_nonlinear = lip;
            out.gamma = std::max(0.0, -mono.lo);
            out.method = "sampled";
        }
        return out;
    }
    double lip = 0.0;
    const auto mono = sample_quotients(
        op.mesh(), [&](const GridFunction& u) { return op.apply(u); }, norm_tag, trials, seed, sampling, lip);
    out.c = mono.lo;
    out.L = lip;
    out.method = "sampled";
    return out;
}

}  // namespace qvar
