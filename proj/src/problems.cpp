#include "qvar/problems.hpp"

#include "qvar/error.hpp"
#include "qvar/obstacle.hpp"
#include "qvar/operators.hpp"

namespace qvar {

namespace {

struct Defaults {
    BoundaryCondition bc;
    std::string obstacle_kind;
    double c0 = 0.0;
    double alpha = 0.0;
    std::string kernel = "one";
    double psi = 0.0;
    double a0 = 0.0;
    double lambda = 0.0;
    double p = 2.0;
    double eps_op = 0.0;
};

Defaults defaults_for(const std::string& name) {
    Defaults d;
    if (name == "example1d" || name == "nonmonotone_sine") {
        d.bc = BoundaryCondition::neumann;
        d.obstacle_kind = "constant_mean";
        d.c0 = 0.5;
        d.alpha = 0.25;
        d.a0 = 1.0;
        d.lambda = name == "nonmonotone_sine" ? 0.1 : 0.0;
    } else if (name == "plaplacian") {
        d.bc = BoundaryCondition::dirichlet;
        d.obstacle_kind = "kernel";
        d.kernel = "one";
        d.psi = 0.1;
        d.alpha = 0.25;
        d.p = 3.0;
        d.eps_op = 1e-3;
    } else if (name == "kernel_qvi") {
        d.bc = BoundaryCondition::dirichlet;
        d.obstacle_kind = "kernel";
        d.kernel = "gauss(0.2)";
        d.psi = 0.05;
        d.alpha = 0.5;
    } else if (name == "fixed_obstacle") {
        d.bc = BoundaryCondition::dirichlet;
        d.obstacle_kind = "fixed";
        d.psi = 0.05;
    } else {
        throw ParameterError("unknown built-in problem '" + name + "'");
    }
    return d;
}

}  // namespace

BuiltProblem build_problem(const ProblemSpec& spec) {
    const Defaults d = defaults_for(spec.name);
    const Mesh mesh(spec.n, spec.bc.value_or(d.bc));

    OperatorPtr op;
    if (spec.name == "plaplacian") {
        op = std::make_shared<PLaplacianOperator>(mesh, spec.p.value_or(d.p), spec.eps_op.value_or(d.eps_op));
    } else {
        const double a0 = spec.a0.value_or(d.a0);
        auto base = assemble_linear(mesh, [](double) { return 1.0; }, [a0](double) { return a0; });
        const double lambda = spec.lambda.value_or(d.lambda);
        if (spec.name == "nonmonotone_sine" || lambda != 0.0) {
            op = std::make_shared<NonMonotoneOperator>(std::move(base), lambda);
        } else {
            op = std::make_shared<LinearEllipticOperator>(std::move(base));
        }
    }

    const double f_value = spec.f.value_or(1.0);
    const GridFunction f(mesh, f_value);
    const GridFunction F(mesh, spec.F.value_or(std::max(1.0, f_value)));

    const std::string kind = spec.obstacle_kind.value_or(d.obstacle_kind);
    GridFunction psi(mesh, spec.psi.value_or(d.psi));
    if (spec.psi_file) {
        psi = read_csv_file(*spec.psi_file, mesh.bc());
        if (!(psi.mesh() == mesh)) throw ParameterError("psi_file does not match the problem mesh");
    }
    const double alpha = spec.alpha.value_or(d.alpha);
    std::optional<ObstacleMap> obstacle;
    if (kind == "constant_mean") {
        obstacle = ObstacleMap::constant_mean(mesh, spec.c0.value_or(d.c0), alpha);
    } else if (kind == "kernel") {
        obstacle = ObstacleMap::kernel(psi, alpha, named_kernel(spec.kernel.value_or(d.kernel)));
    } else if (kind == "fixed") {
        obstacle = ObstacleMap::fixed(psi);
    } else {
        throw ParameterError("unknown obstacle kind '" + kind + "'");
    }

    BuiltProblem built{QVIProblem{op, f, *obstacle, F}, std::nullopt};
    built.problem.validate();

    // Constant solutions: C = min(f / a0, c0 / (1 - alpha)) in the limit eps -> 0.
    if (spec.name == "example1d" && kind == "constant_mean" && mesh.bc() == BoundaryCondition::neumann &&
        op->is_linear() && alpha < 1.0 && f_value >= 0.0) {
        const double a0 = spec.a0.value_or(d.a0);
        const double c = std::min(f_value / a0, obstacle->c0() / (1.0 - alpha));
        built.exact_limit = GridFunction(mesh, c);
    }
    return built;
}

ProblemTemplate problem_template(const ProblemSpec& spec) {
    return [spec](int n) {
        ProblemSpec s = spec;
        s.n = n;
        return build_problem(s).problem;
    };
}

ObstacleInstance random_obstacle_instance(std::mt19937_64& rng, int max_dofs) {
    if (max_dofs < 1) throw ParameterError("random instances need at least one dof");
    std::uniform_int_distribution<int> dof_count(1, max_dofs);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int dofs = dof_count(rng);
    const bool neumann = dofs >= 3 && unit(rng) < 0.5;
    const Mesh mesh = neumann ? Mesh(dofs - 1, BoundaryCondition::neumann) : Mesh(dofs + 1, BoundaryCondition::dirichlet);

    std::vector<double> edge(mesh.cells());
    for (double& a : edge) a = 0.5 + 1.5 * unit(rng);
    std::vector<double> reaction(mesh.dofs());
    for (double& a0 : reaction) a0 = (neumann ? 0.1 : 0.0) + 2.0 * unit(rng);
    auto op = LinearEllipticOperator::from_coefficients(mesh, std::move(edge), std::move(reaction));

    GridFunction f(mesh), psi(mesh);
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] = -1.0 + 9.0 * unit(rng);
        psi[i] = -0.2 + 0.8 * unit(rng);
    }
    return {std::move(op), std::move(f), std::move(psi)};
}

}  // namespace qvar
