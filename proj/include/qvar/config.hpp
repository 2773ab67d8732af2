#pragma once

/**
 * @file config.hpp
 * @brief INI-style experiment configuration.
 *
 * Line-based `key = value`, `#` comments, sections [problem], [obstacle],
 * [solver] and [study]. Keys before the first section are global (seed,
 * out, jobs). A dotted key such as `obstacle.kind` addresses a section
 * directly from anywhere.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qvar/error.hpp"
#include "qvar/grid.hpp"
#include "qvar/qvi_solver.hpp"

namespace qvar {

class ConfigError : public Error {
public:
    ConfigError(int line, std::string key, const std::string& message);
    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

struct ProblemSpec {
    std::string name = "example1d";
    int n = 64;
    std::optional<BoundaryCondition> bc;
    std::optional<double> p;
    std::optional<double> eps_op;
    std::optional<double> lambda;
    std::optional<double> a0;
    std::optional<double> f;
    std::optional<double> F;
    // obstacle overrides
    std::optional<std::string> obstacle_kind;
    std::optional<double> c0;
    std::optional<double> alpha;
    std::optional<std::string> kernel;
    std::optional<double> psi;
    std::optional<std::string> psi_file;
};

struct SolverSpec {
    OuterParams outer{1e-8, 200};
    VIParams inner{1e-10, 10000, std::nullopt, std::nullopt};
    /// fixed_point, minimal or maximal
    std::string mode = "fixed_point";
    /// Regularization weight used by solve and trace.
    double eps = 0.0;
    Norm norm = Norm::h1;
    int trials = 200;
};

struct StudySpec {
    std::vector<double> eps_list;
    /// exact or eps
    std::optional<std::string> reference;
    double eps_ref = 1e-6;
    std::vector<double> delta_list;
    std::string family = "scaled_identity";
    std::vector<int> n_list;
    std::vector<double> f_deltas;
    std::vector<double> phi_deltas;
    std::optional<double> eps;
};

struct ExperimentConfig {
    ProblemSpec problem;
    SolverSpec solver;
    StudySpec study;
    std::uint64_t seed = 42;
    std::string out = ".";
    int jobs = 1;
};

/// Throws ConfigError naming the line and key on unknown keys, malformed
/// values and out-of-range values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

}  // namespace qvar
