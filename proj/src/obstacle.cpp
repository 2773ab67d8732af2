#include "qvar/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qvar/error.hpp"
#include "qvar/operators.hpp"

namespace qvar {

KernelFunction named_kernel(std::string_view spec) {
    if (spec == "one") return [](double, double) { return 1.0; };
    if (spec.rfind("gauss(", 0) == 0 && spec.back() == ')') {
        const std::string inner(spec.substr(6, spec.size() - 7));
        double sigma = 0.0;
        try {
            std::size_t used = 0;
            sigma = std::stod(inner, &used);
            if (used != inner.size()) throw ParameterError("");
        } catch (const std::exception&) {
            throw ParameterError("malformed kernel width in '" + std::string(spec) + "'");
        }
        if (!(sigma > 0.0)) throw ParameterError("gauss kernel needs sigma > 0");
        return [sigma](double x, double xi) {
            const double d = (x - xi) / sigma;
            return std::exp(-0.5 * d * d);
        };
    }
    throw ParameterError("unknown kernel '" + std::string(spec) + "'");
}

std::string_view to_string(ObstacleMap::Kind kind) {
    switch (kind) {
        case ObstacleMap::Kind::constant_mean: return "constant_mean";
        case ObstacleMap::Kind::kernel: return "kernel";
        case ObstacleMap::Kind::fixed: return "fixed";
    }
    return "?";
}

namespace {

void require_coupling(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ParameterError("obstacle coupling alpha must be finite and >= 0");
    }
}

}  // namespace

ObstacleMap ObstacleMap::constant_mean(const Mesh& mesh, double c0, double alpha) {
    require_coupling(alpha);
    if (!std::isfinite(c0)) throw ParameterError("obstacle base level must be finite");
    ObstacleMap map(Kind::constant_mean, mesh);
    map.c0_ = c0;
    map.alpha_ = alpha;
    return map;
}

ObstacleMap ObstacleMap::kernel(const GridFunction& psi_base, double alpha, const KernelFunction& k) {
    const Mesh& m = psi_base.mesh();
    const std::size_t n = m.dofs();
    std::vector<double> samples(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) samples[i * n + j] = k(m.x(i), m.x(j));
    }
    for (double s : samples) {
        if (!(s >= 0.0)) throw ParameterError("kernel samples must be nonnegative");
    }
    return kernel_from_samples(psi_base, alpha, std::move(samples));
}

ObstacleMap ObstacleMap::kernel_from_samples(const GridFunction& psi_base, double alpha,
                                             std::vector<double> samples) {
    require_coupling(alpha);
    const std::size_t n = psi_base.size();
    if (samples.size() != n * n) throw IncompatibleGridError("kernel sample matrix does not match the mesh");
    ObstacleMap map(Kind::kernel, psi_base.mesh());
    map.alpha_ = alpha;
    map.psi_ = psi_base;
    map.kernel_ = std::move(samples);
    return map;
}

ObstacleMap ObstacleMap::fixed(const GridFunction& psi) {
    ObstacleMap map(Kind::fixed, psi.mesh());
    map.psi_ = psi;
    return map;
}

ObstacleMap ObstacleMap::shifted(double delta) const {
    ObstacleMap out(*this);
    if (kind_ == Kind::constant_mean) {
        out.c0_ += delta;
    } else {
        for (double& v : out.psi_->values()) v += delta;
    }
    return out;
}

double ObstacleMap::base_level_min() const {
    if (kind_ == Kind::constant_mean) return c0_;
    const auto vals = psi_->values();
    return *std::min_element(vals.begin(), vals.end());
}

GridFunction eval_obstacle(const ObstacleMap& map, const GridFunction& y) {
    if (!(y.mesh() == map.mesh())) throw IncompatibleGridError("obstacle map and argument live on different meshes");
    switch (map.kind()) {
        case ObstacleMap::Kind::constant_mean:
            return GridFunction(map.mesh(), map.c0() + map.alpha() * trapezoid_integral(y));
        case ObstacleMap::Kind::fixed:
            return *map.psi_base();
        case ObstacleMap::Kind::kernel: break;
    }
    const Mesh& m = map.mesh();
    const std::size_t n = m.dofs();
    std::vector<double> weighted(n);
    for (std::size_t j = 0; j < n; ++j) weighted[j] = m.weight(j) * m.h() * std::max(y[j], 0.0);
    GridFunction out = *map.psi_base();
    const auto& k = map.kernel_samples();
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += k[i * n + j] * weighted[j];
        out[i] += map.alpha() * s;
    }
    return out;
}

double lipschitz_bound(const ObstacleMap& map, Norm norm_tag) {
    if (norm_tag == Norm::sup) throw ParameterError("lipschitz_bound is defined for l2 or h1");
    const Mesh& m = map.mesh();
    switch (map.kind()) {
        case ObstacleMap::Kind::fixed: return 0.0;
        case ObstacleMap::Kind::constant_mean:
            // |integral(d)| <= |d|_l2 on the unit interval; the output is a constant.
            return norm_tag == Norm::l2 ? map.alpha() : map.alpha() * norm(GridFunction(m, 1.0), Norm::h1);
        case ObstacleMap::Kind::kernel: break;
    }
    // Hilbert-Schmidt norm of the weighted kernel matrix.
    const std::size_t n = m.dofs();
    const auto& k = map.kernel_samples();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        GridFunction column(m);
        for (std::size_t i = 0; i < n; ++i) column[i] = k[i * n + j];
        const double cn = norm(column, norm_tag);
        sum += m.weight(j) * m.h() * cn * cn;
    }
    return map.alpha() * std::sqrt(sum);
}

bool check_order_preserving(const ObstacleMap& map, int trials, std::uint64_t seed) {
    if (trials < 1) throw ParameterError("check_order_preserving needs trials >= 1");
    const Mesh& m = map.mesh();
    constexpr double tol = 1e-12;
    auto ordered = [&](const GridFunction& y1, const GridFunction& y2) {
        return leq(eval_obstacle(map, y1), eval_obstacle(map, y2), tol);
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        const GridFunction y1 = random_smooth_function(m, rng, 1.0, 5);
        GridFunction y2 = y1;
        for (double& v : y2.values()) v += noise(rng);
        if (!ordered(y1, y2)) return false;
    }
    if (map.kind() == ObstacleMap::Kind::kernel) {
        const GridFunction zero(m);
        for (std::size_t j = 0; j < m.dofs(); ++j) {
            GridFunction bump(m);
            bump[j] = 1.0;
            if (!ordered(zero, bump)) return false;
        }
    }
    return true;
}

}  // namespace qvar
