#include "qvar/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qvar/obstacle.hpp"

namespace qvar {

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : Error("line " + std::to_string(line) + (key.empty() ? "" : ", key '" + key + "'") + ": " + message),
      line_(line),
      key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Entry {
    int line;
    std::string key;
    std::string value;
};

class Reader {
public:
    explicit Reader(const Entry& e) : e_(e) {}

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(e_.line, e_.key, message); }

    double real() const {
        double v = 0.0;
        const char* begin = e_.value.data();
        const char* end = begin + e_.value.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail("malformed real '" + e_.value + "'");
        return v;
    }

    long long integer() const {
        long long v = 0;
        const char* begin = e_.value.data();
        const char* end = begin + e_.value.size();
        const auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc() || ptr != end) fail("malformed integer '" + e_.value + "'");
        return v;
    }

    double positive() const {
        const double v = real();
        if (!(v > 0.0)) fail("value must be > 0");
        return v;
    }

    double nonnegative() const {
        const double v = real();
        if (!(v >= 0.0)) fail("value must be >= 0");
        return v;
    }

    int int_at_least(long long lo, long long hi = 1LL << 30) const {
        const long long v = integer();
        if (v < lo || v > hi) fail("value must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return static_cast<int>(v);
    }

    std::vector<std::string> items() const {
        std::vector<std::string> out;
        std::stringstream ss(e_.value);
        std::string item;
        while (std::getline(ss, item, ',')) out.emplace_back(trim(item));
        if (out.empty() || (out.size() == 1 && out[0].empty())) fail("empty list");
        return out;
    }

    std::vector<double> decreasing_list() const {
        std::vector<double> out;
        for (const auto& item : items()) {
            Entry sub{e_.line, e_.key, item};
            const double v = Reader(sub).nonnegative();
            if (!out.empty() && !(v < out.back())) fail("list must be strictly decreasing");
            out.push_back(v);
        }
        return out;
    }

    std::vector<int> increasing_int_list() const {
        std::vector<int> out;
        for (const auto& item : items()) {
            Entry sub{e_.line, e_.key, item};
            const int v = Reader(sub).int_at_least(2, 1 << 16);
            if (!out.empty() && !(v > out.back())) fail("list must be strictly increasing");
            out.push_back(v);
        }
        return out;
    }

    const std::string& text() const { return e_.value; }

private:
    const Entry& e_;
};

using Handler = std::function<void(ExperimentConfig&, const Reader&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        // global
        {".seed", [](ExperimentConfig& c, const Reader& r) { c.seed = static_cast<std::uint64_t>(r.int_at_least(0)); }},
        {".out", [](ExperimentConfig& c, const Reader& r) { c.out = r.text(); }},
        {".jobs", [](ExperimentConfig& c, const Reader& r) { c.jobs = r.int_at_least(1, 1024); }},
        // problem
        {"problem.name",
         [](ExperimentConfig& c, const Reader& r) {
             static const char* names[] = {"example1d", "plaplacian", "kernel_qvi", "nonmonotone_sine",
                                           "fixed_obstacle"};
             for (const char* n : names) {
                 if (r.text() == n) {
                     c.problem.name = r.text();
                     return;
                 }
             }
             r.fail("unknown built-in problem '" + r.text() + "'");
         }},
        {"problem.n", [](ExperimentConfig& c, const Reader& r) { c.problem.n = r.int_at_least(2, 1 << 16); }},
        {"problem.bc",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() == "dirichlet") {
                 c.problem.bc = BoundaryCondition::dirichlet;
             } else if (r.text() == "neumann") {
                 c.problem.bc = BoundaryCondition::neumann;
             } else {
                 r.fail("bc must be dirichlet or neumann");
             }
         }},
        {"problem.p",
         [](ExperimentConfig& c, const Reader& r) {
             const double p = r.real();
             if (!(p >= 2.0)) r.fail("p must be >= 2");
             c.problem.p = p;
         }},
        {"problem.eps_op", [](ExperimentConfig& c, const Reader& r) { c.problem.eps_op = r.nonnegative(); }},
        {"problem.lambda", [](ExperimentConfig& c, const Reader& r) { c.problem.lambda = r.real(); }},
        {"problem.a0", [](ExperimentConfig& c, const Reader& r) { c.problem.a0 = r.nonnegative(); }},
        {"problem.f", [](ExperimentConfig& c, const Reader& r) { c.problem.f = r.real(); }},
        {"problem.F", [](ExperimentConfig& c, const Reader& r) { c.problem.F = r.real(); }},
        // obstacle (also reachable from [problem] for the coupling overrides)
        {"obstacle.kind",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() != "constant_mean" && r.text() != "kernel" && r.text() != "fixed") {
                 r.fail("obstacle kind must be constant_mean, kernel or fixed");
             }
             c.problem.obstacle_kind = r.text();
         }},
        {"obstacle.c0", [](ExperimentConfig& c, const Reader& r) { c.problem.c0 = r.real(); }},
        {"obstacle.alpha", [](ExperimentConfig& c, const Reader& r) { c.problem.alpha = r.nonnegative(); }},
        {"obstacle.kernel",
         [](ExperimentConfig& c, const Reader& r) {
             try {
                 (void)named_kernel(r.text());
             } catch (const Error& e) {
                 r.fail(e.what());
             }
             c.problem.kernel = r.text();
         }},
        {"obstacle.psi", [](ExperimentConfig& c, const Reader& r) { c.problem.psi = r.real(); }},
        {"obstacle.psi_file", [](ExperimentConfig& c, const Reader& r) { c.problem.psi_file = r.text(); }},
        // solver
        {"solver.tol_outer", [](ExperimentConfig& c, const Reader& r) { c.solver.outer.tol = r.positive(); }},
        {"solver.tol_inner", [](ExperimentConfig& c, const Reader& r) { c.solver.inner.tol = r.positive(); }},
        {"solver.max_outer", [](ExperimentConfig& c, const Reader& r) { c.solver.outer.max_iter = r.int_at_least(1); }},
        {"solver.max_inner", [](ExperimentConfig& c, const Reader& r) { c.solver.inner.max_iter = r.int_at_least(1); }},
        {"solver.omega",
         [](ExperimentConfig& c, const Reader& r) {
             const double w = r.real();
             if (!(w > 0.0 && w < 2.0)) r.fail("omega must lie in (0,2)");
             c.solver.inner.omega = w;
         }},
        {"solver.tau",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() == "auto") {
                 c.solver.inner.tau.reset();
             } else {
                 c.solver.inner.tau = r.positive();
             }
         }},
        {"solver.mode",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() != "fixed_point" && r.text() != "minimal" && r.text() != "maximal") {
                 r.fail("mode must be fixed_point, minimal or maximal");
             }
             c.solver.mode = r.text();
         }},
        {"solver.eps", [](ExperimentConfig& c, const Reader& r) { c.solver.eps = r.nonnegative(); }},
        {"solver.norm",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() == "l2") {
                 c.solver.norm = Norm::l2;
             } else if (r.text() == "h1") {
                 c.solver.norm = Norm::h1;
             } else {
                 r.fail("norm must be l2 or h1");
             }
         }},
        {"solver.trials", [](ExperimentConfig& c, const Reader& r) { c.solver.trials = r.int_at_least(1); }},
        // study
        {"study.eps_list", [](ExperimentConfig& c, const Reader& r) { c.study.eps_list = r.decreasing_list(); }},
        {"study.reference",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() != "exact" && r.text() != "eps") r.fail("reference must be exact or eps");
             c.study.reference = r.text();
         }},
        {"study.eps_ref", [](ExperimentConfig& c, const Reader& r) { c.study.eps_ref = r.nonnegative(); }},
        {"study.delta_list", [](ExperimentConfig& c, const Reader& r) { c.study.delta_list = r.decreasing_list(); }},
        {"study.family",
         [](ExperimentConfig& c, const Reader& r) {
             if (r.text() != "scaled_identity" && r.text() != "coefficient") {
                 r.fail("family must be scaled_identity or coefficient");
             }
             c.study.family = r.text();
         }},
        {"study.n_list", [](ExperimentConfig& c, const Reader& r) { c.study.n_list = r.increasing_int_list(); }},
        {"study.f_deltas", [](ExperimentConfig& c, const Reader& r) { c.study.f_deltas = r.decreasing_list(); }},
        {"study.phi_deltas", [](ExperimentConfig& c, const Reader& r) { c.study.phi_deltas = r.decreasing_list(); }},
        {"study.eps", [](ExperimentConfig& c, const Reader& r) { c.study.eps = r.nonnegative(); }},
        {"study.seed", [](ExperimentConfig& c, const Reader& r) { c.seed = static_cast<std::uint64_t>(r.int_at_least(0)); }},
        {"study.out", [](ExperimentConfig& c, const Reader& r) { c.out = r.text(); }},
        {"study.jobs", [](ExperimentConfig& c, const Reader& r) { c.jobs = r.int_at_least(1, 1024); }},
    };
    return table;
}

// Coupling overrides listed with the problem resolve to the obstacle section.
std::string canonical_key(const std::string& section, const std::string& key) {
    if (key.find('.') != std::string::npos) return key;
    if (section == "problem" && (key == "alpha" || key == "c0" || key == "kernel" || key == "psi")) {
        return "obstacle." + key;
    }
    return section + "." + key;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig config;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "", "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section != "problem" && section != "obstacle" && section != "solver" && section != "study") {
                throw ConfigError(line_no, "", "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(line_no, std::string(line), "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(line_no, "", "empty key");
        const std::string full = canonical_key(section, key);
        const auto it = handlers().find(full);
        if (it == handlers().end()) throw ConfigError(line_no, key, "unknown key");
        if (value.empty()) throw ConfigError(line_no, key, "missing value");
        const Entry entry{line_no, key, value};
        it->second(config, Reader(entry));
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qvar
