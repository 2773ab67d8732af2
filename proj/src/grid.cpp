#include "qvar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qvar/error.hpp"
#include "qvar/tridiagonal.hpp"

namespace qvar {

std::string_view to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann";
}

std::string_view to_string(Norm norm) {
    switch (norm) {
        case Norm::l2: return "l2";
        case Norm::h1: return "h1";
        case Norm::sup: return "sup";
    }
    return "?";
}

BoundaryCondition parse_boundary_condition(std::string_view text) {
    if (text == "dirichlet") return BoundaryCondition::dirichlet;
    if (text == "neumann") return BoundaryCondition::neumann;
    throw ParameterError("unknown boundary condition '" + std::string(text) + "'");
}

Norm parse_norm(std::string_view text) {
    if (text == "l2") return Norm::l2;
    if (text == "h1") return Norm::h1;
    if (text == "sup") return Norm::sup;
    throw ParameterError("unknown norm '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------

Mesh::Mesh(int n, BoundaryCondition bc) : n_(n), h_(0.0), bc_(bc) {
    if (n < 2) throw InvalidMeshError("mesh needs at least 2 cells, got " + std::to_string(n));
    h_ = 1.0 / n;
}

std::size_t Mesh::dofs() const noexcept {
    return bc_ == BoundaryCondition::dirichlet ? static_cast<std::size_t>(n_ - 1)
                                               : static_cast<std::size_t>(n_ + 1);
}

int Mesh::node_index(std::size_t i) const noexcept {
    return bc_ == BoundaryCondition::dirichlet ? static_cast<int>(i) + 1 : static_cast<int>(i);
}

double Mesh::x(std::size_t i) const noexcept { return node_index(i) * h_; }

double Mesh::weight(std::size_t i) const noexcept {
    if (bc_ == BoundaryCondition::neumann && (i == 0 || i == static_cast<std::size_t>(n_))) {
        return 0.5;
    }
    return 1.0;
}

Mesh make_mesh(int n, BoundaryCondition bc) { return Mesh(n, bc); }

// ---------------------------------------------------------------------------

GridFunction::GridFunction(const Mesh& mesh, double fill)
    : mesh_(mesh), values_(mesh.dofs(), fill) {}

GridFunction::GridFunction(const Mesh& mesh, std::vector<double> values)
    : mesh_(mesh), values_(std::move(values)) {
    if (values_.size() != mesh_.dofs()) {
        throw IncompatibleGridError("grid function has " + std::to_string(values_.size()) +
                                    " values, mesh has " + std::to_string(mesh_.dofs()) +
                                    " dofs");
    }
    if (!all_finite()) throw ParameterError("grid function values must be finite");
}

bool GridFunction::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
    require_same_mesh(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
    require_same_mesh(*this, other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

GridFunction& GridFunction::operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
}

void require_same_mesh(const GridFunction& u, const GridFunction& v) {
    if (!(u.mesh() == v.mesh())) throw IncompatibleGridError("grid functions live on different meshes");
}

// ---------------------------------------------------------------------------

double trapezoid_integral(const GridFunction& u) {
    const Mesh& m = u.mesh();
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += m.weight(i) * u[i];
    return m.h() * sum;
}

double inner(const GridFunction& u, const GridFunction& v) {
    require_same_mesh(u, v);
    const Mesh& m = u.mesh();
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) sum += m.weight(i) * u[i] * v[i];
    return m.h() * sum;
}

namespace {

// Sum of squared edge differences over all n edges; Dirichlet ends are zero.
double gradient_energy(const GridFunction& u) {
    const Mesh& m = u.mesh();
    const auto vals = u.values();
    double sum = 0.0;
    if (m.bc() == BoundaryCondition::dirichlet) {
        double prev = 0.0;
        for (double v : vals) {
            sum += (v - prev) * (v - prev);
            prev = v;
        }
        sum += prev * prev;
    } else {
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            const double d = vals[i + 1] - vals[i];
            sum += d * d;
        }
    }
    return sum / m.h();
}

}  // namespace

double norm(const GridFunction& u, Norm kind) {
    switch (kind) {
        case Norm::l2: return std::sqrt(inner(u, u));
        case Norm::h1: return std::sqrt(inner(u, u) + gradient_energy(u));
        case Norm::sup: {
            double m = 0.0;
            for (double v : u.values()) m = std::max(m, std::abs(v));
            return m;
        }
    }
    return 0.0;
}

double dual_norm(const GridFunction& r, Norm kind) {
    const Mesh& m = r.mesh();
    switch (kind) {
        case Norm::l2: return norm(r, Norm::l2);
        case Norm::sup: {
            // l1-type dual of the sup norm under the trapezoid pairing
            double s = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) s += m.h() * m.weight(i) * std::abs(r[i]);
            return s;
        }
        case Norm::h1: break;
    }
    const std::size_t n = r.size();
    const double h = m.h();
    std::vector<double> lower(n, -1.0 / h), upper(n, -1.0 / h), diag(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool end = m.bc() == BoundaryCondition::neumann && (i == 0 || i + 1 == n);
        diag[i] = h * m.weight(i) + (end ? 1.0 / h : 2.0 / h);
        rhs[i] = h * m.weight(i) * r[i];
    }
    const auto x = thomas_solve(lower, diag, upper, rhs);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += rhs[i] * x[i];
    return std::sqrt(std::max(s, 0.0));
}

GridFunction pos_part(const GridFunction& u) {
    GridFunction out(u);
    for (double& v : out.values()) v = std::max(v, 0.0);
    return out;
}

GridFunction lattice_min(const GridFunction& u, const GridFunction& v) {
    require_same_mesh(u, v);
    GridFunction out(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(u[i], v[i]);
    return out;
}

GridFunction lattice_max(const GridFunction& u, const GridFunction& v) {
    require_same_mesh(u, v);
    GridFunction out(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(u[i], v[i]);
    return out;
}

bool leq(const GridFunction& u, const GridFunction& v, double tol) {
    require_same_mesh(u, v);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] <= v[i] + tol)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_csv(std::ostream& out, const GridFunction& u) {
    const Mesh& m = u.mesh();
    out << "x,value\n";
    const bool dirichlet = m.bc() == BoundaryCondition::dirichlet;
    if (dirichlet) out << format_real(0.0) << ',' << format_real(0.0) << '\n';
    for (std::size_t i = 0; i < u.size(); ++i) {
        out << format_real(m.x(i)) << ',' << format_real(u[i]) << '\n';
    }
    if (dirichlet) out << format_real(1.0) << ',' << format_real(0.0) << '\n';
}

std::string to_csv(const GridFunction& u) {
    std::ostringstream os;
    write_csv(os, u);
    return os.str();
}

GridFunction read_csv(std::istream& in, BoundaryCondition bc) {
    std::vector<double> nodal;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParameterError("malformed grid CSV row: " + line);
        try {
            nodal.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ParameterError("malformed grid CSV value: " + line);
        }
    }
    if (nodal.size() < 3) throw InvalidMeshError("grid CSV needs at least 3 nodes");
    const Mesh mesh(static_cast<int>(nodal.size()) - 1, bc);
    if (bc == BoundaryCondition::dirichlet) {
        nodal.erase(nodal.begin());
        nodal.pop_back();
    }
    return GridFunction(mesh, std::move(nodal));
}

GridFunction read_csv_file(const std::string& path, BoundaryCondition bc) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open grid CSV '" + path + "'");
    return read_csv(in, bc);
}

}  // namespace qvar
