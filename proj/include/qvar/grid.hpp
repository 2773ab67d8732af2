#pragma once

/**
 * @file grid.hpp
 * @brief Uniform 1-D meshes on (0,1), nodal grid functions, discrete norms
 *        and the lattice operations (positive part, min, max, ordering).
 *
 * Dirichlet grid functions store interior values only; the boundary zeros
 * are implicit in every norm, integral and CSV export. Neumann grid
 * functions store all n+1 nodes. Trapezoid weights (1/2 at the two end
 * nodes, 1 elsewhere) are used for every integral and inner product.
 */

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qvar {

enum class BoundaryCondition { dirichlet, neumann };

/// Discrete norms. l2 and h1 stand in for the pivot space H and the energy space V.
enum class Norm { l2, h1, sup };

std::string_view to_string(BoundaryCondition bc);
std::string_view to_string(Norm norm);
BoundaryCondition parse_boundary_condition(std::string_view text);
Norm parse_norm(std::string_view text);

class Mesh {
public:
    /// Throws InvalidMeshError when n < 2.
    Mesh(int n, BoundaryCondition bc);

    int cells() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    BoundaryCondition bc() const noexcept { return bc_; }
    std::size_t dofs() const noexcept;

    /// Coordinate of degree of freedom i.
    double x(std::size_t i) const noexcept;
    /// Trapezoid weight of degree of freedom i (1/2 at Neumann end nodes).
    double weight(std::size_t i) const noexcept;
    /// Node index in 0..n of degree of freedom i.
    int node_index(std::size_t i) const noexcept;

    bool operator==(const Mesh&) const = default;

private:
    int n_;
    double h_;
    BoundaryCondition bc_;
};

Mesh make_mesh(int n, BoundaryCondition bc);

/// Nodal values on a mesh, one per degree of freedom.
class GridFunction {
public:
    explicit GridFunction(const Mesh& mesh, double fill = 0.0);
    /// Throws IncompatibleGridError on a size mismatch and ParameterError on
    /// non-finite values.
    GridFunction(const Mesh& mesh, std::vector<double> values);

    template <typename F>
    static GridFunction from_function(const Mesh& mesh, F&& f) {
        GridFunction u(mesh);
        for (std::size_t i = 0; i < u.size(); ++i) u.values_[i] = f(mesh.x(i));
        return u;
    }

    const Mesh& mesh() const noexcept { return mesh_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    bool all_finite() const noexcept;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double s) noexcept;

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double s, GridFunction a) { return a *= s; }
    friend GridFunction operator*(GridFunction a, double s) { return a *= s; }

private:
    Mesh mesh_;
    std::vector<double> values_;
};

/// Throws IncompatibleGridError unless u and v live on the same mesh.
void require_same_mesh(const GridFunction& u, const GridFunction& v);

double trapezoid_integral(const GridFunction& u);

/// Trapezoid-weighted pairing h * sum w_i u_i v_i.
double inner(const GridFunction& u, const GridFunction& v);

double norm(const GridFunction& u, Norm kind);

/// Norm of the functional v -> inner(r, v) in the dual of the given norm.
/// l2 is self-dual; for h1 this solves with the h1 Gram matrix.
double dual_norm(const GridFunction& r, Norm kind);

GridFunction pos_part(const GridFunction& u);
GridFunction lattice_min(const GridFunction& u, const GridFunction& v);
GridFunction lattice_max(const GridFunction& u, const GridFunction& v);
/// True iff u_i <= v_i + tol for every i.
bool leq(const GridFunction& u, const GridFunction& v, double tol);

/// CSV with header `x,value`, one row per node including the boundary.
void write_csv(std::ostream& out, const GridFunction& u);
std::string to_csv(const GridFunction& u);
/// Parses the CSV written by write_csv; the node count fixes the mesh.
GridFunction read_csv(std::istream& in, BoundaryCondition bc);
GridFunction read_csv_file(const std::string& path, BoundaryCondition bc);

/// Formats a real with 17 significant digits.
std::string format_real(double value);

}  // namespace qvar
