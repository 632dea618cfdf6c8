#pragma once

// Structured P1 triangulations of rectangles and the finite element matrices
// used by the state, adjoint and Newton systems.

#include "nep/types.hpp"

#include <array>
#include <functional>
#include <variant>
#include <vector>

namespace nep::fem {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Rect {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    bool contains(const Point& p) const {
        return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max;
    }
    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

/// Uniform triangulation of an axis-aligned rectangle. Vertex (i, j) has index
/// j * (nx + 1) + i; every grid square is cut along its bottom-left to
/// top-right diagonal.
class Mesh {
public:
    Mesh(const Rect& domain, int nx, int ny);

    const Rect& domain() const { return domain_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    Eigen::Index num_vertices() const { return static_cast<Eigen::Index>(vertices_.size()); }
    std::size_t num_triangles() const { return triangles_.size(); }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
    const std::vector<int>& interior_nodes() const { return interior_nodes_; }
    bool is_boundary(int vertex) const { return on_boundary_[static_cast<std::size_t>(vertex)]; }

    /// Longest triangle edge.
    double h() const { return h_; }

    /// Signed area of triangle t (positive for counter-clockwise orientation).
    double signed_area(std::size_t t) const;

private:
    Rect domain_;
    int nx_;
    int ny_;
    std::vector<Point> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<int> boundary_nodes_;
    std::vector<int> interior_nodes_;
    std::vector<bool> on_boundary_;
    double h_ = 0.0;
};

Mesh build_rect_mesh(const Rect& domain, int nx, int ny);

/// Characteristic function of a subregion: either a geometric predicate or
/// one 0/1 value per mesh vertex.
class Region {
public:
    using Predicate = std::function<bool(const Point&)>;

    static Region everywhere();
    static Region nowhere();
    static Region box(const Rect& r);
    static Region predicate(Predicate p);
    static Region nodal(Mask values);

    bool is_nodal() const { return std::holds_alternative<Mask>(data_); }
    const Mask& nodal_values() const { return std::get<Mask>(data_); }
    const Predicate& geometric() const { return std::get<Predicate>(data_); }

private:
    explicit Region(std::variant<Predicate, Mask> d) : data_(std::move(d)) {}
    std::variant<Predicate, Mask> data_;
};

/// Three interior points (barycentric 2/3, 1/6, 1/6) with weights area / 3;
/// exact for polynomials of degree two.
struct QuadraturePoint {
    std::array<double, 3> barycentric;
    double weight;  // fraction of the triangle area
};
const std::array<QuadraturePoint, 3>& triangle_quadrature();

/// Element stiffness matrix of a P1 triangle.
std::array<std::array<double, 3>, 3> element_stiffness(const Point& a, const Point& b, const Point& c);

SparseMatrix assemble_stiffness(const Mesh& mesh);

/// Mass matrix restricted to a region. Geometric regions evaluate the
/// predicate at the quadrature points; nodal regions weight each quadrature
/// point with the P1 interpolant of the 0/1 values, which keeps the result
/// symmetric, positive semidefinite and monotone in the region.
SparseMatrix assemble_mass(const Mesh& mesh, const Region& region);

/// Full mass matrix (region = whole domain).
SparseMatrix assemble_mass(const Mesh& mesh);

Vector interpolate(const Mesh& mesh, const std::function<double(const Point&)>& f);

/// Nodal indicator of a geometric predicate (vertex-wise evaluation).
Mask nodal_indicator(const Mesh& mesh, const Region::Predicate& pred);

/// Stiffness matrix with Dirichlet rows and columns removed, i.e. K restricted
/// to interior nodes.
SparseMatrix restrict_to_interior(const Mesh& mesh, const SparseMatrix& full);

}  // namespace nep::fem
