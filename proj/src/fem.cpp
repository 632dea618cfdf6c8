#include "nep/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nep::fem {

Mesh::Mesh(const Rect& domain, int nx, int ny) : domain_(domain), nx_(nx), ny_(ny) {
    if (nx < 1 || ny < 1) {
        throw ArgumentError("build_rect_mesh: nx and ny must be >= 1");
    }
    if (!(domain.x_max > domain.x_min) || !(domain.y_max > domain.y_min) ||
        !std::isfinite(domain.area())) {
        std::ostringstream msg;
        msg << "build_rect_mesh: degenerate rectangle [" << domain.x_min << ", " << domain.x_max
            << "] x [" << domain.y_min << ", " << domain.y_max << "]";
        throw ArgumentError(msg.str());
    }

    const double dx = (domain.x_max - domain.x_min) / nx;
    const double dy = (domain.y_max - domain.y_min) / ny;
    const int stride = nx + 1;

    vertices_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    on_boundary_.reserve(vertices_.capacity());
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            // Pin the last row/column to the exact bounds so boundary tests are exact.
            const double x = (i == nx) ? domain.x_max : domain.x_min + i * dx;
            const double y = (j == ny) ? domain.y_max : domain.y_min + j * dy;
            vertices_.push_back({x, y});
            const bool bnd = (i == 0 || i == nx || j == 0 || j == ny);
            on_boundary_.push_back(bnd);
            const int idx = j * stride + i;
            (bnd ? boundary_nodes_ : interior_nodes_).push_back(idx);
        }
    }

    triangles_.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = j * stride + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + stride;
            const int v11 = v01 + 1;
            triangles_.push_back({v00, v10, v11});
            triangles_.push_back({v00, v11, v01});
        }
    }

    for (const auto& tri : triangles_) {
        for (int e = 0; e < 3; ++e) {
            const Point& a = vertices_[static_cast<std::size_t>(tri[e])];
            const Point& b = vertices_[static_cast<std::size_t>(tri[(e + 1) % 3])];
            h_ = std::max(h_, std::hypot(b.x - a.x, b.y - a.y));
        }
    }
}

double Mesh::signed_area(std::size_t t) const {
    const auto& tri = triangles_[t];
    const Point& a = vertices_[static_cast<std::size_t>(tri[0])];
    const Point& b = vertices_[static_cast<std::size_t>(tri[1])];
    const Point& c = vertices_[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Mesh build_rect_mesh(const Rect& domain, int nx, int ny) { return Mesh(domain, nx, ny); }

Region Region::everywhere() {
    return Region(Predicate([](const Point&) { return true; }));
}

Region Region::nowhere() {
    return Region(Predicate([](const Point&) { return false; }));
}

Region Region::box(const Rect& r) {
    return Region(Predicate([r](const Point& p) { return r.contains(p); }));
}

Region Region::predicate(Predicate p) {
    if (!p) throw ArgumentError("Region::predicate: empty predicate");
    return Region(std::move(p));
}

Region Region::nodal(Mask values) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0 && values[i] != 1.0) {
            throw ArgumentError("Region::nodal: mask entries must be 0 or 1");
        }
    }
    return Region(std::move(values));
}

const std::array<QuadraturePoint, 3>& triangle_quadrature() {
    static const std::array<QuadraturePoint, 3> rule{{
        {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
        {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
        {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
    }};
    return rule;
}

std::array<std::array<double, 3>, 3> element_stiffness(const Point& a, const Point& b, const Point& c) {
    const double area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    // Gradient of the hat function at vertex k is (y_{k+1} - y_{k+2}, x_{k+2} - x_{k+1}) / area2.
    const std::array<double, 3> gx{b.y - c.y, c.y - a.y, a.y - b.y};
    const std::array<double, 3> gy{c.x - b.x, a.x - c.x, b.x - a.x};
    const double scale = 1.0 / (2.0 * area2);
    std::array<std::array<double, 3>, 3> ke{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            ke[i][j] = (gx[i] * gx[j] + gy[i] * gy[j]) * scale;
        }
    }
    return ke;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Eigen::Index n, const Triplets& t) {
    SparseMatrix A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh) {
    Triplets trip;
    trip.reserve(9 * mesh.num_triangles());
    const auto& V = mesh.vertices();
    for (const auto& tri : mesh.triangles()) {
        const auto ke = element_stiffness(V[static_cast<std::size_t>(tri[0])],
                                          V[static_cast<std::size_t>(tri[1])],
                                          V[static_cast<std::size_t>(tri[2])]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], ke[i][j]);
    }
    return from_triplets(mesh.num_vertices(), trip);
}

SparseMatrix assemble_mass(const Mesh& mesh, const Region& region) {
    const Eigen::Index m = mesh.num_vertices();
    if (region.is_nodal() && region.nodal_values().size() != m) {
        std::ostringstream msg;
        msg << "assemble_mass: nodal mask has " << region.nodal_values().size() << " entries, mesh has " << m
            << " vertices";
        throw ArgumentError(msg.str());
    }

    Triplets trip;
    trip.reserve(9 * mesh.num_triangles());
    const auto& V = mesh.vertices();
    const auto& quad = triangle_quadrature();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = std::abs(mesh.signed_area(t));
        std::array<std::array<double, 3>, 3> me{};
        bool any = false;
        for (const auto& q : quad) {
            double chi = 0.0;
            if (region.is_nodal()) {
                const Mask& mask = region.nodal_values();
                for (int k = 0; k < 3; ++k) chi += q.barycentric[k] * mask[tri[k]];
            } else {
                Point p{};
                for (int k = 0; k < 3; ++k) {
                    p.x += q.barycentric[k] * V[static_cast<std::size_t>(tri[k])].x;
                    p.y += q.barycentric[k] * V[static_cast<std::size_t>(tri[k])].y;
                }
                chi = region.geometric()(p) ? 1.0 : 0.0;
            }
            if (chi == 0.0) continue;
            any = true;
            const double w = chi * q.weight * area;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) me[i][j] += w * q.barycentric[i] * q.barycentric[j];
        }
        if (!any) continue;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], me[i][j]);
    }
    return from_triplets(m, trip);
}

SparseMatrix assemble_mass(const Mesh& mesh) { return assemble_mass(mesh, Region::everywhere()); }

Vector interpolate(const Mesh& mesh, const std::function<double(const Point&)>& f) {
    Vector v(mesh.num_vertices());
    const auto& V = mesh.vertices();
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(V[static_cast<std::size_t>(i)]);
    return v;
}

Mask nodal_indicator(const Mesh& mesh, const Region::Predicate& pred) {
    return interpolate(mesh, [&](const Point& p) { return pred(p) ? 1.0 : 0.0; });
}

SparseMatrix restrict_to_interior(const Mesh& mesh, const SparseMatrix& full) {
    const auto& interior = mesh.interior_nodes();
    std::vector<int> local(static_cast<std::size_t>(mesh.num_vertices()), -1);
    for (std::size_t i = 0; i < interior.size(); ++i) local[static_cast<std::size_t>(interior[i])] = static_cast<int>(i);

    Triplets trip;
    trip.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (int col = 0; col < full.outerSize(); ++col) {
        const int lc = local[static_cast<std::size_t>(col)];
        if (lc < 0) continue;
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int lr = local[static_cast<std::size_t>(it.row())];
            if (lr >= 0) trip.emplace_back(lr, lc, it.value());
        }
    }
    return from_triplets(static_cast<Eigen::Index>(interior.size()), trip);
}

}  // namespace nep::fem
