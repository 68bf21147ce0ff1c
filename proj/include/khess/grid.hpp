#pragma once

#include "khess/symfun.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace khess {

using Point = std::array<double, 3>;

/// Uniform box grid in 2 or 3 dimensions with `resolution` points per axis.
/// Node (i_0, …, i_{d-1}) has flat index Σ i_a·stride(a); the last axis is
/// contiguous.
class GridDomain {
public:
    GridDomain(int dim, std::span<const double> low, std::span<const double> high, int resolution);
    static GridDomain cube(int dim, double low, double high, int resolution);

    int dim() const { return dim_; }
    int resolution() const { return resolution_; }
    double spacing() const { return h_; }
    const Point& low() const { return low_; }
    const Point& high() const { return high_; }

    std::size_t node_count() const { return count_; }
    std::size_t stride(int axis) const { return stride_[axis]; }
    std::array<int, 3> coords(std::size_t node) const;
    std::size_t index(const std::array<int, 3>& c) const;
    Point position(std::size_t node) const;
    bool on_box_boundary(std::size_t node) const;

private:
    int dim_;
    int resolution_;
    Point low_{};
    Point high_{};
    double h_;
    std::size_t count_;
    std::array<std::size_t, 3> stride_{};
};

/// Nodal values plus the set of pinned (Dirichlet) nodes. Box-boundary nodes
/// are always pinned; masked domains pin the exterior as well. Pinned values are
/// the boundary data and never change after construction.
class ScalarField {
public:
    ScalarField(GridDomain domain, std::vector<double> values, std::vector<std::uint8_t> pinned);

    /// Box domain: boundary nodes get `boundary(x)`, interior nodes `interior(x)`.
    static ScalarField box(const GridDomain& domain, const std::function<double(const Point&)>& interior,
                           const std::function<double(const Point&)>& boundary);

    /// Masked domain: nodes with inside(x) false (and the box boundary) are pinned
    /// to boundary(x).
    static ScalarField masked(const GridDomain& domain, const std::function<bool(const Point&)>& inside,
                              const std::function<double(const Point&)>& interior,
                              const std::function<double(const Point&)>& boundary);

    const GridDomain& domain() const { return domain_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t node) const { return values_[node]; }
    bool pinned(std::size_t node) const { return pinned_[node] != 0; }
    std::span<const std::uint8_t> pinned_mask() const { return pinned_; }

    /// Indices of the non-pinned nodes, ascending.
    std::vector<std::size_t> active_nodes() const;

    void set_active(std::size_t node, double v);

    /// s·u, including boundary data.
    ScalarField scaled(double s) const;

private:
    GridDomain domain_;
    std::vector<double> values_;
    std::vector<std::uint8_t> pinned_;
};

/// Central-difference Hessian at a node off the box boundary.
SymMatrix discrete_hessian(const ScalarField& u, std::size_t node);

/// Central-difference gradient at a node off the box boundary.
Point discrete_gradient(const ScalarField& u, std::size_t node);

/// ∇_h u at every node; box-boundary nodes use one-sided second-order
/// differences along the normal axis.
std::vector<Point> gradient_field(const ScalarField& u);

/// `khess-field v1 dim=<d> res=<r> low=<a,b[,c]> high=<a,b[,c]>`, then one
/// value per line at 17 significant digits in flat-index order.
void write_field(std::ostream& os, const ScalarField& u);

/// Inverse of write_field. Box-boundary nodes are pinned.
ScalarField read_field(std::istream& is);

}  // namespace khess
