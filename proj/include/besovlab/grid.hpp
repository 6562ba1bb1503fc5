#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "besovlab/errors.hpp"

namespace besovlab {

/// Masked uniform lattice describing an open set in R^d (d = 1, 2).
///
/// Lattice sites sit at origin + (i+1)*h per axis; the mask marks which
/// sites are interior. Sites outside the mask (or outside the lattice)
/// carry the homogeneous Dirichlet condition. The bounding box spans
/// origin .. origin + (extent+1)*h per axis, so an all-true 1-D mask of
/// nx sites is the open interval of length (nx+1)*h.
struct GridSpec {
    int dimension = 1;            // 1 or 2
    double h = 0.0;               // lattice spacing
    std::array<double, 2> origin = {0.0, 0.0};
    int nx = 0;                   // mask extent along x
    int ny = 1;                   // mask extent along y (1 for d = 1)
    std::vector<std::uint8_t> mask; // row-major, mask[iy*nx + ix]

    /// Interval (a, b) with n interior sites, h = (b-a)/(n+1).
    static GridSpec interval(double a, double b, int n_interior);

    /// Square (a, b)^2 with n interior sites per side.
    static GridSpec square(double a, double b, int n_per_side);

    /// Parse the mask file format: header "d h nx [ny]" followed by
    /// rows of '0'/'1' characters (one row for d = 1, ny rows for d = 2).
    static GridSpec from_mask_file(const std::string& path);

    bool interior(int ix, int iy) const {
        if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) return false;
        return mask[static_cast<std::size_t>(iy) * nx + ix] != 0;
    }

    /// Throws unless the invariants hold (h > 0, d in {1,2}, mask
    /// extents consistent, at least one interior site).
    void validate() const;
};

/// Immutable interior-cell indexing of a GridSpec. Cheap to copy
/// (shared state); safe to share across threads.
class GridDomain {
  public:
    GridDomain() = default;

    const GridSpec& spec() const { return state_->spec; }
    int size() const { return state_->n; }
    int dimension() const { return state_->spec.dimension; }
    double h() const { return state_->spec.h; }
    /// Quadrature weight per cell, h^d.
    double cell_weight() const { return state_->weight; }

    /// Interior index of lattice site (ix, iy), or -1.
    int index_at(int ix, int iy = 0) const {
        if (!state_->spec.interior(ix, iy)) return -1;
        return state_->index[static_cast<std::size_t>(iy) * state_->spec.nx + ix];
    }

    /// Coordinates of interior cell i.
    std::array<double, 2> coord(int i) const {
        const auto& s = state_->spec;
        int ix = state_->site_x[i], iy = state_->site_y[i];
        return {s.origin[0] + (ix + 1) * s.h,
                s.dimension == 2 ? s.origin[1] + (iy + 1) * s.h : 0.0};
    }

    int site_x(int i) const { return state_->site_x[i]; }
    int site_y(int i) const { return state_->site_y[i]; }

    bool same_as(const GridDomain& other) const { return state_ == other.state_; }

  private:
    friend GridDomain build_domain(GridSpec spec);

    struct State {
        GridSpec spec;
        int n = 0;
        double weight = 0.0;
        std::vector<int> index;   // site -> interior index or -1
        std::vector<int> site_x;  // interior index -> ix
        std::vector<int> site_y;  // interior index -> iy
    };
    std::shared_ptr<const State> state_;
};

/// Indexes the interior cells of a validated spec.
/// Throws EmptyDomain when the mask has no interior cell.
GridDomain build_domain(GridSpec spec);

/// Grid function on the interior cells of a domain.
template <class Scalar>
struct BasicField {
    GridDomain domain;
    Eigen::Vector<Scalar, Eigen::Dynamic> values;

    BasicField() = default;
    BasicField(GridDomain dom, Eigen::Vector<Scalar, Eigen::Dynamic> v)
        : domain(std::move(dom)), values(std::move(v)) {
        if (values.size() != domain.size())
            throw DomainMismatch("field length != interior cell count");
    }

    static BasicField zero(const GridDomain& dom) {
        return {dom, Eigen::Vector<Scalar, Eigen::Dynamic>::Zero(dom.size())};
    }
    static BasicField constant(const GridDomain& dom, Scalar c) {
        return {dom, Eigen::Vector<Scalar, Eigen::Dynamic>::Constant(dom.size(), c)};
    }
};

using Field = BasicField<double>;
using ComplexField = BasicField<std::complex<double>>;

/// Symmetric operator on L^2 of a domain, stored densely.
/// Symmetry is exact by construction for the assembled Laplacian.
struct SymOperator {
    GridDomain domain;
    Eigen::MatrixXd matrix;

    Field apply(const Field& f) const {
        if (!f.domain.same_as(domain)) throw DomainMismatch("operator/field domains differ");
        return {domain, matrix * f.values};
    }
};

/// Second-order central-stencil Dirichlet Laplacian: diagonal 2d/h^2,
/// -1/h^2 per interior neighbor pair; exterior neighbors contribute zero.
SymOperator assemble_laplacian(const GridDomain& domain);

/// Discrete L^p norm with the uniform weight h^d per cell;
/// p = infinity gives the max of absolute values.
/// Throws InvalidExponent for p < 1.
double lp_norm(const Field& f, double p);
double lp_norm(const ComplexField& f, double p);

/// L^2 inner product <u, v> = h^d sum u_i conj(v_i).
double inner_product(const Field& u, const Field& v);
std::complex<double> inner_product(const ComplexField& u, const ComplexField& v);

namespace detail {
/// L^p norms of each column of a matrix of field values.
Eigen::VectorXd columnwise_lp(const Eigen::MatrixXd& values, double p, double weight);
} // namespace detail

} // namespace besovlab
