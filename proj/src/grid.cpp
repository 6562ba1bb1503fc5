#include "besovlab/grid.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace besovlab {

GridSpec GridSpec::interval(double a, double b, int n_interior) {
    GridSpec s;
    s.dimension = 1;
    s.nx = n_interior;
    s.ny = 1;
    s.h = (b - a) / (n_interior + 1);
    s.origin = {a, 0.0};
    s.mask.assign(static_cast<std::size_t>(n_interior), 1);
    s.validate();
    return s;
}

GridSpec GridSpec::square(double a, double b, int n_per_side) {
    GridSpec s;
    s.dimension = 2;
    s.nx = n_per_side;
    s.ny = n_per_side;
    s.h = (b - a) / (n_per_side + 1);
    s.origin = {a, a};
    s.mask.assign(static_cast<std::size_t>(n_per_side) * n_per_side, 1);
    s.validate();
    return s;
}

GridSpec GridSpec::from_mask_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mask file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty mask file: " + path);
    std::istringstream hs(header);
    GridSpec s;
    if (!(hs >> s.dimension >> s.h >> s.nx)) throw IoError("bad mask header: " + header);
    if (s.dimension == 2) {
        if (!(hs >> s.ny)) throw IoError("2-D mask header missing ny: " + header);
    } else {
        s.ny = 1;
    }
    s.mask.assign(static_cast<std::size_t>(s.nx) * s.ny, 0);
    std::string row;
    for (int iy = 0; iy < s.ny; ++iy) {
        if (!std::getline(in, row)) throw IoError("mask file truncated: " + path);
        while (!row.empty() && (row.back() == '\r' || row.back() == '\n')) row.pop_back();
        if (static_cast<int>(row.size()) != s.nx)
            throw IoError("mask row length " + std::to_string(row.size()) +
                          " != nx " + std::to_string(s.nx));
        for (int ix = 0; ix < s.nx; ++ix) {
            char c = row[ix];
            if (c != '0' && c != '1') throw IoError(std::string("mask char not 0/1: ") + c);
            s.mask[static_cast<std::size_t>(iy) * s.nx + ix] = (c == '1');
        }
    }
    s.validate();
    return s;
}

void GridSpec::validate() const {
    if (dimension != 1 && dimension != 2)
        throw Error("GridSpec: dimension must be 1 or 2");
    if (!(h > 0.0)) throw Error("GridSpec: h must be positive");
    if (nx <= 0 || ny <= 0) throw Error("GridSpec: mask extents must be positive");
    if (dimension == 1 && ny != 1) throw Error("GridSpec: 1-D spec requires ny == 1");
    if (mask.size() != static_cast<std::size_t>(nx) * ny)
        throw Error("GridSpec: mask size != nx*ny");
    bool any = false;
    for (auto m : mask) any = any || (m != 0);
    if (!any) throw EmptyDomain("mask has no interior cell");
}

GridDomain build_domain(GridSpec spec) {
    spec.validate();
    auto state = std::make_shared<GridDomain::State>();
    state->spec = std::move(spec);
    const GridSpec& s = state->spec;
    state->index.assign(static_cast<std::size_t>(s.nx) * s.ny, -1);
    for (int iy = 0; iy < s.ny; ++iy)
        for (int ix = 0; ix < s.nx; ++ix)
            if (s.interior(ix, iy)) {
                state->index[static_cast<std::size_t>(iy) * s.nx + ix] = state->n++;
                state->site_x.push_back(ix);
                state->site_y.push_back(iy);
            }
    if (state->n == 0) throw EmptyDomain("mask has no interior cell");
    state->weight = s.dimension == 2 ? s.h * s.h : s.h;
    GridDomain d;
    d.state_ = std::move(state);
    return d;
}

SymOperator assemble_laplacian(const GridDomain& domain) {
    const GridSpec& s = domain.spec();
    const int n = domain.size();
    const double inv_h2 = 1.0 / (s.h * s.h);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 2.0 * s.dimension * inv_h2;
        const int ix = domain.site_x(i), iy = domain.site_y(i);
        // only the +x / +y neighbors; the mirror entry is written symmetrically
        const int jx = domain.index_at(ix + 1, iy);
        if (jx >= 0) { A(i, jx) = -inv_h2; A(jx, i) = -inv_h2; }
        if (s.dimension == 2) {
            const int jy = domain.index_at(ix, iy + 1);
            if (jy >= 0) { A(i, jy) = -inv_h2; A(jy, i) = -inv_h2; }
        }
    }
    return {domain, std::move(A)};
}

namespace {

template <class Vec>
double lp_norm_impl(const Vec& v, double p, double weight) {
    if (std::isnan(p) || p < 1.0) throw InvalidExponent("p must lie in [1, inf]");
    if (std::isinf(p)) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
        return m;
    }
    if (p == 2.0) return std::sqrt(weight) * v.norm();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), p);
    return std::pow(weight * acc, 1.0 / p);
}

} // namespace

double lp_norm(const Field& f, double p) {
    return lp_norm_impl(f.values, p, f.domain.cell_weight());
}

double lp_norm(const ComplexField& f, double p) {
    return lp_norm_impl(f.values, p, f.domain.cell_weight());
}

double inner_product(const Field& u, const Field& v) {
    if (!u.domain.same_as(v.domain)) throw DomainMismatch("inner_product domains differ");
    return u.domain.cell_weight() * u.values.dot(v.values);
}

std::complex<double> inner_product(const ComplexField& u, const ComplexField& v) {
    if (!u.domain.same_as(v.domain)) throw DomainMismatch("inner_product domains differ");
    // Eigen's dot conjugates the first argument; <u,v> = sum u conj(v)
    return u.domain.cell_weight() * v.values.dot(u.values);
}

namespace detail {

Eigen::VectorXd columnwise_lp(const Eigen::MatrixXd& values, double p, double weight) {
    if (std::isnan(p) || p < 1.0) throw InvalidExponent("p must lie in [1, inf]");
    if (std::isinf(p)) return values.cwiseAbs().colwise().maxCoeff().transpose();
    if (p == 2.0) return std::sqrt(weight) * values.colwise().norm().transpose();
    if (p == 1.0) return weight * values.cwiseAbs().colwise().sum().transpose();
    Eigen::VectorXd out(values.cols());
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < values.rows(); ++r)
            acc += std::pow(std::abs(values(r, c)), p);
        out[c] = std::pow(weight * acc, 1.0 / p);
    }
    return out;
}

} // namespace detail
} // namespace besovlab
