#include "besovlab/spectral.hpp"

#include <cmath>

namespace besovlab {

SpectralDecomposition decompose(const SymOperator& A) {
    const Eigen::MatrixXd& M = A.matrix;
    if (M.rows() != M.cols() || M.rows() != A.domain.size())
        throw NotSymmetric("operator matrix has wrong shape");
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym != 0.0)
        throw NotSymmetric("max |M_ij - M_ji| = " + std::to_string(asym));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
    if (solver.info() != Eigen::Success)
        throw ConvergenceFailure("eigensolver did not converge");

    auto state = std::make_shared<SpectralDecomposition::State>();
    state->domain = A.domain;
    state->eigenvalues = solver.eigenvalues();
    // rescale to L^2(h^d)-orthonormal columns
    state->eigenvectors = solver.eigenvectors() / std::sqrt(A.domain.cell_weight());

    const double lam_max = std::abs(state->eigenvalues[state->eigenvalues.size() - 1]);
    const double tol = 1e-8 * lam_max;
    const double w = std::sqrt(A.domain.cell_weight());
    for (int k = 0; k < state->eigenvalues.size(); ++k) {
        const double resid =
            w * (M * state->eigenvectors.col(k) -
                 state->eigenvalues[k] * state->eigenvectors.col(k)).norm();
        if (!(resid <= tol))
            throw ConvergenceFailure("residual " + std::to_string(resid) +
                                     " exceeds " + std::to_string(tol));
    }

    SpectralDecomposition dec;
    dec.state_ = std::move(state);
    return dec;
}

Eigen::VectorXd symbol_weights(const SpectralDecomposition& dec, const Symbol& g) {
    const Eigen::VectorXd& lam = dec.eigenvalues();
    Eigen::VectorXd w(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        w[k] = g(lam[k]);
        if (!std::isfinite(w[k]))
            throw NonFiniteSymbol("symbol not finite at eigenvalue " + std::to_string(lam[k]));
    }
    return w;
}

Field apply_function(const SpectralDecomposition& dec, const Symbol& g, const Field& f) {
    dec.require(f);
    Eigen::VectorXd c = dec.to_coeffs(f);
    c.array() *= symbol_weights(dec, g).array();
    return dec.from_coeffs(c);
}

ComplexField apply_function(const SpectralDecomposition& dec, const Symbol& g,
                            const ComplexField& f) {
    Eigen::VectorXcd c = dec.to_coeffs(f);
    c.array() *= symbol_weights(dec, g).cast<std::complex<double>>().array();
    return {dec.domain(), dec.eigenvectors() * c};
}

Field fractional_power(const SpectralDecomposition& dec, double alpha, const Field& f) {
    return apply_function(dec, [alpha](double lam) { return std::pow(lam, alpha / 2.0); }, f);
}

Field semigroup_apply(const SpectralDecomposition& dec, double t, double alpha, const Field& f) {
    if (t < 0.0) throw NegativeTime("semigroup time t = " + std::to_string(t));
    if (t == 0.0) { dec.require(f); return f; }
    return apply_function(
        dec, [t, alpha](double lam) { return std::exp(-t * std::pow(lam, alpha / 2.0)); }, f);
}

SymOperator symbol_matrix(const SpectralDecomposition& dec, const Symbol& g) {
    const Eigen::VectorXd w = symbol_weights(dec, g) * dec.domain().cell_weight();
    const Eigen::MatrixXd& V = dec.eigenvectors();
    Eigen::MatrixXd M = V * w.asDiagonal() * V.transpose();
    // exact symmetry, as the SymOperator contract requires
    M = 0.5 * (M + M.transpose()).eval();
    return {dec.domain(), std::move(M)};
}

SymOperator kernel_matrix(const SpectralDecomposition& dec, double t, double alpha) {
    if (t <= 0.0) throw NegativeTime("kernel_matrix requires t > 0");
    return symbol_matrix(
        dec, [t, alpha](double lam) { return std::exp(-t * std::pow(lam, alpha / 2.0)); });
}

} // namespace besovlab
