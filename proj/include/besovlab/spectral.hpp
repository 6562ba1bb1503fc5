#pragma once

#include <functional>

#include "besovlab/grid.hpp"

namespace besovlab {

/// Scalar symbol evaluated on the spectrum.
using Symbol = std::function<double(double)>;

/// Full eigendecomposition of a symmetric operator, with eigenvectors
/// orthonormal in the discrete L^2 inner product <u,v> = h^d sum u_i v_i.
/// Immutable; cheap to copy and safe to share across threads.
class SpectralDecomposition {
  public:
    SpectralDecomposition() = default;

    const GridDomain& domain() const { return state_->domain; }
    int size() const { return static_cast<int>(state_->eigenvalues.size()); }

    /// Ascending eigenvalues, all strictly positive for the Dirichlet Laplacian.
    const Eigen::VectorXd& eigenvalues() const { return state_->eigenvalues; }

    /// Columns are L^2(h^d)-orthonormal eigenvectors.
    const Eigen::MatrixXd& eigenvectors() const { return state_->eigenvectors; }

    Field eigenfield(int k) const {
        return {state_->domain, state_->eigenvectors.col(k)};
    }

    /// Coefficients c_k = <f, v_k>.
    Eigen::VectorXd to_coeffs(const Field& f) const {
        require(f);
        return state_->domain.cell_weight() * (state_->eigenvectors.transpose() * f.values);
    }
    Eigen::VectorXcd to_coeffs(const ComplexField& f) const {
        if (!f.domain.same_as(state_->domain))
            throw DomainMismatch("field belongs to a different domain");
        return state_->domain.cell_weight() * (state_->eigenvectors.transpose() * f.values);
    }

    Field from_coeffs(const Eigen::VectorXd& c) const {
        return {state_->domain, state_->eigenvectors * c};
    }

    void require(const Field& f) const {
        if (!f.domain.same_as(state_->domain))
            throw DomainMismatch("field belongs to a different domain");
    }

  private:
    friend SpectralDecomposition decompose(const SymOperator& A);

    struct State {
        GridDomain domain;
        Eigen::VectorXd eigenvalues;
        Eigen::MatrixXd eigenvectors;
    };
    std::shared_ptr<const State> state_;
};

/// Dense symmetric eigendecomposition.
/// Throws NotSymmetric for asymmetric input and ConvergenceFailure when
/// the residual ||A v - lambda v||_2 exceeds 1e-8 * lambda_max.
SpectralDecomposition decompose(const SymOperator& A);

/// g(A) f = sum_k g(lambda_k) <f, v_k> v_k.
/// Throws NonFiniteSymbol if g is NaN/inf at an eigenvalue.
Field apply_function(const SpectralDecomposition& dec, const Symbol& g, const Field& f);
ComplexField apply_function(const SpectralDecomposition& dec, const Symbol& g,
                            const ComplexField& f);

/// A^{alpha/2} f (any real alpha; the spectrum is strictly positive).
Field fractional_power(const SpectralDecomposition& dec, double alpha, const Field& f);

/// e^{-t A^{alpha/2}} f. Throws NegativeTime for t < 0.
Field semigroup_apply(const SpectralDecomposition& dec, double t, double alpha, const Field& f);

/// Dense matrix of g(A) in cell coordinates, sum_k g(lambda_k) h^d v_k v_k^T.
SymOperator symbol_matrix(const SpectralDecomposition& dec, const Symbol& g);

/// Dense matrix of e^{-t A^{alpha/2}}; entries / h^d approximate the
/// continuum kernel for alpha = 2. Throws NegativeTime for t <= 0.
SymOperator kernel_matrix(const SpectralDecomposition& dec, double t, double alpha);

/// Per-eigenvalue weights of a symbol, with the finiteness check.
Eigen::VectorXd symbol_weights(const SpectralDecomposition& dec, const Symbol& g);

} // namespace besovlab
