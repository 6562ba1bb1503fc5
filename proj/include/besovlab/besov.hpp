#pragma once

#include <optional>

#include "besovlab/dyadic.hpp"

namespace besovlab {

struct BesovParams {
    double s = 0.0;
    double p = 2.0; // [1, inf]
    double q = 2.0; // [1, inf]
    bool homogeneous = true;

    void validate() const {
        if (std::isnan(p) || p < 1.0 || std::isnan(q) || q < 1.0)
            throw InvalidExponent("Besov exponents must lie in [1, inf]");
    }
};

/// l^q aggregation of a nonnegative sequence (max for q = inf).
double lq_aggregate(const Eigen::VectorXd& vals, double q);

/// Batched evaluator of block L^p profiles for many fields at once.
/// Fields are held as eigencoefficient columns; physical block fields are
/// reconstructed per dyadic block with one GEMM over the block's mode range.
class BlockEvaluator {
  public:
    BlockEvaluator(SpectralDecomposition dec, DyadicPartition part);

    const SpectralDecomposition& dec() const { return dec_; }
    const DyadicPartition& part() const { return part_; }
    int block_count() const { return part_.block_count(); }

    /// Block L^p norms of the fields with coefficients C (n x m), after an
    /// optional per-mode scaling (a spectral multiplier applied to every
    /// field). Returns a (block_count x m) matrix; row j-j_min is block j.
    Eigen::MatrixXd block_lp(const Eigen::MatrixXd& C, const Eigen::VectorXd* mode_scale,
                             double p) const;

    /// Plain field L^p norms (1 x m) after the optional mode scaling.
    Eigen::VectorXd field_lp(const Eigen::MatrixXd& C, const Eigen::VectorXd* mode_scale,
                             double p) const;

    /// L^p norms of the low-frequency parts psi(A) f.
    Eigen::VectorXd psi_lp(const Eigen::MatrixXd& C, const Eigen::VectorXd* mode_scale,
                           double p) const;

    /// Besov aggregation of one profile column (+ psi term when inhomogeneous).
    double aggregate(const Eigen::VectorXd& profile, const BesovParams& prm,
                     double psi_term = 0.0) const;

    /// Besov norms of every column.
    Eigen::VectorXd besov_columns(const Eigen::MatrixXd& C, const Eigen::VectorXd* mode_scale,
                                  const BesovParams& prm) const;

  private:
    SpectralDecomposition dec_;
    DyadicPartition part_;
    std::vector<Eigen::VectorXd> phi_weights_; // per block, over its mode range
    Eigen::VectorXd psi_weights_;              // over [0, psi_modes_)
    int psi_modes_ = 0;
};

/// || {2^{sj} ||phi_j(sqrt A) f||_p}_j ||_{l^q}; the inhomogeneous variant
/// adds ||psi(A) f||_p and restricts the sum to j >= 1.
double besov_norm(const SpectralDecomposition& dec, const DyadicPartition& part, const Field& f,
                  const BesovParams& prm);

/// Embedding ratio ||f||_{s,p,q} / ||f||_{s + d(1/r - 1/p), r, q}, r <= p.
double check_embedding(const SpectralDecomposition& dec, const DyadicPartition& part,
                       const Field& f, double r, double s, double p, double q);

/// Lifting ratio ||A^{alpha/2} f||_{s,p,q} / ||f||_{s+alpha,p,q}.
double check_lifting(const SpectralDecomposition& dec, const DyadicPartition& part,
                     const Field& f, double alpha, const BesovParams& prm);

/// sum_j <phi_j(sqrt A) f, Phi_j(sqrt A) g>; equals the L^2 pairing.
double duality_pairing(const SpectralDecomposition& dec, const DyadicPartition& part,
                       const Field& f, const Field& g);
std::complex<double> duality_pairing(const SpectralDecomposition& dec,
                                     const DyadicPartition& part, const ComplexField& f,
                                     const ComplexField& g);

} // namespace besovlab
