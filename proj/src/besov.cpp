#include "besovlab/besov.hpp"

#include <cmath>

namespace besovlab {

double lq_aggregate(const Eigen::VectorXd& vals, double q) {
    if (std::isnan(q) || q < 1.0) throw InvalidExponent("q must lie in [1, inf]");
    if (std::isinf(q)) return vals.size() ? vals.maxCoeff() : 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) acc += std::pow(vals[i], q);
    return std::pow(acc, 1.0 / q);
}

BlockEvaluator::BlockEvaluator(SpectralDecomposition dec, DyadicPartition part)
    : dec_(std::move(dec)), part_(std::move(part)) {
    const Eigen::VectorXd& lam = dec_.eigenvalues();
    phi_weights_.reserve(part_.block_count());
    for (int j = part_.j_min(); j <= part_.j_max(); ++j) {
        auto [k0, k1] = part_.mode_range(j);
        Eigen::VectorXd w(std::max(0, k1 - k0 + 1));
        for (int k = k0; k <= k1; ++k) w[k - k0] = part_.phi(j, std::sqrt(lam[k]));
        phi_weights_.push_back(std::move(w));
    }
    while (psi_modes_ < lam.size() && lam[psi_modes_] < 4.0) ++psi_modes_;
    psi_weights_.resize(psi_modes_);
    for (int k = 0; k < psi_modes_; ++k) psi_weights_[k] = part_.psi(lam[k]);
}

Eigen::MatrixXd BlockEvaluator::block_lp(const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd* mode_scale, double p) const {
    const Eigen::MatrixXd& V = dec_.eigenvectors();
    const double weight = dec_.domain().cell_weight();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(part_.block_count(), C.cols());
    for (int j = part_.j_min(); j <= part_.j_max(); ++j) {
        const int row = j - part_.j_min();
        auto [k0, k1] = part_.mode_range(j);
        const int len = k1 - k0 + 1;
        if (len <= 0) continue;
        Eigen::VectorXd w = phi_weights_[static_cast<std::size_t>(row)];
        if (mode_scale) w.array() *= mode_scale->segment(k0, len).array();
        const Eigen::MatrixXd block =
            V.middleCols(k0, len) * (w.asDiagonal() * C.middleRows(k0, len));
        out.row(row) = detail::columnwise_lp(block, p, weight).transpose();
    }
    return out;
}

Eigen::VectorXd BlockEvaluator::field_lp(const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd* mode_scale, double p) const {
    const Eigen::MatrixXd& V = dec_.eigenvectors();
    Eigen::MatrixXd fields =
        mode_scale ? Eigen::MatrixXd(V * (mode_scale->asDiagonal() * C)) : Eigen::MatrixXd(V * C);
    return detail::columnwise_lp(fields, p, dec_.domain().cell_weight());
}

Eigen::VectorXd BlockEvaluator::psi_lp(const Eigen::MatrixXd& C,
                                       const Eigen::VectorXd* mode_scale, double p) const {
    if (psi_modes_ == 0) return Eigen::VectorXd::Zero(C.cols());
    const Eigen::MatrixXd& V = dec_.eigenvectors();
    Eigen::VectorXd w = psi_weights_;
    if (mode_scale) w.array() *= mode_scale->head(psi_modes_).array();
    const Eigen::MatrixXd low =
        V.leftCols(psi_modes_) * (w.asDiagonal() * C.topRows(psi_modes_));
    return detail::columnwise_lp(low, p, dec_.domain().cell_weight());
}

double BlockEvaluator::aggregate(const Eigen::VectorXd& profile, const BesovParams& prm,
                                 double psi_term) const {
    prm.validate();
    const int j_min = part_.j_min();
    std::vector<double> weighted;
    weighted.reserve(profile.size());
    for (Eigen::Index r = 0; r < profile.size(); ++r) {
        const int j = j_min + static_cast<int>(r);
        if (!prm.homogeneous && j < 1) continue;
        weighted.push_back(std::exp2(prm.s * j) * profile[r]);
    }
    Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(weighted.data(), weighted.size());
    const double tail = lq_aggregate(w, prm.q);
    return prm.homogeneous ? tail : psi_term + tail;
}

Eigen::VectorXd BlockEvaluator::besov_columns(const Eigen::MatrixXd& C,
                                              const Eigen::VectorXd* mode_scale,
                                              const BesovParams& prm) const {
    const Eigen::MatrixXd profiles = block_lp(C, mode_scale, prm.p);
    Eigen::VectorXd psi_terms;
    if (!prm.homogeneous) psi_terms = psi_lp(C, mode_scale, prm.p);
    Eigen::VectorXd out(C.cols());
    for (Eigen::Index c = 0; c < C.cols(); ++c)
        out[c] = aggregate(profiles.col(c), prm, prm.homogeneous ? 0.0 : psi_terms[c]);
    return out;
}

double besov_norm(const SpectralDecomposition& dec, const DyadicPartition& part, const Field& f,
                  const BesovParams& prm) {
    prm.validate();
    BlockEvaluator eval(dec, part);
    return eval.besov_columns(dec.to_coeffs(f), nullptr, prm)[0];
}

double check_embedding(const SpectralDecomposition& dec, const DyadicPartition& part,
                       const Field& f, double r, double s, double p, double q) {
    if (r > p) throw InvalidExponent("embedding requires r <= p");
    const double d = dec.domain().dimension();
    BesovParams coarse{s, p, q, true};
    BesovParams fine{s + d * (1.0 / r - 1.0 / p), r, q, true};
    return besov_norm(dec, part, f, coarse) / besov_norm(dec, part, f, fine);
}

double check_lifting(const SpectralDecomposition& dec, const DyadicPartition& part,
                     const Field& f, double alpha, const BesovParams& prm) {
    if (!prm.homogeneous) throw InvalidExponent("lifting is a homogeneous-norm statement");
    BesovParams lifted{prm.s + alpha, prm.p, prm.q, true};
    return besov_norm(dec, part, fractional_power(dec, alpha, f), prm) /
           besov_norm(dec, part, f, lifted);
}

namespace {

/// sum over blocks of phi_j * Phi_j at each eigenvalue; telescopes to 1
/// on the covered spectrum.
Eigen::VectorXd pairing_weights(const SpectralDecomposition& dec, const DyadicPartition& part) {
    const Eigen::VectorXd& lam = dec.eigenvalues();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(lam.size());
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        const double freq = std::sqrt(lam[k]);
        for (int j = part.j_min(); j <= part.j_max(); ++j)
            w[k] += part.phi(j, freq) * part.phi_wide(j, freq);
    }
    return w;
}

} // namespace

double duality_pairing(const SpectralDecomposition& dec, const DyadicPartition& part,
                       const Field& f, const Field& g) {
    const Eigen::VectorXd cf = dec.to_coeffs(f), cg = dec.to_coeffs(g);
    return (pairing_weights(dec, part).array() * cf.array() * cg.array()).sum();
}

std::complex<double> duality_pairing(const SpectralDecomposition& dec,
                                     const DyadicPartition& part, const ComplexField& f,
                                     const ComplexField& g) {
    const Eigen::VectorXcd cf = dec.to_coeffs(f), cg = dec.to_coeffs(g);
    return (pairing_weights(dec, part).cast<std::complex<double>>().array() * cf.array() *
            cg.array().conjugate())
        .sum();
}

} // namespace besovlab
