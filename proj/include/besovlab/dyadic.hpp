#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "besovlab/spectral.hpp"

namespace besovlab {

/// C^infinity step: 0 for x <= 0, 1 for x >= 1, strictly increasing between.
/// Built from e(x) = exp(-1/x): s(x) = e(x) / (e(x) + e(1-x)).
double smooth_step(double x);

/// theta(x) = smooth_step(2 - x): identically 1 for x <= 1, identically 0
/// for x >= 2. The branches return exact 0/1 before touching exp.
double theta_cutoff(double x);

/// Dyadic bump phi0(x) = theta(x) - theta(2x): supported in [1/2, 2],
/// phi0(1) = 1, and sum_j phi0(2^-j x) telescopes to 1 for x > 0.
double phi0(double x);

/// Dyadic partition of unity on the frequency axis, evaluated against a
/// fixed spectral decomposition. freq arguments below are sqrt(eigenvalue).
class DyadicPartition {
  public:
    DyadicPartition() = default;

    int j_min() const { return state_->j_min; }
    int j_max() const { return state_->j_max; }
    int block_count() const { return state_->j_max - state_->j_min + 1; }
    bool contains(int j) const { return j >= state_->j_min && j <= state_->j_max; }

    /// phi_j(freq) = phi0(2^-j freq).
    double phi(int j, double freq) const { return phi0(std::ldexp(freq, -j)); }

    /// Phi_j = phi_{j-1} + phi_j + phi_{j+1}.
    double phi_wide(int j, double freq) const {
        return phi(j - 1, freq) + phi(j, freq) + phi(j + 1, freq);
    }

    /// Low-frequency cutoff psi(mu) = theta(sqrt|mu|); psi(freq^2) + sum_{j>=1} phi_j(freq) = 1.
    double psi(double mu) const { return theta_cutoff(std::sqrt(std::abs(mu))); }

    /// Eigenvalue-index range [first, last] of modes with phi_j(sqrt(lambda)) != 0;
    /// first > last means the block is empty on this spectrum.
    std::pair<int, int> mode_range(int j) const {
        return state_->mode_ranges[static_cast<std::size_t>(j - state_->j_min)];
    }

    /// FNV-1a over fixed samples of theta and phi0; reports embed it so
    /// measured constants are comparable only across identical constructions.
    std::uint64_t construction_hash() const { return state_->hash; }

  private:
    friend DyadicPartition build_partition(const SpectralDecomposition& dec);

    struct State {
        int j_min = 0, j_max = 0;
        std::vector<std::pair<int, int>> mode_ranges;
        std::uint64_t hash = 0;
    };
    std::shared_ptr<const State> state_;
};

/// Chooses j_range so that [sqrt(lambda_1)/2, 2 sqrt(lambda_n)] is covered
/// by the supports of phi_j, with one block of padding on each side so the
/// Phi_j neighbors of every active block exist.
DyadicPartition build_partition(const SpectralDecomposition& dec);

/// Spectral block phi_j(sqrt A) f; zero field for j outside j_range.
Field phi_block(const SpectralDecomposition& dec, const DyadicPartition& part, int j,
                const Field& f);

/// Phi_j(sqrt A) f with Phi_j = phi_{j-1} + phi_j + phi_{j+1}.
Field phi_wide_block(const SpectralDecomposition& dec, const DyadicPartition& part, int j,
                     const Field& f);

/// psi(A) f, the low-frequency part of the inhomogeneous decomposition.
Field psi_low(const SpectralDecomposition& dec, const DyadicPartition& part, const Field& f);

} // namespace besovlab
