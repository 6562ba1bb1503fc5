#include "besovlab/dyadic.hpp"

#include <cmath>

namespace besovlab {

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double e0 = std::exp(-1.0 / x);
    const double e1 = std::exp(-1.0 / (1.0 - x));
    return e0 / (e0 + e1);
}

double theta_cutoff(double x) {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    return smooth_step(2.0 - x);
}

double phi0(double x) {
    if (x <= 0.5 || x >= 2.0) return 0.0;
    return theta_cutoff(x) - theta_cutoff(2.0 * x);
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t construction_fingerprint() {
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i <= 256; ++i) {
        const double x = 0.25 + (2.25 - 0.25) * i / 256.0;
        const double v[2] = {phi0(x), theta_cutoff(x)};
        h = fnv1a(v, sizeof v, h);
    }
    return h;
}

} // namespace

DyadicPartition build_partition(const SpectralDecomposition& dec) {
    const Eigen::VectorXd& lam = dec.eigenvalues();
    const double f_lo = std::sqrt(lam[0]);
    const double f_hi = std::sqrt(lam[lam.size() - 1]);

    auto state = std::make_shared<DyadicPartition::State>();
    // coverage of [f_lo/2, 2 f_hi] by supp phi_j = [2^{j-1}, 2^{j+1}],
    // then one block of padding per side
    state->j_min = static_cast<int>(std::floor(std::log2(f_lo))) - 1;
    state->j_max = static_cast<int>(std::ceil(std::log2(f_hi))) + 1;

    state->mode_ranges.reserve(state->j_max - state->j_min + 1);
    for (int j = state->j_min; j <= state->j_max; ++j) {
        const double lo = std::ldexp(0.5, j);  // 2^{j-1}
        const double hi = std::ldexp(2.0, j);  // 2^{j+1}
        int first = 0;
        while (first < lam.size() && std::sqrt(lam[first]) <= lo) ++first;
        int last = static_cast<int>(lam.size()) - 1;
        while (last >= 0 && std::sqrt(lam[last]) >= hi) --last;
        state->mode_ranges.emplace_back(first, last);
    }
    state->hash = construction_fingerprint();

    DyadicPartition part;
    part.state_ = std::move(state);
    return part;
}

Field phi_block(const SpectralDecomposition& dec, const DyadicPartition& part, int j,
                const Field& f) {
    dec.require(f);
    if (!part.contains(j)) return Field::zero(dec.domain());
    return apply_function(
        dec, [&part, j](double lam) { return part.phi(j, std::sqrt(lam)); }, f);
}

Field phi_wide_block(const SpectralDecomposition& dec, const DyadicPartition& part, int j,
                     const Field& f) {
    dec.require(f);
    return apply_function(
        dec, [&part, j](double lam) { return part.phi_wide(j, std::sqrt(lam)); }, f);
}

Field psi_low(const SpectralDecomposition& dec, const DyadicPartition& part, const Field& f) {
    dec.require(f);
    return apply_function(dec, [&part](double lam) { return part.psi(lam); }, f);
}

} // namespace besovlab
