#pragma once

#include "besovlab/besov.hpp"
#include "besovlab/report.hpp"

namespace besovlab {

/// A real-interpolation couple of Besov spaces sharing p.
struct InterpolationCouple {
    double p = 2.0;
    double s0 = 0.0, q0 = 2.0; // first endpoint
    double s1 = 1.0, q1 = 2.0; // second endpoint
    double theta = 0.5;        // interpolation parameter in (0, 1)
    double q = 2.0;            // target index
    bool homogeneous = true;

    double interpolated_s() const { return (1.0 - theta) * s0 + theta * s1; }
    void validate() const {
        if (s0 == s1) throw InvalidExponent("interpolation couple requires s0 != s1");
        if (!(theta > 0.0) || !(theta < 1.0))
            throw InvalidExponent("interpolation parameter must lie in (0, 1)");
    }
};

/// Precomputed endpoint norms of every dyadic threshold splitting of a
/// field: candidate c splits f = a0 + a1 along a cut frequency, with both
/// orientations. Evaluating K(t) is then a minimum over candidates.
class ThresholdSplittings {
  public:
    ThresholdSplittings(const BlockEvaluator& eval, const Eigen::VectorXd& coeffs,
                        const InterpolationCouple& couple);

    /// min over splittings of ||a0||_{s0,p,q0} + t ||a1||_{s1,p,q1}.
    double k_at(double t) const;

    /// Saturation scales: K(t) = t * slope_at_zero for small t and
    /// K(t) = level_at_inf for large t.
    double low_slope() const { return low_slope_; }
    double high_level() const { return high_level_; }

  private:
    std::vector<std::pair<double, double>> costs_; // (||a0||, ||a1||) per candidate
    double low_slope_ = 0.0, high_level_ = 0.0;
};

/// Peetre K-functional by dyadic threshold splitting (an upper bound for
/// the true infimum, equivalent to it within an absolute constant).
double k_functional(const SpectralDecomposition& dec, const DyadicPartition& part,
                    const Field& f, double t, const InterpolationCouple& couple);

/// { int_0^inf (t^{-theta} K(t, f))^q dt/t }^{1/q} by log-trapezoid
/// quadrature with analytic power-law tails.
double interpolation_norm(const SpectralDecomposition& dec, const DyadicPartition& part,
                          const Field& f, const InterpolationCouple& couple);

/// Closed-form single-block constant: the interpolation-to-Besov ratio of a
/// one-block field, (q theta (1-theta))^{-1/q} for finite q and 1 for q = inf.
double single_block_constant(double theta, double q);

/// Ratios interpolation_norm / besov_norm(s, p, q) over an ensemble, plus
/// the single-block constancy check across dyadic levels.
std::vector<ReportRow> verify_interpolation_identity(const BlockEvaluator& eval,
                                                     const Eigen::MatrixXd& ensemble_coeffs,
                                                     const InterpolationCouple& couple);

} // namespace besovlab
