#include "besovlab/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "besovlab/semigroup.hpp"

namespace besovlab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

} // namespace

ThresholdSplittings::ThresholdSplittings(const BlockEvaluator& eval,
                                         const Eigen::VectorXd& coeffs,
                                         const InterpolationCouple& couple) {
    couple.validate();
    const SpectralDecomposition& dec = eval.dec();
    const DyadicPartition& part = eval.part();
    const BesovParams prm0{couple.s0, couple.p, couple.q0, couple.homogeneous};
    const BesovParams prm1{couple.s1, couple.p, couple.q1, couple.homogeneous};

    const Eigen::VectorXd& lam = dec.eigenvalues();
    for (int cut = part.j_min() - 1; cut <= part.j_max(); ++cut) {
        // low part sum_{j <= cut} phi_j telescopes to theta(2^{-cut} freq)
        Eigen::VectorXd low(lam.size()), high(lam.size());
        for (Eigen::Index k = 0; k < lam.size(); ++k) {
            const double w = theta_cutoff(std::ldexp(std::sqrt(lam[k]), -cut));
            low[k] = w * coeffs[k];
            high[k] = (1.0 - w) * coeffs[k];
        }
        const double low0 = eval.besov_columns(low, nullptr, prm0)[0];
        const double low1 = eval.besov_columns(low, nullptr, prm1)[0];
        const double high0 = eval.besov_columns(high, nullptr, prm0)[0];
        const double high1 = eval.besov_columns(high, nullptr, prm1)[0];
        costs_.emplace_back(low0, high1);  // low frequencies to the s0 endpoint
        costs_.emplace_back(high0, low1);  // and the reversed orientation
    }

    low_slope_ = kInf;
    high_level_ = kInf;
    for (auto [c0, c1] : costs_) {
        if (c0 == 0.0) low_slope_ = std::min(low_slope_, c1);
        if (c1 == 0.0) high_level_ = std::min(high_level_, c0);
    }
}

double ThresholdSplittings::k_at(double t) const {
    double best = kInf;
    for (auto [c0, c1] : costs_) best = std::min(best, c0 + t * c1);
    return best;
}

double k_functional(const SpectralDecomposition& dec, const DyadicPartition& part,
                    const Field& f, double t, const InterpolationCouple& couple) {
    if (!(t > 0.0)) throw NegativeTime("K-functional requires t > 0");
    BlockEvaluator eval(dec, part);
    return ThresholdSplittings(eval, dec.to_coeffs(f), couple).k_at(t);
}

namespace {

double interpolation_quadrature(const ThresholdSplittings& split,
                                const InterpolationCouple& couple, double t_min, double t_max,
                                int points_per_decade) {
    const double theta = couple.theta, q = couple.q;
    const std::vector<double> grid = geometric_grid(t_min, t_max, points_per_decade);
    if (std::isinf(q)) {
        auto profile = [&](double t) { return std::pow(t, -theta) * split.k_at(t); };
        double sup = std::pow(t_min, 1.0 - theta) * split.low_slope();
        sup = std::max(sup, std::pow(t_max, -theta) * split.high_level());
        std::size_t arg = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (profile(grid[i]) > profile(grid[arg])) arg = i;
        sup = std::max(sup, profile(grid[arg]));
        if (arg > 0 && arg + 1 < grid.size()) {
            // golden-section refinement in log t; the profile has kinks where
            // splitting candidates cross, so a parabola is not enough
            double lo = std::log(grid[arg - 1]), hi = std::log(grid[arg + 1]);
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            double f1 = profile(std::exp(x1)), f2 = profile(std::exp(x2));
            for (int it = 0; it < 90; ++it) {
                if (f1 < f2) {
                    lo = x1; x1 = x2; f1 = f2;
                    x2 = lo + gr * (hi - lo);
                    f2 = profile(std::exp(x2));
                } else {
                    hi = x2; x2 = x1; f2 = f1;
                    x1 = hi - gr * (hi - lo);
                    f1 = profile(std::exp(x1));
                }
            }
            sup = std::max({sup, f1, f2});
        }
        return sup;
    }
    double acc = 0.0;
    double prev_t = grid[0];
    double prev_f = std::pow(std::pow(prev_t, -theta) * split.k_at(prev_t), q);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double t = grid[i];
        const double f = std::pow(std::pow(t, -theta) * split.k_at(t), q);
        acc += 0.5 * (prev_f + f) * std::log(t / prev_t);
        prev_t = t;
        prev_f = f;
    }
    // analytic power-law tails where K has saturated
    acc += std::pow(std::pow(t_min, 1.0 - theta) * split.low_slope(), q) / ((1.0 - theta) * q);
    acc += std::pow(std::pow(t_max, -theta) * split.high_level(), q) / (theta * q);
    return std::pow(acc, 1.0 / q);
}

} // namespace

double interpolation_norm(const SpectralDecomposition& dec, const DyadicPartition& part,
                          const Field& f, const InterpolationCouple& couple) {
    couple.validate();
    BlockEvaluator eval(dec, part);
    ThresholdSplittings split(eval, dec.to_coeffs(f), couple);
    if (!(split.high_level() > 0.0)) return 0.0; // zero field
    const double t_star = split.high_level() / split.low_slope();
    const double t_min = 1e-4 * t_star / 256.0;
    const double t_max = 1e4 * t_star * 256.0;
    // K has kinks where splitting candidates cross, so the trapezoid rule
    // converges only quadratically there; a denser grid keeps the doubling
    // drift inside the 1e-4 contract
    const double coarse = interpolation_quadrature(split, couple, t_min, t_max, 160);
    const double fine = interpolation_quadrature(split, couple, t_min, t_max, 320);
    if (std::abs(fine - coarse) > 1e-4 * std::max(fine, 1e-300))
        throw QuadratureUnresolved("interpolation integral moved by > 1e-4 under doubling");
    return fine;
}

double single_block_constant(double theta, double q) {
    if (std::isinf(q)) return 1.0;
    return std::pow(q * theta * (1.0 - theta), -1.0 / q);
}

std::vector<ReportRow> verify_interpolation_identity(const BlockEvaluator& eval,
                                                     const Eigen::MatrixXd& ensemble_coeffs,
                                                     const InterpolationCouple& couple) {
    couple.validate();
    const SpectralDecomposition& dec = eval.dec();
    const DyadicPartition& part = eval.part();
    const BesovParams target{couple.interpolated_s(), couple.p, couple.q, couple.homogeneous};

    std::vector<ReportRow> rows;
    double bracket = 0.0;
    for (Eigen::Index c = 0; c < ensemble_coeffs.cols(); ++c) {
        const Field f = dec.from_coeffs(ensemble_coeffs.col(c));
        const double base = besov_norm(dec, part, f, target);
        if (!(base > 0.0)) continue;
        const double value = interpolation_norm(dec, part, f, couple);
        bracket = std::max({bracket, value / base, base / value});
    }
    rows.push_back(ReportRow::bounded("interpolation_bracket",
                                      {{"theta", couple.theta},
                                       {"q", std::isinf(couple.q) ? -1.0 : couple.q},
                                       {"s0", couple.s0},
                                       {"s1", couple.s1}},
                                      bracket, 20.0));

    // near-dyadic eigenmodes are single-block fields up to flat-edge leakage;
    // their ratio should match the scalar constant uniformly across levels.
    // Inhomogeneous couples see the extra psi term below j = 2, so the scan
    // starts above the cutoff band.
    const double expect = single_block_constant(couple.theta, couple.q);
    double worst_dev = 0.0;
    int levels = 0;
    const int j_start = couple.homogeneous ? part.j_min() + 1 : 2;
    for (int j = std::max(j_start, part.j_min() + 1); j < part.j_max(); ++j) {
        const double target_freq = std::exp2(j);
        int k_best = -1;
        double best = 0.03; // accept modes within 3% of the dyadic point
        for (int k = 0; k < dec.size(); ++k) {
            const double rel =
                std::abs(std::sqrt(dec.eigenvalues()[k]) / target_freq - 1.0);
            if (rel < best) { best = rel; k_best = k; }
        }
        if (k_best < 0) continue;
        const Field v = dec.eigenfield(k_best);
        const double ratio = interpolation_norm(dec, part, v, couple) /
                             besov_norm(dec, part, v, target);
        worst_dev = std::max(worst_dev, std::abs(ratio / expect - 1.0));
        rows.push_back(ReportRow::checked("interpolation_single_block",
                                          {{"j", j}, {"mode", k_best}}, ratio, expect,
                                          0.01 * expect));
        ++levels;
    }
    if (levels > 1)
        rows.push_back(ReportRow::bounded("interpolation_block_constancy",
                                          {{"levels", levels}}, worst_dev, 0.01));
    return rows;
}

} // namespace besovlab
