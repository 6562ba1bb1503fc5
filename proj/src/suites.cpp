#include "besovlab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>

namespace besovlab {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct SuiteContext {
    ExperimentConfig cfg;
    GridDomain domain;
    SpectralDecomposition dec;
    DyadicPartition part;
    std::shared_ptr<BlockEvaluator> eval;
    Ensemble ens;

    // wide-interval companion with spectrum below the low-frequency cutoff
    SpectralDecomposition wide_dec;
    std::shared_ptr<BlockEvaluator> wide_eval;
    Ensemble wide_ens;

    std::uint64_t suite_seed(const std::string& name) const {
        return cfg.seed ^ fnv1a_bytes(name.data(), name.size());
    }
};

using SuiteFn =
    std::function<std::vector<ReportRow>(SuiteContext&, std::vector<RatePlot>&)>;

struct SuiteEntry {
    std::string name;
    std::string description;
    SuiteFn run;
    bool needs_wide = false;
};

std::vector<double> boundedness_times(const SpectralDecomposition& dec, double alpha) {
    const double lam1 = dec.eigenvalues()[0];
    const double lam_top = dec.eigenvalues()[dec.size() - 1];
    std::vector<double> ts = {0.0};
    for (double t : geometric_grid(1e-3 * std::pow(lam_top, -alpha / 2.0),
                                   4.0 * std::pow(lam1, -alpha / 2.0), 2))
        ts.push_back(t);
    return ts;
}

std::vector<double> descending_times(const SpectralDecomposition& dec, double alpha) {
    const double lam1 = dec.eigenvalues()[0];
    const double lam_top = dec.eigenvalues()[dec.size() - 1];
    std::vector<double> ts = geometric_grid(1e-9 * std::pow(lam_top, -alpha / 2.0),
                                            std::pow(lam1, -alpha / 2.0), 2);
    std::reverse(ts.begin(), ts.end());
    return ts;
}

// ---------------------------------------------------------------- suites --

std::vector<ReportRow> suite_partition(SuiteContext& ctx, std::vector<RatePlot>&) {
    const auto& lam = ctx.dec.eigenvalues();
    double worst_hom = 0.0, worst_inhom = 0.0;
    int worst_active = 0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        const double freq = std::sqrt(lam[k]);
        double sum = 0.0;
        int active = 0;
        for (int j = ctx.part.j_min(); j <= ctx.part.j_max(); ++j) {
            const double v = ctx.part.phi(j, freq);
            sum += v;
            if (v != 0.0) ++active;
        }
        worst_hom = std::max(worst_hom, std::abs(sum - 1.0));
        worst_active = std::max(worst_active, active);

        double inhom = ctx.part.psi(lam[k]);
        for (int j = 1; j <= ctx.part.j_max(); ++j) inhom += ctx.part.phi(j, freq);
        worst_inhom = std::max(worst_inhom, std::abs(inhom - 1.0));
    }
    std::vector<ReportRow> rows;
    rows.push_back(
        ReportRow::bounded("partition", {{"check", "dyadic_sum"}}, worst_hom, 1e-12));
    rows.push_back(
        ReportRow::bounded("partition", {{"check", "low_freq_sum"}}, worst_inhom, 1e-12));
    rows.push_back(
        ReportRow::bounded("partition", {{"check", "active_blocks"}}, worst_active, 2.0));
    return rows;
}

std::vector<ReportRow> suite_spectral(SuiteContext& ctx, std::vector<RatePlot>&) {
    const auto& lam = ctx.dec.eigenvalues();
    const auto& V = ctx.dec.eigenvectors();
    const int n = ctx.dec.size();
    const double w = ctx.domain.cell_weight();
    std::vector<ReportRow> rows;

    const Eigen::MatrixXd gram = w * V.transpose() * V;
    rows.push_back(ReportRow::bounded(
        "spectral", {{"check", "orthonormality"}},
        (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10));

    const Eigen::MatrixXd A = assemble_laplacian(ctx.domain).matrix;
    double worst_resid = 0.0;
    for (int k = 0; k < n; ++k)
        worst_resid = std::max(
            worst_resid, std::sqrt(w) * (A * V.col(k) - lam[k] * V.col(k)).norm());
    rows.push_back(ReportRow::bounded("spectral", {{"check", "residual"}}, worst_resid,
                                      1e-8 * lam[n - 1]));

    ReportRow positive =
        ReportRow::measured("spectral", {{"check", "positivity"}}, lam[0]);
    positive.pass = lam[0] > 0.0;
    rows.push_back(positive);

    const GridSpec& spec = ctx.domain.spec();
    const bool full_mask =
        std::all_of(spec.mask.begin(), spec.mask.end(), [](auto m) { return m != 0; });
    if (spec.dimension == 1 && full_mask) {
        const double h = spec.h;
        double worst_rel = 0.0;
        // closed form on (0, L): (4/h^2) sin^2(k pi h / (2 L)), L = (n+1) h
        for (int k = 1; k <= n; ++k) {
            const double lamk =
                4.0 / (h * h) * std::pow(std::sin(k * M_PI / (2.0 * (n + 1))), 2);
            worst_rel = std::max(worst_rel, std::abs(lam[k - 1] - lamk) / lamk);
        }
        rows.push_back(
            ReportRow::bounded("spectral", {{"check", "closed_form"}}, worst_rel, 1e-8));

        const double length = (n + 1) * h;
        const double continuum = M_PI * M_PI / (length * length);
        // second-order stencil: relative error (pi h/L)^2 / 12 + O(h^4);
        // the 1% refinement target applies once the grid resolves it
        const double stencil = std::pow(M_PI / (n + 1), 2) / 6.0;
        rows.push_back(ReportRow::bounded("spectral", {{"check", "ground_state"}},
                                          std::abs(lam[0] - continuum) / continuum,
                                          std::max(0.01, stencil)));
    }
    return rows;
}

std::vector<ReportRow> suite_lp(SuiteContext& ctx, std::vector<RatePlot>&) {
    const int d = ctx.domain.dimension();
    const double h = ctx.domain.h();
    double worst = 0.0;
    const int m = std::min<int>(16, ctx.ens.size());
    for (int c = 0; c < m; ++c) {
        const Field f = ctx.dec.from_coeffs(ctx.ens.coeffs.col(c));
        const double sup = lp_norm(f, kInf);
        for (double p : {1.0, 1.5, 2.0, 4.0})
            worst = std::max(worst, sup / (std::pow(h, -d / p) * lp_norm(f, p)));
    }
    std::vector<ReportRow> rows;
    rows.push_back(
        ReportRow::bounded("lp", {{"check", "hoelder_monotonicity"}}, worst, 1.0 + 1e-12));
    return rows;
}

std::vector<ReportRow> suite_multiplier(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<int> j_list;
    for (int j = ctx.part.j_min(); j <= ctx.part.j_max(); ++j) {
        auto [k0, k1] = ctx.part.mode_range(j);
        if (k1 >= k0) j_list.push_back(j);
    }
    const int j_mid = j_list[j_list.size() / 2];
    std::vector<SymbolFamily> symbols;
    symbols.push_back({"one", [](double) { return 1.0; }});
    for (double alpha : ctx.cfg.alphas) {
        const double t0 = std::exp2(-alpha * j_mid);
        symbols.push_back({"heat_a" + format_double(alpha),
                           [t0, alpha](double freq) {
                               return std::exp(-t0 * std::pow(freq, alpha));
                           },
                           j_mid, 3});
    }
    return verify_scaled_multiplier(ctx.dec, ctx.part, symbols, j_list, {1.0, 2.0, kInf},
                                    MultiplierParams::defaults(ctx.domain.dimension()));
}

std::vector<ReportRow> suite_factorization(SuiteContext& ctx, std::vector<RatePlot>&) {
    const MultiplierParams prm = MultiplierParams::defaults(ctx.domain.dimension());
    std::vector<int> j_list;
    for (int j = ctx.part.j_min(); j <= ctx.part.j_max(); ++j) {
        auto [k0, k1] = ctx.part.mode_range(j);
        if (k1 >= k0) j_list.push_back(j);
    }
    std::vector<std::pair<std::string, std::function<double(double)>>> gs = {
        {"one", [](double) { return 1.0; }},
        {"decay", [](double lam) { return 1.0 / (1.0 + lam); }},
        {"zero", [](double) { return 0.0; }},
    };
    std::vector<ReportRow> rows;
    for (std::size_t gi = 0; gi < gs.size(); ++gi) {
        for (int pick : {0, static_cast<int>(j_list.size()) / 2,
                         static_cast<int>(j_list.size()) - 1}) {
            const int j = j_list[static_cast<std::size_t>(pick)];
            auto bump = [&](double lam) {
                const double x = std::ldexp(lam, -2 * j);
                return x > 0.0 ? phi0(std::sqrt(x)) : 0.0;
            };
            double scale = 0.0;
            for (int k = 0; k < ctx.dec.size(); ++k)
                scale = std::max(scale, std::abs(gs[gi].second(ctx.dec.eigenvalues()[k]) *
                                                 bump(ctx.dec.eigenvalues()[k])));
            const double dev =
                verify_resolvent_factorization(ctx.dec, gs[gi].second, j, prm);
            rows.push_back(ReportRow::bounded("factorization",
                                              {{"G", gs[gi].first}, {"j", j}}, dev,
                                              1e-8 * std::max(scale, 1e-3)));
        }
    }
    return rows;
}

std::vector<ReportRow> suite_amalgam(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<double> thetas;
    const int sweep = ctx.domain.dimension() == 1 ? 5 : 3;
    for (int j = 0; j <= sweep; ++j) thetas.push_back(std::pow(4.0, -j));
    auto gaussian_profile = [](double x) { return std::exp(-0.5 * x * x); };
    return verify_amalgam_lemma(ctx.dec, gaussian_profile,
                                MultiplierParams::defaults(ctx.domain.dimension()), thetas);
}

std::vector<ReportRow> suite_gaussian(SuiteContext& ctx, std::vector<RatePlot>&) {
    const double h = ctx.domain.h();
    const double lam1 = ctx.dec.eigenvalues()[0];
    std::vector<double> ts = {h * h, 4 * h * h, 16 * h * h, 64 * h * h};
    ts.push_back(0.25 / lam1);
    return verify_gaussian_bound(ctx.dec, ts);
}

std::vector<ReportRow> suite_block_decay(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    for (double alpha : ctx.cfg.alphas) {
        auto sub = verify_block_decay(*ctx.eval, ctx.ens, alpha, 2.0, 1.0);
        rows.insert(rows.end(), sub.begin(), sub.end());
    }
    auto sup_rows = verify_block_decay(*ctx.eval, ctx.ens, 2.0, kInf, 0.0);
    rows.insert(rows.end(), sup_rows.begin(), sup_rows.end());
    return rows;
}

std::vector<ReportRow> suite_boundedness(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    const std::vector<std::array<double, 3>> cases = {
        {0.0, 2.0, 2.0}, {0.5, 1.0, 1.0}, {-0.5, kInf, kInf}, {1.0, 2.0, kInf}};
    for (double alpha : ctx.cfg.alphas) {
        const auto t_list = boundedness_times(ctx.dec, alpha);
        for (const auto& c : cases) {
            auto sub =
                verify_boundedness(*ctx.eval, ctx.ens, c[0], c[1], c[2], alpha, t_list);
            rows.insert(rows.end(), sub.begin(), sub.end());
            if (c[0] == 0.0 && c[1] == 2.0 && c[2] == 2.0) {
                // spectral contraction is exact at s=0, p=q=2
                const double sup = rows.back().value;
                rows.push_back(ReportRow::bounded("boundedness_contraction",
                                                  {{"alpha", alpha}}, sup, 1.0 + 1e-10));
            }
        }
    }
    return rows;
}

std::vector<ReportRow> suite_smoothing(SuiteContext& ctx, std::vector<RatePlot>& plots) {
    std::vector<SmoothingCase> cases;
    const int d = ctx.domain.dimension();
    auto has_alpha = [&](double a) {
        return std::find(ctx.cfg.alphas.begin(), ctx.cfg.alphas.end(), a) !=
               ctx.cfg.alphas.end();
    };
    if (d == 1) {
        if (has_alpha(2.0)) {
            SmoothingCase c1;
            c1.alpha = 2.0; c1.p1 = 1.0; c1.p2 = kInf;
            cases.push_back(c1);
            SmoothingCase c3;
            c3.alpha = 2.0; c3.p1 = 2.0; c3.p2 = kInf; c3.s1 = 0.0; c3.s2 = 1.0;
            cases.push_back(c3);
            SmoothingCase flat;
            flat.alpha = 2.0; // p1 = p2, s1 = s2: reduces to boundedness, slope 0
            cases.push_back(flat);
        }
        if (has_alpha(1.0)) {
            SmoothingCase c2;
            c2.alpha = 1.0; c2.p1 = 2.0; c2.p2 = 2.0; c2.s1 = 0.0; c2.s2 = 1.0;
            cases.push_back(c2);
        }
    } else if (has_alpha(2.0)) {
        SmoothingCase c4;
        c4.alpha = 2.0; c4.p1 = 1.0; c4.p2 = kInf;
        cases.push_back(c4);
    }

    std::vector<ReportRow> rows;
    for (auto& cs : cases) {
        SmoothingResult res;
        try {
            const Ensemble probes =
                smoothing_probes(ctx.dec, cs, ctx.suite_seed("smoothing"));
            res = measure_smoothing_rate(*ctx.eval, probes, cs);
        } catch (const WindowTooNarrow& e) {
            // the fit needs two resolved decades; smaller grids cannot
            // carry this case and the measurement is undefined, not wrong
            rows.push_back(ReportRow::measured(
                "smoothing_skipped",
                {{"alpha", cs.alpha}, {"p1", std::isinf(cs.p1) ? -1.0 : cs.p1},
                 {"p2", std::isinf(cs.p2) ? -1.0 : cs.p2}, {"reason", e.what()}},
                0.0));
            continue;
        }
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
        RatePlot plot;
        plot.slug = "smoothing_a" + format_double(cs.alpha) + "_p" +
                    format_double(std::isinf(cs.p1) ? -1 : cs.p1) + "_" +
                    format_double(std::isinf(cs.p2) ? -1 : cs.p2) + "_ds" +
                    format_double(cs.s2 - cs.s1);
        plot.title = "semigroup smoothing, alpha=" + format_double(cs.alpha);
        plot.curve = res.curve;
        plot.fit = res.fit;
        plot.target = res.target;
        plots.push_back(std::move(plot));
    }
    return rows;
}

std::vector<ReportRow> suite_continuity(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    const Field f = ctx.dec.from_coeffs(ctx.ens.coeffs.col(0));
    for (double alpha : ctx.cfg.alphas) {
        const auto ts = descending_times(ctx.dec, alpha);
        for (auto [s, p, q] : std::vector<std::array<double, 3>>{{0.5, 2.0, 2.0},
                                                                 {0.0, 1.0, 1.0}}) {
            auto sub = verify_continuity(*ctx.eval, f, s, p, q, alpha, ts);
            rows.insert(rows.end(), sub.begin(), sub.end());
        }
    }
    return rows;
}

std::vector<ReportRow> suite_weak_continuity(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    const Field f = ctx.dec.from_coeffs(ctx.ens.coeffs.col(0));
    const Field g = ctx.dec.from_coeffs(ctx.ens.coeffs.col(1));
    for (double alpha : ctx.cfg.alphas) {
        const auto ts = descending_times(ctx.dec, alpha);
        for (double p : {2.0, kInf}) {
            auto sub = verify_weak_continuity(*ctx.eval, f, g, 0.5, p, alpha, ts);
            rows.insert(rows.end(), sub.begin(), sub.end());
        }
    }
    return rows;
}

/// Single-mode oracle rows run on a synthetic diagonal operator whose
/// frequencies are exactly dyadic; assembled Laplacians have no exactly
/// dyadic eigenfrequency, so the closed forms would not cancel otherwise.
struct SyntheticDyadic {
    SpectralDecomposition dec;
    DyadicPartition part;
    std::shared_ptr<BlockEvaluator> eval;
    std::vector<int> dyadic_modes; // indices with freq = 2^j
};

SyntheticDyadic make_synthetic() {
    SyntheticDyadic s;
    const std::vector<double> lams = {0.25, 1.0, 2.0, 4.0, 10.0, 16.0, 64.0, 150.0, 256.0};
    s.dec = decompose(diagonal_operator(lams));
    s.part = build_partition(s.dec);
    s.eval = std::make_shared<BlockEvaluator>(s.dec, s.part);
    for (int k = 0; k < s.dec.size(); ++k) {
        const double j = std::log2(std::sqrt(s.dec.eigenvalues()[k]));
        if (j == std::floor(j)) s.dyadic_modes.push_back(k);
    }
    return s;
}

std::vector<ReportRow> suite_equivalent_norm(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    SyntheticDyadic syn = make_synthetic();

    for (double alpha : ctx.cfg.alphas) {
        for (double q : {1.0, 2.0, kInf}) {
            EquivalenceCase cs;
            cs.alpha = alpha;
            cs.s = 0.0;
            cs.s0 = 1.0;
            cs.p = 2.0;
            cs.q = q;
            const double a = cs.s0 - cs.s / cs.alpha;
            for (int k : syn.dyadic_modes) {
                const Field v = syn.dec.eigenfield(k);
                const auto res = equivalent_norm(*syn.eval, v, cs);
                const double oracle =
                    std::isinf(q)
                        ? std::pow(a / std::exp(1.0), a)
                        : std::pow(std::tgamma(a * q) / std::pow(q, a * q), 1.0 / q);
                rows.push_back(ReportRow::checked(
                    "equivalence_mode_oracle",
                    {{"alpha", alpha}, {"q", std::isinf(q) ? -1.0 : q}, {"mode", k}},
                    res.ratio, oracle, 1e-4 * oracle));
            }
        }
    }

    // measured bracket over the ensemble on the assembled Laplacian
    const int m = std::min<int>(24, ctx.ens.size());
    for (double alpha : ctx.cfg.alphas) {
        for (bool besov_x : {false, true}) {
            EquivalenceCase cs;
            cs.alpha = alpha;
            cs.s = 0.0;
            cs.s0 = 1.0;
            cs.p = 2.0;
            cs.q = 2.0;
            cs.r = 1.0;
            cs.x_is_besov = besov_x;
            const Eigen::MatrixXd C = ctx.ens.coeffs.leftCols(m);
            const Eigen::VectorXd values = equivalent_norm_values(*ctx.eval, C, cs);
            const Eigen::VectorXd bases =
                ctx.eval->besov_columns(C, nullptr, {cs.s, cs.p, cs.q, true});
            double bracket = 0.0;
            for (int i = 0; i < m; ++i)
                if (bases[i] > 0.0)
                    bracket = std::max({bracket, values[i] / bases[i], bases[i] / values[i]});
            rows.push_back(ReportRow::bounded(
                "equivalence_bracket",
                {{"alpha", alpha}, {"X", besov_x ? "besov" : "lebesgue"}}, bracket, 20.0));
        }
    }
    return rows;
}

std::vector<ReportRow> suite_maximal_regularity(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    SyntheticDyadic syn = make_synthetic();
    const double alpha = 2.0;
    const std::vector<std::pair<double, double>> pq_cases = {
        {1.0, 1.0}, {2.0, 2.0}, {kInf, kInf}, {1.0, kInf}};

    // find the synthetic mode at frequency 4 exactly
    int mode = syn.dyadic_modes[0];
    for (int k : syn.dyadic_modes)
        if (std::sqrt(syn.dec.eigenvalues()[k]) == 4.0) mode = k;
    const double lam_pow = std::pow(syn.dec.eigenvalues()[mode], alpha / 2.0);

    for (auto [p, q] : pq_cases) {
        const double q_eff = std::isinf(q) ? 1.0 : q;
        std::vector<double> grid = {0.0};
        for (double t :
             geometric_grid(1e-5 / (q_eff * lam_pow), 40.0 / (q_eff * lam_pow), 40))
            grid.push_back(t);
        Eigen::MatrixXd zero_src =
            Eigen::MatrixXd::Zero(syn.dec.size(), static_cast<Eigen::Index>(grid.size()) - 1);
        const auto res = verify_maximal_regularity(
            *syn.eval, Eigen::VectorXd::Unit(syn.dec.size(), mode), zero_src, grid, 0.0, p, q,
            alpha);
        const double oracle = std::isinf(q) ? 1.0 : std::pow(q, -1.0 / q);
        rows.push_back(ReportRow::checked(
            "max_regularity_mode",
            {{"p", std::isinf(p) ? -1.0 : p}, {"q", std::isinf(q) ? -1.0 : q}},
            res.ratio_a, oracle, 1e-6 * oracle));
        rows.push_back(ReportRow::measured(
            "max_regularity_mode_total",
            {{"p", std::isinf(p) ? -1.0 : p}, {"q", std::isinf(q) ? -1.0 : q}},
            res.ratio_total));
    }

    // degenerate data is flagged, not crashed
    {
        std::vector<double> grid = {0.0, 0.5, 1.0};
        Eigen::MatrixXd zero_src = Eigen::MatrixXd::Zero(syn.dec.size(), 2);
        const auto res = verify_maximal_regularity(
            *syn.eval, Eigen::VectorXd::Zero(syn.dec.size()), zero_src, grid, 0.0, 2.0, 2.0,
            alpha);
        ReportRow row = ReportRow::measured("max_regularity_degenerate", {}, 0.0);
        row.pass = res.degenerate;
        rows.push_back(row);
    }

    // measured ensemble constants on the assembled Laplacian
    NormalSampler normal(ctx.suite_seed("maximal_regularity"));
    const double lam1 = ctx.dec.eigenvalues()[0];
    const double lam_top = ctx.dec.eigenvalues()[ctx.dec.size() - 1];
    std::vector<double> grid = {0.0};
    for (double t : geometric_grid(1e-6 / lam_top, 40.0 / lam1, 10)) grid.push_back(t);
    Eigen::MatrixXd src(ctx.dec.size(), static_cast<Eigen::Index>(grid.size()) - 1);
    for (Eigen::Index c = 0; c < src.cols(); ++c)
        for (int k = 0; k < ctx.dec.size(); ++k) src(k, c) = normal();
    for (auto [p, q] : pq_cases) {
        const auto res = verify_maximal_regularity(*ctx.eval, ctx.ens.coeffs.col(0), src,
                                                   grid, 0.0, p, q, 2.0);
        ReportRow row = ReportRow::measured(
            "max_regularity_ensemble",
            {{"p", std::isinf(p) ? -1.0 : p}, {"q", std::isinf(q) ? -1.0 : q}},
            res.ratio_total);
        row.pass = !res.degenerate && std::isfinite(res.ratio_total);
        rows.push_back(row);
    }
    return rows;
}

std::vector<ReportRow> suite_duhamel(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    const SpectralDecomposition& dec = ctx.dec;
    const double alpha = ctx.cfg.alphas.back();
    const double lam1 = dec.eigenvalues()[0];
    const Eigen::VectorXd lam_pow =
        dec.eigenvalues().array().pow(alpha / 2.0).matrix();

    std::vector<double> grid = {0.0};
    for (double t : geometric_grid(1e-4 / lam1, 2.0 / lam1, 8)) grid.push_back(t);
    const Eigen::Index T = static_cast<Eigen::Index>(grid.size());

    // homogeneous case reproduces the semigroup
    const Eigen::VectorXd u0 = ctx.ens.coeffs.col(0);
    const Eigen::MatrixXd zero_src = Eigen::MatrixXd::Zero(dec.size(), T - 1);
    const auto traj0 = duhamel_solve(dec, u0, zero_src, alpha, grid);
    double dev = 0.0;
    for (Eigen::Index i = 0; i < T; ++i) {
        const Eigen::VectorXd expect =
            (-grid[static_cast<std::size_t>(i)] * lam_pow.array()).exp() * u0.array();
        dev = std::max(dev, (traj0.states.col(i) - expect).cwiseAbs().maxCoeff());
    }
    rows.push_back(ReportRow::bounded("duhamel", {{"check", "homogeneous"}}, dev,
                                      1e-12 * u0.cwiseAbs().maxCoeff()));

    // stationary forcing: u0 = 0, f = A^{alpha/2} w gives (1 - e^{-tA^{alpha/2}}) w
    const Eigen::VectorXd w_field = ctx.ens.coeffs.col(1);
    Eigen::MatrixXd stat_src(dec.size(), T - 1);
    for (Eigen::Index c = 0; c < T - 1; ++c)
        stat_src.col(c) = lam_pow.cwiseProduct(w_field);
    const auto traj1 =
        duhamel_solve(dec, Eigen::VectorXd::Zero(dec.size()), stat_src, alpha, grid);
    dev = 0.0;
    for (Eigen::Index i = 0; i < T; ++i) {
        const Eigen::VectorXd expect =
            (1.0 - (-grid[static_cast<std::size_t>(i)] * lam_pow.array()).exp()) *
            w_field.array();
        dev = std::max(dev, (traj1.states.col(i) - expect).cwiseAbs().maxCoeff());
    }
    rows.push_back(ReportRow::bounded("duhamel", {{"check", "stationary_forcing"}}, dev,
                                      1e-10 * w_field.cwiseAbs().maxCoeff()));

    // residual of u' + A^{alpha/2} u = f at subinterval midpoints
    NormalSampler normal(ctx.suite_seed("duhamel"));
    Eigen::MatrixXd src(dec.size(), T - 1);
    for (Eigen::Index c = 0; c < T - 1; ++c)
        for (int k = 0; k < dec.size(); ++k) src(k, c) = normal();
    const auto traj2 = duhamel_solve(dec, u0, src, alpha, grid);
    double worst_resid = 0.0;
    const double lam_top_pow = lam_pow[lam_pow.size() - 1];
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double mid = 0.5 * (grid[i] + grid[i + 1]);
        // fourth-order stencil; step balances stiffness against roundoff
        const double delta = std::min(2e-3 / lam_top_pow, 0.125 * (grid[i + 1] - grid[i]));
        const Eigen::VectorXd um = traj2.state_at(mid, lam_pow);
        const Eigen::VectorXd du =
            (-traj2.state_at(mid + 2 * delta, lam_pow) +
             8.0 * traj2.state_at(mid + delta, lam_pow) -
             8.0 * traj2.state_at(mid - delta, lam_pow) +
             traj2.state_at(mid - 2 * delta, lam_pow)) /
            (12.0 * delta);
        const Eigen::VectorXd stiff = lam_pow.cwiseProduct(um);
        const Eigen::VectorXd resid =
            du + stiff - src.col(static_cast<Eigen::Index>(i));
        // relative to the size of the equation's terms, which cancel
        const double scale =
            std::max({du.cwiseAbs().maxCoeff(), stiff.cwiseAbs().maxCoeff(),
                      src.col(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff()});
        worst_resid = std::max(worst_resid, resid.cwiseAbs().maxCoeff() / scale);
    }
    rows.push_back(
        ReportRow::bounded("duhamel", {{"check", "residual"}}, worst_resid, 1e-8));

    // piecewise-constant sources are integrated exactly: refining the grid
    // inside each interval does not move the endpoint state
    std::vector<double> fine_grid;
    Eigen::MatrixXd fine_src(dec.size(), 4 * (T - 1));
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        for (int r = 0; r < 4; ++r) {
            fine_grid.push_back(grid[i] + 0.25 * r * (grid[i + 1] - grid[i]));
            fine_src.col(static_cast<Eigen::Index>(4 * i + r)) =
                src.col(static_cast<Eigen::Index>(i));
        }
    fine_grid.push_back(grid.back());
    const auto traj3 = duhamel_solve(dec, u0, fine_src, alpha, fine_grid);
    const double refine_dev =
        (traj3.states.rightCols(1) - traj2.states.rightCols(1)).cwiseAbs().maxCoeff();
    rows.push_back(ReportRow::bounded("duhamel", {{"check", "refinement"}}, refine_dev,
                                      1e-10 * u0.cwiseAbs().maxCoeff()));
    return rows;
}

std::vector<ReportRow> suite_embedding(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    const int d = ctx.domain.dimension();
    const double s = 0.5, q = 2.0;
    for (auto [r, p] : std::vector<std::pair<double, double>>{{1.0, 2.0},
                                                              {1.0, kInf},
                                                              {2.0, kInf}}) {
        const BesovParams coarse{s, p, q, true};
        const BesovParams fine{s + d * (1.0 / r - 1.0 / p), r, q, true};
        const Eigen::VectorXd nums =
            ctx.eval->besov_columns(ctx.ens.coeffs, nullptr, coarse);
        const Eigen::VectorXd dens =
            ctx.eval->besov_columns(ctx.ens.coeffs, nullptr, fine);
        double sup = 0.0;
        for (int i = 0; i < ctx.ens.size(); ++i)
            if (dens[i] > 0.0) sup = std::max(sup, nums[i] / dens[i]);
        ReportRow row = ReportRow::measured(
            "embedding", {{"r", r}, {"p", std::isinf(p) ? -1.0 : p}, {"s", s}}, sup);
        row.pass = std::isfinite(sup) && sup > 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ReportRow> suite_lifting(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    for (double alpha : ctx.cfg.alphas) {
        const Eigen::VectorXd lam_pow =
            ctx.dec.eigenvalues().array().pow(alpha / 2.0).matrix();
        const BesovParams base{0.0, 2.0, 2.0, true};
        const BesovParams lifted{alpha, 2.0, 2.0, true};
        const Eigen::VectorXd nums =
            ctx.eval->besov_columns(ctx.ens.coeffs, &lam_pow, base);
        const Eigen::VectorXd dens =
            ctx.eval->besov_columns(ctx.ens.coeffs, nullptr, lifted);
        double bracket = 0.0;
        for (int i = 0; i < ctx.ens.size(); ++i)
            if (dens[i] > 0.0 && nums[i] > 0.0)
                bracket = std::max({bracket, nums[i] / dens[i], dens[i] / nums[i]});
        rows.push_back(ReportRow::bounded("lifting", {{"alpha", alpha}, {"p", 2.0}},
                                          bracket, std::exp2(alpha) * (1.0 + 1e-10)));
    }
    return rows;
}

std::vector<ReportRow> suite_duality(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    double worst_identity = 0.0;
    for (int k = 0; k < ctx.dec.size(); ++k) {
        const double freq = std::sqrt(ctx.dec.eigenvalues()[k]);
        double sum = 0.0;
        for (int j = ctx.part.j_min(); j <= ctx.part.j_max(); ++j)
            sum += ctx.part.phi(j, freq) * ctx.part.phi_wide(j, freq);
        worst_identity = std::max(worst_identity, std::abs(sum - 1.0));
    }
    rows.push_back(ReportRow::bounded("duality", {{"check", "pairing_weights"}},
                                      worst_identity, 1e-12));

    double worst_rel = 0.0, worst_hoelder = 0.0;
    const double s = 0.75, p = 2.0, pp = 2.0;
    const double hoelder_const = std::exp2(-s) + 1.0 + std::exp2(s);
    const int m = std::min<int>(8, ctx.ens.size());
    for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
            const Field f = ctx.dec.from_coeffs(ctx.ens.coeffs.col(a));
            const Field g = ctx.dec.from_coeffs(ctx.ens.coeffs.col(b));
            const double pairing = duality_pairing(ctx.dec, ctx.part, f, g);
            const double l2 = inner_product(f, g);
            worst_rel = std::max(worst_rel, std::abs(pairing - l2) /
                                                (lp_norm(f, 2.0) * lp_norm(g, 2.0)));
            const double bound = hoelder_const *
                                 besov_norm(ctx.dec, ctx.part, f, {s, p, kInf, true}) *
                                 besov_norm(ctx.dec, ctx.part, g, {-s, pp, 1.0, true});
            worst_hoelder = std::max(worst_hoelder, std::abs(pairing) / bound);
        }
    rows.push_back(
        ReportRow::bounded("duality", {{"check", "l2_identity"}}, worst_rel, 1e-10));
    rows.push_back(ReportRow::bounded("duality", {{"check", "hoelder"}}, worst_hoelder,
                                      1.0 + 1e-10));
    return rows;
}

std::vector<ReportRow> suite_interpolation(SuiteContext& ctx, std::vector<RatePlot>&) {
    std::vector<ReportRow> rows;
    const int m = std::min<int>(20, ctx.ens.size());
    for (const auto& [theta, q] :
         std::vector<std::pair<double, double>>{{0.5, 2.0}, {0.3, 1.0}, {0.5, kInf}}) {
        InterpolationCouple couple;
        couple.p = 2.0;
        couple.s0 = 0.0;
        couple.q0 = 2.0;
        couple.s1 = 1.0;
        couple.q1 = 2.0;
        couple.theta = theta;
        couple.q = q;
        auto sub = verify_interpolation_identity(*ctx.eval, ctx.ens.coeffs.leftCols(m),
                                                 couple);
        rows.insert(rows.end(), sub.begin(), sub.end());
    }

    // inhomogeneous couple on the wide companion domain, whose spectrum
    // reaches below the low-frequency cutoff
    if (ctx.wide_eval) {
        InterpolationCouple couple;
        couple.p = 2.0;
        couple.s0 = 0.0;
        couple.q0 = 2.0;
        couple.s1 = 1.0;
        couple.q1 = 2.0;
        couple.theta = 0.5;
        couple.q = 2.0;
        couple.homogeneous = false;
        const int mw = std::min<int>(12, ctx.wide_ens.size());
        auto sub = verify_interpolation_identity(
            *ctx.wide_eval, ctx.wide_ens.coeffs.leftCols(mw), couple);
        for (auto& row : sub) row.params["homogeneous"] = false;
        rows.insert(rows.end(), sub.begin(), sub.end());
    }

    // threshold K against the exhaustive block-assignment minimum
    InterpolationCouple couple;
    couple.p = 2.0;
    couple.s0 = 0.0;
    couple.q0 = 2.0;
    couple.s1 = 1.0;
    couple.q1 = 2.0;
    couple.theta = 0.5;
    couple.q = 2.0;
    std::vector<int> active;
    for (int j = ctx.part.j_min(); j <= ctx.part.j_max(); ++j) {
        auto [k0, k1] = ctx.part.mode_range(j);
        if (k1 >= k0) active.push_back(j);
    }
    if (active.size() <= 12) {
        const Eigen::VectorXd coeffs = ctx.ens.coeffs.col(0);
        const Field f = ctx.dec.from_coeffs(coeffs);
        ThresholdSplittings split(*ctx.eval, coeffs, couple);
        const double t_star = split.high_level() / split.low_slope();
        for (double mult : {0.01, 1.0, 100.0}) {
            const double t = mult * t_star;
            const double thresh = split.k_at(t);
            // exhaustive assignment of active blocks to the two endpoints
            double brute = kInf;
            const std::size_t count = std::size_t{1} << active.size();
            for (std::size_t mask = 0; mask < count; ++mask) {
                Eigen::VectorXd a0 = Eigen::VectorXd::Zero(ctx.dec.size());
                for (int k = 0; k < ctx.dec.size(); ++k) {
                    const double freq = std::sqrt(ctx.dec.eigenvalues()[k]);
                    double w = 0.0;
                    for (std::size_t b = 0; b < active.size(); ++b)
                        if (mask & (std::size_t{1} << b))
                            w += ctx.part.phi(active[b], freq);
                    a0[k] = w * coeffs[k];
                }
                const Eigen::VectorXd a1 = coeffs - a0;
                const double cost =
                    ctx.eval->besov_columns(a0, nullptr,
                                            {couple.s0, couple.p, couple.q0, true})[0] +
                    t * ctx.eval->besov_columns(a1, nullptr,
                                                {couple.s1, couple.p, couple.q1, true})[0];
                brute = std::min(brute, cost);
            }
            ReportRow row = ReportRow::measured("interpolation_k_gap",
                                                {{"t_rel", mult}}, thresh / brute);
            row.pass = thresh <= 2.0 * brute && thresh >= brute * (1.0 - 1e-9);
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<ReportRow> suite_inhomogeneous(SuiteContext& ctx, std::vector<RatePlot>&) {
    return verify_inhomog_suite(*ctx.wide_eval, ctx.wide_ens,
                                ctx.suite_seed("inhomogeneous"));
}

std::vector<SuiteEntry> registry() {
    return {
        {"partition", "dyadic partition sums to one on the spectrum", suite_partition},
        {"spectral", "eigendecomposition invariants and closed forms", suite_spectral},
        {"lp", "discrete L^p norm inequalities", suite_lp},
        {"multiplier", "scaled spectral-multiplier bound across blocks", suite_multiplier},
        {"factorization", "resolvent factorization of block symbols", suite_factorization},
        {"amalgam", "amalgam-space operator bounds over a scale sweep", suite_amalgam},
        {"gaussian", "heat-kernel positivity and diagonal bound", suite_gaussian},
        {"block_decay", "per-block semigroup decay rates", suite_block_decay},
        {"boundedness", "semigroup boundedness in Besov norms", suite_boundedness},
        {"smoothing", "L^p-L^q smoothing rate fits", suite_smoothing},
        {"continuity", "strong continuity at t = 0", suite_continuity},
        {"weak_continuity", "dual-weak continuity and transpose identity",
         suite_weak_continuity},
        {"equivalent_norm", "semigroup characterization of Besov norms",
         suite_equivalent_norm},
        {"maximal_regularity", "space-time maximal regularity ratios",
         suite_maximal_regularity},
        {"duhamel", "exactness of the Duhamel integrator", suite_duhamel},
        {"embedding", "Besov embedding constants", suite_embedding},
        {"lifting", "fractional lifting constants", suite_lifting},
        {"duality", "block duality pairing identities", suite_duality},
        {"interpolation", "real-interpolation identity and K-functional",
         suite_interpolation, true},
        {"inhomogeneous", "heat semigroup in inhomogeneous norms (wide domain)",
         suite_inhomogeneous, true},
    };
}

} // namespace

std::vector<std::pair<std::string, std::string>> suite_registry() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : registry()) out.emplace_back(e.name, e.description);
    return out;
}

SymOperator diagonal_operator(const std::vector<double>& eigenvalues) {
    const int n = static_cast<int>(eigenvalues.size());
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, n));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) M(i, i) = eigenvalues[static_cast<std::size_t>(i)];
    return {dom, std::move(M)};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        if (!j.contains("domain")) throw ConfigError("missing key: domain");
        const auto& dom = j.at("domain");
        const std::string kind = dom.value("kind", "interval");
        if (kind == "interval") {
            cfg.domain_spec = GridSpec::interval(dom.value("a", 0.0), dom.value("b", 1.0),
                                                 dom.value("n", 255));
        } else if (kind == "square") {
            cfg.domain_spec = GridSpec::square(dom.value("a", 0.0), dom.value("b", 1.0),
                                               dom.value("n", 31));
        } else if (kind == "mask_file") {
            if (!dom.contains("path"))
                throw ConfigError("mask_file domain needs key: path");
            cfg.domain_spec = GridSpec::from_mask_file(dom.at("path").get<std::string>());
        } else {
            throw ConfigError("unknown domain kind: " + kind);
        }

        if (j.contains("alphas")) {
            cfg.alphas.clear();
            for (const auto& a : j.at("alphas")) cfg.alphas.push_back(a.get<double>());
            if (cfg.alphas.empty()) throw ConfigError("alphas must be nonempty");
        }
        cfg.seed = j.value("seed", cfg.seed);
        if (const char* env = std::getenv("BESOVLAB_SEED"))
            cfg.seed = std::strtoull(env, nullptr, 10);
        if (j.contains("ensemble")) {
            const auto& e = j.at("ensemble");
            cfg.ensemble.gaussians = e.value("gaussians", cfg.ensemble.gaussians);
            cfg.ensemble.max_eigenmodes =
                e.value("max_eigenmodes", cfg.ensemble.max_eigenmodes);
            cfg.ensemble.deltas = e.value("deltas", cfg.ensemble.deltas);
            cfg.ensemble.spikes = e.value("spikes", cfg.ensemble.spikes);
        }
        if (j.contains("suites")) {
            for (const auto& s : j.at("suites")) cfg.suites.push_back(s.get<std::string>());
            const auto known = registry();
            for (const auto& name : cfg.suites) {
                const bool ok = std::any_of(known.begin(), known.end(),
                                            [&](const auto& e) { return e.name == name; });
                if (!ok) throw ConfigError("unknown suite: " + name);
            }
        }
        if (j.contains("tolerances"))
            for (const auto& [key, value] : j.at("tolerances").items())
                cfg.tolerance_overrides[key] = value.get<double>();
        cfg.jobs = j.value("jobs", 1);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::canonical() const {
    nlohmann::json j;
    j["domain"] = {{"dimension", domain_spec.dimension},
                   {"h", domain_spec.h},
                   {"nx", domain_spec.nx},
                   {"ny", domain_spec.ny},
                   {"origin", {domain_spec.origin[0], domain_spec.origin[1]}},
                   {"mask_popcount",
                    static_cast<int>(std::count(domain_spec.mask.begin(),
                                                domain_spec.mask.end(), 1))}};
    j["alphas"] = alphas;
    j["seed"] = seed;
    j["ensemble"] = {{"gaussians", ensemble.gaussians},
                     {"max_eigenmodes", ensemble.max_eigenmodes},
                     {"deltas", ensemble.deltas},
                     {"spikes", ensemble.spikes}};
    j["suites"] = suites;
    j["tolerances"] = tolerance_overrides;
    return j;
}

std::string ExperimentConfig::hash() const {
    const std::string dump = canonical().dump();
    return hash_hex(fnv1a_bytes(dump.data(), dump.size()));
}

RunOutput run_suite(const ExperimentConfig& cfg) {
    SuiteContext ctx;
    ctx.cfg = cfg;
    ctx.domain = build_domain(cfg.domain_spec);
    ctx.dec = decompose(assemble_laplacian(ctx.domain));
    ctx.part = build_partition(ctx.dec);
    ctx.eval = std::make_shared<BlockEvaluator>(ctx.dec, ctx.part);
    ctx.ens = Ensemble::standard(ctx.dec, cfg.seed, cfg.ensemble);

    const auto all = registry();
    std::vector<SuiteEntry> selected;
    if (cfg.suites.empty()) {
        selected = all;
    } else {
        for (const auto& e : all)
            if (std::find(cfg.suites.begin(), cfg.suites.end(), e.name) != cfg.suites.end())
                selected.push_back(e);
        if (selected.size() != cfg.suites.size())
            throw ConfigError("unknown suite in selection");
    }

    const bool needs_wide = std::any_of(selected.begin(), selected.end(),
                                        [](const auto& e) { return e.needs_wide; });
    if (needs_wide) {
        // the low-frequency suites need spectrum below the cutoff and two
        // resolved decades above the lattice scale
        const int n_wide = 255;
        ctx.wide_dec =
            decompose(assemble_laplacian(build_domain(GridSpec::interval(0.0, 8.0, n_wide))));
        DyadicPartition wide_part = build_partition(ctx.wide_dec);
        ctx.wide_eval = std::make_shared<BlockEvaluator>(ctx.wide_dec, wide_part);
        Ensemble::Options wide_opt = cfg.ensemble;
        wide_opt.gaussians = std::min(wide_opt.gaussians, 32);
        ctx.wide_ens = Ensemble::standard(ctx.wide_dec, cfg.seed ^ 0x77ull, wide_opt);
    }

    struct SuiteOutcome {
        std::vector<ReportRow> rows;
        std::vector<RatePlot> plots;
    };
    auto run_one = [&ctx](const SuiteEntry& entry) {
        SuiteOutcome out;
        try {
            out.rows = entry.run(ctx, out.plots);
        } catch (const std::exception& e) {
            // op errors become failed rows, never a crash of the battery
            ReportRow row = ReportRow::measured(entry.name, {{"error", e.what()}},
                                                std::nan(""));
            row.pass = false;
            out.rows.push_back(row);
        }
        return out;
    };

    std::vector<SuiteOutcome> outcomes(selected.size());
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < selected.size(); ++i) outcomes[i] = run_one(selected[i]);
    } else {
        std::vector<std::future<SuiteOutcome>> futures(selected.size());
        std::size_t next = 0, running_base = 0;
        while (running_base < selected.size()) {
            const std::size_t batch_end =
                std::min(selected.size(), running_base + static_cast<std::size_t>(jobs));
            for (next = running_base; next < batch_end; ++next)
                futures[next] = std::async(std::launch::async, run_one,
                                           std::cref(selected[next]));
            for (std::size_t i = running_base; i < batch_end; ++i)
                outcomes[i] = futures[i].get();
            running_base = batch_end;
        }
    }

    RunOutput out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        // per-suite tolerance overrides
        if (auto it = cfg.tolerance_overrides.find(selected[i].name);
            it != cfg.tolerance_overrides.end()) {
            for (ReportRow& row : outcomes[i].rows)
                if (row.target && row.tol) {
                    row.tol = it->second;
                    row.pass = std::isfinite(row.value) &&
                               std::abs(row.value - *row.target) <= *row.tol;
                }
        }
        out.report.append(std::move(outcomes[i].rows));
        for (auto& p : outcomes[i].plots) out.plots.push_back(std::move(p));
    }
    out.report.sort_rows();
    out.report.config_hash = cfg.hash();
    out.report.phi0_hash = hash_hex(ctx.part.construction_hash());
    out.report.meta = {{"n", ctx.domain.size()},
                       {"dimension", ctx.domain.dimension()},
                       {"h", ctx.domain.h()},
                       {"j_min", ctx.part.j_min()},
                       {"j_max", ctx.part.j_max()},
                       {"ensemble", ctx.ens.size()}};
    std::sort(out.plots.begin(), out.plots.end(),
              [](const RatePlot& a, const RatePlot& b) { return a.slug < b.slug; });
    return out;
}

void emit(const RunOutput& out, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output dir " + out_dir + ": " + ec.message());
    write_csv(out.report, out_dir + "/report.csv");
    write_json(out.report, out_dir + "/report.json");
    for (const auto& plot : out.plots)
        write_rate_svg(plot.curve, plot.fit, plot.target, plot.title,
                       out_dir + "/rate_" + plot.slug + ".svg");
}

} // namespace besovlab
