// Acceptance battery: one pass/fail line per criterion, exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "besovlab/suites.hpp"

using namespace besovlab;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Lab {
    GridDomain dom;
    SpectralDecomposition dec;
    DyadicPartition part;
    std::shared_ptr<BlockEvaluator> eval;
};

Lab& lab(const std::string& key) {
    static std::map<std::string, Lab> cache;
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Lab l;
    if (key == "1d255") l.dom = build_domain(GridSpec::interval(0.0, 1.0, 255));
    else if (key == "1d511") l.dom = build_domain(GridSpec::interval(0.0, 1.0, 511));
    else if (key == "2d48") l.dom = build_domain(GridSpec::square(0.0, 1.0, 48));
    else if (key == "2d31") l.dom = build_domain(GridSpec::square(0.0, 1.0, 31));
    else throw Error("unknown lab key " + key);
    l.dec = decompose(assemble_laplacian(l.dom));
    l.part = build_partition(l.dec);
    l.eval = std::make_shared<BlockEvaluator>(l.dec, l.part);
    return cache.emplace(key, std::move(l)).first->second;
}

struct Check {
    bool pass;
    std::string what;
};

std::vector<Check> criterion_partition() {
    Lab& l = lab("1d255");
    double worst_hom = 0.0, worst_inhom = 0.0;
    for (int k = 0; k < l.dec.size(); ++k) {
        const double lam = l.dec.eigenvalues()[k];
        const double freq = std::sqrt(lam);
        double sum = 0.0;
        for (int j = l.part.j_min(); j <= l.part.j_max(); ++j) sum += l.part.phi(j, freq);
        worst_hom = std::max(worst_hom, std::abs(sum - 1.0));
        double inhom = l.part.psi(lam);
        for (int j = 1; j <= l.part.j_max(); ++j) inhom += l.part.phi(j, freq);
        worst_inhom = std::max(worst_inhom, std::abs(inhom - 1.0));
    }
    return {{worst_hom <= 1e-12, "dyadic sum dev " + format_double(worst_hom)},
            {worst_inhom <= 1e-12, "low-freq sum dev " + format_double(worst_inhom)}};
}

std::vector<Check> criterion_spectral() {
    Lab& l = lab("1d255");
    const int n = l.dec.size();
    const double h = l.dom.h();
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        const double target = 4.0 / (h * h) * std::pow(std::sin(k * M_PI * h / 2.0), 2);
        worst = std::max(worst,
                         std::abs(l.dec.eigenvalues()[k - 1] - target) / target);
    }
    const double lam1 = l.dec.eigenvalues()[0];
    const double ground = std::abs(lam1 - M_PI * M_PI) / (M_PI * M_PI);
    return {{worst <= 1e-8, "closed-form rel dev " + format_double(worst)},
            {ground <= 0.01, "ground state rel dev " + format_double(ground)}};
}

Check one_rate_case(const Lab& l, SmoothingCase cs, const std::string& tag) {
    const Ensemble probes = smoothing_probes(l.dec, cs, 20240404);
    const SmoothingResult res = measure_smoothing_rate(*l.eval, probes, cs);
    const double dev = std::abs(res.fit.slope - res.target);
    std::ostringstream ss;
    ss << tag << " slope " << format_double(res.fit.slope) << " target "
       << format_double(res.target) << " over "
       << format_double(std::log10(cs.t_grid.empty()
                                       ? res.curve.back().first / res.curve.front().first
                                       : cs.t_grid.back() / cs.t_grid.front()))
       << " decades";
    return {dev <= 0.1, ss.str()};
}

std::vector<Check> criterion_smoothing() {
    std::vector<Check> checks;
    {
        Lab& l = lab("1d511");
        SmoothingCase c1;
        c1.alpha = 2.0; c1.p1 = 1.0; c1.p2 = kInf;
        checks.push_back(one_rate_case(l, c1, "1d (1,inf) a=2"));
        SmoothingCase c2;
        c2.alpha = 1.0; c2.p1 = 2.0; c2.p2 = 2.0; c2.s1 = 0.0; c2.s2 = 1.0;
        checks.push_back(one_rate_case(l, c2, "1d (2,2)+1 a=1"));
        SmoothingCase c3;
        c3.alpha = 2.0; c3.p1 = 2.0; c3.p2 = kInf; c3.s1 = 0.0; c3.s2 = 1.0;
        checks.push_back(one_rate_case(l, c3, "1d (2,inf)+1 a=2"));
    }
    {
        Lab& l = lab("2d48");
        SmoothingCase c4;
        c4.alpha = 2.0; c4.p1 = 1.0; c4.p2 = kInf;
        checks.push_back(one_rate_case(l, c4, "2d (1,inf) a=2"));
    }
    return checks;
}

double boundedness_constant(const Lab& l, double s, double p, double q, double alpha) {
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    std::vector<double> ts = {0.0};
    const double lam1 = l.dec.eigenvalues()[0];
    for (double t : geometric_grid(1e-4 / std::pow(lam1, alpha / 2.0) * 1e-2,
                                   4.0 / std::pow(lam1, alpha / 2.0), 1))
        ts.push_back(t);
    const auto rows = verify_boundedness(*l.eval, ens, s, p, q, alpha, ts);
    return rows.back().value; // the aggregated constant row
}

double embedding_constant(const Lab& l, double r, double p) {
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    const double d = l.dom.dimension(), s = 0.5, q = 2.0;
    const Eigen::VectorXd nums =
        l.eval->besov_columns(ens.coeffs, nullptr, {s, p, q, true});
    const Eigen::VectorXd dens = l.eval->besov_columns(
        ens.coeffs, nullptr, {s + d * (1.0 / r - 1.0 / p), r, q, true});
    double sup = 0.0;
    for (int i = 0; i < ens.size(); ++i)
        if (dens[i] > 0.0) sup = std::max(sup, nums[i] / dens[i]);
    return sup;
}

double lifting_constant(const Lab& l, double alpha) {
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    const Eigen::VectorXd lam_pow = l.dec.eigenvalues().array().pow(alpha / 2.0).matrix();
    const Eigen::VectorXd nums =
        l.eval->besov_columns(ens.coeffs, &lam_pow, {0.0, 2.0, 2.0, true});
    const Eigen::VectorXd dens =
        l.eval->besov_columns(ens.coeffs, nullptr, {alpha, 2.0, 2.0, true});
    double bracket = 0.0;
    for (int i = 0; i < ens.size(); ++i)
        if (dens[i] > 0.0 && nums[i] > 0.0)
            bracket = std::max({bracket, nums[i] / dens[i], dens[i] / nums[i]});
    return bracket;
}

Check stability(const std::string& tag, double coarse, double fine, double tol = 0.10) {
    const bool ok = std::isfinite(coarse) && std::isfinite(fine) && coarse > 0.0 &&
                    std::abs(fine / coarse - 1.0) < tol;
    std::ostringstream ss;
    ss << tag << " " << format_double(coarse) << " -> " << format_double(fine);
    return {ok, ss.str()};
}

std::vector<Check> criterion_constants() {
    Lab& a = lab("1d255");
    Lab& b = lab("1d511");
    std::vector<Check> checks;
    checks.push_back(stability("boundedness(0,2,2)",
                               boundedness_constant(a, 0.0, 2.0, 2.0, 2.0),
                               boundedness_constant(b, 0.0, 2.0, 2.0, 2.0)));
    checks.push_back(stability("boundedness(1/2,1,1)",
                               boundedness_constant(a, 0.5, 1.0, 1.0, 2.0),
                               boundedness_constant(b, 0.5, 1.0, 1.0, 2.0)));
    checks.push_back(stability("boundedness(-1/2,inf,inf)",
                               boundedness_constant(a, -0.5, kInf, kInf, 2.0),
                               boundedness_constant(b, -0.5, kInf, kInf, 2.0)));
    checks.push_back(stability("embedding(1,2)", embedding_constant(a, 1.0, 2.0),
                               embedding_constant(b, 1.0, 2.0)));
    checks.push_back(stability("embedding(1,inf)", embedding_constant(a, 1.0, kInf),
                               embedding_constant(b, 1.0, kInf)));
    checks.push_back(stability("embedding(2,inf)", embedding_constant(a, 2.0, kInf),
                               embedding_constant(b, 2.0, kInf)));
    checks.push_back(stability("lifting(a=1)", lifting_constant(a, 1.0),
                               lifting_constant(b, 1.0)));
    checks.push_back(stability("lifting(a=2)", lifting_constant(a, 2.0),
                               lifting_constant(b, 2.0)));
    return checks;
}

std::vector<Check> criterion_block_decay() {
    Lab& l = lab("1d255");
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    std::vector<Check> checks;
    for (double alpha : {1.0, 2.0}) {
        const auto rows = verify_block_decay(*l.eval, ens, alpha, 2.0, 1.0);
        int decay_rows = 0;
        bool all = true;
        std::string detail;
        for (const auto& row : rows) {
            if (row.suite == "block_decay") ++decay_rows;
            if ((row.suite == "block_decay" || row.suite == "block_prefactor") &&
                !row.pass) {
                all = false;
                detail = row.suite + " " + row.params.dump() + " value " +
                         format_double(row.value);
            }
        }
        std::ostringstream ss;
        ss << "alpha " << format_double(alpha) << ": " << decay_rows
           << " active blocks in [1/4,4] with prefactor +-0.1";
        if (!all) ss << "; first failure " << detail;
        checks.push_back({all && decay_rows >= 6, ss.str()});
    }
    return checks;
}

std::vector<Check> criterion_continuity() {
    Lab& l = lab("1d255");
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    Field f = l.dec.from_coeffs(ens.coeffs.col(0));
    Field g = l.dec.from_coeffs(ens.coeffs.col(1));
    const double lam1 = l.dec.eigenvalues()[0];
    const double lam_top = l.dec.eigenvalues()[l.dec.size() - 1];
    std::vector<double> ts = geometric_grid(1e-9 / lam_top, 1.0 / lam1, 2);
    std::reverse(ts.begin(), ts.end());

    const double base = besov_norm(l.dec, l.part, f, {0.5, 2.0, 2.0, true});
    const auto rows = verify_continuity(*l.eval, f, 0.5, 2.0, 2.0, 2.0, ts);
    double min_val = kInf;
    bool rows_ok = true;
    for (const auto& row : rows) {
        if (row.suite == "continuity") min_val = std::min(min_val, row.value);
        rows_ok = rows_ok && row.pass;
    }
    std::vector<Check> checks;
    checks.push_back({rows_ok && min_val <= 1e-4 * base,
                      "strong: min value " + format_double(min_val) + " vs 1e-4*norm " +
                          format_double(1e-4 * base)});

    bool weak_ok = true;
    double worst_identity = 0.0;
    for (const auto& row : verify_weak_continuity(*l.eval, f, g, 0.5, 2.0, 2.0, ts)) {
        weak_ok = weak_ok && row.pass;
        if (row.suite == "weak_transpose_identity")
            worst_identity = std::max(worst_identity, row.value);
    }
    checks.push_back({weak_ok && worst_identity <= 1e-10,
                      "weak: transpose identity dev " + format_double(worst_identity) +
                          " <= 1e-10, pairing vanishes"});
    return checks;
}

double equivalence_bracket(const Lab& l, bool besov_x) {
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    EquivalenceCase cs;
    cs.alpha = 2.0;
    cs.s = 0.0;
    cs.s0 = 1.0;
    cs.p = 2.0;
    cs.q = 2.0;
    cs.r = 1.0;
    cs.x_is_besov = besov_x;
    const int m = std::min<int>(24, ens.size());
    const Eigen::MatrixXd C = ens.coeffs.leftCols(m);
    const Eigen::VectorXd values = equivalent_norm_values(*l.eval, C, cs);
    const Eigen::VectorXd bases =
        l.eval->besov_columns(C, nullptr, {cs.s, cs.p, cs.q, true});
    double bracket = 0.0;
    for (int i = 0; i < m; ++i)
        if (bases[i] > 0.0)
            bracket = std::max({bracket, values[i] / bases[i], bases[i] / values[i]});
    return bracket;
}

std::vector<Check> criterion_equivalence() {
    std::vector<Check> checks;

    // single-mode Gamma oracle on exactly dyadic frequencies
    SpectralDecomposition dec =
        decompose(diagonal_operator({0.25, 1.0, 4.0, 16.0, 64.0, 256.0}));
    DyadicPartition part = build_partition(dec);
    BlockEvaluator eval(dec, part);
    double worst = 0.0;
    for (double q : {1.0, 2.0}) {
        EquivalenceCase cs;
        cs.alpha = 2.0;
        cs.s0 = 2.0 / q; // keeps the Gamma argument at 2 for both q
        cs.q = q;
        const double a = cs.s0;
        const double oracle =
            std::pow(std::tgamma(a * q) / std::pow(q, a * q), 1.0 / q);
        for (int k : {2, 3, 4}) {
            const auto res = equivalent_norm(eval, dec.eigenfield(k), cs);
            worst = std::max(worst, std::abs(res.ratio / oracle - 1.0));
        }
    }
    checks.push_back({worst <= 1e-4, "single-mode Gamma oracle rel dev " +
                                         format_double(worst)});

    Lab& a = lab("1d255");
    Lab& b = lab("1d511");
    for (bool besov_x : {false, true}) {
        const double ca = equivalence_bracket(a, besov_x);
        const double cb = equivalence_bracket(b, besov_x);
        const std::string tag = besov_x ? "X=B^0_{p,r}" : "X=L^p";
        checks.push_back({ca <= 20.0 && cb <= 20.0,
                          tag + " brackets " + format_double(ca) + ", " +
                              format_double(cb) + " <= 20"});
        checks.push_back(stability(tag + " stability", ca, cb));
    }
    return checks;
}

double max_reg_ensemble_ratio(const Lab& l, double p, double q) {
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    NormalSampler normal(77);
    const double lam1 = l.dec.eigenvalues()[0];
    std::vector<double> grid = {0.0};
    for (double t : geometric_grid(1e-9, 40.0 / lam1, 10)) grid.push_back(t);
    Eigen::MatrixXd src(l.dec.size(), static_cast<Eigen::Index>(grid.size()) - 1);
    for (Eigen::Index c = 0; c < src.cols(); ++c)
        for (int k = 0; k < l.dec.size(); ++k) src(k, c) = normal();
    const auto res = verify_maximal_regularity(*l.eval, ens.coeffs.col(0), src, grid, 0.0,
                                               p, q, 2.0);
    return res.ratio_total;
}

std::vector<Check> criterion_max_regularity() {
    std::vector<Check> checks;
    SpectralDecomposition dec =
        decompose(diagonal_operator({0.25, 1.0, 4.0, 16.0, 64.0, 256.0}));
    DyadicPartition part = build_partition(dec);
    BlockEvaluator eval(dec, part);
    const int mode = 3; // frequency 4 exactly
    const std::vector<std::pair<double, double>> pq = {
        {1.0, 1.0}, {2.0, 2.0}, {kInf, kInf}, {1.0, kInf}};
    double worst = 0.0;
    for (auto [p, q] : pq) {
        const double q_eff = std::isinf(q) ? 1.0 : q;
        std::vector<double> grid = {0.0};
        for (double t : geometric_grid(1e-5 / (16.0 * q_eff), 40.0 / (16.0 * q_eff), 40))
            grid.push_back(t);
        Eigen::MatrixXd zero =
            Eigen::MatrixXd::Zero(dec.size(), static_cast<Eigen::Index>(grid.size()) - 1);
        const auto res = verify_maximal_regularity(
            eval, Eigen::VectorXd::Unit(dec.size(), mode), zero, grid, 0.0, p, q, 2.0);
        const double oracle = std::isinf(q) ? 1.0 : std::pow(q, -1.0 / q);
        worst = std::max(worst, std::abs(res.ratio_a / oracle - 1.0));
    }
    checks.push_back(
        {worst <= 1e-6, "single-mode q^{-1/q} rel dev " + format_double(worst)});

    Lab& a = lab("1d255");
    Lab& b = lab("1d511");
    for (auto [p, q] : pq) {
        const double ra = max_reg_ensemble_ratio(a, p, q);
        const double rb = max_reg_ensemble_ratio(b, p, q);
        std::ostringstream tag;
        tag << "ensemble (p,q)=(" << (std::isinf(p) ? "inf" : format_double(p)) << ","
            << (std::isinf(q) ? "inf" : format_double(q)) << ")";
        checks.push_back(stability(tag.str(), ra, rb));
    }
    return checks;
}

std::vector<Check> criterion_multiplier() {
    Lab& l = lab("1d255");
    std::vector<Check> checks;
    std::vector<int> j_list;
    for (int j = l.part.j_min(); j <= l.part.j_max(); ++j) {
        auto [k0, k1] = l.part.mode_range(j);
        if (k1 >= k0) j_list.push_back(j);
    }
    const int j_mid = j_list[j_list.size() / 2];
    std::vector<SymbolFamily> symbols;
    symbols.push_back({"one", [](double) { return 1.0; }});
    symbols.push_back({"heat",
                       [j_mid](double freq) {
                           return std::exp(-std::exp2(-2.0 * j_mid) * freq * freq);
                       },
                       j_mid, 3});
    const auto rows = verify_scaled_multiplier(l.dec, l.part, symbols, j_list,
                                               {1.0, 2.0, kInf},
                                               MultiplierParams::defaults(1));
    double worst_uniformity = 0.0, worst_oracle = 0.0;
    bool all = true;
    for (const auto& row : rows) {
        all = all && row.pass;
        if (row.suite == "multiplier_uniformity")
            worst_uniformity = std::max(worst_uniformity, row.value);
        if (row.suite == "multiplier_l2_oracle")
            worst_oracle = std::max(worst_oracle, row.value);
    }
    checks.push_back({all && worst_uniformity <= 10.0,
                      "ratio uniformity max/median " + format_double(worst_uniformity)});
    checks.push_back({worst_oracle <= 1.0 + 1e-8,
                      "p=2 spectral-oracle ratio " + format_double(worst_oracle)});

    const MultiplierParams prm = MultiplierParams::defaults(1);
    double worst_fact = 0.0;
    auto decay_symbol = [](double lam) { return 1.0 / (1.0 + lam); };
    for (int j : {j_list.front(), j_mid, j_list.back()}) {
        double scale = 0.0;
        for (int k = 0; k < l.dec.size(); ++k) {
            const double lam = l.dec.eigenvalues()[k];
            const double x = std::ldexp(lam, -2 * j);
            const double bump = x > 0.0 ? phi0(std::sqrt(x)) : 0.0;
            scale = std::max(scale, std::abs(decay_symbol(lam) * bump));
        }
        if (scale == 0.0) continue;
        const double dev = verify_resolvent_factorization(l.dec, decay_symbol, j, prm);
        worst_fact = std::max(worst_fact, dev / scale);
    }
    checks.push_back({worst_fact <= 1e-8,
                      "factorization deviation/scale " + format_double(worst_fact)});

    std::vector<double> thetas;
    for (int j = 0; j <= 5; ++j) thetas.push_back(std::pow(4.0, -j));
    auto gauss = [](double x) { return std::exp(-0.5 * x * x); };
    const auto am_rows = verify_amalgam_lemma(l.dec, gauss, prm, thetas);
    double spread = 0.0;
    bool am_ok = true;
    for (const auto& row : am_rows) {
        am_ok = am_ok && row.pass;
        if (row.suite == "amalgam_l1_spread") spread = row.value;
    }
    checks.push_back({am_ok && spread <= 10.0 && spread > 0.0,
                      "L1->amalgam scaled spread " + format_double(spread)});
    return checks;
}

std::vector<Check> criterion_gaussian() {
    std::vector<Check> checks;
    for (const std::string& key : {std::string("1d255"), std::string("2d31")}) {
        Lab& l = lab(key);
        const double h = l.dom.h();
        const double lam1 = l.dec.eigenvalues()[0];
        std::vector<double> ts = {h * h, 4 * h * h, 16 * h * h, 64 * h * h, 0.25 / lam1};
        bool ok = true;
        std::string detail;
        for (const auto& row : verify_gaussian_bound(l.dec, ts)) {
            if (!row.pass) {
                ok = false;
                detail = row.suite + " " + row.params.dump();
            }
        }
        checks.push_back({ok, key + (ok ? " positivity and diagonal bound"
                                        : " failed: " + detail)});
    }
    return checks;
}

std::vector<Check> criterion_interpolation() {
    Lab& l = lab("1d255");
    Ensemble ens = Ensemble::standard(l.dec, 20240404);
    std::vector<Check> checks;

    InterpolationCouple couple;
    couple.p = 2.0;
    couple.s0 = 0.0;
    couple.q0 = 2.0;
    couple.s1 = 1.0;
    couple.q1 = 2.0;
    couple.theta = 0.5;
    couple.q = 2.0;

    // exhaustive-assignment comparison on the active blocks
    std::vector<int> active;
    for (int j = l.part.j_min(); j <= l.part.j_max(); ++j) {
        auto [k0, k1] = l.part.mode_range(j);
        if (k1 >= k0) active.push_back(j);
    }
    bool gap_ok = active.size() <= 12;
    double worst_gap = 0.0;
    if (gap_ok) {
        const Eigen::VectorXd coeffs = ens.coeffs.col(0);
        ThresholdSplittings split(*l.eval, coeffs, couple);
        const double t_star = split.high_level() / split.low_slope();
        for (double mult : {0.01, 0.3, 1.0, 3.0, 100.0}) {
            const double t = mult * t_star;
            double brute = kInf;
            for (std::size_t mask = 0; mask < (std::size_t{1} << active.size()); ++mask) {
                Eigen::VectorXd a0 = Eigen::VectorXd::Zero(l.dec.size());
                for (int k = 0; k < l.dec.size(); ++k) {
                    const double freq = std::sqrt(l.dec.eigenvalues()[k]);
                    double w = 0.0;
                    for (std::size_t b = 0; b < active.size(); ++b)
                        if (mask & (std::size_t{1} << b)) w += l.part.phi(active[b], freq);
                    a0[k] = w * coeffs[k];
                }
                const Eigen::VectorXd a1 = coeffs - a0;
                brute = std::min(
                    brute, l.eval->besov_columns(a0, nullptr, {0.0, 2.0, 2.0, true})[0] +
                               t * l.eval->besov_columns(a1, nullptr,
                                                         {1.0, 2.0, 2.0, true})[0]);
            }
            const double ratio = split.k_at(t) / brute;
            worst_gap = std::max(worst_gap, ratio);
            gap_ok = gap_ok && ratio <= 2.0 && ratio >= 1.0 - 1e-9;
        }
    }
    checks.push_back({gap_ok, "threshold/brute K gap <= " + format_double(worst_gap) +
                                  " over " + std::to_string(active.size()) + " blocks"});

    bool rows_ok = true;
    double bracket = 0.0, constancy = 0.0;
    for (const auto& row :
         verify_interpolation_identity(*l.eval, ens.coeffs.leftCols(16), couple)) {
        rows_ok = rows_ok && row.pass;
        if (row.suite == "interpolation_bracket") bracket = row.value;
        if (row.suite == "interpolation_block_constancy") constancy = row.value;
    }
    checks.push_back({rows_ok && bracket <= 20.0,
                      "ratio bracket " + format_double(bracket) + " <= 20"});
    checks.push_back({rows_ok && constancy <= 0.01,
                      "single-block constancy dev " + format_double(constancy)});
    return checks;
}

std::vector<Check> criterion_determinism() {
    nlohmann::json j;
    j["domain"] = {{"kind", "interval"}, {"n", 255}};
    j["seed"] = 20240404;
    const ExperimentConfig cfg = ExperimentConfig::from_json(j);

    const auto t0 = std::chrono::steady_clock::now();
    RunOutput a = run_suite(cfg);
    RunOutput b = run_suite(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit(a, "acceptance_run_a");
    emit(b, "acceptance_run_b");
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const bool csv_same =
        slurp("acceptance_run_a/report.csv") == slurp("acceptance_run_b/report.csv");
    const bool json_same =
        slurp("acceptance_run_a/report.json") == slurp("acceptance_run_b/report.json");
    std::filesystem::remove_all("acceptance_run_a");
    std::filesystem::remove_all("acceptance_run_b");

    std::vector<Check> checks;
    checks.push_back({csv_same && json_same, "two same-seed batteries byte-identical"});
    checks.push_back({a.report.all_pass(),
                      "battery rows all pass (" + std::to_string(a.report.rows.size()) +
                          " rows, " + std::to_string(a.report.fail_count()) + " failing)"});
    checks.push_back({seconds < 300.0, "two battery runs took " +
                                           format_double(seconds) + " s (< 600 s budget)"});
    return checks;
}

struct Criterion {
    int id;
    std::string title;
    std::function<std::vector<Check>()> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    const std::vector<Criterion> criteria = {
        {1, "partition exactness on the n=255 spectrum", criterion_partition},
        {2, "spectral correctness against the closed form", criterion_spectral},
        {3, "smoothing-rate exponents at n=511 and 48x48", criterion_smoothing},
        {4, "boundedness/embedding/lifting constants stable 255->511",
         criterion_constants},
        {5, "per-block decay rates and prefactor powers", criterion_block_decay},
        {6, "strong and dual-weak continuity at t -> 0", criterion_continuity},
        {7, "semigroup norm characterization brackets and Gamma oracle",
         criterion_equivalence},
        {8, "maximal regularity: q^{-1/q} oracle and ensemble stability",
         criterion_max_regularity},
        {9, "scaled multiplier uniformity, factorization, amalgam sweep",
         criterion_multiplier},
        {10, "heat-kernel positivity and Gaussian diagonal bound", criterion_gaussian},
        {11, "real interpolation: K gap, bracket, block constancy",
         criterion_interpolation},
        {12, "battery determinism and runtime", criterion_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        if (only != 0 && criterion.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<Check> checks;
        bool threw = false;
        std::string what;
        try {
            checks = criterion.run();
        } catch (const std::exception& e) {
            threw = true;
            what = e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = !threw && !checks.empty();
        for (const auto& c : checks) pass = pass && c.pass;
        std::printf("[%s] criterion %2d: %s (%.1f s)\n", pass ? "PASS" : "FAIL",
                    criterion.id, criterion.title.c_str(), secs);
        if (threw) std::printf("         error: %s\n", what.c_str());
        for (const auto& c : checks)
            std::printf("         %s %s\n", c.pass ? "ok  " : "FAIL", c.what.c_str());
        if (!pass) ++failures;
        std::fflush(stdout);
    }
    if (failures == 0) std::printf("acceptance: all criteria passed\n");
    else std::printf("acceptance: %d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
