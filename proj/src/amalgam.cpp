#include "besovlab/amalgam.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace besovlab {

CubeDecomposition CubeDecomposition::build(const GridDomain& domain, double theta) {
    if (!(theta > 0.0)) throw Error("CubeDecomposition: theta must be positive");
    CubeDecomposition out;
    out.theta_ = theta;
    const double side = std::sqrt(theta);
    const int n = domain.size();
    out.cell_to_cube_.assign(n, -1);

    // shared faces resolve to the lexicographically smaller k
    auto half_down = [side](double x) {
        return static_cast<int>(std::ceil(x / side - 0.5));
    };

    std::map<std::array<int, 2>, std::vector<int>> buckets;
    for (int i = 0; i < n; ++i) {
        const auto x = domain.coord(i);
        std::array<int, 2> k = {half_down(x[0]),
                                domain.dimension() == 2 ? half_down(x[1]) : 0};
        buckets[k].push_back(i);
    }
    for (auto& [k, cells] : buckets) {
        const int cube = static_cast<int>(out.key_.size());
        for (int cell : cells) out.cell_to_cube_[cell] = cube;
        out.key_.push_back(k);
        out.cells_.push_back(std::move(cells));
    }
    return out;
}

double amalgam_norm(const Field& f, const CubeDecomposition& cubes) {
    const double w = f.domain.cell_weight();
    double total = 0.0;
    for (int c = 0; c < cubes.cube_count(); ++c) {
        double sq = 0.0;
        for (int i : cubes.cells(c)) sq += f.values[i] * f.values[i];
        total += std::sqrt(w * sq);
    }
    return total;
}

namespace {

/// Largest singular value through the smaller Gram matrix.
double spectral_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    Eigen::MatrixXd gram = M.rows() <= M.cols()
                               ? Eigen::MatrixXd(M * M.transpose())
                               : Eigen::MatrixXd(M.transpose() * M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Eigen::VectorXd cube_distance_weights(const GridDomain& domain, const CubeDecomposition& cubes,
                                      int cube, int N) {
    const auto c = cubes.center(cube);
    Eigen::VectorXd w(domain.size());
    for (int i = 0; i < domain.size(); ++i) {
        const auto x = domain.coord(i);
        const double dx = x[0] - c[0];
        const double dy = domain.dimension() == 2 ? x[1] - c[1] : 0.0;
        w[i] = std::pow(std::sqrt(dx * dx + dy * dy), N);
    }
    return w;
}

} // namespace

double script_A_norm(const Eigen::MatrixXd& T, const GridDomain& domain,
                     const CubeDecomposition& cubes, int N) {
    double worst = 0.0;
    for (int c = 0; c < cubes.cube_count(); ++c) {
        const auto& cells = cubes.cells(c);
        Eigen::MatrixXd block(T.rows(), cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) block.col(j) = T.col(cells[j]);
        block = cube_distance_weights(domain, cubes, c, N).asDiagonal() * block;
        worst = std::max(worst, spectral_norm(block));
    }
    return worst;
}

double l1_to_amalgam_norm(const Eigen::MatrixXd& T, const GridDomain& domain,
                          const CubeDecomposition& cubes) {
    const double w = domain.cell_weight();
    double worst = 0.0;
    for (int y = 0; y < T.cols(); ++y) {
        double total = 0.0;
        for (int c = 0; c < cubes.cube_count(); ++c) {
            double sq = 0.0;
            for (int i : cubes.cells(c)) sq += T(i, y) * T(i, y);
            total += std::sqrt(w * sq);
        }
        worst = std::max(worst, total / w);
    }
    return worst;
}

std::pair<double, double> amalgam_operator_bracket(const Eigen::MatrixXd& T,
                                                   const GridDomain& domain,
                                                   const CubeDecomposition& cubes) {
    const int nc = cubes.cube_count();
    double upper = 0.0;
    for (int k = 0; k < nc; ++k) {
        const auto& ck = cubes.cells(k);
        Eigen::MatrixXd col_block(T.rows(), ck.size());
        for (std::size_t j = 0; j < ck.size(); ++j) col_block.col(j) = T.col(ck[j]);
        double col_sum = 0.0;
        for (int m = 0; m < nc; ++m) {
            const auto& cm = cubes.cells(m);
            Eigen::MatrixXd sub(cm.size(), ck.size());
            for (std::size_t r = 0; r < cm.size(); ++r) sub.row(r) = col_block.row(cm[r]);
            col_sum += spectral_norm(sub);
        }
        upper = std::max(upper, col_sum);
    }

    // lower bound: evaluate on cube-supported probes (dominant right
    // singular vector of each column block)
    double lower = 0.0;
    for (int k = 0; k < nc; ++k) {
        const auto& ck = cubes.cells(k);
        Eigen::MatrixXd col_block(T.rows(), ck.size());
        for (std::size_t j = 0; j < ck.size(); ++j) col_block.col(j) = T.col(ck[j]);
        Eigen::MatrixXd gram = col_block.transpose() * col_block;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        Eigen::VectorXd probe_local = es.eigenvectors().col(gram.rows() - 1);
        Field probe = Field::zero(domain);
        for (std::size_t j = 0; j < ck.size(); ++j) probe.values[ck[j]] = probe_local[j];
        const double denom = amalgam_norm(probe, cubes);
        if (denom <= 0.0) continue;
        Field image{domain, T * probe.values};
        lower = std::max(lower, amalgam_norm(image, cubes) / denom);
    }
    return {lower, upper};
}

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw Error("fft_radix2: size must be a power of two");
    for (std::size_t i = 1, rev = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; rev & bit; bit >>= 1) rev ^= bit;
        rev ^= bit;
        if (i < rev) std::swap(a[i], a[rev]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

namespace {

/// One-shot H^s evaluation at a fixed resolution.
double sobolev_value(const std::function<double(double)>& g, double s, double L, int m) {
    const double dx = 2.0 * L / m;
    std::vector<std::complex<double>> samples(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) samples[i] = g(-L + i * dx);
    fft_radix2(samples);
    const double dxi = M_PI / L;
    const double ft_scale = dx / std::sqrt(2.0 * M_PI);
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
        const int k_signed = k <= m / 2 ? k : k - m;
        const double xi = dxi * k_signed;
        const double mag = ft_scale * std::abs(samples[static_cast<std::size_t>(k)]);
        acc += std::pow(1.0 + xi * xi, s) * mag * mag;
    }
    return std::sqrt(acc * dxi);
}

} // namespace

double sobolev_norm_1d(const std::function<double(double)>& g, double s,
                       const SobolevGrid& grid) {
    grid.validate();
    const double edge = std::max(std::abs(g(-grid.L)), std::abs(g(grid.L)));
    if (edge > 1e-12)
        throw GridTooSmall("symbol does not decay below 1e-12 at +-L");
    // refine until doubling moves the value by < 1e-6; sharply squeezed
    // symbols (large t 2^{alpha j}) need more than the default resolution
    double coarse = sobolev_value(g, s, grid.L, grid.m);
    for (int m = 2 * grid.m; m <= (1 << 19); m *= 2) {
        const double fine = sobolev_value(g, s, grid.L, m);
        if (std::abs(fine - coarse) <= 1e-6 * std::max(fine, 1e-300)) return fine;
        coarse = fine;
    }
    throw QuadratureUnresolved("H^s value moved by > 1e-6 under grid doubling");
}

double weighted_ft_l1(const std::function<double(double)>& psi, int N, const SobolevGrid& grid) {
    grid.validate();
    const int m = grid.m;
    const double dx = 2.0 * grid.L / m;
    std::vector<std::complex<double>> samples(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) samples[i] = psi(-grid.L + i * dx);
    fft_radix2(samples);
    const double dxi = M_PI / grid.L;
    const double ft_scale = dx / std::sqrt(2.0 * M_PI);
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
        const int k_signed = k <= m / 2 ? k : k - m;
        const double xi = dxi * k_signed;
        acc += std::pow(1.0 + xi * xi, N / 2.0) * ft_scale *
               std::abs(samples[static_cast<std::size_t>(k)]);
    }
    return acc * dxi;
}

namespace {

double matrix_opnorm(const Eigen::MatrixXd& M, double p) {
    if (p == 1.0) return M.cwiseAbs().colwise().sum().maxCoeff();
    if (std::isinf(p)) return M.cwiseAbs().rowwise().sum().maxCoeff();
    if (p == 2.0) return spectral_norm(M);
    throw InvalidExponent("operator norms computed for p in {1, 2, inf}");
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<ReportRow> verify_scaled_multiplier(const SpectralDecomposition& dec,
                                                const DyadicPartition& part,
                                                const std::vector<SymbolFamily>& symbols,
                                                const std::vector<int>& j_list,
                                                const std::vector<double>& p_list,
                                                const MultiplierParams& prm,
                                                const SobolevGrid& grid) {
    prm.validate(dec.domain().dimension());
    const double smoothness = prm.N + 0.5 + prm.delta;
    std::vector<ReportRow> rows;

    for (const SymbolFamily& sym : symbols) {
        std::map<double, std::vector<double>> ratios_by_p;
        for (int j : j_list) {
            if (sym.scale_window > 0 && std::abs(j - sym.scale_center) > sym.scale_window)
                continue; // squeezed below double precision; see SymbolFamily

            // scaled symbol on the H^s side: G(2^j sqrt(lambda)) phi0(sqrt(lambda))
            auto scaled = [&](double lam) {
                if (lam <= 0.0) return 0.0;
                const double freq = std::sqrt(lam);
                const double bump = phi0(freq);
                return bump == 0.0 ? 0.0 : sym.G(std::ldexp(freq, j)) * bump;
            };
            const double hs = sobolev_norm_1d(scaled, smoothness, grid);

            auto block_symbol = [&](double lam) {
                const double freq = std::sqrt(lam);
                const double bump = part.phi(j, freq);
                return bump == 0.0 ? 0.0 : sym.G(freq) * bump;
            };
            const Eigen::MatrixXd M = symbol_matrix(dec, block_symbol).matrix;
            const double oracle = symbol_weights(dec, block_symbol).cwiseAbs().maxCoeff();

            for (double p : p_list) {
                const double lhs = matrix_opnorm(M, p);
                const double ratio = lhs / hs;
                rows.push_back(ReportRow::measured(
                    "multiplier",
                    {{"G", sym.label}, {"j", j}, {"p", std::isinf(p) ? -1.0 : p}}, ratio));
                ratios_by_p[p].push_back(ratio);
                if (p == 2.0 && oracle > 0.0)
                    rows.push_back(ReportRow::bounded(
                        "multiplier_l2_oracle", {{"G", sym.label}, {"j", j}},
                        lhs / oracle, 1.0 + 1e-8));
            }
        }
        for (auto& [p, ratios] : ratios_by_p) {
            const double med = median_of(ratios);
            const double top = *std::max_element(ratios.begin(), ratios.end());
            rows.push_back(ReportRow::bounded(
                "multiplier_uniformity",
                {{"G", sym.label}, {"p", std::isinf(p) ? -1.0 : p}},
                med > 0.0 ? top / med : 0.0, 10.0));
        }
    }
    return rows;
}

double verify_resolvent_factorization(const SpectralDecomposition& dec,
                                      const std::function<double(double)>& G_of_lambda, int j,
                                      const MultiplierParams& prm) {
    prm.validate(dec.domain().dimension());
    const double M = prm.M, beta = prm.beta;
    // squared-variable bump phi(x) = phi0(sqrt x), supported in [a^2, b^2]
    auto bump = [](double x) { return x > 0.0 ? phi0(std::sqrt(x)) : 0.0; };

    auto lhs_symbol = [&](double lam) {
        const double b = bump(std::ldexp(lam, -2 * j));
        return b == 0.0 ? 0.0 : G_of_lambda(lam) * b;
    };
    auto psi_of_mu = [&](double mu) {
        if (mu <= 0.0) return 0.0;
        const double x = 1.0 / mu - M; // recovers 2^{-2j} lambda
        const double b = bump(x);
        return b == 0.0 ? 0.0
                        : G_of_lambda(std::ldexp(x, 2 * j)) * b * std::pow(mu, -beta);
    };

    const Eigen::MatrixXd lhs = symbol_matrix(dec, lhs_symbol).matrix;
    const Eigen::MatrixXd psi_part = symbol_matrix(dec, [&](double lam) {
                                         return psi_of_mu(1.0 / (M + std::ldexp(lam, -2 * j)));
                                     }).matrix;
    const Eigen::MatrixXd res_part = symbol_matrix(dec, [&](double lam) {
                                         return std::pow(M + std::ldexp(lam, -2 * j), -beta);
                                     }).matrix;
    const Eigen::MatrixXd rhs = psi_part * res_part;
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

std::vector<ReportRow> verify_amalgam_lemma(const SpectralDecomposition& dec,
                                            const std::function<double(double)>& psi_profile,
                                            const MultiplierParams& prm,
                                            const std::vector<double>& theta_list,
                                            const SobolevGrid& grid) {
    const GridDomain& domain = dec.domain();
    const int d = domain.dimension();
    prm.validate(d);
    std::vector<ReportRow> rows;

    const double psi_ft_integral = weighted_ft_l1(psi_profile, prm.N, grid);
    rows.push_back(ReportRow::measured("amalgam_psi_ft", {{"N", prm.N}}, psi_ft_integral));

    std::vector<double> scaled_l1_norms;
    for (double theta : theta_list) {
        CubeDecomposition cubes = CubeDecomposition::build(domain, theta);

        // identity exactness: both bracket halves equal one
        auto [id_lo, id_up] = amalgam_operator_bracket(
            Eigen::MatrixXd::Identity(domain.size(), domain.size()), domain, cubes);
        rows.push_back(ReportRow::checked("amalgam_identity_lower", {{"theta", theta}},
                                          id_lo, 1.0, 1e-10));
        rows.push_back(ReportRow::checked("amalgam_identity_upper", {{"theta", theta}},
                                          id_up, 1.0, 1e-10));

        auto resolvent_symbol = [&](double lam) {
            return psi_profile(1.0 / (prm.M + theta * lam));
        };
        const Eigen::MatrixXd T = symbol_matrix(dec, resolvent_symbol).matrix;
        const double l2op = symbol_weights(dec, resolvent_symbol).cwiseAbs().maxCoeff();
        const double aN = script_A_norm(T, domain, cubes, prm.N);
        auto [lo, up] = amalgam_operator_bracket(T, domain, cubes);

        const double exponent = d / (2.0 * prm.N);
        const double rhs = l2op + std::pow(theta, -d / 4.0) * std::pow(aN, exponent) *
                                      std::pow(l2op, 1.0 - exponent);
        rows.push_back(ReportRow::measured("amalgam_op_ratio", {{"theta", theta}},
                                           rhs > 0.0 ? up / rhs : 0.0));
        rows.push_back(ReportRow::bounded("amalgam_bracket_order", {{"theta", theta}},
                                          lo, up * (1.0 + 1e-10)));

        rows.push_back(ReportRow::measured(
            "amalgam_scriptA_ratio", {{"theta", theta}},
            aN / (std::pow(theta, prm.N / 2.0) * psi_ft_integral)));

        auto neg_power = [&](double lam) { return std::pow(prm.M + theta * lam, -prm.beta); };
        const Eigen::MatrixXd P = symbol_matrix(dec, neg_power).matrix;
        const double scaled = l1_to_amalgam_norm(P, domain, cubes) * std::pow(theta, d / 2.0);
        scaled_l1_norms.push_back(scaled);
        rows.push_back(
            ReportRow::measured("amalgam_l1_scaled", {{"theta", theta}}, scaled));
    }
    if (scaled_l1_norms.size() > 1) {
        const double lo = *std::min_element(scaled_l1_norms.begin(), scaled_l1_norms.end());
        const double hi = *std::max_element(scaled_l1_norms.begin(), scaled_l1_norms.end());
        rows.push_back(ReportRow::bounded("amalgam_l1_spread", {{"sweep", "theta"}},
                                          lo > 0.0 ? hi / lo : 0.0, 10.0));
    }
    return rows;
}

std::vector<ReportRow> verify_gaussian_bound(const SpectralDecomposition& dec,
                                             const std::vector<double>& t_list) {
    const GridDomain& domain = dec.domain();
    const int d = domain.dimension();
    const double h = domain.h();
    const double w = domain.cell_weight();
    std::vector<ReportRow> rows;

    for (double t : t_list) {
        const SymOperator K = kernel_matrix(dec, t, 2.0);
        const double min_entry = K.matrix.minCoeff();
        ReportRow pos = ReportRow::measured("gaussian_positivity", {{"t", t}}, min_entry);
        pos.target = -1e-12;
        pos.tol = 0.0;
        pos.pass = min_entry >= -1e-12;
        rows.push_back(pos);

        if (t >= 4.0 * h * h) {
            const double kernel_diag = K.matrix.diagonal().maxCoeff() / w;
            const double continuum = std::pow(4.0 * M_PI * t, -d / 2.0);
            rows.push_back(ReportRow::bounded("gaussian_diagonal", {{"t", t}},
                                              kernel_diag / continuum, 4.0));
        }
    }

    // spectral-gap regime: the kernel collapses onto the ground mode
    const double lam1 = dec.eigenvalues()[0];
    const double gap = dec.size() > 1 ? dec.eigenvalues()[1] - lam1 : lam1;
    const double t_late = std::log(1e3) / gap;
    const SymOperator K = kernel_matrix(dec, t_late, 2.0);
    const Eigen::VectorXd v1 = dec.eigenvectors().col(0);
    const Eigen::MatrixXd rank1 = std::exp(-lam1 * t_late) * w * v1 * v1.transpose();
    const double rel = (K.matrix - rank1).cwiseAbs().maxCoeff() /
                       rank1.cwiseAbs().maxCoeff();
    rows.push_back(ReportRow::bounded("gaussian_rank_one", {{"t", t_late}}, rel, 0.01));
    return rows;
}

} // namespace besovlab
