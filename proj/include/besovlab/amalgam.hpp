#pragma once

#include <complex>
#include <functional>

#include "besovlab/besov.hpp"
#include "besovlab/report.hpp"

namespace besovlab {

/// Tiling of the domain by cubes of side theta^{1/2} centered at
/// theta^{1/2} k, k in Z^d. Cells on a shared face go to the
/// lexicographically smaller k.
class CubeDecomposition {
  public:
    static CubeDecomposition build(const GridDomain& domain, double theta);

    double theta() const { return theta_; }
    int cube_count() const { return static_cast<int>(cells_.size()); }
    const std::vector<int>& cells(int cube) const { return cells_[cube]; }
    std::array<double, 2> center(int cube) const {
        const double side = std::sqrt(theta_);
        return {side * key_[cube][0], side * key_[cube][1]};
    }
    int cube_of_cell(int cell) const { return cell_to_cube_[cell]; }

  private:
    double theta_ = 1.0;
    std::vector<std::array<int, 2>> key_;       // cube -> lattice index k
    std::vector<std::vector<int>> cells_;       // cube -> interior cell ids
    std::vector<int> cell_to_cube_;
};

/// Parameters of the scaled-multiplier machinery. Defaults follow the
/// strict inequalities minimally: N = floor(d/2)+1, delta = 1/2, M = 1,
/// beta = d/4 + 1/2, [a, b] = [1/2, 2].
struct MultiplierParams {
    int N = 1;
    double delta = 0.5;
    double M = 1.0;
    double beta = 0.75;
    double a = 0.5;
    double b = 2.0;

    static MultiplierParams defaults(int dimension) {
        MultiplierParams p;
        p.N = dimension / 2 + 1;
        p.beta = dimension / 4.0 + 0.5;
        return p;
    }
    void validate(int dimension) const {
        if (!(N > dimension / 2.0)) throw Error("MultiplierParams: need N > d/2");
        if (!(beta > dimension / 4.0)) throw Error("MultiplierParams: need beta > d/4");
        if (!(a < b) || !(a > 0.0)) throw Error("MultiplierParams: need 0 < a < b");
    }
};

/// Uniform 1-D grid on [-L, L] with a power-of-two point count, the
/// substrate for H^s(R) norms of symbols.
struct SobolevGrid {
    double L = 64.0;
    int m = 1 << 14;

    void validate() const {
        if (!(L > 0.0) || m < 8 || (m & (m - 1)) != 0)
            throw Error("SobolevGrid: need L > 0 and m a power of two >= 8");
    }
};

/// In-place radix-2 FFT (forward, unnormalized).
void fft_radix2(std::vector<std::complex<double>>& data);

/// Amalgam norm sum_k ||f||_{L^2(C_theta(k))}; always >= ||f||_{L^2}.
double amalgam_norm(const Field& f, const CubeDecomposition& cubes);

/// sup_k of the L^2 -> L^2 norm of |x - center_k|^N T restricted to cube k.
double script_A_norm(const Eigen::MatrixXd& T, const GridDomain& domain,
                     const CubeDecomposition& cubes, int N);

/// Exact L^1 -> amalgam operator norm: max over cells y of
/// amalgam_norm(column y) / h^d.
double l1_to_amalgam_norm(const Eigen::MatrixXd& T, const GridDomain& domain,
                          const CubeDecomposition& cubes);

/// Bracket [lower, upper] of the amalgam -> amalgam operator norm:
/// upper = sup_k sum_m sigma_max(P_m T P_k), lower from cube-supported probes.
std::pair<double, double> amalgam_operator_bracket(const Eigen::MatrixXd& T,
                                                   const GridDomain& domain,
                                                   const CubeDecomposition& cubes);

/// H^s(R) norm of g via DFT on the grid: ||(1+xi^2)^{s/2} ghat||_{L^2}.
/// Throws GridTooSmall when |g| exceeds 1e-12 at the endpoints, and
/// QuadratureUnresolved when doubling m moves the result by > 1e-6.
double sobolev_norm_1d(const std::function<double(double)>& g, double s,
                       const SobolevGrid& grid = {});

/// int (1+xi^2)^{N/2} |ghat(xi)| dxi by quadrature on the grid.
double weighted_ft_l1(const std::function<double(double)>& psi, int N,
                      const SobolevGrid& grid = {});

/// A named symbol family G(freq), freq = sqrt(lambda). Families that decay
/// like exp(-t freq^alpha) underflow double precision once t 2^{alpha j} is
/// large; scale_window > 0 restricts their rows to |j - scale_center| <= window.
struct SymbolFamily {
    std::string label;
    std::function<double(double)> G;
    int scale_center = 0;
    int scale_window = 0; // 0 means all blocks
};

/// Measured ratios ||G(sqrt A) phi_j(sqrt A)||_{p->p} / ||G(2^j sqrt.) phi0(sqrt.)||_{H^{N+1/2+delta}}
/// across (j, p), with exact operator norms; includes the p = 2 row checked
/// against the spectral symbol-max oracle.
std::vector<ReportRow> verify_scaled_multiplier(const SpectralDecomposition& dec,
                                                const DyadicPartition& part,
                                                const std::vector<SymbolFamily>& symbols,
                                                const std::vector<int>& j_list,
                                                const std::vector<double>& p_list,
                                                const MultiplierParams& prm,
                                                const SobolevGrid& grid = {});

/// Max entrywise deviation between G(A) phi(2^{-2j} A) and its resolvent
/// factorization through psi((M + 2^{-2j} A)^{-1}) (M + 2^{-2j} A)^{-beta}.
double verify_resolvent_factorization(const SpectralDecomposition& dec,
                                      const std::function<double(double)>& G_of_lambda, int j,
                                      const MultiplierParams& prm);

/// Amalgam-space lemma rows over a theta sweep: the amalgam operator-norm
/// bracket against its L^2/script-A bound, the script-A bound of
/// psi((M+theta A)^{-1}) against theta^{N/2} * weighted_ft_l1(psi), and the
/// exact L^1 -> amalgam norm of (M + theta A)^{-beta} scaled by theta^{d/2}.
std::vector<ReportRow> verify_amalgam_lemma(const SpectralDecomposition& dec,
                                            const std::function<double(double)>& psi_profile,
                                            const MultiplierParams& prm,
                                            const std::vector<double>& theta_list,
                                            const SobolevGrid& grid = {});

/// Heat-kernel positivity and the Gaussian diagonal bound
/// K(x,x;t) <= 4 (4 pi t)^{-d/2} for t >= 4 h^2 (alpha = 2 only).
std::vector<ReportRow> verify_gaussian_bound(const SpectralDecomposition& dec,
                                             const std::vector<double>& t_list);

} // namespace besovlab
