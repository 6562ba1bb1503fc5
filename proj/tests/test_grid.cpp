#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "besovlab/grid.hpp"
#include "besovlab/spectral.hpp"

using namespace besovlab;

TEST_CASE("interval domain indexes the interior sites") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 3));
    CHECK(dom.size() == 3);
    CHECK(dom.h() == doctest::Approx(0.25));
    CHECK(dom.coord(0)[0] == doctest::Approx(0.25));
    CHECK(dom.coord(1)[0] == doctest::Approx(0.5));
    CHECK(dom.coord(2)[0] == doctest::Approx(0.75));
}

TEST_CASE("unit square with h = 1/3 has 4 interior cells") {
    GridDomain dom = build_domain(GridSpec::square(0.0, 1.0, 2));
    CHECK(dom.size() == 4);
    CHECK(dom.h() == doctest::Approx(1.0 / 3.0));
    CHECK(dom.cell_weight() == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("all-false mask raises EmptyDomain") {
    GridSpec s;
    s.dimension = 1;
    s.h = 0.5;
    s.nx = 4;
    s.mask = {0, 0, 0, 0};
    CHECK_THROWS_AS(build_domain(s), EmptyDomain);
}

TEST_CASE("1-D Laplacian stencil: diagonal 32, off-diagonal -16 at h = 1/4") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 3));
    SymOperator A = assemble_laplacian(dom);
    CHECK(A.matrix(0, 0) == doctest::Approx(32.0));
    CHECK(A.matrix(1, 1) == doctest::Approx(32.0));
    CHECK(A.matrix(0, 1) == doctest::Approx(-16.0));
    CHECK(A.matrix(1, 0) == doctest::Approx(-16.0));
    CHECK(A.matrix(0, 2) == 0.0);
    CHECK((A.matrix - A.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("2-D square stencil: diagonal 36, neighbor entries -9 at h = 1/3") {
    GridDomain dom = build_domain(GridSpec::square(0.0, 1.0, 2));
    SymOperator A = assemble_laplacian(dom);
    CHECK(A.matrix(0, 0) == doctest::Approx(36.0));
    CHECK(A.matrix(0, 1) == doctest::Approx(-9.0));
    CHECK(A.matrix(0, 2) == doctest::Approx(-9.0));
    CHECK(A.matrix(0, 3) == 0.0); // diagonal neighbor is not in the stencil
}

TEST_CASE("tridiagonal eigenvalues match the closed form at h = 1/4") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 3));
    SpectralDecomposition dec = decompose(assemble_laplacian(dom));
    const double h = 0.25;
    for (int k = 1; k <= 3; ++k) {
        const double target = 4.0 / (h * h) * std::pow(std::sin(k * M_PI * h / 2.0), 2);
        CHECK(dec.eigenvalues()[k - 1] == doctest::Approx(target).epsilon(1e-12));
    }
    CHECK(dec.eigenvalues()[0] == doctest::Approx(16.0 * (2.0 - std::sqrt(2.0))));
    CHECK(dec.eigenvalues()[1] == doctest::Approx(32.0));
    CHECK(dec.eigenvalues()[2] == doctest::Approx(16.0 * (2.0 + std::sqrt(2.0))));
}

TEST_CASE("lp_norm worked examples") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 3));
    Field ones = Field::constant(dom, 1.0);
    CHECK(lp_norm(ones, 1.0) == doctest::Approx(0.75));
    CHECK(lp_norm(ones, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
    Field f{dom, Eigen::Vector3d(3.0, 4.0, 0.0)};
    CHECK(lp_norm(f, 2.0) == doctest::Approx(2.5));
    CHECK_THROWS_AS(lp_norm(f, 0.5), InvalidExponent);
}

TEST_CASE("Hoelder monotonicity: sup norm <= h^{-d/p} * lp norm") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 17));
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd v(dom.size());
        for (int i = 0; i < dom.size(); ++i) v[i] = u(rng);
        Field f{dom, v};
        for (double p : {1.0, 1.5, 2.0, 4.0}) {
            const double bound = std::pow(dom.h(), -1.0 / p) * lp_norm(f, p);
            CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) <= bound * (1 + 1e-12));
        }
    }
}

TEST_CASE("Laplacian is positive definite on random masks") {
    std::mt19937_64 rng(11);
    std::bernoulli_distribution coin(0.6);
    for (int rep = 0; rep < 10; ++rep) {
        GridSpec s;
        s.dimension = 2;
        s.h = 0.1;
        s.nx = 8;
        s.ny = 8;
        s.mask.assign(64, 0);
        for (auto& m : s.mask) m = coin(rng) ? 1 : 0;
        s.mask[0] = 1; // keep at least one interior cell
        GridDomain dom = build_domain(s);
        SpectralDecomposition dec = decompose(assemble_laplacian(dom));
        CHECK(dec.eigenvalues()[0] > 0.0);
    }
}

TEST_CASE("smallest eigenvalue approaches pi^2 under refinement") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 255));
    SpectralDecomposition dec = decompose(assemble_laplacian(dom));
    const double lam1 = dec.eigenvalues()[0];
    CHECK(std::abs(lam1 - M_PI * M_PI) / (M_PI * M_PI) < 0.01);
}

TEST_CASE("mask file round trip") {
    const std::string path = "test_mask_roundtrip.txt";
    {
        std::ofstream out(path);
        out << "2 0.125 4 3\n1100\n1110\n0110\n";
    }
    GridSpec s = GridSpec::from_mask_file(path);
    CHECK(s.dimension == 2);
    CHECK(s.h == doctest::Approx(0.125));
    CHECK(s.nx == 4);
    CHECK(s.ny == 3);
    GridDomain dom = build_domain(s);
    CHECK(dom.size() == 2 + 3 + 2);
    CHECK(dom.index_at(0, 0) == 0);
    CHECK(dom.index_at(3, 0) == -1);
    std::remove(path.c_str());
}

TEST_CASE("mask file errors") {
    const std::string path = "test_mask_bad.txt";
    {
        std::ofstream out(path);
        out << "1 0.25 5\n1101\n"; // row shorter than nx
    }
    CHECK_THROWS_AS(GridSpec::from_mask_file(path), IoError);
    CHECK_THROWS_AS(GridSpec::from_mask_file("does_not_exist.txt"), IoError);
    std::remove(path.c_str());
}

TEST_CASE("field/domain length mismatch is rejected") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 3));
    CHECK_THROWS_AS(Field(dom, Eigen::Vector2d(1.0, 2.0)), DomainMismatch);
}

TEST_CASE("complex fields: norms and conjugated inner product") {
    GridDomain dom = build_domain(GridSpec::interval(0.0, 1.0, 3));
    Eigen::VectorXcd v(3);
    v << std::complex<double>(3.0, 4.0), 0.0, 0.0;
    ComplexField f{dom, v};
    CHECK(lp_norm(f, 2.0) == doctest::Approx(2.5));
    Eigen::VectorXcd w(3);
    w << std::complex<double>(0.0, 1.0), 0.0, 0.0;
    ComplexField g{dom, w};
    auto ip = inner_product(f, g); // h * (3+4i) * conj(i)
    CHECK(ip.real() == doctest::Approx(0.25 * 4.0));
    CHECK(ip.imag() == doctest::Approx(-0.25 * 3.0));
}
