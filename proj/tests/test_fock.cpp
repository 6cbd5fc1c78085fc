#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "husimi/fock.hpp"
#include "husimi/grid.hpp"

using namespace husimi;

TEST(Ladder, Dim2SingleEntry) {
    auto [a, ad] = build_ladder(2);
    EXPECT_EQ(a(0, 1), cplx(1.0));
    EXPECT_EQ(a(0, 0), cplx(0.0));
    EXPECT_EQ(a(1, 0), cplx(0.0));
    EXPECT_EQ(a(1, 1), cplx(0.0));
    EXPECT_EQ(ad(1, 0), cplx(1.0));
}

TEST(Ladder, NumberOperatorSpectrum) {
    auto [a, ad] = build_ladder(4);
    Mat n = (ad * a).matrix();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_NEAR(std::abs(n(i, j) - (i == j ? cplx(i) : cplx(0.0))), 0.0, 1e-15);
}

TEST(Ladder, CommutatorTruncationArtifact) {
    auto [a, ad] = build_ladder(16);
    Mat c = (a * ad - ad * a).matrix();
    // brute force: [a, a†] is the identity except the last diagonal entry
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
            cplx want = i == j ? cplx(i == 15 ? -15.0 : 1.0) : cplx(0.0);
            EXPECT_NEAR(std::abs(c(i, j) - want), 0.0, 1e-13) << i << "," << j;
        }
}

TEST(Ladder, InvalidDimension) {
    EXPECT_THROW(build_ladder(1), InvalidDimension);
    EXPECT_THROW(build_parity(0), InvalidDimension);
}

TEST(Ladder, NumberActsExactlyOnBasis) {
    for (int dim : {2, 5, 17, 40}) {
        auto [a, ad] = build_ladder(dim);
        Mat n = (ad * a).matrix();
        for (int k = 0; k < dim - 1; ++k) {
            Vec e = Vec::Unit(dim, k);
            // sqrt(k)^2 rounds; the diagonal builder is exact
            Vec r = n * e;
            EXPECT_LE((r - static_cast<double>(k) * e).cwiseAbs().maxCoeff(), 4.0 * k * 2.3e-16);
            Vec d = build_number(dim).matrix() * e;
            EXPECT_EQ((d - static_cast<double>(k) * e).cwiseAbs().maxCoeff(), 0.0);
        }
    }
}

TEST(Parity, SmallCases) {
    EXPECT_EQ(build_parity(1).matrix()(0, 0), cplx(1.0));
    Mat v = build_parity(3).matrix();
    EXPECT_EQ(v(0, 0), cplx(1.0));
    EXPECT_EQ(v(1, 1), cplx(-1.0));
    EXPECT_EQ(v(2, 2), cplx(1.0));
    for (int dim : {1, 2, 7, 64}) {
        Mat v2 = build_parity(dim).matrix() * build_parity(dim).matrix();
        EXPECT_EQ(v2, Mat::Identity(dim, dim));
    }
}

TEST(Operator, AdjointInvolutionAndHermitianFlag) {
    FockOperator a = random_operator(9, 3, false);
    EXPECT_EQ(a.adjoint().adjoint().matrix(), a.matrix());
    Mat m = a.matrix();
    EXPECT_THROW(FockOperator(m, Representation::finite, true), ValidationError);
    Mat bad = Mat::Identity(3, 3);
    bad(1, 1) = cplx(NAN, 0.0);
    EXPECT_THROW(FockOperator{bad}, ValidationError);
    FockOperator h = random_hermitian(9, 4);
    EXPECT_LE(h.hermitian_defect(), 1e-12);
}

TEST(Operator, LadderPolynomialMatchesMatrixAlgebra) {
    // a† a a† in a padded basis, compressed, against the normal-ordered expansion a†² a + a†
    int dim = 10;
    auto big = build_ladder(dim + 4);
    Mat ref = (big.second * big.first * big.second).matrix().topLeftCorner(dim, dim);
    FockOperator p = build_ladder_polynomial({{1.0, 2, 1}, {1.0, 1, 0}}, dim);
    EXPECT_LE((p.matrix() - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Coherent, Vacuum) {
    StateVector s = coherent_state({0, 0}, 8);
    EXPECT_EQ(s.coeffs, Vec::Unit(8, 0));
    EXPECT_EQ(s.norm_deficiency, 0.0);
}

TEST(Coherent, UnitAmplitudeClosedForm) {
    StateVector s = coherent_state({std::sqrt(2.0), 0}, 32);
    for (int n = 0; n < 32; ++n)
        EXPECT_NEAR(std::abs(s.coeffs(n) - std::exp(-0.5) / std::sqrt(std::tgamma(n + 1.0))), 0.0, 1e-15);
    EXPECT_LT(s.norm_deficiency, 1e-20);
    // direct exponentiation of the displacement generator
    Mat d = displacement_matrix({std::sqrt(2.0), 0}, 64);
    EXPECT_LE((d.col(0).head(24) - s.coeffs.head(24)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Coherent, EigenvectorOfAnnihilation) {
    PhasePoint pt{1, 1};
    StateVector s = coherent_state(pt, 32);
    auto [a, ad] = build_ladder(32);
    Vec lhs = a.matrix() * s.coeffs;
    Vec rhs = pt.z() * s.coeffs;
    EXPECT_LE((lhs - rhs).head(24).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Coherent, DeficiencyDiagnostics) {
    StateVector s = coherent_state({6, 6}, 16);
    EXPECT_FALSE(s.reliable);
    EXPECT_FALSE(s.warning.empty());
    EXPECT_NEAR(s.norm_deficiency, 1.0 - s.coeffs.squaredNorm(), 1e-12);
    // tail sum keeps precision where 1 - |v|^2 cannot
    StateVector t = coherent_state({1, 0}, 30);
    EXPECT_GT(t.norm_deficiency, 0.0);
    EXPECT_LT(t.norm_deficiency, 1e-30);
}

TEST(Displaced, ZeroMatchesCoherent) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int dim : {16, 32, 64}) {
        for (int t = 0; t < 5; ++t) {
            // |z|^2 <= dim/4
            double r = std::sqrt(dim / 2.0) * std::abs(u(g));
            double th = pi * u(g);
            PhasePoint pt{r * std::cos(th), r * std::sin(th)};
            Vec a = coherent_state(pt, dim).coeffs;
            Vec b = displaced_number_state(0, pt, dim).coeffs;
            EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10) << dim;
        }
    }
}

TEST(Displaced, IdentityAtOrigin) {
    Vec v = displaced_number_state(1, {0, 0}, 8).coeffs;
    EXPECT_LE((v - Vec::Unit(8, 1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Displaced, TruncationConvergence) {
    Vec a = displaced_number_state(1, {1, 0}, 48).coeffs;
    Vec b = displaced_number_state(1, {1, 0}, 64).coeffs;
    EXPECT_LE((a.head(32) - b.head(32)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_THROW(displaced_number_state(8, {0, 0}, 8), IndexError);
}

TEST(Displaced, RecursionMatchesExponential) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (int t = 0; t < 6; ++t) {
        PhasePoint pt{u(g), u(g)};
        Mat fam = displaced_family(pt, 40, 12);
        for (int n = 0; n < 12; ++n) {
            Vec ref = displaced_number_state(n, pt, 40).coeffs;
            EXPECT_LE((fam.col(n) - ref).cwiseAbs().maxCoeff(), 1e-11) << n;
        }
    }
}

TEST(Displaced, VectorActionMatchesExponential) {
    PhasePoint pt{1.3, -0.7};
    int work = 60;
    Vec v = random_operator(12, 9, false).matrix().col(0);
    Vec act = displace_vector(v, pt, work, -1.0);
    Mat u = displacement_matrix({-pt.x, -pt.p}, work);
    Vec pad = Vec::Zero(work);
    pad.head(12) = v;
    EXPECT_LE((act - u * pad).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(act.norm(), v.norm(), 1e-13);
}

TEST(Overlap, ClosedForm) {
    EXPECT_NEAR(std::abs(coherent_overlap_closed_form({0, 0}, {0, 0}) - 1.0), 0.0, 1e-16);
    PhasePoint q{1.2, -0.4};
    EXPECT_NEAR(std::abs(coherent_overlap_closed_form({0, 0}, q) - std::exp(-(q.x * q.x + q.p * q.p) / 4)), 0.0,
                1e-15);
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 20; ++t) {
        PhasePoint a{u(g), u(g)}, b{u(g), u(g)};
        cplx direct = coherent_state(a, 64).coeffs.dot(coherent_state(b, 64).coeffs);
        EXPECT_NEAR(std::abs(coherent_overlap_closed_form(a, b) - direct), 0.0, 1e-10);
        EXPECT_NEAR(std::abs(coherent_overlap_closed_form(a, b) - std::conj(coherent_overlap_closed_form(b, a))), 0.0,
                    1e-15);
    }
}

TEST(Hermite, Values) {
    EXPECT_NEAR(position_wavefunction(0, 0.0), std::pow(pi, -0.25), 1e-15);
    EXPECT_EQ(position_wavefunction(1, 0.0), 0.0);
    // ψ_2 = π^{-1/4} (2x² - 1) e^{-x²/2} / √2
    double x = 0.73;
    EXPECT_NEAR(position_wavefunction(2, x), std::pow(pi, -0.25) * (2 * x * x - 1) * std::exp(-x * x / 2) / std::sqrt(2.0),
                1e-15);
}

TEST(Hermite, Normalization) {
    int n = 4096;
    double a = -12, b = 12, h = (b - a) / (n - 1), s = 0;
    for (int k = 0; k < n; ++k) {
        double v = position_wavefunction(10, a + k * h);
        s += (k == 0 || k == n - 1 ? 0.5 : 1.0) * v * v;
    }
    EXPECT_NEAR(s * h, 1.0, 1e-8);
}

TEST(Coherent, ResolutionOfIdentity) {
    // (1/2π) ∫ |φ⟩⟨φ| dx dp on a grid covering |z|^2 <= dim/2
    int dim = 12;
    GridSpec g = GridSpec::square(9.0, 144);
    Mat acc = Mat::Zero(dim, dim);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.np; ++j) {
            PhasePoint pt = g.point(i, j);
            if (pt.abs_z2() > 40.0) continue;
            Vec v = coherent_state(pt, dim).coeffs;
            acc += v * v.adjoint();
        }
    acc *= g.dx() * g.dp() / (2 * pi);
    for (int n = 0; n < dim; ++n) {
        Vec e = Vec::Unit(dim, n);
        EXPECT_LE((acc * e - e).cwiseAbs().maxCoeff(), 1e-6) << n;
    }
}

TEST(Density, Validation) {
    EXPECT_NO_THROW(validate_density(coherent_density({1, 2}, 20)));
    EXPECT_THROW(validate_density(FockOperator(Mat::Identity(3, 3))), ValidationError);
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = 1.5;
    m(1, 1) = -0.5;
    EXPECT_THROW(validate_density(FockOperator(m)), ValidationError);
}
