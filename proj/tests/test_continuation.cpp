#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "husimi/continuation.hpp"

using namespace husimi;

namespace {

ComplexPhasePoint random_complex_point(std::mt19937_64& g, double re, double im) {
    std::uniform_real_distribution<double> a(-re, re), b(-im, im);
    return {cplx(a(g), b(g)), cplx(a(g), b(g))};
}

}  // namespace

TEST(ComplexPoint, ReconstructionAndRealSection) {
    std::mt19937_64 g(1);
    for (int t = 0; t < 20; ++t) {
        ComplexPhasePoint z = random_complex_point(g, 2, 1);
        PhasePoint pl = z.plus(), mi = z.minus();
        cplx x = 0.5 * (pl.x + mi.x) + 0.5 * I * (pl.p - mi.p);
        cplx p = 0.5 * (pl.p + mi.p) - 0.5 * I * (pl.x - mi.x);
        EXPECT_NEAR(std::abs(x - z.x), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(p - z.p), 0.0, 1e-14);
        ComplexPhasePoint back = ComplexPhasePoint::from_pair(mi, pl);
        EXPECT_NEAR(std::abs(back.x - z.x) + std::abs(back.p - z.p), 0.0, 1e-14);
        // z+ and conj(z-) are the coherent amplitudes of plus and minus
        EXPECT_NEAR(std::abs(z.z_plus() - pl.z()), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(z.z_minus() - std::conj(mi.z())), 0.0, 1e-14);
    }
    ComplexPhasePoint r = ComplexPhasePoint::from_real({0.3, -1.1});
    EXPECT_TRUE(r.real());
    EXPECT_EQ(r.plus().x, r.minus().x);
    EXPECT_EQ(r.plus().p, r.minus().p);
    ComplexPhasePoint c{cplx(0.3, 0.1), cplx(-1.1, 0.0)};
    EXPECT_FALSE(c.real());
    EXPECT_NE(c.plus().p, c.minus().p);
}

TEST(Continue, RealSectionIsHusimi) {
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-2, 2);
    FockOperator A = random_operator(16, 4, false);
    for (int t = 0; t < 10; ++t) {
        PhasePoint pt{u(g), u(g)};
        EXPECT_NEAR(std::abs(continue_symbol(A, ComplexPhasePoint::from_real(pt)) - husimi_symbol(A, pt)), 0.0, 1e-10);
    }
}

TEST(Continue, NumberAndIdentity) {
    std::mt19937_64 g(3);
    FockOperator n = build_number(48), id = build_identity(48);
    for (int t = 0; t < 10; ++t) {
        ComplexPhasePoint z = random_complex_point(g, 1.5, 0.5);
        EXPECT_NEAR(std::abs(continue_symbol(n, z) - z.z_plus() * z.z_minus()), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(continue_symbol(id, z) - 1.0), 0.0, 1e-10);
    }
}

TEST(Continue, BargmannFormMatchesRatio) {
    std::mt19937_64 g(4);
    FockOperator A = random_operator(12, 7, false);
    for (int t = 0; t < 5; ++t) {
        ComplexPhasePoint z = random_complex_point(g, 1.5, 0.5);
        cplx b = std::exp(-z.z_plus() * z.z_minus()) *
                 bargmann_vector(z.z_minus(), 12).transpose() * A.matrix() * bargmann_vector(z.z_plus(), 12);
        EXPECT_NEAR(std::abs(b - continue_symbol(A, z)), 0.0, 1e-10);
    }
}

TEST(Continue, OverflowGuard) {
    FockOperator A = random_operator(6, 1, false);
    EXPECT_THROW(continue_symbol(A, ComplexPhasePoint::from_pair({0, 0}, {60, 0})), OverflowGuardError);
}

TEST(CauchyRiemann, Examples) {
    auto [r1, r2] = cauchy_riemann_residual(build_number(48), ComplexPhasePoint::from_real({1, 1}), 1e-3);
    EXPECT_LE(r1, 1e-5);
    EXPECT_LE(r2, 1e-5);
    auto [v1, v2] = cauchy_riemann_residual(build_parity(48), ComplexPhasePoint::from_real({0, 0}), 1e-3);
    EXPECT_LE(v1, 1e-5);
    EXPECT_LE(v2, 1e-5);
    EXPECT_THROW(cauchy_riemann_residual(build_number(8), ComplexPhasePoint{}, 0.1), ValidationError);
    EXPECT_THROW(cauchy_riemann_residual(build_number(8), ComplexPhasePoint{}, 1e-7), ValidationError);
}

TEST(CauchyRiemann, SecondOrderInStep) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-2, 2);
    FockOperator A = random_hermitian(16, 11);
    for (int t = 0; t < 10; ++t) {
        ComplexPhasePoint z = ComplexPhasePoint::from_real({u(g), u(g)});
        auto [a1, a2] = cauchy_riemann_residual(A, z, 1e-3);
        auto [b1, b2] = cauchy_riemann_residual(A, z, 1e-4);
        EXPECT_LE(std::max(a1, a2), 1e-4);
        EXPECT_GE(std::log10(a1 / b1), 1.8);
        EXPECT_GE(std::log10(a2 / b2), 1.8);
    }
}

TEST(CauchyRiemann, ComplexPoints) {
    std::mt19937_64 g(6);
    FockOperator A = random_hermitian(20, 12);
    for (int t = 0; t < 5; ++t) {
        ComplexPhasePoint z = random_complex_point(g, 1.5, 0.5);
        auto [a1, a2] = cauchy_riemann_residual(A, z, 1e-2);
        auto [b1, b2] = cauchy_riemann_residual(A, z, 1e-3);
        EXPECT_GE(std::log10(a1 / b1), 1.8);
        EXPECT_GE(std::log10(a2 / b2), 1.8);
    }
}

TEST(DerivativeTable, NumberOperator) {
    PhasePoint c{0.7, -0.4};
    DerivativeTable t = derivative_table(build_number(64), c, 4);
    cplx z = c.z();
    EXPECT_NEAR(std::abs(t(0, 0) - std::norm(z)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(t(1, 1) - 1.0), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(t(0, 1) - z), 0.0, 1e-8);            // d- (z+ z-) = z+
    EXPECT_NEAR(std::abs(t(1, 0) - std::conj(z)), 0.0, 1e-8);  // d+ (z+ z-) = z-
    for (int m = 0; m <= 4; ++m)
        for (int n = 0; n <= 4; ++n)
            if (m + n > 2 || (m == 2 && n == 0) || (m == 0 && n == 2)) {
                EXPECT_LE(std::abs(t(m, n)), 1e-8) << m << n;
            }
}

TEST(DerivativeTable, Identity) {
    DerivativeTable t = derivative_table(build_identity(32), PhasePoint{0.2, 0.1}, 5);
    EXPECT_NEAR(std::abs(t(0, 0) - 1.0), 0.0, 1e-10);
    for (int m = 0; m <= 5; ++m)
        for (int n = 0; n <= 5; ++n)
            if (m + n > 0) {
                EXPECT_LE(std::abs(t(m, n)), 1e-10);
            }
}

TEST(DerivativeTable, PureOrdersMatchMatrixElements) {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 4; ++k) {
        FockOperator A = random_operator(16, 20 + k, k % 2 == 0);
        PhasePoint c{u(g), u(g)};
        DerivativeTable t = derivative_table(A, c, 6);
        EXPECT_NEAR(std::abs(t(0, 0) - husimi_symbol(A, c)), 0.0, 1e-10);
        Vec phi = coherent_state(c, 16).coeffs;
        for (int n = 0; n <= 6; ++n) {
            Vec phin = displaced_number_state(n, c, 16).coeffs;
            cplx minus = std::sqrt(factorial(n)) * phin.dot(A.matrix() * phi);
            cplx plus = std::sqrt(factorial(n)) * (A.matrix().adjoint() * phi).dot(phin);
            EXPECT_NEAR(std::abs(t(0, n) - minus), 0.0, 1e-8) << n;
            EXPECT_NEAR(std::abs(t(n, 0) - plus), 0.0, 1e-8) << n;
        }
    }
}

TEST(DerivativeTable, HermitianSymmetry) {
    FockOperator A = random_hermitian(20, 31);
    DerivativeTable t = derivative_table(A, PhasePoint{-0.6, 1.1}, 6);
    for (int m = 0; m <= 6; ++m)
        for (int n = 0; n <= 6; ++n) EXPECT_NEAR(std::abs(t(m, n) - std::conj(t(n, m))), 0.0, 1e-8);
}

TEST(DerivativeTable, RadiusIndependence) {
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 3; ++k) {
        FockOperator A = random_operator(16, 40 + k, false);
        PhasePoint c{u(g), u(g)};
        TorusOptions a, b;
        a.radius = 0.3;
        b.radius = 0.6;
        DerivativeTable ta = derivative_table(A, c, 8, a), tb = derivative_table(A, c, 8, b);
        // derivative order m + n <= 8; beyond that r^{-(m+n)} amplifies rounding past 1e-7
        double worst = 0.0;
        for (int m = 0; m <= 8; ++m)
            for (int n = 0; m + n <= 8; ++n) worst = std::max(worst, std::abs(ta(m, n) - tb(m, n)));
        EXPECT_LE(worst, 1e-7);
    }
}

TEST(DerivativeTable, MixedOrdersMatchDiagonalFrame) {
    FockOperator A = random_hermitian(18, 5);
    PhasePoint c{0.4, -0.9};
    DerivativeTable t = derivative_table(A, c, 6);
    FrameElements fe = frame_elements(A, c, 6);
    for (int n = 0; n <= 6; ++n)
        EXPECT_NEAR(std::abs(t(n, n) - mixed_diagonal_derivative(fe.diagonal, n)), 0.0, 1e-7 * factorial(n));
}

TEST(DerivativeTable, UnderResolvedAndDump) {
    TorusOptions o;
    o.oversample = 1;
    o.radius = 2.0;
    o.max_samples = 0;
    EXPECT_THROW(derivative_table(random_operator(24, 3, false), PhasePoint{0, 0}, 4, o), UnderResolvedError);
    DerivativeTable t = derivative_table(build_number(32), PhasePoint{0, 0}, 2);
    std::string d = t.dump();
    EXPECT_NE(d.find("max_order 2"), std::string::npos);
    EXPECT_NE(d.find("\n1 1 1"), std::string::npos);
}

TEST(DerivativeIdentity, ZeroOrderIsContinuation) {
    FockOperator A = random_operator(16, 9, false);
    PhasePoint mi{0.3, -0.2}, pl{0.8, 0.5};
    for (IdentitySide side : {IdentitySide::minus, IdentitySide::plus}) {
        DerivativeIdentityResult r = lemma_b_check(A, 0, mi, pl, side);
        EXPECT_LE(r.diff, 1e-10);
        EXPECT_NEAR(std::abs(r.lhs - continue_symbol(A, ComplexPhasePoint::from_pair(mi, pl))), 0.0, 1e-10);
    }
}

TEST(DerivativeIdentity, RealPointMatchesPureDerivatives) {
    FockOperator A = random_operator(20, 10, false);
    PhasePoint c{-0.5, 1.0};
    DerivativeTable t = derivative_table(A, c, 6);
    for (int n = 0; n <= 6; ++n) {
        DerivativeIdentityResult r = lemma_b_check(A, n, c, c, t);
        EXPECT_LE(r.diff, 1e-8) << n;
        EXPECT_NEAR(std::abs(r.lhs - t(0, n) / std::sqrt(factorial(n))), 0.0, 1e-8);
        DerivativeIdentityResult s = lemma_b_check(A, n, c, c, t, IdentitySide::plus);
        EXPECT_LE(s.diff, 1e-8) << n;
    }
}

TEST(DerivativeIdentity, AnnihilationExample) {
    FockOperator a = build_ladder(48).first;
    PhasePoint mi{0, 0}, pl{1, 0};
    DerivativeIdentityResult r = lemma_b_check(a, 1, mi, pl);
    Vec bra = displaced_number_state(1, mi, 48).coeffs;
    cplx brute = bra.dot(a.matrix() * coherent_state(pl, 48).coeffs) / coherent_overlap_closed_form(mi, pl);
    EXPECT_NEAR(std::abs(r.lhs - brute), 0.0, 1e-12);
    EXPECT_LE(r.diff, 1e-8);
}

TEST(DerivativeIdentity, DisplacedPairs) {
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 3; ++k) {
        FockOperator A = random_operator(16, 60 + k, k == 1);
        PhasePoint mi{u(g), u(g)};
        PhasePoint pl{mi.x + 0.5 * u(g), mi.p + 0.5 * u(g)};
        DerivativeTable t = derivative_table(A, ComplexPhasePoint::from_pair(mi, pl), 6);
        for (int n = 0; n <= 6; ++n) {
            EXPECT_LE(lemma_b_check(A, n, mi, pl, t, IdentitySide::minus).diff, 1e-8) << n;
            EXPECT_LE(lemma_b_check(A, n, mi, pl, t, IdentitySide::plus).diff, 1e-8) << n;
        }
    }
    DerivativeTable small = derivative_table(random_operator(8, 1, false), PhasePoint{0, 0}, 2);
    EXPECT_THROW(lemma_b_check(random_operator(8, 1, false), 3, {0, 0}, {0, 0}, small), ValidationError);
}
