#include <gtest/gtest.h>

#include <cmath>

#include "husimi/benchmarks.hpp"
#include "husimi/dynamics.hpp"

using namespace husimi;

namespace {

double coherent_q(double x, double p, double x0, double p0) {
    return std::exp(-0.5 * ((x - x0) * (x - x0) + (p - p0) * (p - p0))) / (2 * pi);
}

PhaseGrid coherent_q_grid(const GridSpec& s, double x0, double p0) {
    PhaseGrid g(s);
    for (int j = 0; j < s.np; ++j)
        for (int i = 0; i < s.nx; ++i) g.values(i, j) = coherent_q(s.x(i), s.p(j), x0, p0);
    return g;
}

}  // namespace

TEST(Bracket, OrderZeroVanishesForHermitian) {
    GridSpec s = GridSpec::square(6, 48);
    PhaseGrid q = husimi_function(coherent_density({0.5, -0.5}, 40), s);
    for (int seed = 1; seed <= 3; ++seed) {
        PhaseGrid b = generalized_bracket(random_hermitian(10, seed), q, 0);
        EXPECT_EQ(b.values.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Bracket, HarmonicIsPoissonBracket) {
    GridSpec s = GridSpec::square(8, 128);
    FockOperator H = build_number(160);
    // {H, Q} = dH/dx dQ/dp - dH/dp dQ/dx with H = (x^2 + p^2)/2
    for (auto [x0, p0] : {std::pair{0.0, 0.0}, std::pair{1.0, 0.5}}) {
        PhaseGrid q = coherent_q_grid(s, x0, p0);
        for (int order : {1, 3}) {
            PhaseGrid b = generalized_bracket(H, q, order);
            double worst = 0.0;
            for (int j = 0; j < s.np; ++j)
                for (int i = 0; i < s.nx; ++i) {
                    double x = s.x(i), p = s.p(j), g = coherent_q(x, p, x0, p0);
                    double want = x * (-(p - p0) * g) - p * (-(x - x0) * g);
                    worst = std::max(worst, std::abs(b.values(i, j) - want));
                }
            EXPECT_LE(worst, 1e-7) << x0 << " " << order;
        }
    }
}

TEST(Bracket, RotationallySymmetricStateIsStationary) {
    GridSpec s = GridSpec::square(8, 128);
    PhaseGrid q = husimi_function(thermal_density(0.3, 160), s);
    PhaseGrid b = generalized_bracket(build_number(160), q, 4);
    EXPECT_LE(b.values.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Bracket, UnderResolvedGridRefused) {
    GridSpec s = GridSpec::square(12, 12);
    PhaseGrid q = coherent_q_grid(s, 0, 0);
    EXPECT_THROW(generalized_bracket(build_number(40), q, 1), ResolutionError);
}

TEST(Oracle, Examples) {
    GridSpec s = GridSpec::square(5, 32);
    FockOperator H = build_number(48), rho = coherent_density({1.5, 0.5}, 48);
    EXPECT_LE(sup_diff(evolve_oracle(H, rho, 0.0, s), husimi_function(rho, s)), 1e-13);
    FockOperator r = evolve_density(quartic_hamiltonian(32), coherent_density({0.5, 0}, 32), 0.7);
    EXPECT_NEAR(r.matrix().trace().real(), 1.0, 1e-10);
    // coherent z0 rotates to z0 e^{-it}
    double t = 0.9;
    cplx z = cplx(1.5, 0.5) * std::exp(cplx(0, -t));
    FockOperator rt = evolve_density(H, rho, t);
    for (PhasePoint pt : {PhasePoint{0, 0}, PhasePoint{1, 1}, PhasePoint{z.real(), z.imag()}, PhasePoint{-1, 2},
                          PhasePoint{2, -1}})
        EXPECT_NEAR(husimi_symbol(rt, pt).real() / (2 * pi), coherent_q(pt.x, pt.p, z.real(), z.imag()), 1e-12);
}

TEST(QuarticHamiltonian, NormalOrderedMatchesPaddedProduct) {
    FockOperator H = quartic_hamiltonian(64);
    FockOperator P = build_padded(64, 8, [](int n) {
        Mat a = annihilation_matrix(n), q = a + a.adjoint();
        return Mat(a.adjoint() * a + 0.1 * q * q * q * q);
    }, true);
    EXPECT_TRUE(H.hermitian());
    EXPECT_LE((H.matrix() - P.matrix()).cwiseAbs().maxCoeff(), 1e-10 * P.matrix().cwiseAbs().maxCoeff());
}

TEST(Evolve, VacuumIsStationary) {
    DynamicsBenchmark b = harmonic_benchmark(128);
    b.rho0 = coherent_density({0, 0}, b.H.dim());
    b.config.steps = 100;
    b.config.snapshot_every = 1;
    EvolutionResult r = evolve_husimi(b.H, b.rho0, b.config);
    ASSERT_EQ(r.snapshots.size(), 101u);
    ASSERT_EQ(r.max_change.size(), 101u);
    EXPECT_LE(sup_diff(r.snapshots.back(), r.snapshots.front()), 1e-6);
    for (double c : r.max_change) EXPECT_LE(c, 1e-6);
}

TEST(Evolve, HarmonicRotation) {
    // the 256^2 run is in the acceptance binary
    DynamicsBenchmark b = harmonic_benchmark(128);
    EvolutionResult r = evolve_husimi(b.H, b.rho0, b.config);
    const PhaseGrid& q = r.snapshots.back();
    auto [i, j] = q.argmax_real();
    EXPECT_NEAR(q.spec.x(i), 0.0, q.spec.dx());
    EXPECT_NEAR(q.spec.p(j), -2.0, q.spec.dp());
    for (double m : r.mass_defect) EXPECT_LE(m, 1e-5);
    EXPECT_LE(sup_diff(q, evolve_oracle(b.H, b.rho0, b.t_final, b.config.grid)), 1e-3);
    EXPECT_GE(r.substeps, 2);
    EXPECT_LE(std::abs(b.config.dt / r.substeps) * r.spectral_radius, b.config.stability_guard);
}

TEST(Evolve, TimeReversible) {
    DynamicsBenchmark b = harmonic_benchmark(128);
    b.rho0 = coherent_density({1.0, 1.0}, b.H.dim());
    b.config.steps = 50;
    EvolutionResult fwd = evolve_husimi(b.H, b.rho0, b.config);
    FockOperator minus_h = cplx(-1.0) * b.H;
    EvolutionResult back = evolve_husimi_grid(minus_h, fwd.snapshots.back(), b.config);
    EXPECT_GT(sup_diff(fwd.snapshots.back(), fwd.snapshots.front()), 1e-2);
    EXPECT_LE(sup_diff(back.snapshots.back(), fwd.snapshots.front()), 1e-6);
}

TEST(Evolve, QuarticShortTime) {
    DynamicsBenchmark b = quartic_benchmark();
    EvolutionResult r = evolve_husimi(b.H, b.rho0, b.config);
    PhaseGrid o = evolve_oracle(b.H, b.rho0, b.t_final, b.config.grid);
    EXPECT_GT(sup_diff(o, r.snapshots.front()), 5e-3);  // the state does move
    EXPECT_LE(sup_diff(r.snapshots.back(), o), 5e-4);
}

TEST(Evolve, BracketOrderConvergence) {
    std::vector<double> err;
    for (int n : {1, 2, 4}) {
        DynamicsBenchmark b = quartic_benchmark(n);
        EvolutionResult r = evolve_husimi(b.H, b.rho0, b.config);
        err.push_back(sup_diff(r.snapshots.back(), evolve_oracle(b.H, b.rho0, b.t_final, b.config.grid)));
    }
    EXPECT_GT(err[0], err[1]);
    EXPECT_GT(err[1], err[2]);
}

TEST(Evolve, Guards) {
    DynamicsBenchmark b = harmonic_benchmark(64, 120);
    b.config.steps = 2;
    EvolutionConfig c = b.config;
    c.substeps = 1;
    EXPECT_THROW(evolve_husimi(b.H, b.rho0, c), StabilityGuardError);
    c = b.config;
    c.dt = 0;
    EXPECT_THROW(evolve_husimi(b.H, b.rho0, c), ValidationError);
    c = b.config;
    c.steps = 0;
    EXPECT_THROW(evolve_husimi(b.H, b.rho0, c), ValidationError);
    EXPECT_THROW(evolve_husimi(random_operator(120, 1, false), b.rho0, b.config), ValidationError);
    c = b.config;
    c.grid = GridSpec::square(8, 16);
    EXPECT_THROW(evolve_husimi(b.H, b.rho0, c), ResolutionError);
    EXPECT_THROW(evolve_husimi_grid(b.H, PhaseGrid(GridSpec::square(4, 64)), b.config), DimensionMismatch);
}

TEST(Evolve, InstabilityAborts) {
    DynamicsBenchmark b = quartic_benchmark();
    b.config.support_radius = 0.0;
    b.config.filter.cutoff = 5.0;
    EXPECT_THROW(evolve_husimi(b.H, b.rho0, b.config), InstabilityError);
    EvolutionResult r = evolve_husimi(b.H, b.rho0, b.config, false);
    EXPECT_TRUE(r.aborted);
    EXPECT_NE(r.diagnostic.find("grew"), std::string::npos);
    EXPECT_EQ(exit_code(InstabilityError("x")), 4);
}

TEST(Evolve, SnapshotCadence) {
    DynamicsBenchmark b = harmonic_benchmark(64, 120);
    b.config.steps = 7;
    b.config.snapshot_every = 3;
    EvolutionResult r = evolve_husimi(b.H, b.rho0, b.config);
    ASSERT_EQ(r.snapshot_times.size(), 4u);  // 0, 3, 6, 7
    EXPECT_DOUBLE_EQ(r.snapshot_times[3], 0.07);
    EXPECT_EQ(r.mass_defect.size(), 8u);
}
