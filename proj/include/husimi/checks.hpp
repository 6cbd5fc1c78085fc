#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "benchmarks.hpp"
#include "continuation.hpp"
#include "dynamics.hpp"
#include "expectation.hpp"
#include "star_product.hpp"
#include "symbols.hpp"

namespace husimi {

struct CheckResult {
    int id = 0;
    std::string name;
    bool numerics_ok = false;
    double seconds = 0.0;
    double budget_seconds = 0.0;
    std::string detail;

    bool passed() const { return numerics_ok && seconds <= budget_seconds; }
};

namespace detail {

inline std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string sci(double v) { return fmt("%.2e", v); }

template <class Body>
CheckResult timed(int id, std::string name, double budget, Body&& body) {
    CheckResult r;
    r.id = id;
    r.name = std::move(name);
    r.budget_seconds = budget;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.numerics_ok = false;
        r.detail += std::string(r.detail.empty() ? "" : "; ") + "threw: " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline PolynomialSymbol random_polynomial(std::mt19937_64& g, int degree) {
    std::uniform_real_distribution<double> u(-1, 1);
    PolynomialSymbol s;
    for (int i = 0; i <= degree; ++i)
        for (int j = 0; i + j <= degree; ++j) s = s + PolynomialSymbol::monomial(i, j, u(g));
    return s;
}

}  // namespace detail

// 50 random pairs, dims 8-24, at 5 points each.
inline CheckResult check_product_identity() {
    return detail::timed(1, "product-formula identity", 60, [](CheckResult& r) {
        std::mt19937_64 g(101);
        std::uniform_int_distribution<int> dim(8, 24);
        std::uniform_real_distribution<double> u(-2, 2);
        double worst = 0.0;
        int unconverged = 0;
        for (int k = 0; k < 50; ++k) {
            int d = dim(g);
            FockOperator A = random_operator(d, 5000 + 2 * k, k % 2 == 0);
            FockOperator B = random_operator(d, 5001 + 2 * k, k % 4 == 1);
            for (int t = 0; t < 5; ++t) {
                PhasePoint pt{u(g), u(g)};
                SeriesResult s = mizrahi_product(A, B, pt, 1e-10);
                if (s.verdict != Verdict::converged) ++unconverged;
                worst = std::max(worst, std::abs(s.value() - husimi_symbol(A * B, pt)));
            }
        }
        r.numerics_ok = worst <= 1e-8 && unconverged == 0;
        r.detail = "max |series - H_AB| = " + detail::sci(worst) + " (<= 1e-8), unconverged " +
                   std::to_string(unconverged) + "/250";
    });
}

inline CheckResult check_parity_contrast() {
    return detail::timed(2, "absolute convergence contrast", 10, [](CheckResult& r) {
        const int dim = 64;
        FockOperator V = build_parity(dim);
        std::mt19937_64 g(102);
        std::uniform_real_distribution<double> u(-2.5, 2.5);
        double worst = 0.0;
        int unconverged = 0, not_diverging = 0;
        for (int t = 0; t < 10; ++t) {
            PhasePoint pt{u(g), u(g)};
            SeriesResult s = mizrahi_product(V, V, pt, 1e-9);
            if (s.verdict != Verdict::converged) ++unconverged;
            worst = std::max(worst, std::abs(s.value() - 1.0));
            if (anti_husimi_partial_sums(V, pt, 40).verdict != Verdict::diverging) ++not_diverging;
        }
        bool refused = false;
        try {
            expectation_wigner(coherent_density({0, 0}, dim), V, GridSpec::square(8, 128));
        } catch (const ResolutionError&) {
            refused = true;
        }
        r.numerics_ok = worst <= 1e-9 && unconverged == 0 && not_diverging == 0 && refused;
        r.detail = "max |V*V - 1| = " + detail::sci(worst) + " (<= 1e-9), anti-Husimi not diverging at " +
                   std::to_string(not_diverging) + "/10, Wigner route " + (refused ? "refused" : "NOT refused");
    });
}

inline CheckResult check_smoothing_identity() {
    return detail::timed(3, "smoothing identity", 120, [](CheckResult& r) {
        GridSpec g;
        std::mt19937_64 gen(103);
        std::uniform_int_distribution<int> dim(8, 24);
        double worst = 0.0;
        for (int k = 0; k < 20; ++k) {
            FockOperator A = random_hermitian(dim(gen), 6000 + k);
            worst = std::max(worst, sup_diff(gaussian_smooth(weyl_symbol_grid(A, g)), husimi_symbol_grid(A, g)));
        }
        r.numerics_ok = worst <= 1e-5;
        r.detail = "max sup |G * X_A - H_A| = " + detail::sci(worst) + " (<= 1e-5) over 20 operators, 256^2";
    });
}

// Radius independence compares derivatives of total order m + n <= 8 at radii 0.3 and 0.6.
inline CheckResult check_continuation() {
    return detail::timed(4, "holomorphic continuation", 60, [](CheckResult& r) {
        std::mt19937_64 g(104);
        std::uniform_real_distribution<double> re(-1.5, 1.5), im(-0.5, 0.5);
        double min_order = INFINITY, radius_worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            FockOperator A = random_operator(16, 7000 + k, k % 2 == 0);
            for (int t = 0; t < 10; ++t) {
                ComplexPhasePoint z{cplx(re(g), im(g)), cplx(re(g), im(g))};
                auto [a1, a2] = cauchy_riemann_residual(A, z, 1e-2);
                auto [b1, b2] = cauchy_riemann_residual(A, z, 1e-3);
                min_order = std::min({min_order, std::log10(a1 / b1), std::log10(a2 / b2)});
            }
            PhasePoint c{re(g), re(g)};
            TorusOptions lo, hi;
            lo.radius = 0.3;
            hi.radius = 0.6;
            DerivativeTable ta = derivative_table(A, c, 8, lo), tb = derivative_table(A, c, 8, hi);
            for (int m = 0; m <= 8; ++m)
                for (int n = 0; m + n <= 8; ++n) radius_worst = std::max(radius_worst, std::abs(ta(m, n) - tb(m, n)));
        }
        r.numerics_ok = min_order >= 1.8 && radius_worst <= 1e-7;
        r.detail = "min observed CR order " + detail::fmt("%.3f", min_order) + " (>= 1.8), radius independence " +
                   detail::sci(radius_worst) + " (<= 1e-7)";
    });
}

inline CheckResult check_derivative_identity() {
    return detail::timed(5, "binomial derivative identity", 60, [](CheckResult& r) {
        std::mt19937_64 g(105);
        std::uniform_real_distribution<double> u(-1, 1);
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            FockOperator A = random_operator(16, 8000 + k, k % 2 == 1);
            for (int t = 0; t < 10; ++t) {
                PhasePoint mi{u(g), u(g)};
                PhasePoint pl = t < 5 ? mi : PhasePoint{mi.x + 0.5 * u(g), mi.p + 0.5 * u(g)};
                DerivativeTable tab = derivative_table(A, ComplexPhasePoint::from_pair(mi, pl), 6);
                for (int n = 0; n <= 6; ++n)
                    for (IdentitySide side : {IdentitySide::minus, IdentitySide::plus})
                        worst = std::max(worst, lemma_b_check(A, n, mi, pl, tab, side).diff);
            }
        }
        r.numerics_ok = worst <= 1e-8;
        r.detail = "max |lhs - binomial sum| = " + detail::sci(worst) + " (<= 1e-8), n <= 6, 100 point pairs";
    });
}

inline CheckResult check_liouville() {
    return detail::timed(6, "generalized Liouville dynamics", 300, [](CheckResult& r) {
        DynamicsBenchmark h = harmonic_benchmark(256);
        EvolutionResult hr = evolve_husimi(h.H, h.rho0, h.config);
        const PhaseGrid& q = hr.snapshots.back();
        auto [i, j] = q.argmax_real();
        bool cell = std::abs(q.spec.x(i) - 0.0) <= q.spec.dx() && std::abs(q.spec.p(j) + 2.0) <= q.spec.dp();
        double herr = sup_diff(q, evolve_oracle(h.H, h.rho0, h.t_final, h.config.grid));
        double mass = 0.0;
        for (double m : hr.mass_defect) mass = std::max(mass, m);

        DynamicsBenchmark b = quartic_benchmark();
        EvolutionResult qr = evolve_husimi(b.H, b.rho0, b.config);
        double qerr = sup_diff(qr.snapshots.back(), evolve_oracle(b.H, b.rho0, b.t_final, b.config.grid));

        r.numerics_ok = cell && herr <= 1e-3 && mass <= 1e-5 && qerr <= 5e-4;
        r.detail = "harmonic argmax (" + detail::fmt("%.3f", q.spec.x(i)) + ", " + detail::fmt("%.3f", q.spec.p(j)) +
                   "), sup err " + detail::sci(herr) + " (<= 1e-3), mass defect " + detail::sci(mass) +
                   " (<= 1e-5); quartic sup err " + detail::sci(qerr) + " (<= 5e-4)";
    });
}

inline CheckResult check_expectation() {
    return detail::timed(7, "expectation three ways", 60, [](CheckResult& r) {
        const GridSpec grid = GridSpec::square(8, 128);
        std::mt19937_64 g(107);
        std::uniform_int_distribution<int> dim(8, 24);
        std::uniform_real_distribution<double> u(-1.5, 1.5), uq(0.05, 0.4);
        double three = 0.0;
        int unconverged = 0;
        for (int k = 0; k < 20; ++k) {
            FockOperator A = random_hermitian(dim(g), 9000 + k);
            ChordLattice lattice = chord_lattice(A.dim(), A.dim());
            ChordGrid ca = chord_grid(A, lattice);
            PhaseGrid xa = weyl_symbol_grid(A, grid);
            for (int s = 0; s < 5; ++s) {
                FockOperator rho = s < 3 ? coherent_density({u(g), u(g)}, A.dim()) : thermal_density(uq(g), A.dim());
                cplx t = trace_direct(rho, A);
                cplx w = (xa.values.cwiseProduct(wigner_function(rho, grid).values)).sum() * grid.dx() * grid.dp();
                HusimiSeriesResult hs = expectation_husimi_series(ca, chord_grid(rho, lattice));
                if (hs.series.verdict != Verdict::converged) ++unconverged;
                cplx h = hs.series.value();
                three = std::max({three, std::abs(t - w), std::abs(t - h), std::abs(w - h)});
            }
        }

        double number_terms = 0.0;
        {
            PhasePoint z0{1.2, -0.8};
            HusimiSeriesResult hs = expectation_husimi_series(coherent_density(z0, 64), build_number(64));
            for (size_t n = 0; n < hs.series.terms.size(); ++n) {
                cplx want = n == 0 ? cplx(z0.abs_z2() + 1) : n == 1 ? cplx(-1.0) : cplx(0.0);
                number_terms = std::max(number_terms, std::abs(hs.series.terms[n] - want));
            }
            if (hs.series.verdict != Verdict::converged) number_terms = INFINITY;
        }

        FockOperator V = build_parity(64), vac = coherent_density({0, 0}, 64);
        HusimiSeriesResult ps = expectation_husimi_series(vac, V);
        double parity_err = std::abs(ps.series.value() - trace_direct(vac, V));
        bool parity_ok = ps.series.verdict == Verdict::converged && parity_err <= 1e-4;
        bool pointwise_div = anti_husimi_partial_sums(V, {0.3, 0.2}, 40).verdict == Verdict::diverging;

        r.numerics_ok = three <= 1e-4 && unconverged == 0 && number_terms <= 1e-6 && parity_ok && pointwise_div;
        r.detail = "three-way max " + detail::sci(three) + " (<= 1e-4, " + std::to_string(unconverged) +
                   "/100 unconverged); n-hat terms " + detail::sci(number_terms) + " (<= 1e-6); parity series err " +
                   detail::sci(parity_err) + " (<= 1e-4), pointwise " + (pointwise_div ? "diverging" : "NOT diverging");
    });
}

// Matrix oracle at dim 64; dim 32 leaves O(0.1) truncation error in A B on [-2, 2]^2.
inline CheckResult check_moyal() {
    return detail::timed(8, "Moyal product contrast", 10, [](CheckResult& r) {
        std::mt19937_64 g(108);
        std::vector<double> xs;
        for (int k = 0; k < 9; ++k) xs.push_back(-2 + 0.5 * k);
        double worst = 0.0;
        for (int t = 0; t < 5; ++t) {
            PolynomialSymbol F = detail::random_polynomial(g, 3), G = detail::random_polynomial(g, 3);
            PolynomialSymbol P = moyal_star_polynomial(F, G);
            Mat w = weyl_symbol_at(weyl_ordered_operator(F, 64) * weyl_ordered_operator(G, 64), xs, xs);
            for (int i = 0; i < 9; ++i)
                for (int j = 0; j < 9; ++j) worst = std::max(worst, std::abs(w(i, j) - P(xs[i], xs[j])));
        }
        PolynomialSymbol x = PolynomialSymbol::x(), p = PolynomialSymbol::p();
        bool exact = moyal_star_polynomial(x, p) - moyal_star_polynomial(p, x) == PolynomialSymbol::monomial(0, 0, I);
        r.numerics_ok = worst <= 1e-6 && exact;
        r.detail = "max |F*G - X_{F G}| = " + detail::sci(worst) + " (<= 1e-6) at dim 64; [x, p]* = i " +
                   (exact ? "exactly" : "NOT exactly");
    });
}

inline std::vector<std::function<CheckResult()>> acceptance_checks() {
    return {check_product_identity, check_parity_contrast, check_smoothing_identity, check_continuation,
            check_derivative_identity,          check_liouville,       check_expectation,        check_moyal};
}

}  // namespace husimi
