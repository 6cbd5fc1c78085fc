#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "continuation.hpp"
#include "fock.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "symbols.hpp"

namespace husimi {

inline cplx trace_direct(const FockOperator& rho, const FockOperator& A) {
    if (rho.dim() != A.dim()) throw DimensionMismatch("rho and A dims differ");
    return (rho.matrix() * A.matrix()).trace();
}

// ---- Wigner route -----------------------------------------------------------

struct WignerExpectation {
    cplx value;
    double instability = 0.0;  // integral |dX W| / integral |X W| under dim -> dim/2
};

// Tr(rho A) = integral of X_A W. Truncated operators must keep their Weyl grid when the
// basis is halved: a delta-like symbol (parity) does not, and is refused.
inline WignerExpectation expectation_wigner(const FockOperator& rho, const FockOperator& A, const GridSpec& spec = {},
                                            const WeylQuadrature& q = {}, double stability_tol = 0.01) {
    if (rho.dim() != A.dim()) throw DimensionMismatch("rho and A dims differ");
    PhaseGrid w = wigner_function(rho, spec, q);
    PhaseGrid xa = weyl_symbol_grid(A, spec, q);
    const double cell = spec.dx() * spec.dp();
    WignerExpectation out;
    out.value = xa.values.cwiseProduct(w.values).sum() * cell;
    if (A.truncated() && A.dim() >= 4) {
        PhaseGrid half = weyl_symbol_grid(A.compress(A.dim() / 2), spec, q);
        double num = ((xa.values - half.values).cwiseAbs().array() * w.values.cwiseAbs().array()).sum();
        double den = (xa.values.cwiseAbs().array() * w.values.cwiseAbs().array()).sum();
        out.instability = den > 0 ? num / den : (num > 0 ? INFINITY : 0.0);
        if (out.instability > stability_tol)
            throw ResolutionError("Weyl symbol is resolution-unstable: halving the basis changes the weighted grid by " +
                                  std::to_string(100.0 * out.instability) + "%");
    }
    return out;
}

// ---- Husimi series route ----------------------------------------------------

// s_k = integral of M_kk Q, where M_kk = <phi_{k;xp}|A phi_{k;xp}>; term n of the series
// is sum_k C(n,k) (-1)^k s_k. The M_kk grids depend on A only and can be reused across states.
struct DiagonalMoments {
    GridSpec spec;
    std::vector<Mat> diagonal;  // diagonal[k](i, j)
    bool hermitian = false;
};

inline DiagonalMoments diagonal_moment_grids(const FockOperator& A, const GridSpec& spec, int n_max) {
    spec.validate();
    const int dim = A.dim();
    DiagonalMoments dm;
    dm.spec = spec;
    dm.hermitian = A.is_hermitian();
    dm.diagonal.assign(n_max + 1, Mat(spec.nx, spec.np));
    parallel_for(spec.nx, [&](long i) {
        for (int j = 0; j < spec.np; ++j) {
            Mat fam = displaced_family(spec.point(static_cast<int>(i), j), dim, n_max + 1);
            Mat af = A.matrix() * fam;
            for (int k = 0; k <= n_max; ++k) {
                cplx v = fam.col(k).dot(af.col(k));
                dm.diagonal[k](i, j) = dm.hermitian ? cplx(v.real(), 0.0) : v;
            }
        }
    });
    return dm;
}

struct HusimiSeriesOptions {
    // chord: terms as Poisson-weighted integrals of Tr(A D) Tr(rho D)*, no cancellation.
    // phase_space: binomial sums of displaced-frame moments; loses a factor 2 per order.
    enum class Route { chord, phase_space } route = Route::chord;
    int n_max = 80;
    double tol = 1e-5;
    double tail_mass_tol = 1e-8;
};

struct HusimiSeriesResult {
    SeriesResult series;
    std::vector<double> rounding;  // estimated floating-point error of each term
    std::vector<double> abs_cumulative;
    std::vector<double> remainder_bound;  // chord route: bound on |sum of terms after n|
    double tail_mass = 0.0;               // Q mass off the grid, or chord integrand on the lattice edge
};

inline HusimiSeriesResult expectation_husimi_series(const FockOperator& rho, const DiagonalMoments& dm,
                                                    const HusimiSeriesOptions& opt = {}) {
    PhaseGrid Q = husimi_function(rho, dm.spec);
    const double cell = dm.spec.dx() * dm.spec.dp();
    HusimiSeriesResult out;
    out.tail_mass = std::abs(Q.integral().real() - 1.0);
    if (out.tail_mass > opt.tail_mass_tol)
        throw ValidationError("Husimi function tail mass " + std::to_string(out.tail_mass) + " exceeds " +
                              std::to_string(opt.tail_mass_tol) + " on the grid");
    const int kmax = std::min<int>(opt.n_max, static_cast<int>(dm.diagonal.size()) - 1);
    std::vector<cplx> s(kmax + 1);
    std::vector<double> s_err(kmax + 1);
    Eigen::ArrayXXd qv = Q.values.real().array();
    for (int k = 0; k <= kmax; ++k) {
        s[k] = (dm.diagonal[k].array() * qv.cast<cplx>()).sum() * cell;
        s_err[k] = 2e-16 * std::log2(static_cast<double>(dm.spec.size()) + 1.0) *
                   (dm.diagonal[k].cwiseAbs().array() * qv.abs()).sum() * cell;
    }
    SeriesResult& r = out.series;
    int small = 0;
    double abs_cum = 0.0;
    for (int n = 0; n <= kmax; ++n) {
        cplx t = 0.0;
        double err = 0.0;
        for (int k = 0; k <= n; ++k) {
            double c = binomial(n, k);
            t += c * ((k % 2) ? -1.0 : 1.0) * s[k];
            err += c * (s_err[k] + 1e-16 * std::abs(s[k]));
        }
        if (dm.hermitian) t = cplx(t.real(), 0.0);
        r.push(t);
        out.rounding.push_back(err);
        abs_cum += std::abs(t);
        out.abs_cumulative.push_back(abs_cum);
        if (err > opt.tol) {
            r.verdict = Verdict::inconclusive;
            r.note = "binomial cancellation floor reached the tolerance at n = " + std::to_string(n);
            return out;
        }
        small = std::abs(t) < opt.tol ? small + 1 : 0;
        if (small >= 2) {
            r.verdict = Verdict::converged;
            r.tail_bound = std::max(r.term_magnitudes[n], r.term_magnitudes[n - 1]);
            return out;
        }
    }
    r.verdict = Verdict::inconclusive;
    r.note = "no two consecutive terms below tolerance up to n = " + std::to_string(kmax);
    return out;
}

// ---- chord route --------------------------------------------------------------
//
// With chi_A(b) = Tr(A D(b)), (-1)^n/n! d+^n d-^n acts on the Fourier side as |b|^{2n}/n!, so
// term n = (1/pi) integral e^{-|b|^2} |b|^{2n}/n! chi_A(b) conj(chi_rho(b)) d^2b.
// The weights are Poisson probabilities in u = |b|^2; their upper tails bound the remainder.

// beta = ((i - K) + i (j - K)) h for i, j in [0, 2K].
struct ChordLattice {
    double h = 0.1;
    int K = 100;

    int size() const { return 2 * K + 1; }
    cplx beta(int i, int j) const { return cplx((i - K) * h, (j - K) * h); }
    bool operator==(const ChordLattice&) const = default;
};

// Spacing resolves the Laguerre oscillation (local wavenumber about 2 sqrt(dim) per factor);
// the radius covers the e^{-u} u^dim bulk of both characteristic functions.
inline ChordLattice chord_lattice(int dim_a, int dim_b) {
    ChordLattice L;
    L.h = pi / (2.0 * (std::sqrt(dim_a) + std::sqrt(dim_b)) + 8.0);
    L.K = static_cast<int>(std::ceil((std::sqrt(dim_a + dim_b + 0.0) + 8.0) / L.h));
    return L;
}

// Tr(A D(beta)), D(beta) = exp(beta a† - conj(beta) a), from the Laguerre closed form
// <n+k|D|n> = sqrt(n!/(n+k)!) beta^k e^{-u/2} L_n^k(u), <n|D|n+k> = the same with (-conj beta)^k.
// skip[k] marks diagonal pairs k, -k that are identically zero.
inline cplx chord_value(const Mat& a, cplx beta, const std::vector<char>& skip = {}) {
    const int dim = static_cast<int>(a.rows());
    const double u = std::norm(beta), r = std::sqrt(u);
    const cplx phase = r > 0 ? beta / r : cplx(1.0);
    double p0 = std::exp(-0.5 * u);
    cplx rot = 1.0, out = 0.0;
    for (int k = 0; k < dim; ++k) {
        if (k > 0) {
            p0 *= r / std::sqrt(static_cast<double>(k));
            rot *= phase;
        }
        if (p0 == 0.0) break;
        if (!skip.empty() && skip[k]) continue;
        cplx upper = 0.0, lower = 0.0;
        double p = p0, l_prev = 0.0, l = 1.0;
        for (int n = 0; n + k < dim; ++n) {
            double c = p * l;
            upper += a(n, n + k) * c;
            if (k > 0) lower += a(n + k, n) * c;
            double next = ((2.0 * n + 1.0 + k - u) * l - (n + k) * l_prev) / (n + 1.0);
            l_prev = l;
            l = next;
            p *= std::sqrt((n + 1.0) / (n + k + 1.0));
        }
        out += rot * upper;
        if (k > 0) out += ((k % 2) ? -1.0 : 1.0) * std::conj(rot) * lower;
    }
    return out;
}

struct ChordGrid {
    ChordLattice lattice;
    Mat values;  // (2K+1) x (2K+1)
    bool hermitian = false;
};

inline ChordGrid chord_grid(const FockOperator& A, const ChordLattice& L) {
    ChordGrid g;
    g.lattice = L;
    g.hermitian = A.is_hermitian();
    g.values.resize(L.size(), L.size());
    const Mat& a = A.matrix();
    const int dim = A.dim(), N = L.size();
    std::vector<char> skip(dim);
    for (int k = 0; k < dim; ++k)
        skip[k] = a.diagonal(k).cwiseAbs().maxCoeff() == 0.0 && a.diagonal(-k).cwiseAbs().maxCoeff() == 0.0;
    // hermitian A: chi(-beta) = conj(chi(beta)), so rows past the centre are mirrored
    const int rows = g.hermitian ? L.K + 1 : N;
    parallel_for(rows, [&](long i) {
        for (int j = 0; j < N; ++j) g.values(i, j) = chord_value(a, L.beta(static_cast<int>(i), j), skip);
    });
    if (g.hermitian)
        for (int i = L.K; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (i > L.K || j > L.K) g.values(i, j) = std::conj(g.values(N - 1 - i, N - 1 - j));
    return g;
}

inline HusimiSeriesResult expectation_husimi_series(const ChordGrid& ca, const ChordGrid& crho,
                                                    const HusimiSeriesOptions& opt = {}) {
    if (!(ca.lattice == crho.lattice)) throw DimensionMismatch("chord lattices differ");
    if (!crho.hermitian) throw ValidationError("density matrix must be hermitian");
    const ChordLattice& L = ca.lattice;
    const int n_max = opt.n_max, N = L.size();
    const double w = L.h * L.h / pi;

    Mat g = ca.values.cwiseProduct(crho.values.conjugate());
    HusimiSeriesResult out;
    double peak = g.cwiseAbs().maxCoeff(), edge = 0.0;
    for (int k = 0; k < N; ++k)
        edge = std::max({edge, std::abs(g(0, k)), std::abs(g(N - 1, k)), std::abs(g(k, 0)), std::abs(g(k, N - 1))});
    out.tail_mass = peak > 0 ? edge / peak : 0.0;
    if (out.tail_mass > opt.tail_mass_tol)
        throw ValidationError("chord integrand on the lattice edge is " + std::to_string(out.tail_mass) +
                              " of its peak");

    std::vector<std::vector<cplx>> term_rows(N, std::vector<cplx>(n_max + 1));
    std::vector<std::vector<double>> abs_rows(N, std::vector<double>(n_max + 1)), rem_rows = abs_rows;
    parallel_for(N, [&](long i) {
        for (int j = 0; j < N; ++j) {
            cplx v = g(i, j);
            double av = std::abs(v);
            if (av == 0.0) continue;
            double u = std::norm(L.beta(static_cast<int>(i), j));
            // pmf underflows to zero only where it is below 1e-300 anyway
            double pmf = std::exp(-u), below = 0.0;
            for (int n = 0; n <= n_max; ++n) {
                if (n > 0) pmf *= u / n;
                below += pmf;
                term_rows[i][n] += pmf * v;
                abs_rows[i][n] += pmf * av;
                // P(Poisson(u) > n), padded for the rounding in 1 - below
                rem_rows[i][n] += (std::max(0.0, 1.0 - below) + 1e-15) * av;
            }
        }
    });
    std::vector<cplx> terms(n_max + 1, 0.0);
    std::vector<double> abs_w(n_max + 1, 0.0), rem(n_max + 1, 0.0);
    for (int i = 0; i < N; ++i)
        for (int n = 0; n <= n_max; ++n) {
            terms[n] += term_rows[i][n] * w;
            abs_w[n] += abs_rows[i][n] * w;
            rem[n] += rem_rows[i][n] * w;
        }

    const bool herm = ca.hermitian;
    SeriesResult& r = out.series;
    int small = 0;
    double abs_cum = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        cplx t = herm ? cplx(terms[n].real(), 0.0) : terms[n];
        r.push(t);
        out.rounding.push_back(2e-16 * std::log2(static_cast<double>(N) * N) * abs_w[n]);
        out.remainder_bound.push_back(rem[n]);
        abs_cum += std::abs(t);
        out.abs_cumulative.push_back(abs_cum);
        small = std::abs(t) < opt.tol ? small + 1 : 0;
        // two small terms alone can sit in a lull between lobes of the term sequence
        if (small >= 2 && rem[n] <= opt.tol) {
            r.verdict = Verdict::converged;
            r.tail_bound = rem[n];
            return out;
        }
    }
    r.verdict = Verdict::inconclusive;
    r.note = "remainder bound " + std::to_string(rem[n_max]) + " above tolerance at n = " + std::to_string(n_max);
    return out;
}

inline HusimiSeriesResult expectation_husimi_series(const FockOperator& rho, const FockOperator& A,
                                                    const HusimiSeriesOptions& opt = {}, const GridSpec& spec = {}) {
    if (rho.dim() != A.dim()) throw DimensionMismatch("rho and A dims differ");
    if (opt.route == HusimiSeriesOptions::Route::phase_space)
        return expectation_husimi_series(rho, diagonal_moment_grids(A, spec, opt.n_max), opt);
    ChordLattice L = chord_lattice(A.dim(), rho.dim());
    return expectation_husimi_series(chord_grid(A, L), chord_grid(rho, L), opt);
}

// ---- polynomial boundedness probe -------------------------------------------

struct EnvelopeFit {
    double K = 0.0;
    int N = 0;
    double slope = 0.0;     // least-squares slope of log value against log(1 + r^2)
    double residual = 0.0;  // rms of log(envelope / value)
    double operator()(double r) const { return K * std::pow(1.0 + r * r, N); }
};

struct BoundProbeReport {
    std::vector<double> radii;
    std::vector<double> max_norm;          // max |A phi| per radius
    std::vector<double> max_adjoint_norm;  // max |A† phi| per radius
    EnvelopeFit minus;                     // envelope of |A phi|
    EnvelopeFit plus;                      // envelope of |A† phi|
    // |dx^m dp^n H_A| envelopes, m + n <= 4, indexed by (m, n) in the order generated
    std::vector<std::pair<int, int>> derivative_orders;
    std::vector<std::vector<double>> derivative_max;
    std::vector<EnvelopeFit> derivative_fits;
};

// N is the smallest integer not below the growth exponent fitted on the outer half of the
// radii (curvature at small r would inflate a global fit: |n phi| has slope 1.24 on [0.5, 3]
// yet |n phi| / (1 + r^2) <= 1/2). K then makes the envelope dominate every sample.
inline EnvelopeFit fit_envelope(const std::vector<double>& radii, const std::vector<double>& values,
                                double margin = 1.25) {
    EnvelopeFit f;
    std::vector<double> lx, ly;
    const size_t first = radii.size() > 3 ? radii.size() / 2 : 0;
    for (size_t i = first; i < radii.size(); ++i)
        if (values[i] > 0) {
            lx.push_back(std::log1p(radii[i] * radii[i]));
            ly.push_back(std::log(values[i]));
        }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
        f.slope = sxx > 0 ? sxy / sxx : 0.0;
    }
    f.N = std::max(0, static_cast<int>(std::ceil(f.slope - 0.1)));
    double kmax = 0.0;
    for (size_t i = 0; i < radii.size(); ++i) kmax = std::max(kmax, values[i] / std::pow(1.0 + radii[i] * radii[i], f.N));
    f.K = kmax * margin;
    double ss = 0.0;
    int cnt = 0;
    for (size_t i = 0; i < radii.size(); ++i)
        if (values[i] > 0) {
            double d = std::log(f(radii[i]) / values[i]);
            ss += d * d;
            ++cnt;
        }
    f.residual = cnt ? std::sqrt(ss / cnt) : 0.0;
    return f;
}

inline BoundProbeReport bound_probe(const FockOperator& A, const std::vector<double>& radii, int samples_per_radius,
                                    bool derivatives = true, const TruncationPolicy& policy = {}) {
    BoundProbeReport rep;
    rep.radii = radii;
    const int dim = A.dim();
    for (int m = 0; m <= 4; ++m)
        for (int n = 0; m + n <= 4; ++n) rep.derivative_orders.push_back({m, n});
    if (derivatives) rep.derivative_max.assign(rep.derivative_orders.size(), std::vector<double>(radii.size(), 0.0));
    for (size_t ri = 0; ri < radii.size(); ++ri) {
        double r = radii[ri], best = 0.0, best_adj = 0.0;
        for (int s = 0; s < samples_per_radius; ++s) {
            double th = 2.0 * pi * s / samples_per_radius;
            PhasePoint pt{r * std::cos(th), r * std::sin(th)};
            check_reliable(A, pt.abs_z2(), policy, "bound_probe");
            Vec phi = coherent_state(pt, dim).coeffs;
            best = std::max(best, (A.matrix() * phi).norm());
            best_adj = std::max(best_adj, (A.matrix().adjoint() * phi).norm());
            if (derivatives) {
                DerivativeTable t = derivative_table(A, pt, 4, TorusOptions{}, policy);
                // dx = (d+ + d-)/sqrt 2, dp = i (d+ - d-)/sqrt 2
                for (size_t o = 0; o < rep.derivative_orders.size(); ++o) {
                    auto [mx, np] = rep.derivative_orders[o];
                    cplx acc = 0.0;
                    for (int a = 0; a <= mx; ++a)
                        for (int b = 0; b <= np; ++b) {
                            double c = binomial(mx, a) * binomial(np, b) * (((np - b) % 2) ? -1.0 : 1.0);
                            acc += c * t(a + b, (mx - a) + (np - b));
                        }
                    acc *= std::pow(I, np) / std::pow(std::sqrt(2.0), mx + np);
                    rep.derivative_max[o][ri] = std::max(rep.derivative_max[o][ri], std::abs(acc));
                }
            }
        }
        rep.max_norm.push_back(best);
        rep.max_adjoint_norm.push_back(best_adj);
    }
    rep.minus = fit_envelope(radii, rep.max_norm);
    rep.plus = fit_envelope(radii, rep.max_adjoint_norm);
    if (derivatives)
        for (const auto& row : rep.derivative_max) rep.derivative_fits.push_back(fit_envelope(radii, row));
    return rep;
}

}  // namespace husimi
