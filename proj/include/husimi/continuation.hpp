#pragma once

#include <cmath>
#include <sstream>
#include <tuple>
#include <utility>

#include "fft.hpp"
#include "frame.hpp"
#include "symbols.hpp"

namespace husimi {

struct ComplexPhasePoint {
    cplx x;
    cplx p;

    cplx z_plus() const { return (x + I * p) / std::sqrt(2.0); }
    cplx z_minus() const { return (x - I * p) / std::sqrt(2.0); }

    // x± = Re x ∓ Im p, p± = Re p ± Im x
    PhasePoint plus() const { return {x.real() - p.imag(), p.real() + x.imag()}; }
    PhasePoint minus() const { return {x.real() + p.imag(), p.real() - x.imag()}; }

    bool real() const { return x.imag() == 0.0 && p.imag() == 0.0; }

    static ComplexPhasePoint from_real(const PhasePoint& pt) { return {cplx(pt.x, 0.0), cplx(pt.p, 0.0)}; }

    static ComplexPhasePoint from_pair(const PhasePoint& minus, const PhasePoint& plus) {
        return {cplx(0.5 * (plus.x + minus.x), 0.5 * (plus.p - minus.p)),
                cplx(0.5 * (plus.p + minus.p), -0.5 * (plus.x - minus.x))};
    }

    static ComplexPhasePoint from_z(cplx zp, cplx zm) {
        return {(zp + zm) / std::sqrt(2.0), (zp - zm) / (I * std::sqrt(2.0))};
    }
};

inline void check_pair_reliable(const FockOperator& A, const PhasePoint& minus, const PhasePoint& plus,
                                const TruncationPolicy& policy, const char* what) {
    check_reliable(A, minus.abs_z2(), policy, what);
    check_reliable(A, plus.abs_z2(), policy, what);
}

// <phi_minus|A phi_plus> / <phi_minus|phi_plus>
inline cplx continue_symbol(const FockOperator& A, const ComplexPhasePoint& zp, const TruncationPolicy& policy = {}) {
    PhasePoint mi = zp.minus(), pl = zp.plus();
    check_pair_reliable(A, mi, pl, policy, "continue_symbol");
    cplx ov = coherent_overlap_closed_form(mi, pl);
    if (std::abs(ov) < 1e-300) throw OverflowGuardError("coherent overlap underflows; continuation points too far apart");
    Vec a = coherent_state(mi, A.dim()).coeffs;
    Vec b = coherent_state(pl, A.dim()).coeffs;
    return a.dot(A.matrix() * b) / ov;
}

// The same function written in z±: e^{-z+ z-} sum_mn z-^m A_mn z+^n / sqrt(m! n!).
// Algebraically identical to the ratio, without the underflowing Gaussian factors.
inline Vec bargmann_vector(cplx z, int dim) {
    Vec u(dim);
    u(0) = 1.0;
    for (int n = 1; n < dim; ++n) u(n) = u(n - 1) * z / std::sqrt(static_cast<double>(n));
    return u;
}

// Central differences of F in the real quadruple; CR says dF/dx- = i dF/dp- and
// dF/dx+ = -i dF/dp+.
inline std::pair<double, double> cauchy_riemann_residual(const FockOperator& A, const ComplexPhasePoint& zp, double h,
                                                         const TruncationPolicy& policy = {}) {
    if (!(h >= 1e-6 && h <= 1e-2)) throw ValidationError("finite-difference step must lie in [1e-6, 1e-2]");
    PhasePoint mi = zp.minus(), pl = zp.plus();
    auto F = [&](PhasePoint m, PhasePoint p) { return continue_symbol(A, ComplexPhasePoint::from_pair(m, p), policy); };
    auto shift = [](PhasePoint q, double dx, double dp) { return PhasePoint{q.x + dx, q.p + dp}; };
    cplx fxm = (F(shift(mi, h, 0), pl) - F(shift(mi, -h, 0), pl)) / (2 * h);
    cplx fpm = (F(shift(mi, 0, h), pl) - F(shift(mi, 0, -h), pl)) / (2 * h);
    cplx fxp = (F(mi, shift(pl, h, 0)) - F(mi, shift(pl, -h, 0))) / (2 * h);
    cplx fpp = (F(mi, shift(pl, 0, h)) - F(mi, shift(pl, 0, -h))) / (2 * h);
    return {std::abs(fxm - I * fpm), std::abs(fxp + I * fpp)};
}

struct DerivativeTable {
    ComplexPhasePoint center;
    int max_order = 0;
    double radius = 0.5;
    Mat coeffs;                     // coeffs(m, n) = d+^m d-^n H_A at center
    double nyquist_residual = 0.0;  // relative size of the Nyquist band
    int samples = 0;                // per angle

    cplx operator()(int m, int n) const { return coeffs(m, n); }

    std::string dump() const {
        std::ostringstream os;
        os.precision(17);
        os << "center " << center.x.real() << ' ' << center.x.imag() << ' ' << center.p.real() << ' '
           << center.p.imag() << "\nmax_order " << max_order << "\nradius " << radius << "\nsamples " << samples
           << "\nnyquist_residual " << nyquist_residual << '\n';
        for (int m = 0; m <= max_order; ++m)
            for (int n = 0; n <= max_order; ++n)
                os << m << ' ' << n << ' ' << coeffs(m, n).real() << ' ' << coeffs(m, n).imag() << '\n';
        return os.str();
    }
};

struct TorusOptions {
    double radius = 0.5;
    int oversample = 4;      // starting samples per angle = oversample * max_order
    int max_samples = 512;   // doubling stops here; 0 disables doubling
    double nyquist_tol = 1e-6;
};

namespace detail {

// Taylor coefficients c_ab r^{a+b} of F on an m x m torus; returns the Nyquist residual.
inline double torus_coefficients(const Mat& a_t, cplx zp0, cplx zm0, double r, int m, Mat& f) {
    const int dim = static_cast<int>(a_t.rows());
    Mat up(dim, m), um(dim, m);
    std::vector<cplx> zp(m), zm(m);
    for (int k = 0; k < m; ++k) {
        cplx e = std::polar(r, 2.0 * pi * k / m);
        zp[k] = zp0 + e;
        zm[k] = zm0 + e;
        up.col(k) = bargmann_vector(zp[k], dim);
        um.col(k) = bargmann_vector(zm[k], dim);
    }
    // f(j, k) = F(z+_j, z-_k)
    f = (up.transpose() * a_t * um).eval();
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j) f(j, k) *= std::exp(-zp[j] * zm[k]);
    fft2_forward(f);
    f /= static_cast<double>(m) * m;
    double peak = f.cwiseAbs().maxCoeff(), nyq = 0.0;
    for (int k = 0; k < m; ++k) nyq = std::max({nyq, std::abs(f(m / 2, k)), std::abs(f(k, m / 2))});
    return peak > 0 ? nyq / peak : 0.0;
}

}  // namespace detail

// Taylor coefficients of F(z+, z-) by sampling a torus around (z+0, z-0) and a 2-D DFT.
// Sampling doubles until the Nyquist band falls below tolerance.
inline DerivativeTable derivative_table(const FockOperator& A, const ComplexPhasePoint& center, int max_order,
                                        const TorusOptions& opt = {}, const TruncationPolicy& policy = {}) {
    if (max_order < 0) throw ValidationError("max_order must be non-negative");
    if (!(opt.radius > 0)) throw ValidationError("extraction radius must be positive");
    // the Nyquist row sits above every extracted order
    int m = std::max({opt.oversample * std::max(max_order, 1), 2 * max_order + 2, 4});
    m += m % 2;
    const double r = opt.radius;
    cplx zp0 = center.z_plus(), zm0 = center.z_minus();
    // the sampled coherent states have |alpha| up to |z0| + r
    double wp = std::pow(std::abs(zp0) + r, 2), wm = std::pow(std::abs(zm0) + r, 2);
    check_reliable(A, std::max(wp, wm), policy, "derivative_table");

    const Mat a_t = A.matrix().transpose();
    Mat f;
    double resid = detail::torus_coefficients(a_t, zp0, zm0, r, m, f);
    while (resid > opt.nyquist_tol && 2 * m <= opt.max_samples) {
        m *= 2;
        resid = detail::torus_coefficients(a_t, zp0, zm0, r, m, f);
    }
    if (resid > opt.nyquist_tol)
        throw UnderResolvedError("torus Fourier residual " + std::to_string(resid) + " at Nyquist order with " +
                                 std::to_string(m) + " samples per angle; increase sampling");

    DerivativeTable t;
    t.center = center;
    t.max_order = max_order;
    t.radius = r;
    t.nyquist_residual = resid;
    t.samples = m;
    t.coeffs.resize(max_order + 1, max_order + 1);
    for (int a = 0; a <= max_order; ++a)
        for (int b = 0; b <= max_order; ++b)
            t.coeffs(a, b) = factorial(a) * factorial(b) * f(a, b) / std::pow(r, a + b);
    return t;
}

inline DerivativeTable derivative_table(const FockOperator& A, const PhasePoint& center, int max_order,
                                        const TorusOptions& opt = {}, const TruncationPolicy& policy = {}) {
    return derivative_table(A, ComplexPhasePoint::from_real(center), max_order, opt, policy);
}

enum class IdentitySide { minus, plus };

struct DerivativeIdentityResult {
    cplx lhs;
    cplx rhs;
    double diff;
};

// minus side: <phi_{n;minus}|A phi_plus>/<phi_minus|phi_plus>
//             = (1/sqrt n!) sum_r C(n,r) (z+ - conj z-)^(n-r) d-^r F
// plus side:  <phi_minus|A phi_{n;plus}>/<phi_minus|phi_plus>
//             = (1/sqrt n!) sum_r C(n,r) (z- - conj z+)^(n-r) d+^r F
inline DerivativeIdentityResult lemma_b_check(const FockOperator& A, int n, const PhasePoint& minus, const PhasePoint& plus,
                                  const DerivativeTable& table, IdentitySide side = IdentitySide::minus,
                                  const TruncationPolicy& policy = {}) {
    if (n < 0) throw ValidationError("order must be non-negative");
    if (n > table.max_order) throw ValidationError("derivative table order " + std::to_string(table.max_order) +
                                                   " is below the requested " + std::to_string(n));
    check_pair_reliable(A, minus, plus, policy, "lemma_b_check");
    const int dim = A.dim();
    cplx ov = coherent_overlap_closed_form(minus, plus);
    if (std::abs(ov) < 1e-300) throw OverflowGuardError("coherent overlap underflows");
    cplx lhs;
    cplx shift;
    if (side == IdentitySide::minus) {
        Vec bra = n == 0 ? coherent_state(minus, dim).coeffs : displaced_number_state(n, minus, dim).coeffs;
        lhs = bra.dot(A.matrix() * coherent_state(plus, dim).coeffs) / ov;
        shift = plus.z() - minus.z();  // z+ - conj(z-)
    } else {
        Vec ket = n == 0 ? coherent_state(plus, dim).coeffs : displaced_number_state(n, plus, dim).coeffs;
        lhs = coherent_state(minus, dim).coeffs.dot(A.matrix() * ket) / ov;
        shift = std::conj(minus.z() - plus.z());  // z- - conj(z+)
    }
    cplx rhs = 0.0;
    for (int r = 0; r <= n; ++r) {
        cplx d = side == IdentitySide::minus ? table(0, r) : table(r, 0);
        rhs += binomial(n, r) * std::pow(shift, n - r) * d;
    }
    rhs /= std::sqrt(factorial(n));
    return {lhs, rhs, std::abs(lhs - rhs)};
}

inline DerivativeIdentityResult lemma_b_check(const FockOperator& A, int n, const PhasePoint& minus, const PhasePoint& plus,
                                  IdentitySide side = IdentitySide::minus, const TruncationPolicy& policy = {}) {
    DerivativeTable t =
        derivative_table(A, ComplexPhasePoint::from_pair(minus, plus), std::max(n, 1), TorusOptions{}, policy);
    return lemma_b_check(A, n, minus, plus, t, side, policy);
}

}  // namespace husimi
