#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fft.hpp"
#include "fock.hpp"
#include "frame.hpp"
#include "grid.hpp"
#include "parallel.hpp"

namespace husimi {

// ---- Husimi symbol ----------------------------------------------------------

inline void check_reliable(const FockOperator& A, double w, const TruncationPolicy& policy, const char* what) {
    if (!A.truncated()) return;
    double def = coherent_norm_deficiency(w, A.dim());
    if (def >= policy.target_norm_deficiency)
        throw TruncationError(std::string(what) + ": coherent state at |z|^2 = " + std::to_string(w) +
                                  " has norm deficiency " + std::to_string(def) + " at dim " + std::to_string(A.dim()),
                              def);
}

inline double grid_max_abs_z2(const GridSpec& s) {
    double x = std::max(std::abs(s.x_min), std::abs(s.x(s.nx - 1)));
    double p = std::max(std::abs(s.p_min), std::abs(s.p(s.np - 1)));
    return 0.5 * (x * x + p * p);
}

inline cplx husimi_symbol(const FockOperator& A, const PhasePoint& pt, const TruncationPolicy& policy = {}) {
    check_reliable(A, pt.abs_z2(), policy, "husimi_symbol");
    Vec phi = coherent_state(pt, A.dim()).coeffs;
    return phi.dot(A.matrix() * phi);
}

inline PhaseGrid husimi_symbol_grid(const FockOperator& A, const GridSpec& spec, const TruncationPolicy& policy = {}) {
    spec.validate();
    check_reliable(A, grid_max_abs_z2(spec), policy, "husimi_symbol_grid");
    PhaseGrid g(spec);
    const int dim = A.dim();
    const bool herm = A.is_hermitian();
    // one column of coherent vectors per p row, batched through a single product
    parallel_for(spec.nx, [&](long i) {
        Mat v(dim, spec.np);
        for (int j = 0; j < spec.np; ++j) v.col(j) = coherent_state(spec.point(static_cast<int>(i), j), dim).coeffs;
        Mat av = A.matrix() * v;
        for (int j = 0; j < spec.np; ++j) {
            cplx h = v.col(j).dot(av.col(j));
            g.values(i, j) = herm ? cplx(h.real(), 0.0) : h;
        }
    });
    return g;
}

inline PhaseGrid husimi_function(const FockOperator& rho, const GridSpec& spec) {
    validate_density(rho);
    PhaseGrid g = husimi_symbol_grid(rho, spec);
    g.values = g.values.real().cast<cplx>() / (2.0 * pi);
    return g;
}

// ---- Weyl symbol ------------------------------------------------------------

struct WeylQuadrature {
    int samples = 1024;
    double half_window = 0.0;  // 0: 2 sqrt(2 dim) + 6
    double edge_tol = 1e-10;
};

// Number-basis weights applied to truncated operators before the Weyl transform. A sharp
// cutoff at dim leaves O(1) oscillating edge terms at every phase-space point (the
// truncated identity is 0 or 2 at the origin); a smooth roll-off sums them away.
inline std::vector<double> weyl_taper(int dim) {
    std::vector<double> w(dim);
    double centre = 0.5 * dim, width = std::max(dim / 12.0, 0.5);
    for (int n = 0; n < dim; ++n) w[n] = std::sqrt(0.5 * std::erfc((n - centre) / width));
    return w;
}

inline Mat weyl_ready_matrix(const FockOperator& A) {
    if (!A.truncated()) return A.matrix();
    auto w = weyl_taper(A.dim());
    Mat m = A.matrix();
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) m(i, j) *= w[i] * w[j];
    return m;
}

inline int bandwidth(const Mat& m) {
    int b = 0;
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i)
            if (m(i, j) != cplx(0.0)) b = std::max(b, std::abs(i - j));
    return b;
}

namespace detail {

struct WeylKernel {
    Mat a;
    Eigen::MatrixXd a_re, a_im;
    int band = 0;
    bool banded = false;
    std::vector<double> y, wy;  // y samples and trapezoid weights
    double edge_scale = 1.0;

    WeylKernel(const FockOperator& A, const WeylQuadrature& q) {
        a = weyl_ready_matrix(A);
        a_re = a.real();
        a_im = a.imag();
        band = bandwidth(a);
        banded = 2 * band + 1 < a.rows() / 2;
        int dim = A.dim();
        double L = q.half_window > 0 ? q.half_window : 2.0 * std::sqrt(2.0 * dim) + 6.0;
        int m = std::max(q.samples, 3);
        double dy = 2.0 * L / (m - 1);
        y.resize(m);
        wy.assign(m, dy);
        for (int k = 0; k < m; ++k) y[k] = -L + k * dy;
        wy.front() = wy.back() = 0.5 * dy;
        edge_scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    }

    // K(y) = sum_mn psi_m(x - y/2) A_mn psi_n(x + y/2) for all y samples.
    Vec kernel(double x, const WeylQuadrature& q) const {
        const int dim = static_cast<int>(a.rows());
        const int m = static_cast<int>(y.size());
        Eigen::MatrixXd lo(dim, m), hi(dim, m);
        for (int k = 0; k < m; ++k) {
            hermite_functions(dim, x - 0.5 * y[k], lo.col(k).data());
            hermite_functions(dim, x + 0.5 * y[k], hi.col(k).data());
        }
        Vec out(m);
        if (banded) {
            for (int k = 0; k < m; ++k) {
                cplx acc = 0.0;
                for (int r = 0; r < dim; ++r) {
                    if (lo(r, k) == 0.0) continue;
                    int c0 = std::max(0, r - band), c1 = std::min(dim - 1, r + band);
                    cplx s = 0.0;
                    for (int c = c0; c <= c1; ++c) s += a(r, c) * hi(c, k);
                    acc += lo(r, k) * s;
                }
                out(k) = acc;
            }
        } else {
            Eigen::MatrixXd tr = a_re * hi, ti = a_im * hi;
            for (int k = 0; k < m; ++k) out(k) = cplx(lo.col(k).dot(tr.col(k)), lo.col(k).dot(ti.col(k)));
        }
        double edge = std::max(std::abs(out(0)), std::abs(out(m - 1)));
        if (edge > q.edge_tol * edge_scale)
            throw QuadratureWindowError("Weyl kernel is " + std::to_string(edge) + " at the y-window edge (x = " +
                                        std::to_string(x) + ")");
        return out;
    }
};

}  // namespace detail

// Weyl symbol on the outer product of xs and ps: result(i, j) at (xs[i], ps[j]).
inline Mat weyl_symbol_at(const FockOperator& A, const std::vector<double>& xs, const std::vector<double>& ps,
                          const WeylQuadrature& q = {}) {
    detail::WeylKernel wk(A, q);
    const int m = static_cast<int>(wk.y.size());
    Mat phase(m, ps.size());
    for (size_t j = 0; j < ps.size(); ++j)
        for (int k = 0; k < m; ++k) phase(k, j) = std::polar(wk.wy[k], ps[j] * wk.y[k]);
    Mat out(xs.size(), ps.size());
    parallel_for(static_cast<long>(xs.size()), [&](long i) {
        Vec kern = wk.kernel(xs[i], q);
        out.row(i) = (phase.transpose() * kern).transpose();
    });
    return out;
}

inline cplx weyl_symbol(const FockOperator& A, const PhasePoint& pt, const WeylQuadrature& q = {}) {
    return weyl_symbol_at(A, {pt.x}, {pt.p}, q)(0, 0);
}

inline PhaseGrid weyl_symbol_grid(const FockOperator& A, const GridSpec& spec, const WeylQuadrature& q = {}) {
    spec.validate();
    std::vector<double> xs(spec.nx), ps(spec.np);
    for (int i = 0; i < spec.nx; ++i) xs[i] = spec.x(i);
    for (int j = 0; j < spec.np; ++j) ps[j] = spec.p(j);
    PhaseGrid g(spec, weyl_symbol_at(A, xs, ps, q));
    if (A.is_hermitian()) g.values = g.values.real().cast<cplx>();
    return g;
}

inline PhaseGrid wigner_function(const FockOperator& rho, const GridSpec& spec, const WeylQuadrature& q = {}) {
    validate_density(rho);
    PhaseGrid g = weyl_symbol_grid(rho, spec, q);
    g.values /= 2.0 * pi;
    return g;
}

// ---- Gaussian smoothing -----------------------------------------------------

inline constexpr double kernel_width = 0.7071067811865476;  // (1/pi) exp(-dx^2 - dp^2) has sigma 1/sqrt 2

// Convolution with (1/pi) exp(-dx^2 - dp^2), zero outside the grid. pad_x/pad_p < 0 picks
// the minimal margin of six kernel widths.
inline PhaseGrid gaussian_smooth(const PhaseGrid& w, int pad_x = -1, int pad_p = -1) {
    const GridSpec& s = w.spec;
    double dx = s.dx(), dp = s.dp();
    if (dx > 0.5 || dp > 0.5) throw ResolutionError("grid spacing exceeds 0.5; the smoothing kernel is not resolved");
    int need_x = static_cast<int>(std::ceil(6.0 * kernel_width / dx));
    int need_p = static_cast<int>(std::ceil(6.0 * kernel_width / dp));
    if (pad_x < 0) pad_x = need_x;
    if (pad_p < 0) pad_p = need_p;
    if (pad_x < need_x || pad_p < need_p)
        throw AliasingError("padding margin below six kernel widths (" + std::to_string(need_x) + ", " +
                            std::to_string(need_p) + " cells needed)");
    int nx = s.nx + 2 * pad_x, np = s.np + 2 * pad_p;
    nx += nx % 2;
    np += np % 2;
    Mat f = Mat::Zero(nx, np);
    f.topLeftCorner(s.nx, s.np) = w.values;
    Mat k(nx, np);
    for (int j = 0; j < np; ++j) {
        double ep = fft_index(j, np) * dp;
        for (int i = 0; i < nx; ++i) {
            double ex = fft_index(i, nx) * dx;
            k(i, j) = std::exp(-ex * ex - ep * ep) * dx * dp / pi;
        }
    }
    fft2_forward(f);
    fft2_forward(k);
    f = f.cwiseProduct(k);
    fft2_inverse(f);
    PhaseGrid out(s, f.topLeftCorner(s.nx, s.np));
    if (w.values.imag().cwiseAbs().maxCoeff() == 0.0) out.values = out.values.real().cast<cplx>();
    return out;
}

// ---- anti-Husimi partial sums -----------------------------------------------

// Partial sums of sum_n (-1)^n/n! d+^n d-^n H_A at a point. Term n reduces to
// sum_k C(n,k) (-1)^k M_kk in the displaced frame.
inline SeriesResult anti_husimi_partial_sums(const FockOperator& A, const PhasePoint& pt, int n_max, double tol = 1e-10,
                                             const TruncationPolicy& policy = {}) {
    if (n_max < 0) throw ValidationError("n_max must be non-negative");
    check_reliable(A, pt.abs_z2(), policy, "anti_husimi_partial_sums");
    FrameElements fe = frame_elements(A, pt, n_max);
    SeriesResult r;
    int small = 0;
    for (int n = 0; n <= n_max; ++n) {
        cplx t = 0.0;
        for (int k = 0; k <= n; ++k) t += binomial(n, k) * ((k % 2) ? -1.0 : 1.0) * fe.diagonal[k];
        r.push(t);
        small = std::abs(t) < tol ? small + 1 : 0;
        if (has_growth_run(r.term_magnitudes)) {
            r.verdict = Verdict::diverging;
            r.note = "term magnitudes grew for 5 consecutive orders";
            return r;
        }
        if (small >= 2) {
            r.verdict = Verdict::converged;
            r.tail_bound = std::max(r.term_magnitudes[n], r.term_magnitudes[n - 1]);
            return r;
        }
    }
    r.note = "no verdict within n_max";
    return r;
}

}  // namespace husimi
