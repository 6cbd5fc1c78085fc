#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "fft.hpp"
#include "fock.hpp"
#include "grid.hpp"
#include "parallel.hpp"
#include "symbols.hpp"

namespace husimi {

// Fourier-space damping applied before spectral differentiation.
struct SpectralFilter {
    enum class Kind { none, top_fraction, isotropic };
    Kind kind = Kind::top_fraction;
    double fraction = 0.125;  // top_fraction: damp modes above (1 - fraction) k_max on each axis
    double cutoff = 0.0;      // isotropic: wavenumber scale of exp(-strength (|k|/cutoff)^order)
    double strength = 36.0;
    int order = 8;

    double weight(double kx, double kp, double kx_max, double kp_max) const {
        switch (kind) {
        case Kind::none: return 1.0;
        case Kind::top_fraction: {
            auto axis = [&](double k, double kmax) {
                double eta = std::abs(k) / kmax, start = 1.0 - fraction;
                if (eta <= start) return 1.0;
                return std::exp(-strength * std::pow((eta - start) / fraction, order));
            };
            return axis(kx, kx_max) * axis(kp, kp_max);
        }
        case Kind::isotropic:
            return std::exp(-strength * std::pow(std::hypot(kx, kp) / cutoff, order));
        }
        return 1.0;
    }
};

struct EvolutionConfig {
    double dt = 0.01;  // output step; RK4 substeps subdivide it to satisfy the guard
    int steps = 1;
    int bracket_order = 3;
    enum class Integrator { rk4 } integrator = Integrator::rk4;
    GridSpec grid;
    SpectralFilter filter;
    double support_radius = 0.0;  // > 0: bracket multiplied by exp(-(r/R)^support_order)
    int support_order = 16;
    int substeps = 0;             // 0: smallest count meeting the stability guard
    double stability_guard = 0.5;
    int snapshot_every = 0;       // 0: initial and final only
    double growth_limit = 10.0;
    double resolution_tol = 1e-6;
};

namespace detail {

inline Mat wavenumbers_x(const GridSpec& s) {
    Mat k(s.nx, s.np);
    for (int j = 0; j < s.np; ++j)
        for (int i = 0; i < s.nx; ++i) k(i, j) = 2.0 * pi * fft_index(i, s.nx) / (s.nx * s.dx());
    return k;
}

inline Mat wavenumbers_p(const GridSpec& s) {
    Mat k(s.nx, s.np);
    for (int j = 0; j < s.np; ++j)
        for (int i = 0; i < s.nx; ++i) k(i, j) = 2.0 * pi * fft_index(j, s.np) / (s.np * s.dp());
    return k;
}

}  // namespace detail

// d+^n H_H on every grid point, n <= order. Hermitian H gives an exactly real n = 0 grid.
inline std::vector<Mat> plus_derivative_grids(const FockOperator& H, const GridSpec& spec, int order) {
    const int dim = H.dim();
    std::vector<Mat> out(order + 1, Mat(spec.nx, spec.np));
    const bool herm = H.is_hermitian();
    Mat hadj = H.matrix().adjoint();
    parallel_for(spec.nx, [&](long i) {
        Mat v(dim, spec.np);
        for (int j = 0; j < spec.np; ++j) v.col(j) = coherent_state(spec.point(static_cast<int>(i), j), dim).coeffs;
        Mat u = hadj * v;
        Vec cur(dim), next(dim);
        for (int j = 0; j < spec.np; ++j) {
            cplx zb = std::conj(spec.point(static_cast<int>(i), j).z());
            cur = v.col(j);
            double sf = 1.0;
            for (int n = 0; n <= order; ++n) {
                if (n > 0) {
                    for (int m = 0; m < dim; ++m)
                        next(m) = ((m > 0 ? std::sqrt(static_cast<double>(m)) * cur(m - 1) : cplx(0.0)) - zb * cur(m)) /
                                  std::sqrt(static_cast<double>(n));
                    cur.swap(next);
                    sf *= std::sqrt(static_cast<double>(n));
                }
                cplx val = sf * u.col(j).dot(cur);
                out[n](i, j) = (n == 0 && herm) ? cplx(val.real(), 0.0) : val;
            }
        }
    });
    return out;
}

// Right-hand side of dQ/dt = sum_{n<=N} (2/n!) Im(d+^n H_H d-^n Q).
class LiouvilleOperator {
public:
    LiouvilleOperator(const FockOperator& H, const GridSpec& spec, int order, const SpectralFilter& filter,
                      double support_radius = 0.0, int support_order = 16)
        : spec_(spec), order_(order) {
        spec.validate();
        if (order < 0) throw ValidationError("bracket order must be non-negative");
        coeff_ = plus_derivative_grids(H, spec, order);
        Mat kx = detail::wavenumbers_x(spec), kp = detail::wavenumbers_p(spec);
        double kx_max = pi / spec.dx(), kp_max = pi / spec.dp();
        filter_ = Mat(spec.nx, spec.np);
        symbol_ = Mat(spec.nx, spec.np);
        for (int j = 0; j < spec.np; ++j)
            for (int i = 0; i < spec.nx; ++i) {
                filter_(i, j) = filter.weight(kx(i, j).real(), kp(i, j).real(), kx_max, kp_max);
                symbol_(i, j) = cplx(-kp(i, j).real(), kx(i, j).real()) / std::sqrt(2.0);  // (i kx - kp)/sqrt 2
            }
        for (int n = 1; n <= order; ++n) {
            powers_.push_back(n == 1 ? symbol_.cwiseProduct(filter_) : powers_.back().cwiseProduct(symbol_));
            weights_.push_back(2.0 / factorial(n));
        }
        mask_ = Eigen::MatrixXd::Ones(spec.nx, spec.np);
        if (support_radius > 0)
            for (int j = 0; j < spec.np; ++j)
                for (int i = 0; i < spec.nx; ++i) {
                    double r = std::hypot(spec.x(i), spec.p(j));
                    mask_(i, j) = std::exp(-std::pow(r / support_radius, support_order));
                }
        // operator-norm estimate of the filtered semi-discrete generator
        radius_ = 0.0;
        for (int n = 1; n <= order; ++n) {
            double cmax = (coeff_[n].cwiseAbs().array() * mask_.array()).maxCoeff();
            radius_ += weights_[n - 1] * cmax * powers_[n - 1].cwiseAbs().maxCoeff();
        }
    }

    double spectral_radius() const { return radius_; }
    const GridSpec& spec() const { return spec_; }
    const std::vector<Mat>& coefficients() const { return coeff_; }

    // Fraction of spectral energy in the top eighth of modes on either axis.
    double spectral_tail(const Eigen::MatrixXd& q) const {
        Mat f = q.cast<cplx>();
        fft2_forward(f);
        double total = 0.0, tail = 0.0;
        for (int j = 0; j < spec_.np; ++j)
            for (int i = 0; i < spec_.nx; ++i) {
                double e = std::norm(f(i, j));
                total += e;
                double ex = std::abs(fft_index(i, spec_.nx)) / (0.5 * spec_.nx);
                double ep = std::abs(fft_index(j, spec_.np)) / (0.5 * spec_.np);
                if (ex > 0.875 || ep > 0.875) tail += e;
            }
        return total > 0 ? tail / total : 0.0;
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& q) const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spec_.nx, spec_.np);
        // n = 0: 2 Im(H Q), zero whenever the symbol grid is real
        out += 2.0 * (coeff_[0].imag().array() * q.array()).matrix();
        if (order_ >= 1) {
            Mat qh = q.cast<cplx>();
            fft2_forward(qh);
            Mat work;
            for (int n = 1; n <= order_; ++n) {
                work = qh.cwiseProduct(powers_[n - 1]);
                fft2_inverse(work);
                out += weights_[n - 1] * coeff_[n].cwiseProduct(work).imag();
            }
        }
        return (out.array() * mask_.array()).matrix();
    }

private:
    GridSpec spec_;
    int order_;
    std::vector<Mat> coeff_;
    Mat filter_, symbol_;
    std::vector<Mat> powers_;
    std::vector<double> weights_;
    Eigen::MatrixXd mask_;
    double radius_ = 0.0;
};

inline PhaseGrid generalized_bracket(const FockOperator& H, const PhaseGrid& Q, int order,
                                     const SpectralFilter& filter = {}) {
    if (Q.values.imag().cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("Husimi grid must be real");
    LiouvilleOperator L(H, Q.spec, order, filter);
    Eigen::MatrixXd q = Q.values.real();
    double tail = L.spectral_tail(q);
    if (tail > 1e-6) throw ResolutionError("spectral tail " + std::to_string(tail) + " of the grid energy");
    return PhaseGrid(Q.spec, L.apply(q).cast<cplx>());
}

struct EvolutionResult {
    std::vector<PhaseGrid> snapshots;
    std::vector<double> snapshot_times;
    std::vector<double> mass_defect;  // after each output step, index 0 = initial
    std::vector<double> max_change;   // sup |Q_k - Q_{k-1}| per output step
    int substeps = 1;
    double spectral_radius = 0.0;
    double wall_seconds = 0.0;
    bool aborted = false;
    std::string diagnostic;
};

inline int guard_substeps(const LiouvilleOperator& L, const EvolutionConfig& cfg) {
    double need = std::abs(cfg.dt) * L.spectral_radius() / cfg.stability_guard;
    int auto_sub = std::max(1, static_cast<int>(std::ceil(need * (1.0 + 1e-12))));
    if (cfg.substeps == 0) return auto_sub;
    if (cfg.substeps < auto_sub)
        throw StabilityGuardError("dt/substeps * spectral radius = " +
                                  std::to_string(std::abs(cfg.dt) / cfg.substeps * L.spectral_radius()) +
                                  " exceeds the guard " + std::to_string(cfg.stability_guard));
    return cfg.substeps;
}

// Evolves an arbitrary real starting grid; backward runs use -H.
inline EvolutionResult evolve_husimi_grid(const FockOperator& H, const PhaseGrid& q0, const EvolutionConfig& cfg,
                                          bool throw_on_instability = true) {
    auto t0 = std::chrono::steady_clock::now();
    if (!(cfg.dt > 0)) throw ValidationError("dt must be positive");
    if (cfg.steps < 1) throw ValidationError("steps must be positive");
    if (!H.is_hermitian(1e-10)) throw ValidationError("Hamiltonian must be hermitian");
    if (!(q0.spec == cfg.grid)) throw DimensionMismatch("starting grid does not match the configured grid");
    if (q0.values.imag().cwiseAbs().maxCoeff() > 1e-12) throw ValidationError("Husimi grid must be real");
    LiouvilleOperator L(H, cfg.grid, cfg.bracket_order, cfg.filter, cfg.support_radius, cfg.support_order);
    Eigen::MatrixXd q = q0.values.real();
    double tail = L.spectral_tail(q);
    if (tail > cfg.resolution_tol) throw ResolutionError("initial Husimi grid spectral tail " + std::to_string(tail));

    EvolutionResult res;
    res.substeps = guard_substeps(L, cfg);
    res.spectral_radius = L.spectral_radius();
    const double h = cfg.dt / res.substeps, cell = cfg.grid.dx() * cfg.grid.dp();
    const double q_sup0 = q.cwiseAbs().maxCoeff();
    res.snapshots.push_back(q0);
    res.snapshot_times.push_back(0.0);
    res.mass_defect.push_back(std::abs(q.sum() * cell - 1.0));
    res.max_change.push_back(0.0);
    int every = cfg.snapshot_every > 0 ? cfg.snapshot_every : cfg.steps;
    Eigen::MatrixXd k1, k2, k3, k4;
    for (int step = 1; step <= cfg.steps; ++step) {
        Eigen::MatrixXd prev = q;
        for (int s = 0; s < res.substeps; ++s) {
            k1 = L.apply(q);
            k2 = L.apply(q + 0.5 * h * k1);
            k3 = L.apply(q + 0.5 * h * k2);
            k4 = L.apply(q + h * k3);
            q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        res.mass_defect.push_back(std::abs(q.sum() * cell - 1.0));
        res.max_change.push_back((q - prev).cwiseAbs().maxCoeff());
        double sup = q.allFinite() ? q.cwiseAbs().maxCoeff() : INFINITY;
        if (!(sup <= cfg.growth_limit * q_sup0)) {
            res.aborted = true;
            res.diagnostic = "sup |Q| grew from " + std::to_string(q_sup0) + " to " + std::to_string(sup) +
                             " at step " + std::to_string(step);
            res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (throw_on_instability) throw InstabilityError(res.diagnostic);
            return res;
        }
        if (step % every == 0 || step == cfg.steps) {
            res.snapshots.emplace_back(cfg.grid, q.cast<cplx>());
            res.snapshot_times.push_back(step * cfg.dt);
        }
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

inline EvolutionResult evolve_husimi(const FockOperator& H, const FockOperator& rho0, const EvolutionConfig& cfg,
                                     bool throw_on_instability = true) {
    if (!H.is_hermitian(1e-10)) throw ValidationError("Hamiltonian must be hermitian");
    return evolve_husimi_grid(H, husimi_function(rho0, cfg.grid), cfg, throw_on_instability);
}

// rho(t) = e^{-iHt} rho0 e^{iHt} by eigendecomposition, then its Husimi function.
inline FockOperator evolve_density(const FockOperator& H, const FockOperator& rho0, double t) {
    if (H.dim() != rho0.dim()) throw DimensionMismatch("H and rho0 dims differ");
    if (!H.is_hermitian(1e-10)) throw ValidationError("Hamiltonian must be hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es((H.matrix() + H.matrix().adjoint()) / 2.0);
    Vec phase = (-I * t * es.eigenvalues().cast<cplx>().array()).exp().matrix();
    Mat u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    Mat r = u * rho0.matrix() * u.adjoint();
    return FockOperator((r + r.adjoint()) / 2.0, Representation::finite, true);
}

inline PhaseGrid evolve_oracle(const FockOperator& H, const FockOperator& rho0, double t, const GridSpec& spec) {
    return husimi_function(evolve_density(H, rho0, t), spec);
}

}  // namespace husimi
