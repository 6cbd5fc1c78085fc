#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core.hpp"

namespace husimi {

// Uniform lattice x_i = x_min + i (x_max - x_min)/nx, i < nx (right edge excluded, so the
// lattice tiles a periodic box). Same for p.
struct GridSpec {
    double x_min = -8.0, x_max = 8.0;
    int nx = 256;
    double p_min = -8.0, p_max = 8.0;
    int np = 256;

    double dx() const { return (x_max - x_min) / nx; }
    double dp() const { return (p_max - p_min) / np; }
    double x(int i) const { return x_min + i * dx(); }
    double p(int j) const { return p_min + j * dp(); }
    PhasePoint point(int i, int j) const { return {x(i), p(j)}; }
    long size() const { return static_cast<long>(nx) * np; }

    void validate() const {
        if (!(x_max > x_min) || !(p_max > p_min)) throw ValidationError("grid bounds must satisfy max > min");
        if (nx < 1 || np < 1) throw ValidationError("grid sizes must be positive");
    }

    static GridSpec square(double half_width, int n) { return {-half_width, half_width, n, -half_width, half_width, n}; }

    bool operator==(const GridSpec&) const = default;
};

struct PhaseGrid {
    GridSpec spec;
    Mat values;  // nx × np, values(i, j) at (x_i, p_j)

    PhaseGrid() = default;
    explicit PhaseGrid(const GridSpec& s) : spec(s), values(Mat::Zero(s.nx, s.np)) { s.validate(); }
    PhaseGrid(const GridSpec& s, Mat v) : spec(s), values(std::move(v)) {
        s.validate();
        if (values.rows() != s.nx || values.cols() != s.np) throw DimensionMismatch("grid values do not match spec");
    }

    cplx operator()(int i, int j) const { return values(i, j); }
    cplx& operator()(int i, int j) { return values(i, j); }

    // Trapezoid rule on the periodic lattice (plain sum times cell area).
    cplx integral() const { return values.sum() * spec.dx() * spec.dp(); }

    double sup_abs() const { return values.cwiseAbs().maxCoeff(); }

    std::pair<int, int> argmax_real() const {
        Eigen::Index i = 0, j = 0;
        values.real().maxCoeff(&i, &j);
        return {static_cast<int>(i), static_cast<int>(j)};
    }
};

inline double sup_diff(const PhaseGrid& a, const PhaseGrid& b) {
    if (!(a.spec == b.spec)) throw DimensionMismatch("grids differ");
    return (a.values - b.values).cwiseAbs().maxCoeff();
}

template <class Fn>
PhaseGrid sample_grid(const GridSpec& spec, Fn&& fn) {
    PhaseGrid g(spec);
    for (int j = 0; j < spec.np; ++j)
        for (int i = 0; i < spec.nx; ++i) g.values(i, j) = fn(spec.point(i, j));
    return g;
}

enum class Verdict { converged, diverging, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverging: return "diverging";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct SeriesResult {
    std::vector<cplx> terms;
    std::vector<cplx> partial_sums;
    std::vector<double> term_magnitudes;
    std::optional<double> tail_bound;
    Verdict verdict = Verdict::inconclusive;
    std::string note;

    cplx value() const { return partial_sums.empty() ? cplx(0.0) : partial_sums.back(); }
    int terms_used() const { return static_cast<int>(partial_sums.size()); }

    void push(cplx t) {
        terms.push_back(t);
        partial_sums.push_back((partial_sums.empty() ? cplx(0.0) : partial_sums.back()) + t);
        term_magnitudes.push_back(std::abs(t));
    }
};

// True when term_magnitudes contains `run` consecutive strict increases.
inline bool has_growth_run(const std::vector<double>& mags, int run = 5) {
    int streak = 0;
    for (size_t k = 1; k < mags.size(); ++k) {
        streak = mags[k] > mags[k - 1] ? streak + 1 : 0;
        if (streak >= run) return true;
    }
    return false;
}

}  // namespace husimi
