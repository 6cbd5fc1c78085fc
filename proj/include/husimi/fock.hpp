#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "core.hpp"

namespace husimi {

// finite: the matrix is the whole operator (it acts inside the span of the first dim number states).
// truncated: the matrix is a compression of an operator on the full Fock space, so anything that
// depends on matrix elements beyond dim is only approximate.
enum class Representation { finite, truncated };

class FockOperator {
public:
    FockOperator() = default;

    explicit FockOperator(Mat m, Representation rep = Representation::finite, bool hermitian = false)
        : m_(std::move(m)), rep_(rep), hermitian_(hermitian) {
        if (m_.rows() < 1 || m_.rows() != m_.cols())
            throw InvalidDimension("operator matrix must be square with dim >= 1");
        if (!m_.allFinite()) throw ValidationError("operator entries must be finite");
        if (hermitian_ && hermitian_defect() > 1e-12 * std::max(1.0, m_.cwiseAbs().maxCoeff()))
            throw ValidationError("hermitian flag set on a non-hermitian matrix");
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Mat& matrix() const { return m_; }
    cplx operator()(int m, int n) const { return m_(m, n); }
    Representation representation() const { return rep_; }
    bool truncated() const { return rep_ == Representation::truncated; }
    bool hermitian() const { return hermitian_; }

    double hermitian_defect() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
    bool is_hermitian(double tol = 1e-12) const { return hermitian_ || hermitian_defect() <= tol; }

    FockOperator adjoint() const { return FockOperator(m_.adjoint(), rep_, hermitian_); }

    // Upper-left k×k block; the result is a compression of this operator.
    FockOperator compress(int k) const {
        if (k < 1 || k > dim()) throw InvalidDimension("compression dimension out of range");
        return FockOperator(m_.topLeftCorner(k, k), k == dim() ? rep_ : Representation::truncated, hermitian_);
    }

    friend FockOperator operator*(const FockOperator& a, const FockOperator& b) {
        check_dims(a, b);
        return FockOperator(a.m_ * b.m_, combined(a, b));
    }
    friend FockOperator operator+(const FockOperator& a, const FockOperator& b) {
        check_dims(a, b);
        return FockOperator(a.m_ + b.m_, combined(a, b), a.hermitian_ && b.hermitian_);
    }
    friend FockOperator operator-(const FockOperator& a, const FockOperator& b) {
        check_dims(a, b);
        return FockOperator(a.m_ - b.m_, combined(a, b), a.hermitian_ && b.hermitian_);
    }
    friend FockOperator operator*(cplx s, const FockOperator& a) {
        return FockOperator(s * a.m_, a.rep_, a.hermitian_ && s.imag() == 0.0);
    }

private:
    static void check_dims(const FockOperator& a, const FockOperator& b) {
        if (a.dim() != b.dim()) throw DimensionMismatch("operator dims differ");
    }
    static Representation combined(const FockOperator& a, const FockOperator& b) {
        return a.truncated() || b.truncated() ? Representation::truncated : Representation::finite;
    }

    Mat m_;
    Representation rep_ = Representation::finite;
    bool hermitian_ = false;
};

struct StateVector {
    Vec coeffs;
    double norm_deficiency = 0.0;  // 1 - |v|^2 relative to the untruncated state
    bool reliable = true;
    std::string warning;

    int dim() const { return static_cast<int>(coeffs.size()); }
    double norm() const { return coeffs.norm(); }
};

// ---- builders ---------------------------------------------------------------

inline void require_dim(int dim, int min = 1) {
    if (dim < min) throw InvalidDimension("dim must be >= " + std::to_string(min) + ", got " + std::to_string(dim));
}

inline Mat annihilation_matrix(int dim) {
    Mat a = Mat::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline std::pair<FockOperator, FockOperator> build_ladder(int dim) {
    require_dim(dim, 2);
    Mat a = annihilation_matrix(dim);
    return {FockOperator(a, Representation::truncated), FockOperator(a.adjoint(), Representation::truncated)};
}

inline FockOperator build_parity(int dim) {
    require_dim(dim);
    Mat v = Mat::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) v(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    return FockOperator(v, Representation::truncated, true);
}

inline FockOperator build_identity(int dim) {
    require_dim(dim);
    return FockOperator(Mat::Identity(dim, dim), Representation::truncated, true);
}

inline FockOperator build_number(int dim) {
    require_dim(dim);
    Mat n = Mat::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) n(k, k) = k;
    return FockOperator(n, Representation::truncated, true);
}

inline FockOperator build_position(int dim) {
    require_dim(dim, 2);
    Mat a = annihilation_matrix(dim);
    return FockOperator((a + a.adjoint()) / std::sqrt(2.0), Representation::truncated, true);
}

inline FockOperator build_momentum(int dim) {
    require_dim(dim, 2);
    Mat a = annihilation_matrix(dim);
    return FockOperator((a - a.adjoint()) / (I * std::sqrt(2.0)), Representation::truncated, true);
}

// c (a†)^creat a^annih
struct LadderTerm {
    cplx coeff;
    int creat = 0;
    int annih = 0;
};

// Normal-ordered polynomial. Matrix elements are exact: each term is computed from
// the closed form <m|(a†)^j a^k|n> rather than from products of truncated matrices.
inline FockOperator build_ladder_polynomial(const std::vector<LadderTerm>& terms, int dim) {
    require_dim(dim);
    Mat m = Mat::Zero(dim, dim);
    for (const auto& t : terms) {
        if (t.creat < 0 || t.annih < 0) throw ValidationError("negative ladder power");
        // (a†)^j a^k |n> = sqrt(n!/(n-k)!) sqrt((n-k+j)!/(n-k)!) |n-k+j>
        for (int n = t.annih; n < dim; ++n) {
            int r = n - t.annih + t.creat;
            if (r >= dim) continue;
            double lg = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(n - t.annih + 1.0)) +
                        0.5 * (std::lgamma(r + 1.0) - std::lgamma(n - t.annih + 1.0));
            m(r, n) += t.coeff * std::exp(lg);
        }
    }
    bool herm = (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
    return FockOperator(herm ? Mat((m + m.adjoint()) / 2.0) : m, Representation::truncated, herm);
}

// Matrix of any ladder-built expression, computed in a padded basis and compressed, so
// entries that truncation would corrupt come out right. `make` maps a padded dim to a matrix.
template <class Make>
FockOperator build_padded(int dim, int pad, Make&& make, bool hermitian = false) {
    require_dim(dim);
    Mat big = make(dim + pad);
    Mat m = big.topLeftCorner(dim, dim);
    if (hermitian) m = ((m + m.adjoint()) / 2.0).eval();
    return FockOperator(m, Representation::truncated, hermitian);
}

inline FockOperator random_operator(int dim, std::uint64_t seed, bool hermitian, bool normalize = true) {
    require_dim(dim);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Mat m(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) m(i, j) = cplx(g(gen), g(gen));
    if (hermitian) m = ((m + m.adjoint()) / 2.0).eval();
    if (normalize) {
        Eigen::JacobiSVD<Mat> svd(m);
        m /= svd.singularValues()(0);
        if (hermitian) m = ((m + m.adjoint()) / 2.0).eval();
    }
    return FockOperator(m, Representation::finite, hermitian);
}

inline FockOperator random_hermitian(int dim, std::uint64_t seed) { return random_operator(dim, seed, true); }

// ---- states -----------------------------------------------------------------

// sum_{n >= dim} e^{-w} w^n / n!, summed directly (1 - partial sum loses everything below 1e-16).
inline double coherent_norm_deficiency(double w, int dim) {
    if (w <= 0.0) return 0.0;
    double log_t = -w + dim * std::log(w) - std::lgamma(dim + 1.0);
    if (log_t < -745.0 && dim > w) return 0.0;
    double total = 0.0;
    if (dim < w) {
        // head is small: 1 - sum_{n<dim}, with the head summed directly
        double head = 0.0;
        for (int n = 0; n < dim; ++n) head += std::exp(-w + n * std::log(w) - std::lgamma(n + 1.0));
        return std::clamp(1.0 - head, 0.0, 1.0);
    }
    double t = std::exp(log_t);
    for (int k = dim; k < dim + 100000; ++k) {
        total += t;
        t *= w / (k + 1);
        if (t < 1e-18 * total) break;
    }
    return std::min(total, 1.0);
}

inline StateVector coherent_state(const PhasePoint& pt, int dim, const TruncationPolicy& policy = {}) {
    require_dim(dim);
    cplx z = pt.z();
    double w = std::norm(z);
    StateVector s;
    s.coeffs.resize(dim);
    s.coeffs(0) = std::exp(-w / 2.0);
    for (int n = 1; n < dim; ++n) s.coeffs(n) = s.coeffs(n - 1) * z / std::sqrt(static_cast<double>(n));
    s.norm_deficiency = coherent_norm_deficiency(w, dim);
    s.reliable = s.norm_deficiency < policy.target_norm_deficiency;
    if (w > dim) s.warning = "|z|^2 = " + std::to_string(w) + " exceeds dim " + std::to_string(dim);
    return s;
}

// Generator z a† - conj(z) a = i(p x - x p) of the displacement, on a dim-dimensional basis.
inline Mat displacement_generator(const PhasePoint& pt, int dim) {
    Mat a = annihilation_matrix(dim);
    cplx z = pt.z();
    return z * a.adjoint() - std::conj(z) * a;
}

inline Mat displacement_matrix(const PhasePoint& pt, int dim) { return displacement_generator(pt, dim).exp(); }

// Basis size at which truncating the generator leaves the first components of
// D|n> (n < count) untouched to rounding.
inline int displacement_work_dim(int dim, int count, const PhasePoint& pt) {
    double r = std::sqrt(static_cast<double>(count)) + std::abs(pt.z()) + 6.0;
    return std::max(dim + 8, static_cast<int>(std::ceil(r * r)) + 8);
}

inline StateVector displaced_number_state(int n, const PhasePoint& pt, int dim, const TruncationPolicy& policy = {}) {
    require_dim(dim);
    if (n < 0 || n >= dim) throw IndexError("displaced number state index " + std::to_string(n) + " outside dim " + std::to_string(dim));
    int work = displacement_work_dim(dim, n + 1, pt);
    Mat u = displacement_matrix(pt, work);
    StateVector s;
    s.coeffs = u.col(n).head(dim);
    s.norm_deficiency = u.col(n).tail(work - dim).squaredNorm();
    s.reliable = s.norm_deficiency < policy.target_norm_deficiency;
    return s;
}

// First dim components of D|k>, k < count, from (a† - conj z) D|k-1> = sqrt(k) D|k>.
// Component m only needs components < m, so the truncated recursion is exact.
inline Mat displaced_family(const PhasePoint& pt, int dim, int count) {
    require_dim(dim);
    cplx z = pt.z();
    Mat f(dim, count);
    f.col(0) = coherent_state(pt, dim).coeffs;
    for (int k = 1; k < count; ++k) {
        for (int m = 0; m < dim; ++m) {
            cplx up = m > 0 ? std::sqrt(static_cast<double>(m)) * f(m - 1, k - 1) : cplx(0.0);
            f(m, k) = (up - std::conj(z) * f(m, k - 1)) / std::sqrt(static_cast<double>(k));
        }
    }
    return f;
}

// exp(s G) v for the displacement generator G on a work-dimensional basis, by scaled
// Taylor steps. G is tridiagonal, so this costs O(work) per term.
inline Vec displace_vector(const Vec& v, const PhasePoint& pt, int work, double sign = 1.0) {
    cplx z = sign * pt.z();
    Vec out = Vec::Zero(work);
    out.head(v.size()) = v;
    double gnorm = 2.0 * std::abs(z) * std::sqrt(static_cast<double>(work));
    int steps = std::max(1, static_cast<int>(std::ceil(gnorm / 0.5)));
    cplx zs = z / static_cast<double>(steps), zbs = std::conj(zs);
    std::vector<double> sq(work + 1);
    for (int m = 0; m <= work; ++m) sq[m] = std::sqrt(static_cast<double>(m));
    Vec term(work), next(work);
    for (int s = 0; s < steps; ++s) {
        term = out;
        for (int k = 1; k < 40; ++k) {
            for (int m = 0; m < work; ++m) {
                cplx acc = m > 0 ? zs * sq[m] * term(m - 1) : cplx(0.0);
                if (m + 1 < work) acc -= zbs * sq[m + 1] * term(m + 1);
                next(m) = acc / static_cast<double>(k);
            }
            term.swap(next);
            out += term;
            if (term.norm() < 1e-19 * out.norm()) break;
        }
    }
    return out;
}

// exp[-(x+ - x-)^2/4 - (p+ - p-)^2/4 + (i/2)(p+ x- - p- x+)] = <phi_minus|phi_plus>
inline cplx coherent_overlap_closed_form(const PhasePoint& minus, const PhasePoint& plus) {
    double dx = plus.x - minus.x, dp = plus.p - minus.p;
    return std::exp(cplx(-0.25 * dx * dx - 0.25 * dp * dp, 0.5 * (plus.p * minus.x - minus.p * plus.x)));
}

// ψ_0..ψ_{count-1} at x by the three-term recurrence.
inline void hermite_functions(int count, double x, double* out) {
    if (count <= 0) return;
    out[0] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    if (count > 1) out[1] = std::sqrt(2.0) * x * out[0];
    for (int n = 2; n < count; ++n)
        out[n] = std::sqrt(2.0 / n) * x * out[n - 1] - std::sqrt((n - 1.0) / n) * out[n - 2];
}

inline double position_wavefunction(int n, double x) {
    if (n < 0) throw IndexError("negative Hermite index");
    std::vector<double> buf(n + 1);
    hermite_functions(n + 1, x, buf.data());
    return buf[n];
}

// ---- density matrices -------------------------------------------------------

inline FockOperator pure_density(const Vec& v) {
    Vec u = v / v.norm();
    return FockOperator(u * u.adjoint(), Representation::finite, true);
}

inline FockOperator coherent_density(const PhasePoint& pt, int dim) {
    return pure_density(coherent_state(pt, dim).coeffs);
}

inline FockOperator diagonal_density(const std::vector<double>& weights) {
    int dim = static_cast<int>(weights.size());
    require_dim(dim);
    double total = 0.0;
    for (double w : weights) total += w;
    Mat m = Mat::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) m(n, n) = weights[n] / total;
    return FockOperator(m, Representation::finite, true);
}

// Geometric weights q^n, normalized on the truncated basis.
inline FockOperator thermal_density(double q, int dim) {
    std::vector<double> w(dim);
    for (int n = 0; n < dim; ++n) w[n] = std::pow(q, n);
    return diagonal_density(w);
}

inline void validate_density(const FockOperator& rho, double tol = 1e-8) {
    const Mat& m = rho.matrix();
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) throw ValidationError("density matrix is not hermitian");
    if (std::abs(m.trace() - 1.0) > tol) throw ValidationError("density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Mat> es((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw ValidationError("density matrix has a negative eigenvalue");
}

}  // namespace husimi
