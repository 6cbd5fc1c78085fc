#pragma once

#include <map>
#include <utility>
#include <vector>

#include "fock.hpp"
#include "grid.hpp"
#include "symbols.hpp"

namespace husimi {

// ---- product series in the displaced number basis ---------------------------

// c_n = <phi_{n;xp}|A† phi>, d_n = <phi_{n;xp}|B phi> over a displaced basis large
// enough that both expansions are complete to rounding.
struct MizrahiExpansion {
    Vec c;
    Vec d;
    double b_norm = 0.0;
    int basis_size() const { return static_cast<int>(c.size()); }
    cplx term(int n) const { return std::conj(c(n)) * d(n); }
};

inline MizrahiExpansion mizrahi_expansion(const FockOperator& A, const FockOperator& B, const PhasePoint& pt,
                                          const TruncationPolicy& policy = {}) {
    if (A.dim() != B.dim()) throw DimensionMismatch("product factors must share dim");
    check_reliable(A, pt.abs_z2(), policy, "mizrahi_product");
    check_reliable(B, pt.abs_z2(), policy, "mizrahi_product");
    const int dim = A.dim();
    Vec phi = coherent_state(pt, dim).coeffs;
    Vec u = A.matrix().adjoint() * phi;
    Vec v = B.matrix() * phi;
    // D(-z)u has support up to about (sqrt(dim) + |z|)^2
    int work = displacement_work_dim(dim, dim, pt);
    MizrahiExpansion e;
    e.c = displace_vector(u, pt, work, -1.0);
    e.d = displace_vector(v, pt, work, -1.0);
    e.b_norm = v.norm();
    return e;
}

inline cplx mizrahi_term(const FockOperator& A, const FockOperator& B, const PhasePoint& pt, int n,
                         const TruncationPolicy& policy = {}) {
    MizrahiExpansion e = mizrahi_expansion(A, B, pt, policy);
    if (n < 0 || n >= e.basis_size())
        throw IndexError("term " + std::to_string(n) + " outside the displaced basis of size " +
                         std::to_string(e.basis_size()));
    return e.term(n);
}

// Sums terms until the Cauchy-Schwarz bound sqrt(sum_{k>n} |c_k|^2) |B phi| falls below tol.
inline SeriesResult mizrahi_product(const FockOperator& A, const FockOperator& B, const PhasePoint& pt, double tol,
                                    int max_terms = -1, const TruncationPolicy& policy = {}) {
    if (!(tol > 0)) throw ValidationError("tolerance must be positive");
    MizrahiExpansion e = mizrahi_expansion(A, B, pt, policy);
    const int size = e.basis_size();
    std::vector<double> suffix(size + 1, 0.0);  // suffix[k] = sum_{j >= k} |c_j|^2
    for (int k = size - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + std::norm(e.c(k));
    int limit = max_terms > 0 ? std::min(max_terms, size) : size;
    SeriesResult r;
    for (int n = 0; n < limit; ++n) {
        r.push(e.term(n));
        double bound = std::sqrt(suffix[n + 1]) * e.b_norm;
        r.tail_bound = bound;
        if (bound <= tol) {
            r.verdict = Verdict::converged;
            return r;
        }
    }
    r.verdict = Verdict::inconclusive;
    r.note = "tail bound above tolerance after " + std::to_string(limit) + " terms";
    return r;
}

// ---- polynomial symbols and the Moyal product -------------------------------

class PolynomialSymbol {
public:
    using Key = std::pair<int, int>;  // powers of x and p

    PolynomialSymbol() = default;
    PolynomialSymbol(std::initializer_list<std::pair<const Key, cplx>> init) : c_(init) { prune(); }

    static PolynomialSymbol monomial(int i, int j, cplx c = 1.0) {
        PolynomialSymbol s;
        s.c_[{i, j}] = c;
        s.prune();
        return s;
    }
    static PolynomialSymbol x() { return monomial(1, 0); }
    static PolynomialSymbol p() { return monomial(0, 1); }

    const std::map<Key, cplx>& terms() const { return c_; }
    cplx coeff(int i, int j) const {
        auto it = c_.find({i, j});
        return it == c_.end() ? cplx(0.0) : it->second;
    }
    bool zero() const { return c_.empty(); }

    int degree() const {
        int d = -1;
        for (const auto& [k, v] : c_) d = std::max(d, k.first + k.second);
        return d;
    }

    cplx operator()(double xv, double pv) const {
        cplx s = 0.0;
        for (const auto& [k, v] : c_) s += v * std::pow(xv, k.first) * std::pow(pv, k.second);
        return s;
    }

    PolynomialSymbol derivative(int ox, int op) const {
        PolynomialSymbol out;
        for (const auto& [k, v] : c_) {
            if (k.first < ox || k.second < op) continue;
            double f = 1.0;
            for (int t = 0; t < ox; ++t) f *= k.first - t;
            for (int t = 0; t < op; ++t) f *= k.second - t;
            out.c_[{k.first - ox, k.second - op}] += f * v;
        }
        out.prune();
        return out;
    }

    friend PolynomialSymbol operator+(PolynomialSymbol a, const PolynomialSymbol& b) {
        for (const auto& [k, v] : b.c_) a.c_[k] += v;
        a.prune();
        return a;
    }
    friend PolynomialSymbol operator-(PolynomialSymbol a, const PolynomialSymbol& b) {
        for (const auto& [k, v] : b.c_) a.c_[k] -= v;
        a.prune();
        return a;
    }
    friend PolynomialSymbol operator*(cplx s, PolynomialSymbol a) {
        for (auto& [k, v] : a.c_) v *= s;
        a.prune();
        return a;
    }
    friend PolynomialSymbol operator*(const PolynomialSymbol& a, const PolynomialSymbol& b) {
        PolynomialSymbol out;
        for (const auto& [ka, va] : a.c_)
            for (const auto& [kb, vb] : b.c_) out.c_[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
        out.prune();
        return out;
    }
    bool operator==(const PolynomialSymbol& o) const { return c_ == o.c_; }

private:
    void prune() {
        for (auto it = c_.begin(); it != c_.end();)
            it = it->second == cplx(0.0) ? c_.erase(it) : std::next(it);
    }

    std::map<Key, cplx> c_;
};

// F * G = sum_n (i/2)^n / n! sum_k C(n,k) (-1)^k (dx^{n-k} dp^k F)(dp^{n-k} dx^k G),
// stopping once every bidifferential term vanishes.
inline PolynomialSymbol moyal_star_polynomial(const PolynomialSymbol& F, const PolynomialSymbol& G) {
    PolynomialSymbol out;
    int top = std::max(F.degree(), G.degree());
    cplx pref = 1.0;
    for (int n = 0; n <= std::max(top, 0); ++n) {
        if (n > 0) pref *= I / (2.0 * n);
        PolynomialSymbol level;
        for (int k = 0; k <= n; ++k) {
            PolynomialSymbol lhs = F.derivative(n - k, k);
            if (lhs.zero()) continue;
            PolynomialSymbol rhs = G.derivative(k, n - k);
            if (rhs.zero()) continue;
            level = level + cplx(binomial(n, k) * ((k % 2) ? -1.0 : 1.0)) * (lhs * rhs);
        }
        if (level.zero() && n > std::min(F.degree(), G.degree())) break;
        out = out + pref * level;
    }
    return out;
}

// Weyl-ordered operator of a polynomial symbol: x^i p^j maps to the average over all
// orderings of i copies of x and j copies of p. Built on dim + pad and compressed.
inline FockOperator weyl_ordered_operator(const PolynomialSymbol& s, int dim, int pad = -1) {
    if (pad < 0) pad = std::max(s.degree(), 0) + 8;
    int big = dim + pad;
    Mat a = annihilation_matrix(big);
    Mat xm = (a + a.adjoint()) / std::sqrt(2.0);
    Mat pm = (a - a.adjoint()) / (I * std::sqrt(2.0));
    Mat total = Mat::Zero(big, big);
    for (const auto& [k, v] : s.terms()) {
        int n = k.first + k.second;
        Mat acc = Mat::Zero(big, big);
        int words = 0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (__builtin_popcount(mask) != k.first) continue;
            Mat w = Mat::Identity(big, big);
            for (int t = 0; t < n; ++t) w = w * ((mask >> t) & 1u ? xm : pm);
            acc += w;
            ++words;
        }
        total += v * acc / static_cast<double>(words);
    }
    bool herm = true;
    for (const auto& [k, v] : s.terms()) herm = herm && v.imag() == 0.0;
    Mat m = total.topLeftCorner(dim, dim);
    if (herm) m = ((m + m.adjoint()) / 2.0).eval();
    return FockOperator(m, Representation::truncated, herm);
}

}  // namespace husimi
