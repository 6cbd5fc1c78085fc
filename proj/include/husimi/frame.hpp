#pragma once

#include <vector>

#include "fock.hpp"

namespace husimi {

// Matrix elements in the displaced frame M_jk = <phi_{j;xp}|A phi_{k;xp}>. With
// d+ M = [M, a†] and d- M = [a, M] these give every derivative of the Husimi symbol
// at a real point without differencing:
//   d+^n H = sqrt(n!) <A† phi|phi_n>,   d-^n H = sqrt(n!) <phi_n|A phi>,
//   d+^n d-^n H = n! sum_k C(n,k) (-1)^(n-k) M_kk.
struct FrameElements {
    std::vector<cplx> plus;      // d+^n H, n <= order
    std::vector<cplx> minus;     // d-^n H
    std::vector<cplx> diagonal;  // M_kk, k <= order
};

inline FrameElements frame_elements(const FockOperator& A, const PhasePoint& pt, int order) {
    int dim = A.dim();
    Mat fam = displaced_family(pt, dim, order + 1);
    Vec phi = fam.col(0);
    Vec a_phi = A.matrix() * phi;
    Vec adj_phi = A.matrix().adjoint() * phi;
    Mat a_fam = A.matrix() * fam;
    FrameElements out;
    double sqrt_fact = 1.0;
    for (int n = 0; n <= order; ++n) {
        if (n > 0) sqrt_fact *= std::sqrt(static_cast<double>(n));
        out.plus.push_back(sqrt_fact * adj_phi.dot(fam.col(n)));
        out.minus.push_back(sqrt_fact * fam.col(n).dot(a_phi));
        out.diagonal.push_back(fam.col(n).dot(a_fam.col(n)));
    }
    return out;
}

// d+^n H_A at pt for n <= order (first-component route; only A† phi and the family needed).
inline std::vector<cplx> plus_derivatives(const FockOperator& A, const PhasePoint& pt, int order) {
    return frame_elements(A, pt, order).plus;
}

inline std::vector<cplx> minus_derivatives(const FockOperator& A, const PhasePoint& pt, int order) {
    return frame_elements(A, pt, order).minus;
}

// Mixed diagonal derivative d+^n d-^n H_A from M_kk.
inline cplx mixed_diagonal_derivative(const std::vector<cplx>& diagonal, int n) {
    cplx acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += binomial(n, k) * (((n - k) % 2) ? -1.0 : 1.0) * diagonal[k];
    return factorial(n) * acc;
}

}  // namespace husimi
