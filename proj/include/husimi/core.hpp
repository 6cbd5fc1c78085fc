#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace husimi {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I{0.0, 1.0};

// Failure classes, mapped onto CLI exit codes (2, 3, 4).
enum class ErrorClass { parse, refusal, instability };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)) {}
    ErrorClass error_class() const noexcept { return cls_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    ErrorClass cls_;
    std::string kind_;
};

#define HUSIMI_REFUSAL(Name, tag)                                                   \
    struct Name : Error {                                                           \
        explicit Name(const std::string& w) : Error(ErrorClass::refusal, tag, w) {} \
    };

HUSIMI_REFUSAL(InvalidDimension, "invalid-dimension")
HUSIMI_REFUSAL(IndexError, "index")
HUSIMI_REFUSAL(DimensionMismatch, "dimension-mismatch")
HUSIMI_REFUSAL(ValidationError, "validation")
HUSIMI_REFUSAL(QuadratureWindowError, "quadrature-window")
HUSIMI_REFUSAL(AliasingError, "aliasing")
HUSIMI_REFUSAL(OverflowGuardError, "overflow-guard")
HUSIMI_REFUSAL(UnderResolvedError, "under-resolved")
HUSIMI_REFUSAL(ResolutionError, "resolution")
HUSIMI_REFUSAL(StabilityGuardError, "stability-guard")

#undef HUSIMI_REFUSAL

// Point lies where a truncated operator's coherent states have lost norm.
struct TruncationError : Error {
    TruncationError(const std::string& w, double deficiency)
        : Error(ErrorClass::refusal, "truncation", w), norm_deficiency(deficiency) {}
    double norm_deficiency;
};

struct InstabilityError : Error {
    explicit InstabilityError(const std::string& w) : Error(ErrorClass::instability, "instability", w) {}
};

struct ParseError : Error {
    ParseError(const std::string& w, int line_ = 0, int column_ = 0)
        : Error(ErrorClass::parse, "parse",
                line_ > 0 ? "line " + std::to_string(line_) + ", column " + std::to_string(column_) + ": " + w : w),
          line(line_), column(column_) {}
    int line;
    int column;
};

inline int exit_code(const Error& e) {
    switch (e.error_class()) {
    case ErrorClass::parse: return 2;
    case ErrorClass::refusal: return 3;
    case ErrorClass::instability: return 4;
    }
    return 3;
}

struct PhasePoint {
    double x = 0.0;
    double p = 0.0;

    cplx z() const { return cplx(x, p) / std::sqrt(2.0); }
    double abs_z2() const { return 0.5 * (x * x + p * p); }
};

struct TruncationPolicy {
    double target_norm_deficiency = 1e-10;
    int max_dim = 256;
};

inline double factorial(int n) { return std::tgamma(n + 1.0); }

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace husimi
