#ifndef DARBOUX_NUMERIC_HPP
#define DARBOUX_NUMERIC_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace darboux {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline const cplx iunit{0.0, 1.0};

// Thrown when an argument sits on (or too close to) a pole of the function.
struct pole_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Thrown when a structural factor of a recurrence or contiguous chain
// vanishes; carries the factor's name and the index at which it vanished.
struct vanishing_factor_error : std::runtime_error {
    std::string factor;
    int index;
    vanishing_factor_error(std::string f, int idx)
        : std::runtime_error("vanishing factor " + f + " at index " + std::to_string(idx)),
          factor(std::move(f)), index(idx) {}
};

// Iterative process failed to converge; keeps the last two iterates for
// diagnosis.
struct non_convergence_error : std::runtime_error {
    cplx last, second_last;
    non_convergence_error(const std::string &msg, cplx a, cplx b)
        : std::runtime_error(msg), last(a), second_last(b) {}
};

// Evaluation refused because the point lies outside the convergence domain;
// carries the ratio coordinate and both candidate bounds.
struct domain_refusal : std::domain_error {
    double ratio_coordinate, bound_minimal, bound_dominant;
    domain_refusal(const std::string &msg, double r, double bmin, double bdom)
        : std::domain_error(msg), ratio_coordinate(r), bound_minimal(bmin), bound_dominant(bdom) {}
};

// A stated precondition of an operation does not hold for the given inputs.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline double abs2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

// Distance to the nearest real integer; infinite if the imaginary part is not
// negligible.  Used for all lattice-membership checks.
inline double integer_distance(cplx z, long long *nearest = nullptr) {
    double n = std::round(z.real());
    if (nearest) *nearest = static_cast<long long>(n);
    return std::hypot(z.real() - n, z.imag());
}

inline bool near_integer(cplx z, double tol, long long *nearest = nullptr) {
    return integer_distance(z, nearest) <= tol;
}

// Complex value carried as mantissa * 10^log10_scale, for series whose raw
// terms overflow or underflow double range.
struct scaled_cplx {
    cplx mant{0.0, 0.0};
    double log10_scale = 0.0;

    static scaled_cplx from(cplx v) {
        scaled_cplx s{v, 0.0};
        s.normalize();
        return s;
    }
    void normalize() {
        double a = std::abs(mant);
        if (a == 0.0 || !std::isfinite(a)) {
            log10_scale = (a == 0.0) ? 0.0 : log10_scale;
            return;
        }
        double e = std::floor(std::log10(a));
        if (std::abs(e) > 1.0) {
            mant *= std::pow(10.0, -e);
            log10_scale += e;
        }
    }
    scaled_cplx operator*(const scaled_cplx &o) const {
        scaled_cplx r{mant * o.mant, log10_scale + o.log10_scale};
        r.normalize();
        return r;
    }
    scaled_cplx operator/(const scaled_cplx &o) const {
        scaled_cplx r{mant / o.mant, log10_scale - o.log10_scale};
        r.normalize();
        return r;
    }
    // log10 of the magnitude; -inf for zero.
    double log10_abs() const {
        double a = std::abs(mant);
        if (a == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log10(a) + log10_scale;
    }
    // Collapse to a plain complex; overflows/underflows honestly.
    cplx value() const { return mant * std::pow(10.0, log10_scale); }
};

inline scaled_cplx pow_scaled(cplx base, long long n) {
    // exp(n log base) in scaled form
    if (base == cplx(0.0, 0.0)) return scaled_cplx{cplx(n == 0 ? 1.0 : 0.0), 0.0};
    cplx l = std::log(base);
    double re = static_cast<double>(n) * l.real();
    double im = static_cast<double>(n) * l.imag();
    scaled_cplx r;
    r.mant = std::exp(cplx(0.0, im));
    r.log10_scale = re / std::log(10.0);
    r.normalize();
    return r;
}

}  // namespace darboux

#endif
