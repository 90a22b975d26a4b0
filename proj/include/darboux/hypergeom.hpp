#ifndef DARBOUX_HYPERGEOM_HPP
#define DARBOUX_HYPERGEOM_HPP

// Complex Gamma, Gauss 2F1, and the contiguous-relation machinery that folds
// a shifted 2F1 into a first-order operator acting on the base function.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "darboux/numeric.hpp"

namespace darboux {

// ---------------------------------------------------------------------------
// Gamma function, Lanczos approximation (g = 7, 9 coefficients), reflection
// on the left half-plane.

namespace detail {

inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_c[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline cplx lanczos_sum(cplx zm1) {
    cplx x = lanczos_c[0];
    for (int i = 1; i < 9; ++i) x += lanczos_c[i] / (zm1 + double(i));
    return x;
}

}  // namespace detail

inline cplx gamma(cplx z) {
    if (z.real() < 0.5) {
        long long n;
        if (near_integer(z, 1e-13, &n) && n <= 0)
            throw pole_error("gamma: pole at non-positive integer " + std::to_string(n));
        // reflection formula
        return pi / (std::sin(pi * z) * gamma(1.0 - z));
    }
    cplx zm1 = z - 1.0;
    cplx x = detail::lanczos_sum(zm1);
    cplx t = zm1 + detail::lanczos_g + 0.5;
    return std::sqrt(2.0 * pi) * std::pow(t, zm1 + 0.5) * std::exp(-t) * x;
}

// Gamma in scaled form; usable for arguments far beyond double overflow.
inline scaled_cplx gamma_scaled(cplx z) {
    if (z.real() < 0.5 || std::abs(z) < 50.0) return scaled_cplx::from(gamma(z));
    cplx zm1 = z - 1.0;
    cplx x = detail::lanczos_sum(zm1);
    cplx t = zm1 + detail::lanczos_g + 0.5;
    cplx lg = 0.5 * std::log(2.0 * pi) + (zm1 + 0.5) * std::log(t) - t + std::log(x);
    scaled_cplx r;
    r.mant = std::exp(cplx(0.0, lg.imag()));
    r.log10_scale = lg.real() / std::log(10.0);
    r.normalize();
    return r;
}

// ---------------------------------------------------------------------------
// Gauss hypergeometric function.

struct Gauss2F1Params {
    cplx a, b, c;
};

namespace detail {

// index at which the series terminates because a or b is a non-positive
// integer; -1 if non-terminating
inline long long termination_index(cplx a, cplx b) {
    long long na = -1, nb = -1, t;
    if (near_integer(a, 1e-13, &t) && t <= 0) na = -t;
    if (near_integer(b, 1e-13, &t) && t <= 0) nb = -t;
    if (na < 0) return nb;
    if (nb < 0) return na;
    return std::min(na, nb);
}

inline void check_c_blocking(cplx a, cplx b, cplx c) {
    long long nc;
    if (near_integer(c, 1e-13, &nc) && nc <= 0) {
        long long nt = termination_index(a, b);
        if (nt < 0 || nt > -nc)
            throw contract_error("hyp2f1: c is a blocking non-positive integer");
    }
}

inline cplx hyp2f1_series(cplx a, cplx b, cplx c, cplx z) {
    check_c_blocking(a, b, c);
    long long nterm = termination_index(a, b);
    cplx term = 1.0, acc = 1.0;
    for (long long n = 0; n < 400000; ++n) {
        if (nterm >= 0 && n >= nterm) return acc;
        term *= (a + double(n)) * (b + double(n)) / ((c + double(n)) * double(n + 1)) * z;
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc) && n > 3) return acc;
    }
    throw non_convergence_error("hyp2f1: series did not converge", acc, acc - term);
}

inline scaled_cplx hyp2f1_series_scaled(cplx a, cplx b, cplx c, cplx z) {
    check_c_blocking(a, b, c);
    long long nterm = termination_index(a, b);
    cplx term = 1.0, acc = 1.0;
    double scale = 0.0;  // log10
    for (long long n = 0; n < 400000; ++n) {
        if (nterm >= 0 && n >= nterm) break;
        term *= (a + double(n)) * (b + double(n)) / ((c + double(n)) * double(n + 1)) * z;
        acc += term;
        if (std::abs(term) < 1e-18 * std::abs(acc) && n > 3) break;
        double m = std::max(std::abs(acc), std::abs(term));
        if (m > 1e250) {
            acc *= 1e-250;
            term *= 1e-250;
            scale += 250.0;
        }
        if (n == 399999)
            throw non_convergence_error("hyp2f1: series did not converge", acc, acc - term);
    }
    scaled_cplx r{acc, scale};
    r.normalize();
    return r;
}

}  // namespace detail

// Direct-series evaluation (callers that need to compare transformation paths)
inline cplx hyp2f1_direct(const Gauss2F1Params &p, cplx z) {
    if (std::abs(z) >= 1.0) throw domain_refusal("hyp2f1_direct: |z| >= 1", std::abs(z), 1.0, 1.0);
    return detail::hyp2f1_series(p.a, p.b, p.c, z);
}

// Pfaff-transformed evaluation: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1))
inline cplx hyp2f1_pfaff(const Gauss2F1Params &p, cplx z) {
    cplx zp = z / (z - 1.0);
    if (std::abs(zp) >= 1.0)
        throw domain_refusal("hyp2f1_pfaff: transformed argument outside disk", std::abs(zp), 1.0,
                             1.0);
    return std::pow(1.0 - z, -p.a) * detail::hyp2f1_series(p.a, p.c - p.b, p.c, zp);
}

inline cplx hyp2f1(const Gauss2F1Params &p, cplx z) {
    // terminating series are polynomials: sum directly whatever z is
    if (detail::termination_index(p.a, p.b) >= 0) return detail::hyp2f1_series(p.a, p.b, p.c, z);
    double az = std::abs(z);
    if (az < 0.5) return hyp2f1_direct(p, z);
    double azp = std::abs(z / (z - 1.0));
    if (az < 1.0) {
        if (azp < az) return hyp2f1_pfaff(p, z);
        return hyp2f1_direct(p, z);
    }
    if (azp < 1.0 - 1e-9) return hyp2f1_pfaff(p, z);
    throw domain_refusal("hyp2f1: argument not reachable by series or Pfaff", az, 1.0, azp);
}

inline scaled_cplx hyp2f1_scaled(const Gauss2F1Params &p, cplx z) {
    if (detail::termination_index(p.a, p.b) >= 0)
        return detail::hyp2f1_series_scaled(p.a, p.b, p.c, z);
    double az = std::abs(z);
    double azp = std::abs(z / (z - 1.0));
    if (az < 1.0 && (az <= 0.5 || azp >= az))
        return detail::hyp2f1_series_scaled(p.a, p.b, p.c, z);
    if (azp < 1.0 - 1e-9) {
        cplx zp = z / (z - 1.0);
        scaled_cplx f = detail::hyp2f1_series_scaled(p.a, p.c - p.b, p.c, zp);
        cplx l = -p.a * std::log(1.0 - z);
        scaled_cplx pref{std::exp(cplx(0.0, l.imag())), l.real() / std::log(10.0)};
        pref.normalize();
        return f * pref;
    }
    throw domain_refusal("hyp2f1_scaled: argument not reachable", az, 1.0, azp);
}

// derivative via the contiguous derivative formula
inline cplx hyp2f1_deriv(const Gauss2F1Params &p, cplx z) {
    return p.a * p.b / p.c * hyp2f1({p.a + 1.0, p.b + 1.0, p.c + 1.0}, z);
}

// ---------------------------------------------------------------------------
// Dense polynomials and rational functions over C.

struct Poly {
    std::vector<cplx> c;  // c[i] multiplies x^i

    Poly() : c{cplx(0.0)} {}
    explicit Poly(std::vector<cplx> v) : c(std::move(v)) {
        if (c.empty()) c.push_back(cplx(0.0));
    }
    static Poly of(std::initializer_list<cplx> l) { return Poly(std::vector<cplx>(l)); }
    static Poly constant(cplx v) { return Poly(std::vector<cplx>{v}); }

    int degree() const { return int(c.size()) - 1; }
    double norm() const {
        double m = 0.0;
        for (cplx v : c) m = std::max(m, std::abs(v));
        return m;
    }
    bool is_zero(double tol = 0.0) const { return norm() <= tol; }

    cplx eval(cplx x) const {
        cplx acc = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
        return acc;
    }
    Poly derivative() const {
        if (c.size() <= 1) return Poly();
        std::vector<cplx> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = double(i) * c[i];
        return Poly(std::move(d));
    }
    void trim(double rel = 1e-14) {
        double m = norm();
        while (c.size() > 1 && std::abs(c.back()) <= rel * m) c.pop_back();
    }

    friend Poly operator+(const Poly &x, const Poly &y) {
        std::vector<cplx> r(std::max(x.c.size(), y.c.size()), cplx(0.0));
        for (std::size_t i = 0; i < x.c.size(); ++i) r[i] += x.c[i];
        for (std::size_t i = 0; i < y.c.size(); ++i) r[i] += y.c[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly &x, const Poly &y) {
        std::vector<cplx> r(std::max(x.c.size(), y.c.size()), cplx(0.0));
        for (std::size_t i = 0; i < x.c.size(); ++i) r[i] += x.c[i];
        for (std::size_t i = 0; i < y.c.size(); ++i) r[i] -= y.c[i];
        return Poly(std::move(r));
    }
    friend Poly operator*(const Poly &x, const Poly &y) {
        std::vector<cplx> r(x.c.size() + y.c.size() - 1, cplx(0.0));
        for (std::size_t i = 0; i < x.c.size(); ++i)
            for (std::size_t j = 0; j < y.c.size(); ++j) r[i + j] += x.c[i] * y.c[j];
        return Poly(std::move(r));
    }
    friend Poly operator*(cplx s, const Poly &x) {
        Poly r = x;
        for (auto &v : r.c) v *= s;
        return r;
    }
};

// divide by (x - r); remainder must be negligible (caller checks beforehand)
inline Poly deflate_root(const Poly &p, cplx r) {
    std::vector<cplx> q(p.c.size() - 1, cplx(0.0));
    cplx carry = 0.0;
    for (int i = int(p.c.size()) - 1; i >= 1; --i) {
        carry = p.c[i] + carry * r;
        q[i - 1] = carry;
    }
    return Poly(std::move(q));
}

struct RationalFn {
    Poly num, den;

    RationalFn() : num(), den(Poly::constant(1.0)) {}
    RationalFn(Poly n, Poly d) : num(std::move(n)), den(std::move(d)) {}
    static RationalFn constant(cplx v) { return {Poly::constant(v), Poly::constant(1.0)}; }

    cplx eval(cplx x) const { return num.eval(x) / den.eval(x); }

    RationalFn derivative() const {
        return RationalFn(num.derivative() * den - num * den.derivative(), den * den).normalized();
    }
    RationalFn normalized() const {
        RationalFn r = *this;
        r.num.trim();
        r.den.trim();
        // cancel shared roots at 0 and 1 (the only factors the contiguous
        // chain manufactures)
        for (cplx root : {cplx(0.0), cplx(1.0)}) {
            while (r.num.degree() >= 1 && r.den.degree() >= 1 &&
                   std::abs(r.num.eval(root)) <= 1e-12 * (r.num.norm() + 1e-300) &&
                   std::abs(r.den.eval(root)) <= 1e-12 * (r.den.norm() + 1e-300)) {
                r.num = deflate_root(r.num, root);
                r.den = deflate_root(r.den, root);
            }
        }
        // monic denominator
        cplx lead = r.den.c.back();
        if (std::abs(lead) > 0.0) {
            for (auto &v : r.num.c) v /= lead;
            for (auto &v : r.den.c) v /= lead;
        }
        return r;
    }

    friend RationalFn operator+(const RationalFn &x, const RationalFn &y) {
        return RationalFn(x.num * y.den + y.num * x.den, x.den * y.den).normalized();
    }
    friend RationalFn operator-(const RationalFn &x, const RationalFn &y) {
        return RationalFn(x.num * y.den - y.num * x.den, x.den * y.den).normalized();
    }
    friend RationalFn operator*(const RationalFn &x, const RationalFn &y) {
        return RationalFn(x.num * y.num, x.den * y.den).normalized();
    }
    friend RationalFn operator*(cplx s, const RationalFn &x) {
        return RationalFn(s * x.num, x.den);
    }
};

// first-order operator f -> p f + q f'
struct RationalOperator1 {
    RationalFn p, q;

    cplx apply(cplx f, cplx fprime, cplx x) const { return p.eval(x) * f + q.eval(x) * fprime; }
};

// ---------------------------------------------------------------------------
// Contiguous-relation reduction: the operator R_m with
//   F(a+m, b+m; c+2m; x) = p_m(x) F(a,b;c;x) + q_m(x) F'(a,b;c;x).
//
// Built from the classical relations
//   F(a,b;c+1;x)   = c [ (1-x) F' + (c-a-b) F ] / ((c-a)(c-b))
//   F(a+1,b+1;c+1) = (c/(ab)) F'(a,b;c;x)
// applied level by level, with every F'' reduced through the hypergeometric
// differential equation of the base parameters.

inline RationalOperator1 contiguous_reduce(int m, const Gauss2F1Params &base) {
    const cplx a = base.a, b = base.b, c = base.c;
    const int degree_cap = 4 * m + 8;

    RationalFn p = RationalFn::constant(1.0), q = RationalFn::constant(0.0);
    if (m == 0) return {p, q};

    const RationalFn one_minus_x{Poly::of({1.0, -1.0}), Poly::constant(1.0)};
    
    

    // d/dx of (p F + q F') in the same representation
    auto ddx = [&](const RationalFn &pp, const RationalFn &qq) {
        RationalFn fpp_f = RationalFn(Poly::constant(a * b), Poly::of({0.0, 1.0, -1.0}));
        RationalFn fpp_fp = RationalFn(Poly::of({-c, a + b + 1.0}),
                                       Poly::of({0.0, 1.0, -1.0}));  // -(c-(a+b+1)x) / ..
        RationalFn np = pp.derivative() + qq * fpp_f;
        RationalFn nq = pp + qq.derivative() + qq * fpp_fp;
        return std::make_pair(np.normalized(), nq.normalized());
    };

    for (int j = 1; j <= m; ++j) {
        cplx A = a + double(j - 1), B = b + double(j - 1), C = c + 2.0 * double(j - 1);
        double scale = 1.0 + std::abs(a) + std::abs(b) + std::abs(c) + 2.0 * j;
        if (std::abs(A) < 1e-12 * scale) throw vanishing_factor_error("a+j-1", j);
        if (std::abs(B) < 1e-12 * scale) throw vanishing_factor_error("b+j-1", j);
        if (std::abs(C - A) < 1e-12 * scale) throw vanishing_factor_error("c-a+j-1", j);
        if (std::abs(C - B) < 1e-12 * scale) throw vanishing_factor_error("c-b+j-1", j);

        // raise c by one: G = C[(1-x) d/dx + (C-A-B)] / ((C-A)(C-B))
        auto [dp, dq] = ddx(p, q);
        cplx fac = C / ((C - A) * (C - B));
        RationalFn gp = fac * (one_minus_x * dp + (C - A - B) * p).normalized();
        RationalFn gq = fac * (one_minus_x * dq + (C - A - B) * q).normalized();

        // raise a, b, c by one: next = ((C+1)/(A B)) d/dx G
        auto [hp, hq] = ddx(gp, gq);
        cplx fac2 = (C + 1.0) / (A * B);
        p = (fac2 * hp).normalized();
        q = (fac2 * hq).normalized();

        if (p.num.degree() > degree_cap || p.den.degree() > degree_cap ||
            q.num.degree() > degree_cap || q.den.degree() > degree_cap)
            throw std::runtime_error("contiguous_reduce: degree cap exceeded");
    }
    return {p, q};
}

}  // namespace darboux

#endif
