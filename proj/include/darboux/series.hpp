#ifndef DARBOUX_SERIES_HPP
#define DARBOUX_SERIES_HPP

// Local solutions of the Darboux equation
//
//   y'' + ( h - xi(xi+1)/sn^2 - eta(eta+1) dn^2/cn^2
//             - mu(mu+1) k^2 cn^2/dn^2 - nu(nu+1) k^2 sn^2 ) y = 0
//
// in two series expansions about u = 0 with leading exponent xi+1: a plain
// power series in sn^2, and an expansion in hypergeometric terms.  Includes
// termination classification, accessory-parameter spectra, Darboux
// polynomials and Darboux functions, convergence domains, ratio diagnostics,
// and the sign-flip parameter symmetries.
//
// The accessory parameter h is everywhere the one of the differential
// equation above; the series recurrences are re-derived from the equation at
// construction time and their internal parameter conventions are aligned
// automatically.

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "darboux/elliptic.hpp"
#include "darboux/hypergeom.hpp"
#include "darboux/numeric.hpp"
#include "darboux/recurrence.hpp"

namespace darboux {

// ---------------------------------------------------------------------------
// Parameters

struct DarbouxParams {
    cplx xi, eta, mu, nu, k;

    // xi = -3/2, -5/2, ... produce logarithmic local solutions; rejected
    static DarbouxParams make(cplx xi, cplx eta, cplx mu, cplx nu, cplx k) {
        cplx t = -xi - 1.5;  // non-negative integer exactly on the excluded set
        long long n;
        if (near_integer(t, 1e-12, &n) && n >= 0)
            throw contract_error("DarbouxParams: xi on the excluded half-integer set");
        return DarbouxParams{xi, eta, mu, nu, k};
    }
    Modulus modulus() const { return Modulus::from_k(k); }
};

// signed sums s0*xi + s1*eta + s2*mu + s3*nu
inline cplx sigma_sum(const DarbouxParams &p, int s0, int s1, int s2, int s3) {
    return double(s0) * p.xi + double(s1) * p.eta + double(s2) * p.mu + double(s3) * p.nu;
}
inline cplx w_pppp(const DarbouxParams &p) { return sigma_sum(p, 1, 1, 1, 1); }
inline cplx w_pppm(const DarbouxParams &p) { return sigma_sum(p, 1, 1, 1, -1); }
inline cplx w_ppmp(const DarbouxParams &p) { return sigma_sum(p, 1, 1, -1, 1); }
inline cplx w_pmpp(const DarbouxParams &p) { return sigma_sum(p, 1, -1, 1, 1); }
inline cplx w_mppp(const DarbouxParams &p) { return sigma_sum(p, -1, 1, 1, 1); }
inline cplx w_ppmm(const DarbouxParams &p) { return sigma_sum(p, 1, 1, -1, -1); }
inline cplx w_pmmp(const DarbouxParams &p) { return sigma_sum(p, 1, -1, -1, 1); }
inline cplx w_pmpm(const DarbouxParams &p) { return sigma_sum(p, 1, -1, 1, -1); }
inline cplx w_p0p0(const DarbouxParams &p) { return p.xi + p.mu; }

// potential and prefactor
inline cplx darboux_potential(const DarbouxParams &p, cplx u) {
    auto j = jacobi_sn_cn_dn(u, p.k);
    return p.xi * (p.xi + 1.0) / (j.sn * j.sn) +
           p.eta * (p.eta + 1.0) * j.dn * j.dn / (j.cn * j.cn) +
           p.mu * (p.mu + 1.0) * p.k * p.k * j.cn * j.cn / (j.dn * j.dn) +
           p.nu * (p.nu + 1.0) * p.k * p.k * j.sn * j.sn;
}

// sn^{xi+1} cn^{eta+1} dn^{mu+1}, principal powers of each factor
inline cplx darboux_prefactor(const DarbouxParams &p, const JacobiValues &j) {
    return std::pow(j.sn, p.xi + 1.0) * std::pow(j.cn, p.eta + 1.0) * std::pow(j.dn, p.mu + 1.0);
}

// ---------------------------------------------------------------------------
// The equation transported to s = sn^2 u coordinates: with
// y = sn^{xi+1} cn^{eta+1} dn^{mu+1} f(s) the function f satisfies
//     A(s) f'' + B(s) f' + C(s) f = 0
// with polynomial coefficients deg A = 3, deg B = 2, deg C = 1.  A comes from
// the chain rule; B and C are fitted exactly from point evaluations of the
// transported operator.  This is the independent route the recurrences are
// checked against.

struct SeriesOperator {
    std::array<cplx, 4> A;  // A = 4 s (1-s)(1-k^2 s)
    std::array<cplx, 3> B;
    std::array<cplx, 2> C;  // C[0] contains + h

    RecTriple triple(int m) const {
        double md = m;
        return RecTriple{
            A[1] * (md + 1.0) * md + B[0] * (md + 1.0),
            A[2] * md * (md - 1.0) + B[1] * md + C[0],
            A[3] * (md - 1.0) * (md - 2.0) + B[2] * (md - 1.0) + C[1],
        };
    }
    // apply to a truncated power series in s
    std::vector<cplx> apply(const std::vector<cplx> &f) const {
        std::size_t n = f.size();
        std::vector<cplx> out(n, cplx(0.0));
        for (std::size_t j = 0; j < n; ++j) {
            // f'' term: f[j] j(j-1) s^{j-2} times A_i s^i
            for (std::size_t i = 0; i < 4; ++i) {
                if (j >= 2 && j - 2 + i < n)
                    out[j - 2 + i] += A[i] * double(j) * double(j - 1) * f[j];
            }
            for (std::size_t i = 0; i < 3; ++i) {
                if (j >= 1 && j - 1 + i < n) out[j - 1 + i] += B[i] * double(j) * f[j];
            }
            for (std::size_t i = 0; i < 2; ++i) {
                if (j + i < n) out[j + i] += C[i] * f[j];
            }
        }
        return out;
    }
};

inline SeriesOperator derive_series_operator(const DarbouxParams &p, cplx h) {
    const cplx k2 = p.k * p.k;
    const cplx a = 0.5 * (p.xi + 1.0), b = 0.5 * (p.eta + 1.0), c = 0.5 * (p.mu + 1.0);
    auto P = [&](cplx x) { return x * (1.0 - x) * (1.0 - k2 * x); };
    auto Pp = [&](cplx x) { return 1.0 - 2.0 * (1.0 + k2) * x + 3.0 * k2 * x * x; };
    auto Gp = [&](cplx x) { return a / x - b / (1.0 - x) - c * k2 / (1.0 - k2 * x); };
    auto Gpp = [&](cplx x) {
        return -a / (x * x) - b / ((1.0 - x) * (1.0 - x)) -
               c * k2 * k2 / ((1.0 - k2 * x) * (1.0 - k2 * x));
    };
    auto V = [&](cplx x) {
        return p.xi * (p.xi + 1.0) / x + p.eta * (p.eta + 1.0) * (1.0 - k2 * x) / (1.0 - x) +
               p.mu * (p.mu + 1.0) * k2 * (1.0 - x) / (1.0 - k2 * x) +
               p.nu * (p.nu + 1.0) * k2 * x;
    };
    auto Bval = [&](cplx x) { return 8.0 * P(x) * Gp(x) + 2.0 * Pp(x); };
    auto Cval = [&](cplx x) {
        cplx g = Gp(x);
        return 4.0 * P(x) * (Gpp(x) + g * g) + 2.0 * Pp(x) * g + h - V(x);
    };
    SeriesOperator op;
    op.A = {cplx(0.0), cplx(4.0), -4.0 * (1.0 + k2), 4.0 * k2};
    // exact quadratic fit of B from three points
    {
        const cplx x0(0.15), x1(0.35), x2(0.65);
        cplx f0 = Bval(x0), f1 = Bval(x1), f2 = Bval(x2);
        cplx d01 = (f1 - f0) / (x1 - x0), d12 = (f2 - f1) / (x2 - x1);
        cplx b2 = (d12 - d01) / (x2 - x0);
        cplx b1 = d01 - b2 * (x0 + x1);
        cplx b0 = f0 - x0 * (b1 + b2 * x0);
        op.B = {b0, b1, b2};
    }
    // exact linear fit of C from two points
    {
        const cplx x0(0.21), x1(0.55);
        cplx f0 = Cval(x0), f1 = Cval(x1);
        cplx c1 = (f1 - f0) / (x1 - x0);
        op.C = {f0 - c1 * x0, c1};
    }
    return op;
}

// ---------------------------------------------------------------------------
// Power-series recurrence (coefficients C_m of f = sum C_m s^m)

// generator with the recurrence's own accessory-parameter convention
inline ThreeTermRecurrence printed_power_recurrence(const DarbouxParams &p, cplx h_printed) {
    cplx xi = p.xi, eta = p.eta, mu = p.mu, nu = p.nu, k2 = p.k * p.k;
    ThreeTermRecurrence rec;
    rec.coeff = [=](int m) {
        double md = m;
        cplx R = (2.0 * md + 2.0) * (2.0 * md + 2.0 * xi + 3.0);
        cplx e1 = 2.0 * md + eta + xi + 2.0;
        cplx e2 = 2.0 * md + mu + xi + 2.0;
        cplx S = h_printed - e1 * e1 - k2 * e2 * e2 + (k2 + 1.0) * (xi + 1.0) * (xi + 1.0);
        cplx P = k2 * (2.0 * md + xi + eta + mu + nu + 2.0) * (2.0 * md + xi + eta + mu - nu + 1.0);
        return RecTriple{R, S, P};
    };
    rec.limits = RecTriple{cplx(1.0), -(1.0 + k2), k2};  // / (4 m^2)
    return rec;
}

// offset between the printed convention and the equation's h:
// h_printed = h_ode - power_h_offset(p)
inline cplx power_h_offset(const DarbouxParams &p) {
    SeriesOperator op = derive_series_operator(p, cplx(0.0));
    cplx S_derived0 = op.triple(0).S;
    cplx S_printed0 = printed_power_recurrence(p, cplx(0.0)).coeff(0).S;
    return S_printed0 - S_derived0;
}

// generator taking the equation's h
inline ThreeTermRecurrence power_series_recurrence(const DarbouxParams &p, cplx h) {
    return printed_power_recurrence(p, h - power_h_offset(p));
}

// ---------------------------------------------------------------------------
// Hypergeometric-term recurrence (coefficients X_m).
//
// The m-th basis term is
//   phi_m = G((w_pmpp+2m+3)/2) G((w_pmpm+2m+2)/2) / G(w_p0p0+2m+3)
//           * sn^{2m} 2F1((w_pppp+4)/2+m, (w_pppm+3)/2+m; w_p0p0+2m+3; sn^2)
// and K_m X_{m-1} + L_m X_m + M_m X_{m+1} = 0.

inline Gauss2F1Params hyp_term_params(const DarbouxParams &p, int m) {
    return {0.5 * (w_pppp(p) + 4.0) + double(m), 0.5 * (w_pppm(p) + 3.0) + double(m),
            w_p0p0(p) + 2.0 * double(m) + 3.0};
}

// Gamma-prefactor ratio phi-pre(m+1)/phi-pre(m), in closed form
inline cplx hyp_prefactor_ratio(const DarbouxParams &p, int m) {
    cplx w = w_p0p0(p);
    double md = m;
    return (0.5 * (w_pmpp(p) + 2.0 * md + 3.0)) * (0.5 * (w_pmpm(p) + 2.0 * md + 2.0)) /
           ((w + 2.0 * md + 3.0) * (w + 2.0 * md + 4.0));
}

inline scaled_cplx hyp_prefactor_scaled(const DarbouxParams &p, int m) {
    cplx g1 = 0.5 * (w_pmpp(p) + 2.0 * double(m) + 3.0);
    cplx g2 = 0.5 * (w_pmpm(p) + 2.0 * double(m) + 2.0);
    cplx g3 = w_p0p0(p) + 2.0 * double(m) + 3.0;
    return gamma_scaled(g1) * gamma_scaled(g2) / gamma_scaled(g3);
}

namespace detail {

inline void check_hyp_denominator(cplx v, const char *name, int m) {
    if (std::abs(v) < 1e-12) throw vanishing_factor_error(name, m);
}

}  // namespace detail

inline ThreeTermRecurrence printed_hyp_recurrence(const DarbouxParams &p, cplx h_printed) {
    const cplx xi = p.xi, eta = p.eta, mu = p.mu, nu = p.nu, k2 = p.k * p.k;
    const cplx Wpppp = w_pppp(p), Wpppm = w_pppm(p), Wpmpp = w_pmpp(p), Wpmpm = w_pmpm(p),
               W = w_p0p0(p);
    ThreeTermRecurrence rec;
    rec.coeff = [=](int m) {
        double md = m;
        // K_m (multiplies X_{m-1}); unused at m = 0
        cplx K = 0.0;
        if (m >= 1) {
            cplx num = (Wpppp + 2.0 * md + 2.0) * (Wpppm + 2.0 * md + 1.0) *
                       (2.0 * mu + 2.0 * md + 1.0);
            if (m == 1) {
                // the numerator factor (w+m+1) cancels the denominator (w+2m)
                detail::check_hyp_denominator(W + 3.0, "xi+mu+3", m);
                K = num / (2.0 * (W + 3.0));
            } else {
                detail::check_hyp_denominator(W + 2.0 * md + 1.0, "xi+mu+2m+1", m);
                detail::check_hyp_denominator(W + 2.0 * md, "xi+mu+2m", m);
                K = num * (W + md + 1.0) / (2.0 * (W + 2.0 * md + 1.0) * (W + 2.0 * md));
            }
        }
        // L_m (multiplies X_m)
        detail::check_hyp_denominator(W + 2.0 * md + 3.0, "xi+mu+2m+3", m);
        cplx L = -(2.0 * mu + 3.0) * (Wpppp + 2.0 * md + 4.0) * (Wpppm + 2.0 * md + 3.0) /
                     (2.0 * (W + 2.0 * md + 3.0)) +
                 2.0 * (2.0 * mu + 3.0) * md + h_printed - xi * (xi + 1.0) * k2 +
                 (xi + 1.0) * (1.0 - k2) + 2.0 * (mu + 1.0) * (xi + 1.0) * (1.0 - k2) -
                 4.0 * k2 * md * (W + md + 2.0) - nu * (nu + 1.0) +
                 (mu + 1.0) * (mu + 1.0) * (1.0 - k2) + 2.0 * (mu + 1.0) * (eta + 1.0) + mu +
                 eta + 2.0;
        if (m >= 1) {
            detail::check_hyp_denominator(W + 2.0 * md + 1.0, "xi+mu+2m+1", m);
            cplx bracket = ((Wpppp + 2.0 * md + 4.0) * (Wpmpp + 2.0 * md + 3.0) +
                            (Wpppm + 2.0 * md + 3.0) * (Wpmpm + 2.0 * md + 2.0)) /
                               (2.0 * (W + 2.0 * md + 3.0) * (W + 2.0 * md + 1.0)) -
                           2.0 / (W + 2.0 * md + 1.0);
            L += bracket * (2.0 * xi + 2.0 * md + 1.0) * md;
        }
        // M_m (multiplies X_{m+1})
        detail::check_hyp_denominator(W + 2.0 * md + 4.0, "xi+mu+2m+4", m);
        cplx M = (md + 1.0) * (2.0 * xi + 2.0 * md + 3.0) * (Wpmpp + 2.0 * md + 3.0) *
                 (Wpmpm + 2.0 * md + 2.0) /
                 (2.0 * (W + 2.0 * md + 4.0) * (W + 2.0 * md + 3.0));
        return RecTriple{M, L, K};
    };
    rec.limits = RecTriple{cplx(1.0), 2.0 * (1.0 - 2.0 * k2), cplx(1.0)};  // / m^2
    return rec;
}

// Taylor coefficients of s^m 2F1(a_m, b_m; c_m; s) through order `ord`
inline std::vector<cplx> hyp_term_taylor(const DarbouxParams &p, int m, int ord) {
    std::vector<cplx> out(ord + 1, cplx(0.0));
    if (m > ord) return out;
    auto g = hyp_term_params(p, m);
    cplx term = 1.0;
    for (int j = 0; m + j <= ord; ++j) {
        out[m + j] = term;
        term *= (g.a + double(j)) * (g.b + double(j)) / ((g.c + double(j)) * double(j + 1));
    }
    return out;
}

// Independent derivation of the (Gamma-free) hypergeometric-term recurrence:
// the transported operator applied to the m-th basis term must lie in the
// span of terms m-1, m, m+1.  Returns the three connection coefficients and
// the first neglected-order residual.
struct HypDerivedTriple {
    cplx down, diag, up;  // T[phi~_m] = down phi~_{m-1} + diag phi~_m + up phi~_{m+1}
    double span_residual;
};

inline HypDerivedTriple derive_hyp_triple(const DarbouxParams &p, cplx h, int m) {
    // extended precision internally: the triangular extraction cancels several
    // digits at large m
    using lcplx = std::complex<long double>;
    auto up = [](cplx z) { return lcplx(z.real(), z.imag()); };
    auto down_c = [](lcplx z) { return cplx(double(z.real()), double(z.imag())); };

    SeriesOperator op = derive_series_operator(p, h);
    const int ord = m + 3;  // psi[j] needs Taylor data through j+1
    auto taylor = [&](int mm) {
        std::vector<lcplx> out(ord + 1, lcplx(0.0L));
        if (mm > ord) return out;
        auto g = hyp_term_params(p, mm);
        lcplx a = up(g.a), b = up(g.b), c = up(g.c), term = 1.0L;
        for (int j = 0; mm + j <= ord; ++j) {
            out[mm + j] = term;
            term *= (a + lcplx(double(j))) * (b + lcplx(double(j))) /
                    ((c + lcplx(double(j))) * lcplx(double(j + 1)));
        }
        return out;
    };
    auto apply = [&](const std::vector<lcplx> &f) {
        std::array<lcplx, 4> A{up(op.A[0]), up(op.A[1]), up(op.A[2]), up(op.A[3])};
        std::array<lcplx, 3> B{up(op.B[0]), up(op.B[1]), up(op.B[2])};
        std::array<lcplx, 2> C{up(op.C[0]), up(op.C[1])};
        std::size_t n = f.size();
        std::vector<lcplx> out(n, lcplx(0.0L));
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < 4; ++i)
                if (j >= 2 && j - 2 + i < n)
                    out[j - 2 + i] += A[i] * lcplx(double(j)) * lcplx(double(j - 1)) * f[j];
            for (std::size_t i = 0; i < 3; ++i)
                if (j >= 1 && j - 1 + i < n) out[j - 1 + i] += B[i] * lcplx(double(j)) * f[j];
            for (std::size_t i = 0; i < 2; ++i)
                if (j + i < n) out[j + i] += C[i] * f[j];
        }
        return out;
    };
    auto psi = apply(taylor(m));
    auto lo = (m >= 1) ? taylor(m - 1) : std::vector<lcplx>(ord + 1, lcplx(0.0L));
    auto mid = taylor(m);
    auto hi = taylor(m + 1);
    lcplx xd = (m >= 1) ? psi[m - 1] / lo[m - 1] : lcplx(0.0L);
    lcplx xm = psi[m] - xd * lo[m];
    lcplx xu = psi[m + 1] - xd * lo[m + 1] - xm * mid[m + 1];
    lcplx rem = psi[m + 2] - xd * lo[m + 2] - xm * mid[m + 2] - xu * hi[m + 2];
    HypDerivedTriple t{};
    t.down = down_c(xd);
    t.diag = down_c(xm);
    t.up = down_c(xu);
    double scale = std::abs(t.down) + std::abs(t.diag) + std::abs(t.up) + 1.0;
    t.span_residual = double(std::abs(rem)) / scale;
    return t;
}

// h_printed = h_ode - hyp_h_offset(p); the diagonal coefficient is invariant
// under per-term rescalings, so the offset is read off at m = 0
inline cplx hyp_h_offset(const DarbouxParams &p) {
    cplx L0_printed = printed_hyp_recurrence(p, cplx(0.0)).coeff(0).S;
    cplx L0_derived = derive_hyp_triple(p, cplx(0.0), 0).diag;
    return L0_printed - L0_derived;
}

inline ThreeTermRecurrence hypergeom_series_recurrence(const DarbouxParams &p, cplx h) {
    return printed_hyp_recurrence(p, h - hyp_h_offset(p));
}

// ---------------------------------------------------------------------------
// Termination classification

enum class TerminationCase { SumEven, SumOdd, HalfInteger };

inline const char *to_string(TerminationCase c) {
    switch (c) {
        case TerminationCase::SumEven: return "SumEven";
        case TerminationCase::SumOdd: return "SumOdd";
        default: return "HalfInteger";
    }
}

struct TerminationEntry {
    TerminationCase kind;
    int q;
};

struct TerminationReport {
    std::vector<TerminationEntry> cases;  // all cases that fire
    bool none() const { return cases.empty(); }
};

inline TerminationReport termination_check(const DarbouxParams &p, double tol = 1e-10) {
    TerminationReport rep;
    long long n;
    cplx t = -(w_pppp(p) + 4.0) / 2.0;  // SumEven: w_pppp = -2q-4
    if (near_integer(t, tol, &n) && n >= 0)
        rep.cases.push_back({TerminationCase::SumEven, int(n)});
    t = -(w_pppm(p) + 3.0) / 2.0;  // SumOdd: w_pppm = -2q-3
    if (near_integer(t, tol, &n) && n >= 0)
        rep.cases.push_back({TerminationCase::SumOdd, int(n)});
    t = -p.mu - 1.5;  // HalfInteger: mu = -(2q+3)/2
    if (near_integer(t, tol, &n) && n >= 0)
        rep.cases.push_back({TerminationCase::HalfInteger, int(n)});
    return rep;
}

// ---------------------------------------------------------------------------
// Accessory-parameter spectra

struct spectra_mismatch_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CaseSpectrum {
    TerminationEntry entry;
    std::vector<cplx> h;            // equation convention, sorted
    std::vector<double> residuals;  // |finite continued fraction| at each h
};

inline std::vector<CaseSpectrum> accessory_spectra(const DarbouxParams &p,
                                                   const TerminationReport &report) {
    if (report.none())
        throw contract_error("accessory_spectrum: no termination case fires for these parameters");
    std::vector<CaseSpectrum> out;
    for (const auto &entry : report.cases) {
        CaseSpectrum cs;
        cs.entry = entry;
        auto hyp_family = [&](cplx h) { return hypergeom_series_recurrence(p, h); };
        cs.h = tridiagonal_spectrum(hyp_family, entry.q);
        if (entry.kind != TerminationCase::HalfInteger) {
            auto pow_family = [&](cplx h) { return power_series_recurrence(p, h); };
            auto hp = tridiagonal_spectrum(pow_family, entry.q);
            for (std::size_t i = 0; i < cs.h.size(); ++i) {
                if (std::abs(cs.h[i] - hp[i]) > 1e-8 * (1.0 + std::abs(cs.h[i])))
                    throw spectra_mismatch_error(
                        "accessory_spectrum: power-series and hypergeometric spectra disagree");
            }
        }
        for (cplx h : cs.h)
            cs.residuals.push_back(
                std::abs(continued_fraction_finite(hypergeom_series_recurrence(p, h), entry.q)));
        out.push_back(std::move(cs));
    }
    return out;
}

// convenience: the first fired case's spectrum
inline std::vector<cplx> accessory_spectrum(const DarbouxParams &p) {
    auto rep = termination_check(p);
    return accessory_spectra(p, rep).front().h;
}

// ---------------------------------------------------------------------------
// Convergence domain

struct ConvergenceDomain {
    double bound_minimal;   // max(|k+ik'|^-2, |k-ik'|^-2): the larger domain
    double bound_dominant;  // min(...): the smaller domain
    bool minimal_applicable = false;
    bool bypass = false;  // terminating series: finite sums converge everywhere
    double applicable() const { return minimal_applicable ? bound_minimal : bound_dominant; }
};

// ratio coordinate |(1 - cn u)/(1 + cn u)| the domain bounds refer to
inline double ratio_coordinate(cplx u, cplx k) {
    auto j = jacobi_sn_cn_dn(u, k);
    return std::abs((1.0 - j.cn) / (1.0 + j.cn));
}

inline ConvergenceDomain convergence_domain(const DarbouxParams &p, cplx h) {
    ConvergenceDomain d{};
    Modulus m = Modulus::from_k(p.k);
    double b1 = 1.0 / abs2(p.k + iunit * m.k_prime);
    double b2 = 1.0 / abs2(p.k - iunit * m.k_prime);
    d.bound_minimal = std::max(b1, b2);
    d.bound_dominant = std::min(b1, b2);
    auto rep = termination_check(p);
    if (!rep.none()) {
        for (const auto &e : rep.cases) {
            double resid = std::abs(
                continued_fraction_finite(hypergeom_series_recurrence(p, h), e.q));
            if (resid < 1e-8) {
                d.bypass = true;
                d.minimal_applicable = true;
                return d;
            }
        }
    }
    if (d.bound_minimal - d.bound_dominant < 1e-12 * d.bound_minimal) {
        d.minimal_applicable = false;  // bounds coincide (real modulus)
        return d;
    }
    try {
        auto cf = continued_fraction_infinite(hypergeom_series_recurrence(p, h), 1e-14, 20000);
        d.minimal_applicable = cf.converged && std::abs(cf.value) < 1e-10;
    } catch (const non_convergence_error &) {
        d.minimal_applicable = false;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Series container and evaluation

enum class SeriesKind { PowerSeries, HypergeomSeries };

struct DarbouxSeries {
    SeriesKind kind;
    cplx exp_sn, exp_cn, exp_dn;  // prefactor exponents xi+1, eta+1, mu+1
    std::vector<cplx> coeffs;     // C_m or X_m, index 0 normalized to 1
    cplx h;                       // equation convention
    std::optional<int> terminated;
};

struct EvalResult {
    cplx value{};
    double tail_estimate = 0.0;
    double ratio_coord = 0.0;
    ConvergenceDomain domain{};
    bool near_pole = false;
};

// term value Gamma-prefactor(m) X_m s^m F_m(s) in scaled form
inline scaled_cplx hyp_term_value(const DarbouxParams &p, int m, cplx s, scaled_cplx Xm) {
    auto g = hyp_term_params(p, m);
    return hyp_prefactor_scaled(p, m) * Xm * pow_scaled(s, m) * hyp2f1_scaled(g, s);
}

inline EvalResult eval_local_solution(const DarbouxParams &p, cplx h, SeriesKind kind, cplx u,
                                      int N) {
    EvalResult out;
    auto j = jacobi_sn_cn_dn(u, p.k);
    out.near_pole = j.near_pole;
    cplx s = j.sn * j.sn;
    out.ratio_coord = std::abs((1.0 - j.cn) / (1.0 + j.cn));
    out.domain = convergence_domain(p, h);

    auto rep = termination_check(p);
    std::optional<int> q_term;
    if (!rep.none()) {
        for (const auto &e : rep.cases) {
            double resid =
                std::abs(continued_fraction_finite(hypergeom_series_recurrence(p, h), e.q));
            if (resid < 1e-8) q_term = e.q;
        }
    }
    if (!q_term) {
        if (kind == SeriesKind::HypergeomSeries && out.ratio_coord >= out.domain.applicable())
            throw domain_refusal("eval_local_solution: point outside the convergence domain",
                                 out.ratio_coord, out.domain.bound_minimal,
                                 out.domain.bound_dominant);
        // the power series in s = sn^2 u converges up to the nearest finite
        // singularity of the reduced equation, s in {1, 1/k^2}
        double radius = std::min(1.0, 1.0 / abs2(p.k));
        if (kind == SeriesKind::PowerSeries && std::abs(s) >= radius)
            throw domain_refusal("eval_local_solution: |sn^2 u| outside the power-series radius",
                                 std::abs(s), radius, radius);
    }

    // relative tail cutoff: stop once two consecutive terms drop below it
    constexpr double tail_cutoff = 1e-14;
    cplx pref = darboux_prefactor(p, j);
    if (kind == SeriesKind::PowerSeries) {
        int n = q_term ? *q_term : N;
        auto C = forward_run(power_series_recurrence(p, h), std::max(n, 1));
        cplx acc = 0.0, spow = 1.0, last = 0.0, prev_term = 0.0;
        int small_run = 0;
        for (int m = 0; m <= n; ++m) {
            cplx t = C[m] * spow;
            acc += t;
            prev_term = last;
            last = t;
            spow *= s;
            small_run = (std::abs(t) < tail_cutoff * std::abs(acc)) ? small_run + 1 : 0;
            if (!q_term && small_run >= 2 && m > 4) break;
        }
        out.value = pref * acc;
        if (!q_term && std::abs(prev_term) > 0.0) {
            double rho = std::abs(last / prev_term);
            out.tail_estimate =
                (rho < 1.0) ? std::abs(pref) * std::abs(last) * rho / (1.0 - rho) : 1e300;
        }
        return out;
    }

    // hypergeometric-term expansion
    int n = q_term ? *q_term : N;
    std::vector<scaled_cplx> X;
    auto rec = hypergeom_series_recurrence(p, h);
    bool minimal = out.domain.minimal_applicable && !q_term;
    if (minimal)
        X = backward_run_scaled(rec, n, std::max(60, n / 4));
    else
        X = forward_run_scaled(rec, n);
    cplx acc = 0.0;
    double last = 0.0, prev = 0.0;
    int small_run = 0;
    for (int m = 0; m <= n; ++m) {
        scaled_cplx t = hyp_term_value(p, m, s, X[m]);
        acc += t.value();
        prev = last;
        last = std::abs(t.mant) * std::pow(10.0, t.log10_scale);
        small_run = (last < tail_cutoff * std::abs(acc)) ? small_run + 1 : 0;
        if (!q_term && small_run >= 2 && m > 4) break;
    }
    out.value = pref * acc;
    if (!q_term && prev > 0.0) {
        double rho = last / prev;
        out.tail_estimate = (rho < 1.0) ? std::abs(pref) * last * rho / (1.0 - rho) : 1e300;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Darboux polynomial: terminating power series at a spectrum point

inline DarbouxSeries darboux_polynomial(const DarbouxParams &p, cplx h_j, double tol = 1e-8) {
    auto rep = termination_check(p);
    std::optional<TerminationEntry> entry;
    for (const auto &e : rep.cases)
        if (e.kind != TerminationCase::HalfInteger) entry = e;
    if (!entry)
        throw contract_error(
            "darboux_polynomial: parameters lack a polynomial termination case");
    int q = entry->q;
    double resid = std::abs(continued_fraction_finite(hypergeom_series_recurrence(p, h_j), q));
    if (resid > tol)
        throw contract_error("darboux_polynomial: h is not in the accessory spectrum");
    auto C = forward_run(power_series_recurrence(p, h_j), q + 1);
    double scale = 0.0;
    for (cplx c : C) scale = std::max(scale, std::abs(c));
    if (std::abs(C[q + 1]) > tol * scale)
        throw contract_error("darboux_polynomial: series does not terminate at this h");
    DarbouxSeries ser;
    ser.kind = SeriesKind::PowerSeries;
    ser.exp_sn = p.xi + 1.0;
    ser.exp_cn = p.eta + 1.0;
    ser.exp_dn = p.mu + 1.0;
    ser.coeffs.assign(C.begin(), C.begin() + q + 1);
    ser.h = h_j;
    ser.terminated = q;
    return ser;
}

inline cplx eval_series(const DarbouxParams &p, const DarbouxSeries &ser, cplx u) {
    auto j = jacobi_sn_cn_dn(u, p.k);
    cplx s = j.sn * j.sn;
    cplx pref = std::pow(j.sn, ser.exp_sn) * std::pow(j.cn, ser.exp_cn) * std::pow(j.dn, ser.exp_dn);
    if (ser.kind == SeriesKind::PowerSeries) {
        cplx acc = 0.0, spow = 1.0;
        for (cplx c : ser.coeffs) {
            acc += c * spow;
            spow *= s;
        }
        return pref * acc;
    }
    cplx acc = 0.0;
    for (std::size_t m = 0; m < ser.coeffs.size(); ++m)
        acc += hyp_term_value(p, int(m), s, scaled_cplx::from(ser.coeffs[m])).value();
    return pref * acc;
}

// ---------------------------------------------------------------------------
// Darboux function: minimal non-terminating solution selected by the
// vanishing of the infinite continued fraction

struct secant_failure : std::runtime_error {
    std::vector<double> residual_trace;
    explicit secant_failure(const std::string &msg, std::vector<double> tr)
        : std::runtime_error(msg), residual_trace(std::move(tr)) {}
};

struct DarbouxFunction {
    cplx h_hat;
    DarbouxSeries series;
    double fraction_residual;
    PerronReport perron;
};

inline DarbouxFunction darboux_function(const DarbouxParams &p, cplx h_seed, int n_coeffs = 200) {
    // the minimal/dominant dichotomy needs strictly separated root moduli
    auto roots = characteristic_roots(hypergeom_series_recurrence(p, h_seed));
    double r1 = std::abs(roots.t1), r2 = std::abs(roots.t2);
    if (r2 - r1 <= 1e-9 * (r1 + r2))
        throw contract_error(
            "darboux_function: characteristic roots have equal modulus (real modulus k); the "
            "minimal solution is not isolated by the continued fraction");
    auto g = [&](cplx h) -> cplx {
        auto cf = continued_fraction_infinite(hypergeom_series_recurrence(p, h), 1e-14, 50000);
        return cf.value;
    };
    std::vector<double> trace;
    cplx h0 = h_seed, h1 = h_seed * 1.001 + cplx(1e-3, 1e-4);
    cplx f0 = g(h0), f1 = g(h1);
    trace.push_back(std::abs(f0));
    trace.push_back(std::abs(f1));
    for (int it = 0; it < 200; ++it) {
        if (std::abs(f1) < 1e-12) break;
        cplx denom = f1 - f0;
        if (std::abs(denom) < 1e-300)
            throw secant_failure("darboux_function: secant stalled", trace);
        cplx h2 = h1 - f1 * (h1 - h0) / denom;
        h0 = h1;
        f0 = f1;
        h1 = h2;
        f1 = g(h1);
        trace.push_back(std::abs(f1));
        if (it == 199 && std::abs(f1) >= 1e-12)
            throw secant_failure("darboux_function: no convergence in 200 secant steps", trace);
    }
    DarbouxFunction out;
    out.h_hat = h1;
    out.fraction_residual = std::abs(f1);
    auto rec = hypergeom_series_recurrence(p, out.h_hat);
    auto Xs = backward_run(rec, n_coeffs, std::max(80, n_coeffs / 3));
    out.perron = perron_classify(rec, Xs);
    if (out.perron.cls != PerronClass::Minimal)
        throw non_convergence_error("darboux_function: backward coefficients not minimal",
                                    Xs[1], Xs[2]);
    DarbouxSeries ser;
    ser.kind = SeriesKind::HypergeomSeries;
    ser.exp_sn = p.xi + 1.0;
    ser.exp_cn = p.eta + 1.0;
    ser.exp_dn = p.mu + 1.0;
    ser.coeffs = std::move(Xs);
    ser.h = out.h_hat;
    out.series = std::move(ser);
    return out;
}

// ---------------------------------------------------------------------------
// Ratio diagnostics

struct RatioDiagnosticsRow {
    int m;
    double coeff_ratio;        // |X_{m+1}/X_m|
    double perron_prediction;  // modulus of the applicable characteristic root
    double term_ratio;         // |phi_{m+1}(u)/phi_m(u)|
    double watson_prediction;  // |(1-cn u)/(1+cn u)|
};

inline std::vector<RatioDiagnosticsRow> ratio_diagnostics(const DarbouxParams &p, cplx h, cplx u,
                                                          int m_lo, int m_hi) {
    if (!termination_check(p).none()) {
        double r = std::abs(
            continued_fraction_finite(hypergeom_series_recurrence(p, h),
                                      termination_check(p).cases.front().q));
        if (r < 1e-8)
            throw contract_error("ratio_diagnostics: series terminates at this h");
    }
    auto rec = hypergeom_series_recurrence(p, h);
    auto roots = characteristic_roots(rec);
    auto dom = convergence_domain(p, h);
    bool minimal = dom.minimal_applicable;
    auto X = minimal ? backward_run_scaled(rec, m_hi + 1, std::max(80, m_hi / 3))
                     : forward_run_scaled(rec, m_hi + 1);
    auto j = jacobi_sn_cn_dn(u, p.k);
    cplx s = j.sn * j.sn;
    double watson = std::abs((1.0 - j.cn) / (1.0 + j.cn));
    double perron = minimal ? std::abs(roots.t1) : std::abs(roots.t2);
    std::vector<RatioDiagnosticsRow> rows;
    scaled_cplx Fm = hyp2f1_scaled(hyp_term_params(p, m_lo), s);
    for (int m = m_lo; m <= m_hi; ++m) {
        scaled_cplx Fm1 = hyp2f1_scaled(hyp_term_params(p, m + 1), s);
        RatioDiagnosticsRow row;
        row.m = m;
        row.coeff_ratio = std::pow(10.0, X[m + 1].log10_abs() - X[m].log10_abs());
        row.perron_prediction = perron;
        row.term_ratio =
            std::abs(hyp_prefactor_ratio(p, m)) * std::abs(s) *
            std::abs(Fm1.mant / Fm.mant) * std::pow(10.0, Fm1.log10_scale - Fm.log10_scale);
        row.watson_prediction = watson;
        rows.push_back(row);
        Fm = Fm1;
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Sign-flip parameter symmetries: xi -> -xi-1, eta -> -eta-1, mu -> -mu-1
// independently (each fixes the potential coefficients t(t+1))

struct SignFlipVariant {
    int mask;  // bit 0: xi, bit 1: eta, bit 2: mu
    std::optional<DarbouxParams> params;  // empty if the flip lands on excluded xi
};

inline std::vector<SignFlipVariant> sign_flip_variants(const DarbouxParams &p) {
    std::vector<SignFlipVariant> out;
    for (int mask = 0; mask < 8; ++mask) {
        SignFlipVariant v{mask, std::nullopt};
        cplx xi = (mask & 1) ? -p.xi - 1.0 : p.xi;
        cplx eta = (mask & 2) ? -p.eta - 1.0 : p.eta;
        cplx mu = (mask & 4) ? -p.mu - 1.0 : p.mu;
        try {
            v.params = DarbouxParams::make(xi, eta, mu, p.nu, p.k);
        } catch (const contract_error &) {
        }
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scan of the four special-solution conditions and their realizability
// through the sign-flip variants

enum class SpecialCondition {
    EvenTotalSum,      // xi+eta+mu+nu in 2Z \ {-2}
    OddMixedSum,       // one of the one-minus sums in (2Z+1) \ {-1}
    EvenTwoMinusSum,   // one of the two-minus sums in 2Z \ {0}
    HalfOddParameter,  // one of xi,eta,mu,nu in (2Z+1)/2 \ {-1/2}
};

inline const char *to_string(SpecialCondition c) {
    switch (c) {
        case SpecialCondition::EvenTotalSum: return "even_total_sum";
        case SpecialCondition::OddMixedSum: return "odd_mixed_sum";
        case SpecialCondition::EvenTwoMinusSum: return "even_two_minus_sum";
        default: return "half_odd_parameter";
    }
}

struct ConditionHit {
    SpecialCondition cond;
    std::string witness;
};

struct Terminate1Report {
    std::vector<ConditionHit> conditions;
    struct VariantResult {
        int mask;
        TerminationReport termination;
        std::vector<CaseSpectrum> spectra;
        std::string note;
    };
    std::vector<VariantResult> fired_variants;
    std::vector<std::string> notes;
    bool any_condition() const { return !conditions.empty(); }
};

inline std::vector<ConditionHit> special_conditions_scalar(const DarbouxParams &p,
                                                           double tol = 1e-10) {
    std::vector<ConditionHit> hits;
    long long n;
    auto near_even = [&](cplx v, long long *out_n) {
        if (!near_integer(v, tol, out_n)) return false;
        return (*out_n % 2) == 0;
    };
    auto near_odd = [&](cplx v, long long *out_n) {
        if (!near_integer(v, tol, out_n)) return false;
        return (*out_n % 2) != 0;
    };
    if (near_even(w_pppp(p), &n) && n != -2)
        hits.push_back({SpecialCondition::EvenTotalSum, "xi+eta+mu+nu = " + std::to_string(n)});
    struct Named {
        const char *name;
        cplx v;
    };
    for (auto [name, v] : {Named{"xi+eta+mu-nu", w_pppm(p)}, Named{"xi+eta-mu+nu", w_ppmp(p)},
                           Named{"xi-eta+mu+nu", w_pmpp(p)}, Named{"-xi+eta+mu+nu", w_mppp(p)}})
        if (near_odd(v, &n) && n != -1)
            hits.push_back({SpecialCondition::OddMixedSum,
                            std::string(name) + " = " + std::to_string(n)});
    for (auto [name, v] : {Named{"xi+eta-mu-nu", w_ppmm(p)}, Named{"xi-eta-mu+nu", w_pmmp(p)},
                           Named{"xi-eta+mu-nu", w_pmpm(p)}})
        if (near_even(v, &n) && n != 0)
            hits.push_back({SpecialCondition::EvenTwoMinusSum,
                            std::string(name) + " = " + std::to_string(n)});
    for (auto [name, v] :
         {Named{"xi", p.xi}, Named{"eta", p.eta}, Named{"mu", p.mu}, Named{"nu", p.nu}}) {
        cplx t = v - 0.5;  // half-odd iff v - 1/2 integer
        if (near_integer(t, tol, &n) && !(n == -1))
            hits.push_back({SpecialCondition::HalfOddParameter,
                            std::string(name) + " = " + std::to_string(n) + " + 1/2"});
    }
    return hits;
}

inline Terminate1Report terminate1_scan(const DarbouxParams &p) {
    Terminate1Report rep;
    rep.conditions = special_conditions_scalar(p);
    for (const auto &v : sign_flip_variants(p)) {
        if (!v.params) {
            rep.notes.push_back("variant mask " + std::to_string(v.mask) +
                                " unusable (excluded xi)");
            continue;
        }
        auto term = termination_check(*v.params);
        if (term.none()) continue;
        Terminate1Report::VariantResult vr;
        vr.mask = v.mask;
        vr.termination = term;
        try {
            vr.spectra = accessory_spectra(*v.params, term);
        } catch (const std::exception &e) {
            vr.note = std::string("spectrum unavailable: ") + e.what();
        }
        rep.fired_variants.push_back(std::move(vr));
    }
    if (!rep.conditions.empty() && rep.fired_variants.empty())
        rep.notes.push_back(
            "a special-solution condition holds but no sign-flip variant terminates; realizing "
            "it needs the modular/translation symmetries outside this library's scope");
    return rep;
}

}  // namespace darboux

#endif
