#ifndef DARBOUX_RECURRENCE_HPP
#define DARBOUX_RECURRENCE_HPP

// Generic three-term recurrence engine
//     R_r C_{r+1} + S_r C_r + P_r C_{r-1} = 0,   C_{-1} = 0,
// with Poincare-Perron characteristic roots, finite and infinite continued
// fractions, minimal/dominant classification, and the accessory-parameter
// eigenproblem for recurrences whose diagonal is affine in a parameter h.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "darboux/numeric.hpp"

namespace darboux {

struct RecTriple {
    cplx R, S, P;
};

struct ThreeTermRecurrence {
    std::function<RecTriple(int)> coeff;
    // limits of (R_r, S_r, P_r) after a declared normalization (e.g. / r^2)
    std::optional<RecTriple> limits;
};

struct CharacteristicRoots {
    cplx t1, t2;  // |t1| <= |t2|
};

// forward run C_0..C_N with C_{-1} = 0
inline std::vector<cplx> forward_run(const ThreeTermRecurrence &rec, int N, cplx C0 = 1.0) {
    std::vector<cplx> C(N + 1);
    C[0] = C0;
    cplx Cm1 = 0.0;
    for (int r = 0; r < N; ++r) {
        RecTriple t = rec.coeff(r);
        double scale = std::abs(t.S) + std::abs(t.P) + 1.0;
        if (std::abs(t.R) < 1e-300 * scale)
            throw vanishing_factor_error("R_r", r);
        cplx next = -(t.S * C[r] + t.P * Cm1) / t.R;
        Cm1 = C[r];
        C[r + 1] = next;
    }
    return C;
}

// backward (Miller) run: solves the relations for r in [1, N_start] downward,
// normalized to C_0 = 1. Realizes the minimal solution when |t1| < |t2|.
inline std::vector<cplx> backward_run(const ThreeTermRecurrence &rec, int N, int extra = 40) {
    int hi = N + extra;
    std::vector<cplx> C(hi + 2, cplx(0.0));
    C[hi + 1] = 0.0;
    C[hi] = 1.0;
    for (int r = hi; r >= 1; --r) {
        RecTriple t = rec.coeff(r);
        if (std::abs(t.P) < 1e-300 * (std::abs(t.R) + std::abs(t.S) + 1.0))
            throw vanishing_factor_error("P_r", r);
        C[r - 1] = -(t.S * C[r] + t.R * C[r + 1]) / t.P;
        // keep magnitudes in range
        double m = std::abs(C[r - 1]);
        if (m > 1e250)
            for (int j = r - 1; j <= hi + 1; ++j) C[j] *= 1e-250;
    }
    cplx c0 = C[0];
    if (std::abs(c0) == 0.0)
        throw non_convergence_error("backward_run: C_0 vanished", C[1], C[2]);
    std::vector<cplx> out(N + 1);
    for (int r = 0; r <= N; ++r) out[r] = C[r] / c0;
    return out;
}

// forward run in scaled representation (for trajectories whose magnitudes
// leave double range)
inline std::vector<scaled_cplx> forward_run_scaled(const ThreeTermRecurrence &rec, int N,
                                                   cplx C0 = 1.0) {
    std::vector<scaled_cplx> C(N + 1);
    C[0] = scaled_cplx::from(C0);
    scaled_cplx prev{cplx(0.0), 0.0};
    for (int r = 0; r < N; ++r) {
        RecTriple t = rec.coeff(r);
        double scale = std::abs(t.S) + std::abs(t.P) + 1.0;
        if (std::abs(t.R) < 1e-300 * scale) throw vanishing_factor_error("R_r", r);
        cplx pm = prev.mant * std::pow(10.0, prev.log10_scale - C[r].log10_scale);
        scaled_cplx next{-(t.S * C[r].mant + t.P * pm) / t.R, C[r].log10_scale};
        next.normalize();
        prev = C[r];
        C[r + 1] = next;
    }
    return C;
}

inline std::vector<scaled_cplx> backward_run_scaled(const ThreeTermRecurrence &rec, int N,
                                                    int extra = 40) {
    int hi = N + extra;
    std::vector<scaled_cplx> C(hi + 2);
    C[hi + 1] = scaled_cplx{cplx(0.0), 0.0};
    C[hi] = scaled_cplx{cplx(1.0), 0.0};
    for (int r = hi; r >= 1; --r) {
        RecTriple t = rec.coeff(r);
        if (std::abs(t.P) < 1e-300 * (std::abs(t.R) + std::abs(t.S) + 1.0))
            throw vanishing_factor_error("P_r", r);
        cplx up = C[r + 1].mant * std::pow(10.0, C[r + 1].log10_scale - C[r].log10_scale);
        scaled_cplx next{-(t.S * C[r].mant + t.R * up) / t.P, C[r].log10_scale};
        next.normalize();
        C[r - 1] = next;
    }
    scaled_cplx c0 = C[0];
    if (std::abs(c0.mant) == 0.0)
        throw non_convergence_error("backward_run_scaled: C_0 vanished", C[1].mant, C[2].mant);
    std::vector<scaled_cplx> out(N + 1);
    for (int r = 0; r <= N; ++r) out[r] = C[r] / c0;
    return out;
}

inline CharacteristicRoots characteristic_roots(const ThreeTermRecurrence &rec) {
    if (!rec.limits) throw contract_error("characteristic_roots: no limit triple declared");
    cplx R = rec.limits->R, S = rec.limits->S, P = rec.limits->P;
    if (std::abs(R) < 1e-14 * (std::abs(S) + std::abs(P)))
        throw contract_error("characteristic_roots: degenerate (R limit vanishes)");
    cplx disc = std::sqrt(S * S - 4.0 * R * P);
    // pick the sign that avoids cancellation
    cplx u = (std::abs(S + disc) >= std::abs(S - disc)) ? (S + disc) : (S - disc);
    cplx ta, tb;
    if (std::abs(u) < 1e-300) {
        ta = tb = cplx(0.0);
    } else {
        ta = -u / (2.0 * R);
        tb = -2.0 * P / u;
    }
    CharacteristicRoots cr;
    if (std::abs(ta) < std::abs(tb) ||
        (std::abs(ta) == std::abs(tb) && std::arg(ta) <= std::arg(tb))) {
        cr.t1 = ta;
        cr.t2 = tb;
    } else {
        cr.t1 = tb;
        cr.t2 = ta;
    }
    return cr;
}

// finite continued fraction
//   S_0/R_0 - (P_1/R_1) / (S_1/R_1 - (P_2/R_2) / ( ... S_q/R_q))
// evaluated right-to-left exactly as displayed.
inline cplx continued_fraction_finite(const ThreeTermRecurrence &rec, int q) {
    auto tq = rec.coeff(q);
    if (std::abs(tq.R) == 0.0) throw vanishing_factor_error("R_q", q);
    cplx acc = tq.S / tq.R;
    for (int j = q - 1; j >= 0; --j) {
        auto tj1 = rec.coeff(j + 1);
        auto tj = rec.coeff(j);
        if (std::abs(tj.R) == 0.0) throw vanishing_factor_error("R_j", j);
        if (std::abs(acc) < 1e-300)
            throw non_convergence_error(
                "continued_fraction_finite: zero denominator at depth " + std::to_string(j), acc,
                acc);
        acc = tj.S / tj.R - (tj1.P / tj1.R) / acc;
    }
    return acc;
}

struct CFResult {
    cplx value{};
    bool converged = false;
    int depth = 0;
    std::string warning;
};

// infinite continued fraction by the modified Lentz method
inline CFResult continued_fraction_infinite(const ThreeTermRecurrence &rec,
                                            double rel_tol = 1e-14, int max_depth = 100000) {
    CFResult out;
    if (rec.limits) {
        auto roots = characteristic_roots(rec);
        double r1 = std::abs(roots.t1), r2 = std::abs(roots.t2);
        if (r2 - r1 <= 1e-9 * (r1 + r2))
            out.warning =
                "characteristic roots have equal modulus; convergence is not guaranteed";
    }
    const double tiny = 1e-30;
    auto t0 = rec.coeff(0);
    cplx f = t0.S / t0.R;
    if (std::abs(f) < tiny) f = tiny;
    cplx C = f, D = 0.0;
    cplx prev = f;
    for (int j = 1; j <= max_depth; ++j) {
        auto tj = rec.coeff(j);
        cplx a = -tj.P / tj.R;  // so that f = b0 + a1/(b1 + a2/(b2 + ...))
        cplx b = tj.S / tj.R;
        D = b + a * D;
        if (std::abs(D) < tiny) D = tiny;
        C = b + a / C;
        if (std::abs(C) < tiny) C = tiny;
        D = 1.0 / D;
        cplx delta = C * D;
        prev = f;
        f *= delta;
        out.depth = j;
        if (std::abs(delta - 1.0) < rel_tol) {
            out.converged = true;
            out.value = f;
            return out;
        }
    }
    out.value = f;
    out.converged = false;
    if (out.warning.empty()) out.warning = "depth cap reached";
    // keep last two convergents available to the caller
    throw non_convergence_error("continued_fraction_infinite: " + out.warning, f, prev);
}

enum class PerronClass { Minimal, Dominant, Unclassified };

struct PerronReport {
    PerronClass cls = PerronClass::Unclassified;
    double limit_estimate = 0.0;         // estimated lim |C_{r+1}/C_r|
    double distance_minimal = 0.0;       // relative distance to |t1|
    double distance_dominant = 0.0;      // relative distance to |t2|
};

// estimate lim |C_{r+1}/C_r| by Aitken acceleration on the trailing ratios
inline PerronReport perron_classify(const ThreeTermRecurrence &rec,
                                    const std::vector<cplx> &trajectory) {
    auto roots = characteristic_roots(rec);
    std::vector<cplx> ratios;
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
        if (std::abs(trajectory[i]) > 1e-280)
            ratios.push_back(trajectory[i + 1] / trajectory[i]);
    }
    if (ratios.size() < 8) throw contract_error("perron_classify: trajectory too short");
    std::size_t lo = ratios.size() > 64 ? ratios.size() - 64 : 0;
    cplx est = ratios.back();
    for (std::size_t i = lo; i + 2 < ratios.size(); ++i) {
        cplx d2 = ratios[i + 2] - 2.0 * ratios[i + 1] + ratios[i];
        if (std::abs(d2) > 1e-14 * std::abs(ratios[i + 2])) {
            cplx d1 = ratios[i + 2] - ratios[i + 1];
            est = ratios[i + 2] - d1 * d1 / d2;
        }
    }
    PerronReport rep;
    rep.limit_estimate = std::abs(est);
    double r1 = std::abs(roots.t1), r2 = std::abs(roots.t2);
    rep.distance_minimal = std::abs(rep.limit_estimate - r1) / (r1 > 0 ? r1 : 1.0);
    rep.distance_dominant = std::abs(rep.limit_estimate - r2) / (r2 > 0 ? r2 : 1.0);
    if (rep.distance_minimal <= 0.05 && rep.distance_minimal <= rep.distance_dominant)
        rep.cls = PerronClass::Minimal;
    else if (rep.distance_dominant <= 0.05)
        rep.cls = PerronClass::Dominant;
    return rep;
}

// Accessory-parameter spectrum: the q+1 roots in h of the finite continued
// fraction, for a family h -> recurrence whose S_m depends on h affinely with
// unit slope and whose R_m, P_m do not depend on h.
inline std::vector<cplx> tridiagonal_spectrum(
    const std::function<ThreeTermRecurrence(cplx)> &family, int q) {
    ThreeTermRecurrence r0 = family(cplx(0.0));
    ThreeTermRecurrence r1 = family(cplx(1.0));
    ThreeTermRecurrence ri = family(cplx(0.0, 1.0));
    for (int m = 0; m <= q; ++m) {
        RecTriple a = r0.coeff(m), b = r1.coeff(m), c = ri.coeff(m);
        double scale = std::abs(a.S) + 1.0;
        if (std::abs((b.S - a.S) - 1.0) > 1e-8 || std::abs((c.S - a.S) - iunit) > 1e-8)
            throw contract_error("tridiagonal_spectrum: diagonal not affine in h with unit slope");
        if (std::abs(b.R - a.R) > 1e-10 * (std::abs(a.R) + 1.0) ||
            std::abs(b.P - a.P) > 1e-10 * (std::abs(a.P) + 1.0))
            throw contract_error("tridiagonal_spectrum: off-diagonals depend on h");
        (void)scale;
    }
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(q + 1, q + 1);
    for (int m = 0; m <= q; ++m) {
        RecTriple t = r0.coeff(m);
        T(m, m) = t.S;
        if (m > 0) T(m, m - 1) = t.P;
        if (m < q) T(m, m + 1) = t.R;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(-T, false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("tridiagonal_spectrum: eigenvalue iteration failed");
    std::vector<cplx> h(q + 1);
    for (int i = 0; i <= q; ++i) h[i] = es.eigenvalues()(i);
    std::sort(h.begin(), h.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return h;
}

}  // namespace darboux

#endif
