#ifndef DARBOUX_ELLIPTIC_HPP
#define DARBOUX_ELLIPTIC_HPP

// Complex Jacobi elliptic functions, complete elliptic integrals, theta
// functions and the Weierstrass family on the lattice Z + tau*Z.
//
// Conventions:
//   - periods of the Weierstrass functions are (1, tau), half-periods
//     0, 1/2, tau/2, (1+tau)/2;
//   - theta functions use the nome q = exp(i*pi*tau) and unit quasi-period
//     in z (DLMF 20.2 with z scaled by pi);
//   - the Jacobi world lives on the lattice (4K, 2iK'); the two coordinates
//     are related by u = 2K z, tau = iK'/K, under which sn^2(u,k) is elliptic
//     with periods (2K, 2iK') and the order-two points 0, K, iK', K+iK'
//     correspond to 0, 1/2, tau/2, (1+tau)/2.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "darboux/numeric.hpp"

namespace darboux {

// ---------------------------------------------------------------------------
// Complete elliptic integral of the first kind, by AGM.

namespace detail {

inline cplx agm(cplx a, cplx b) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 64; ++i) {
        double gap = std::abs(a - b);
        if (gap <= 4e-16 * (std::abs(a) + std::abs(b)) || (i > 4 && gap >= prev)) return a;
        prev = gap;
        cplx a1 = 0.5 * (a + b);
        cplx b1 = std::sqrt(a * b);
        // right-choice branch: keep |a1 - b1| <= |a1 + b1|
        if (std::abs(a1 - b1) > std::abs(a1 + b1)) b1 = -b1;
        a = a1;
        b = b1;
    }
    throw std::runtime_error("agm: no convergence");
}

}  // namespace detail

inline cplx complete_elliptic_K(cplx k) {
    cplx kp2 = 1.0 - k * k;
    if (std::abs(kp2) < 1e-14)
        throw pole_error("complete_elliptic_K: k^2 = 1 is a logarithmic singularity");
    cplx kp = std::sqrt(kp2);
    cplx m = detail::agm(cplx(1.0), kp);
    if (std::abs(m) < 1e-300) throw pole_error("complete_elliptic_K: AGM underflow");
    return pi / (2.0 * m);
}

// ---------------------------------------------------------------------------
// Modulus record: k, k' = principal sqrt(1-k^2), K = K(k), K' = K(k').

struct Modulus {
    cplx k, k_prime, K, K_prime;
    // set when |k| or |k'| is within 1e-3 of 0 or 1 (ill-conditioned regime)
    bool conditioning_warning = false;

    static Modulus from_k(cplx k) {
        Modulus m;
        m.k = k;
        m.k_prime = std::sqrt(1.0 - k * k);
        m.K = complete_elliptic_K(k);
        m.K_prime = complete_elliptic_K(m.k_prime);
        double ak = std::abs(k), akp = std::abs(m.k_prime);
        m.conditioning_warning =
            ak < 1e-3 || akp < 1e-3 || std::abs(ak - 1.0) < 1e-3 || std::abs(akp - 1.0) < 1e-3;
        return m;
    }
    // period quotient of the Jacobi lattice (2K, 2iK')
    cplx tau() const { return iunit * K_prime / K; }
};

// ---------------------------------------------------------------------------
// Jacobi sn, cn, dn by descending Landen transformation.

struct JacobiValues {
    cplx sn, cn, dn;
    bool near_pole = false;  // u within roundoff of the iK' pole lattice
};

inline JacobiValues jacobi_sn_cn_dn(cplx u, cplx k) {
    constexpr double pole_threshold = 1e8;
    JacobiValues out;
    if (std::abs(k) < 1e-16) {
        out.sn = std::sin(u);
        out.cn = std::cos(u);
        out.dn = 1.0;
        return out;
    }
    // descending modulus chain k_{i+1} = (1 - k'_i)/(1 + k'_i)
    std::vector<cplx> ks;
    cplx kc = k;
    for (int i = 0; i < 48 && std::abs(kc) > 1e-16; ++i) {
        cplx kp = std::sqrt(1.0 - kc * kc);
        kc = (1.0 - kp) / (1.0 + kp);
        ks.push_back(kc);
    }
    cplx scale = 1.0;
    for (cplx ki : ks) scale *= (1.0 + ki);
    cplx v = u / scale;
    cplx s = std::sin(v), c = std::cos(v), d = 1.0;
    // unwind: values at modulus k_{i} -> values at modulus k_{i-1}
    for (auto it = ks.rbegin(); it != ks.rend(); ++it) {
        cplx ki = *it;
        cplx s2 = s * s;
        cplx den = 1.0 + ki * s2;
        if (std::abs(den) < 1e-14) {
            out.near_pole = true;
            den = cplx(1e-14, 0.0);
        }
        cplx sn_new = (1.0 + ki) * s / den;
        cplx cn_new = c * d / den;
        cplx dn_new = (1.0 - ki * s2) / den;
        s = sn_new;
        c = cn_new;
        d = dn_new;
    }
    out.sn = s;
    out.cn = c;
    out.dn = d;
    if (std::abs(out.sn) > pole_threshold || std::abs(out.cn) > pole_threshold ||
        std::abs(out.dn) > pole_threshold)
        out.near_pole = true;
    return out;
}

// ---------------------------------------------------------------------------
// Theta functions with nome q = exp(i pi tau).

struct ThetaValues {
    cplx t1, t2, t3, t4;
};

namespace detail {

struct ThetaSeries {
    cplx q;
    double im_tau;

    // theta_j and first three z-derivatives of theta1 at reduced z
    // (|Im z| <= Im tau / 2 + slack so the series converges fast).
    template <int J>
    cplx theta(cplx z) const {
        cplx acc = (J >= 3) ? cplx(1.0) : cplx(0.0);
        for (int n = 0; n < 96; ++n) {
            cplx term;
            if constexpr (J == 1) {
                term = 2.0 * parity(n) * qpow_half(n) * std::sin((2 * n + 1) * pi * z);
            } else if constexpr (J == 2) {
                term = 2.0 * qpow_half(n) * std::cos((2 * n + 1) * pi * z);
            } else if constexpr (J == 3) {
                term = 2.0 * qpow_int(n + 1) * std::cos(2.0 * (n + 1) * pi * z);
            } else {
                term = 2.0 * parity(n + 1) * qpow_int(n + 1) * std::cos(2.0 * (n + 1) * pi * z);
            }
            acc += term;
            if (n > 2 && std::abs(term) < 1e-18 * (std::abs(acc) + 1e-30)) break;
        }
        return acc;
    }

    // d^m/dz^m theta1 at reduced z, m = 0..3
    std::array<cplx, 4> theta1_derivs(cplx z) const {
        std::array<cplx, 4> acc{cplx(0), cplx(0), cplx(0), cplx(0)};
        for (int n = 0; n < 96; ++n) {
            double w = (2 * n + 1) * pi;
            cplx a = 2.0 * parity(n) * qpow_half(n);
            cplx s = std::sin(w * z), c = std::cos(w * z);
            cplx t0 = a * s;
            acc[0] += t0;
            acc[1] += a * w * c;
            acc[2] += -a * w * w * s;
            acc[3] += -a * w * w * w * c;
            if (n > 2 && std::abs(t0) + std::abs(a * w * c) <
                             1e-18 * (std::abs(acc[0]) + std::abs(acc[1]) + 1e-30))
                break;
        }
        return acc;
    }

  private:
    static double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }
    cplx qpow_half(int n) const {  // q^{(n+1/2)^2}
        double e = (n + 0.5) * (n + 0.5);
        return std::pow(q, cplx(e));
    }
    cplx qpow_int(int n) const {  // q^{n^2}
        return std::pow(q, cplx(double(n) * double(n)));
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Lattice Z + tau Z with the constants every consumer needs.

struct LatticeTau {
    cplx tau;
    std::array<cplx, 4> half_periods;  // 0, 1/2, tau/2, (1+tau)/2
    cplx q;                            // exp(i pi tau)
    cplx eta1, eta2;                   // zeta(1/2), zeta(tau/2)
    cplx theta1p0;                     // theta1'(0)
    std::array<cplx, 3> theta_nulls;   // theta2(0), theta3(0), theta4(0)
    cplx e1, e2, e3;                   // wp(1/2), wp(tau/2), wp((1+tau)/2)
    cplx g2, g3;
    cplx lambda;                    // k^2 = (e3-e2)/(e1-e2)
    bool precision_warning = false;  // Im tau < 0.05

    detail::ThetaSeries series() const { return detail::ThetaSeries{q, tau.imag()}; }

    static LatticeTau from_tau(cplx tau);
};

namespace detail {

// z = x*1 + y*tau with x, y real.
inline void lattice_coordinates(cplx z, cplx tau, double &x, double &y) {
    y = z.imag() / tau.imag();
    x = z.real() - y * tau.real();
}

// Reduce z modulo the lattice; returns z0 and integers m, n with
// z = z0 + m + n*tau and z0 as close to 0 as the neighbor search allows.
inline cplx lattice_reduce(cplx z, cplx tau, long long &m, long long &n) {
    double x, y;
    lattice_coordinates(z, tau, x, y);
    m = static_cast<long long>(std::llround(x));
    n = static_cast<long long>(std::llround(y));
    cplx z0 = z - cplx(double(m)) - cplx(double(n)) * tau;
    // pick the closest representative among immediate neighbors
    double best = std::abs(z0);
    for (int dm = -1; dm <= 1; ++dm)
        for (int dn = -1; dn <= 1; ++dn) {
            cplx cand = z0 - cplx(double(dm)) - cplx(double(dn)) * tau;
            double a = std::abs(cand);
            if (a < best - 1e-15) {
                best = a;
                z0 = cand;
                m += dm;
                n += dn;
            }
        }
    return z0;
}

inline double sign_pm(long long p) { return (p % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

inline ThetaValues theta_functions(cplx z, const LatticeTau &lat) {
    // reduce in the tau direction so the q-series stays well conditioned,
    // then apply theta quasi-periodicity factors
    double x, y;
    detail::lattice_coordinates(z, lat.tau, x, y);
    long long m = llround(x), n = llround(y);
    cplx z0 = z - cplx(double(m)) - cplx(double(n)) * lat.tau;
    auto ts = lat.series();
    cplx t1 = ts.theta<1>(z0), t2 = ts.theta<2>(z0), t3 = ts.theta<3>(z0), t4 = ts.theta<4>(z0);
    // theta(z0 + m + n tau) factors
    cplx f = std::pow(lat.q, cplx(-double(n) * double(n))) *
             std::exp(-2.0 * pi * iunit * double(n) * z0);
    double sm = detail::sign_pm(m), sn = detail::sign_pm(n);
    ThetaValues out;
    out.t1 = sm * sn * f * t1;
    out.t2 = sm * f * t2;
    out.t3 = f * t3;
    out.t4 = sn * f * t4;
    return out;
}

// d/dz log theta1(z), valid for all z (quasi-periodicity handled).
inline cplx theta1_logderiv(cplx z, const LatticeTau &lat) {
    long long m, n;
    cplx z0 = detail::lattice_reduce(z, lat.tau, m, n);
    auto d = lat.series().theta1_derivs(z0);
    return d[1] / d[0] - 2.0 * pi * iunit * double(n);
}

template <int J>
inline cplx theta_logderiv(cplx z, const LatticeTau &lat) {
    // log-derivatives of theta2..theta4 via their own series; used by the
    // theta-path of the connection one-form. Reduction as in theta1.
    long long m, n;
    cplx z0 = detail::lattice_reduce(z, lat.tau, m, n);
    auto ts = lat.series();
    cplx t = ts.theta<J>(z0);
    // derivative series: differentiate term-wise via finite set
    // (use central difference on the reduced series for simplicity is not
    // acceptable here; implement analytic series)
    cplx dt(0.0);
    if constexpr (J == 2) {
        for (int k = 0; k < 96; ++k) {
            double w = (2 * k + 1) * pi;
            cplx a = 2.0 * std::pow(lat.q, cplx((k + 0.5) * (k + 0.5)));
            cplx term = -a * w * std::sin(w * z0);
            dt += term;
            if (k > 2 && std::abs(term) < 1e-18 * (std::abs(dt) + 1e-30)) break;
        }
    } else if constexpr (J == 3) {
        for (int k = 1; k < 96; ++k) {
            cplx a = 2.0 * std::pow(lat.q, cplx(double(k) * double(k)));
            cplx term = -a * (2.0 * k * pi) * std::sin((2.0 * k * pi) * z0);
            dt += term;
            if (k > 2 && std::abs(term) < 1e-18 * (std::abs(dt) + 1e-30)) break;
        }
    } else if constexpr (J == 4) {
        for (int k = 1; k < 96; ++k) {
            cplx a = 2.0 * detail::sign_pm(k) * std::pow(lat.q, cplx(double(k) * double(k)));
            cplx term = -a * (2.0 * k * pi) * std::sin((2.0 * k * pi) * z0);
            dt += term;
            if (k > 2 && std::abs(term) < 1e-18 * (std::abs(dt) + 1e-30)) break;
        }
    }
    return dt / t - 2.0 * pi * iunit * double(n);
}

// ---------------------------------------------------------------------------
// Weierstrass family.

struct WeierstrassValues {
    cplx p, p_prime, zeta, sigma;
    bool near_lattice_point = false;
};

inline WeierstrassValues weierstrass_family(cplx z, const LatticeTau &lat) {
    WeierstrassValues out;
    long long m, n;
    cplx z0 = detail::lattice_reduce(z, lat.tau, m, n);
    if (std::abs(z0) < 1e-12) {
        out.near_lattice_point = true;
        z0 = (std::abs(z0) == 0.0) ? cplx(1e-12, 0.0) : z0;
    }
    auto d = lat.series().theta1_derivs(z0);
    cplx L1 = d[1] / d[0];
    cplx L2 = d[2] / d[0] - L1 * L1;
    cplx L3 = d[3] / d[0] - 3.0 * (d[2] / d[0]) * L1 + 2.0 * L1 * L1 * L1;
    out.zeta = 2.0 * lat.eta1 * z0 + L1 + 2.0 * double(m) * lat.eta1 + 2.0 * double(n) * lat.eta2;
    out.p = -L2 - 2.0 * lat.eta1;
    out.p_prime = -L3;
    // sigma(z0 + lambda) = eps exp(eta_lambda (z0 + lambda/2)) sigma(z0)
    cplx sigma0 = std::exp(lat.eta1 * z0 * z0) * d[0] / lat.theta1p0;
    cplx lam = cplx(double(m)) + cplx(double(n)) * lat.tau;
    cplx eta_lam = 2.0 * double(m) * lat.eta1 + 2.0 * double(n) * lat.eta2;
    double eps = ((m + n + m * n) % 2 == 0) ? 1.0 : -1.0;
    out.sigma = eps * std::exp(eta_lam * (z0 + 0.5 * lam)) * sigma0;
    return out;
}

// Independent backend: Laurent expansion about the nearest lattice point with
// coefficients generated from g2, g3 (Eisenstein series). Used as an oracle
// against the theta backend.
struct WeierstrassLaurent {
    const LatticeTau &lat;
    std::vector<cplx> c;  // c[n] with wp = 1/z^2 + sum_{n>=2} c[n] z^{2n-2}

    explicit WeierstrassLaurent(const LatticeTau &l, int N = 160) : lat(l), c(N + 1, cplx(0.0)) {
        if (N >= 2) c[2] = lat.g2 / 20.0;
        if (N >= 3) c[3] = lat.g3 / 28.0;
        for (int n = 4; n <= N; ++n) {
            cplx s(0.0);
            for (int mm = 2; mm <= n - 2; ++mm) s += c[mm] * c[n - mm];
            c[n] = 3.0 * s / ((2.0 * n + 1.0) * (n - 3.0));
        }
    }

    WeierstrassValues eval(cplx z) const {
        WeierstrassValues out;
        long long m, n;
        cplx z0 = detail::lattice_reduce(z, lat.tau, m, n);
        if (std::abs(z0) < 1e-12) {
            out.near_lattice_point = true;
            z0 = (std::abs(z0) == 0.0) ? cplx(1e-12, 0.0) : z0;
        }
        cplx z2 = z0 * z0;
        cplx p = 1.0 / z2, pp = -2.0 / (z2 * z0), zt = 1.0 / z0;
        cplx zpow = z2;  // z^{2n-2} starting n=2
        for (std::size_t k = 2; k < c.size(); ++k) {
            p += c[k] * zpow;
            pp += c[k] * (2.0 * k - 2.0) * zpow / z0;
            zt -= c[k] * zpow * z0 / (2.0 * k - 1.0);
            zpow *= z2;
        }
        out.p = p;
        out.p_prime = pp;
        out.zeta = zt + 2.0 * double(m) * lat.eta1 + 2.0 * double(n) * lat.eta2;
        out.sigma = cplx(0.0);  // not provided by this backend
        return out;
    }
};

inline LatticeTau LatticeTau::from_tau(cplx tau) {
    if (tau.imag() <= 0.0) throw contract_error("LatticeTau: Im(tau) must be positive");
    LatticeTau lat;
    lat.tau = tau;
    lat.half_periods = {cplx(0.0), cplx(0.5), 0.5 * tau, 0.5 * (1.0 + tau)};
    lat.q = std::exp(iunit * pi * tau);
    lat.precision_warning = tau.imag() < 0.05;
    auto ts = detail::ThetaSeries{lat.q, tau.imag()};
    auto d0 = ts.theta1_derivs(cplx(0.0));
    lat.theta1p0 = d0[1];
    lat.eta1 = -d0[3] / (6.0 * d0[1]);
    lat.eta2 = (lat.eta1 * tau - iunit * pi);  // Legendre relation
    lat.theta_nulls = {ts.theta<2>(cplx(0.0)), ts.theta<3>(cplx(0.0)), ts.theta<4>(cplx(0.0))};
    // Eisenstein q-series for the invariants, nome squared
    cplx qq = lat.q * lat.q;
    cplx E4(1.0), E6(1.0), qn = qq;
    for (int n = 1; n < 256; ++n) {
        cplx f = qn / (1.0 - qn);
        double n3 = double(n) * n * n;
        E4 += 240.0 * n3 * f;
        E6 -= 504.0 * n3 * double(n) * double(n) * f;
        qn *= qq;
        if (std::abs(qn) < 1e-20) break;
    }
    double p4 = pi * pi * pi * pi;
    lat.g2 = 4.0 * p4 / 3.0 * E4;
    lat.g3 = 8.0 * p4 * pi * pi / 27.0 * E6;
    // half-period values of wp via the theta backend (needs eta1 only)
    auto wp_at = [&](cplx z) {
        long long m, n;
        cplx z0 = detail::lattice_reduce(z, tau, m, n);
        auto d = ts.theta1_derivs(z0);
        cplx L1 = d[1] / d[0];
        return -(d[2] / d[0] - L1 * L1) - 2.0 * lat.eta1;
    };
    lat.e1 = wp_at(cplx(0.5));
    lat.e2 = wp_at(0.5 * tau);
    lat.e3 = wp_at(0.5 * (1.0 + tau));
    lat.lambda = (lat.e3 - lat.e2) / (lat.e1 - lat.e2);
    return lat;
}

// lambda-invariant k^2 of the torus C/(Z + tau Z)
inline cplx lambda_invariant(const LatticeTau &lat) { return lat.lambda; }
inline cplx lambda_invariant(cplx tau) { return LatticeTau::from_tau(tau).lambda; }

}  // namespace darboux

#endif
