#ifndef DARBOUX_PAINLEVE_HPP
#define DARBOUX_PAINLEVE_HPP

// Painleve VI in rational and elliptic form: residual evaluation of sampled
// candidate trajectories, the parameter dictionary
//     (a0^2, a1^2, a2^2, (a3-1)^2) = (-2 beta, 2 gamma, 1 - 2 delta, 2 alpha),
// the symmetry lattice on (a0, a1, a2, a3-1), the special-solution condition
// checkers, and the scalar <-> Painleve correspondence scan.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "darboux/elliptic.hpp"
#include "darboux/numeric.hpp"
#include "darboux/series.hpp"

namespace darboux {

struct PainleveParams {
    cplx a0, a1, a2, a3;

    cplx alpha() const { return 0.5 * (a3 - 1.0) * (a3 - 1.0); }
    cplx beta() const { return -0.5 * a0 * a0; }
    cplx gamma() const { return 0.5 * a1 * a1; }
    cplx delta() const { return 0.5 * (1.0 - a2 * a2); }

    static PainleveParams from_rational(cplx alpha, cplx beta, cplx gamma, cplx delta) {
        return PainleveParams{std::sqrt(-2.0 * beta), std::sqrt(2.0 * gamma),
                              std::sqrt(1.0 - 2.0 * delta), 1.0 + std::sqrt(2.0 * alpha)};
    }
};

// ---------------------------------------------------------------------------
// Sampled candidate trajectories

struct PviCandidate {
    std::vector<cplx> nodes;   // equally spaced along a line
    std::vector<cplx> values;  // X(t) or u(tau) at the nodes
    // optional analytic derivatives; finite-difference stencils otherwise
    std::function<cplx(cplx)> deriv1, deriv2;

    cplx spacing() const {
        if (nodes.size() < 5)
            throw contract_error("PviCandidate: need at least five nodes for the stencils");
        cplx h = nodes[1] - nodes[0];
        for (std::size_t i = 1; i + 1 < nodes.size(); ++i)
            if (std::abs(nodes[i + 1] - nodes[i] - h) > 1e-12 * std::abs(h))
                throw contract_error("PviCandidate: nodes must be equally spaced");
        return h;
    }
};

struct ResidualSample {
    cplx node;
    double residual = 0.0;
    bool skipped = false;
};

namespace detail {

// five-point interior stencils
inline cplx stencil1(const std::vector<cplx> &v, std::size_t i, cplx h) {
    return (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h);
}
inline cplx stencil2(const std::vector<cplx> &v, std::size_t i, cplx h) {
    return (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) /
           (12.0 * h * h);
}

}  // namespace detail

// residual of the rational-form equation at the interior nodes
inline std::vector<ResidualSample> pvi_residual(const PviCandidate &cand,
                                                const PainleveParams &p) {
    cplx h = cand.spacing();
    cplx al = p.alpha(), be = p.beta(), ga = p.gamma(), de = p.delta();
    std::vector<ResidualSample> out;
    for (std::size_t i = 2; i + 2 < cand.nodes.size(); ++i) {
        cplx t = cand.nodes[i], X = cand.values[i];
        ResidualSample s;
        s.node = t;
        double scale = std::abs(X) + std::abs(t) + 1.0;
        if (std::abs(X) < 1e-9 * scale || std::abs(X - 1.0) < 1e-9 * scale ||
            std::abs(X - t) < 1e-9 * scale) {
            s.skipped = true;  // pole of the equation's right-hand side
            out.push_back(s);
            continue;
        }
        cplx Xp = cand.deriv1 ? cand.deriv1(t) : detail::stencil1(cand.values, i, h);
        cplx Xpp = cand.deriv2 ? cand.deriv2(t) : detail::stencil2(cand.values, i, h);
        cplx rhs = 0.5 * (1.0 / X + 1.0 / (X - 1.0) + 1.0 / (X - t)) * Xp * Xp -
                   (1.0 / t + 1.0 / (t - 1.0) + 1.0 / (X - t)) * Xp +
                   X * (X - 1.0) * (X - t) / (t * t * (t - 1.0) * (t - 1.0)) *
                       (al + be * t / (X * X) + ga * (t - 1.0) / ((X - 1.0) * (X - 1.0)) +
                        de * t * (t - 1.0) / ((X - t) * (X - t)));
        s.residual = std::abs(Xpp - rhs);
        out.push_back(s);
    }
    return out;
}

// residual of the elliptic-form equation; nodes are tau values, the lattice
// varies with the node
inline std::vector<ResidualSample> elliptic_pvi_residual(const PviCandidate &cand,
                                                         const PainleveParams &p) {
    cplx h = cand.spacing();
    std::array<cplx, 4> coef{p.a0 * p.a0, p.a1 * p.a1, p.a2 * p.a2,
                             (p.a3 - 1.0) * (p.a3 - 1.0)};
    std::vector<ResidualSample> out;
    for (std::size_t i = 2; i + 2 < cand.nodes.size(); ++i) {
        cplx tau = cand.nodes[i], u = cand.values[i];
        ResidualSample s;
        s.node = tau;
        auto lat = LatticeTau::from_tau(tau);
        cplx upp = cand.deriv2 ? cand.deriv2(tau) : detail::stencil2(cand.values, i, h);
        cplx sum = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (std::abs(coef[j]) < 1e-14) continue;  // absent term
            auto w = weierstrass_family(u + lat.half_periods[j], lat);
            if (w.near_lattice_point)
                throw pole_error("elliptic_pvi_residual: candidate collides with a pole whose "
                                 "coefficient does not vanish");
            sum += coef[j] * w.p_prime;
        }
        s.residual = std::abs(upp + sum / (8.0 * pi * pi));
        out.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Special-solution conditions

struct PviConditionReport {
    bool signed_sum = false;  // a0 + e1 a1 + e2 a2 + e3 a3 in 2Z
    std::array<int, 3> signs{1, 1, 1};
    long long sum_value = 0;
    bool integer_entry = false;  // (a0-n)(a1-n)(a2-n)(a3-n) = 0 for integer n
    int entry_index = -1;
    long long entry_value = 0;
    bool any() const { return signed_sum || integer_entry; }
};

inline PviConditionReport special_condition_pvi(const PainleveParams &p, int window = 50,
                                                double tol = 1e-10) {
    PviConditionReport rep;
    for (int s1 : {1, -1})
        for (int s2 : {1, -1})
            for (int s3 : {1, -1}) {
                cplx v = p.a0 + double(s1) * p.a1 + double(s2) * p.a2 + double(s3) * p.a3;
                long long n;
                if (near_integer(v, tol, &n) && n % 2 == 0 && !rep.signed_sum) {
                    rep.signed_sum = true;
                    rep.signs = {s1, s2, s3};
                    rep.sum_value = n;
                }
            }
    std::array<cplx, 4> a{p.a0, p.a1, p.a2, p.a3};
    for (int j = 0; j < 4 && !rep.integer_entry; ++j) {
        long long n;
        if (near_integer(a[j], tol, &n) && std::llabs(n) <= window) {
            rep.integer_entry = true;
            rep.entry_index = j;
            rep.entry_value = n;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Symmetry lattice: sign flips of (a0, a1, a2, a3-1), permutations of that
// quadruple, and integer shifts with even total

struct ManinOrbit {
    std::vector<PainleveParams> elements;
    PainleveParams canonical;
};

namespace detail {

inline std::array<cplx, 4> to_b(const PainleveParams &p) {
    return {p.a0, p.a1, p.a2, p.a3 - 1.0};
}
inline PainleveParams from_b(const std::array<cplx, 4> &b) {
    return {b[0], b[1], b[2], b[3] + 1.0};
}
inline double canon_key_part(cplx v) {
    double f = v.real() - std::round(v.real());
    return std::hypot(f, v.imag());
}

}  // namespace detail

inline ManinOrbit manin_orbit(const PainleveParams &p, int depth, std::size_t max_elements = 4096) {
    using B = std::array<cplx, 4>;
    std::vector<std::function<B(B)>> gens;
    for (int i = 0; i < 4; ++i)
        gens.push_back([i](B b) {
            b[i] = -b[i];
            return b;
        });
    for (int i = 0; i < 3; ++i)
        gens.push_back([i](B b) {
            std::swap(b[i], b[i + 1]);
            return b;
        });
    for (auto shift : {std::array<double, 4>{1, 1, 0, 0}, std::array<double, 4>{1, 0, 1, 0},
                       std::array<double, 4>{1, 0, 0, 1}, std::array<double, 4>{-1, -1, 0, 0},
                       std::array<double, 4>{0, 1, -1, 0}, std::array<double, 4>{0, 0, 1, 1}})
        gens.push_back([shift](B b) {
            for (int i = 0; i < 4; ++i) b[i] += shift[i];
            return b;
        });

    auto key = [](const B &b) {
        std::array<long long, 8> k;
        for (int i = 0; i < 4; ++i) {
            k[2 * i] = llround(b[i].real() * 1e9);
            k[2 * i + 1] = llround(b[i].imag() * 1e9);
        }
        return k;
    };
    std::vector<std::array<long long, 8>> seen;
    std::vector<B> frontier{detail::to_b(p)}, all{detail::to_b(p)};
    seen.push_back(key(frontier[0]));
    for (int d = 0; d < depth && all.size() < max_elements; ++d) {
        std::vector<B> next;
        for (const B &b : frontier)
            for (const auto &g : gens) {
                B nb = g(b);
                auto kk = key(nb);
                if (std::find(seen.begin(), seen.end(), kk) != seen.end()) continue;
                seen.push_back(kk);
                next.push_back(nb);
                all.push_back(nb);
                if (all.size() >= max_elements) break;
            }
        frontier = std::move(next);
    }
    ManinOrbit orbit;
    for (const B &b : all) orbit.elements.push_back(detail::from_b(b));
    // canonical representative: lexicographically minimal absolute fractional parts
    B best = all[0];
    auto less_key = [&](const B &x, const B &y) {
        for (int i = 0; i < 4; ++i) {
            double kx = detail::canon_key_part(x[i]), ky = detail::canon_key_part(y[i]);
            if (std::abs(kx - ky) > 1e-12) return kx < ky;
        }
        return false;
    };
    for (const B &b : all)
        if (less_key(b, best)) best = b;
    orbit.canonical = detail::from_b(best);
    return orbit;
}

// ---------------------------------------------------------------------------
// Correspondence between the scalar special-solution conditions and the
// Painleve VI conditions under the dictionary a_j = 2 theta_j + 1

enum class CorrespondenceVerdict { Both, OnlyDarboux, OnlyPainleve, Neither };

inline const char *to_string(CorrespondenceVerdict v) {
    switch (v) {
        case CorrespondenceVerdict::Both: return "both";
        case CorrespondenceVerdict::OnlyDarboux: return "only-darboux";
        case CorrespondenceVerdict::OnlyPainleve: return "only-painleve";
        default: return "neither";
    }
}

struct CorrespondenceRow {
    std::array<cplx, 4> theta;  // xi, eta, mu, nu
    std::array<cplx, 4> a;      // 2 theta + 1 (primary sign choice)
    std::string darboux_case;   // semicolon-joined condition names, or "-"
    std::string pvi_case;
    CorrespondenceVerdict verdict = CorrespondenceVerdict::Neither;
};

inline CorrespondenceRow correspondence_scan(const DarbouxParams &p, int pvi_window = 50) {
    CorrespondenceRow row;
    row.theta = {p.xi, p.eta, p.mu, p.nu};
    for (int j = 0; j < 4; ++j) row.a[j] = 2.0 * row.theta[j] + 1.0;

    auto hits = special_conditions_scalar(p);
    if (hits.empty()) {
        row.darboux_case = "-";
    } else {
        for (std::size_t i = 0; i < hits.size(); ++i)
            row.darboux_case += std::string(i ? ";" : "") + to_string(hits[i].cond);
    }
    // both signs per slot are tried; the conditions are invariant under each
    // individual sign flip, so the first hit is representative
    bool pvi_any = false;
    PviConditionReport rep;
    for (int mask = 0; mask < 16 && !pvi_any; ++mask) {
        PainleveParams pp{(mask & 1) ? -row.a[0] : row.a[0], (mask & 2) ? -row.a[1] : row.a[1],
                          (mask & 4) ? -row.a[2] : row.a[2], (mask & 8) ? -row.a[3] : row.a[3]};
        rep = special_condition_pvi(pp, pvi_window);
        pvi_any = rep.any();
    }
    if (!pvi_any) {
        row.pvi_case = "-";
    } else {
        if (rep.signed_sum) row.pvi_case = "signed_sum";
        if (rep.integer_entry)
            row.pvi_case += std::string(row.pvi_case.empty() ? "" : ";") + "integer_entry";
    }
    bool darboux_any = !hits.empty();
    row.verdict = darboux_any ? (pvi_any ? CorrespondenceVerdict::Both
                                         : CorrespondenceVerdict::OnlyDarboux)
                              : (pvi_any ? CorrespondenceVerdict::OnlyPainleve
                                         : CorrespondenceVerdict::Neither);
    return row;
}

struct CorrespondenceBatch {
    std::vector<CorrespondenceRow> rows;
    std::array<std::size_t, 4> counts{};  // both, only-darboux, only-painleve, neither
};

// all half-integer quadruples with |theta_j| <= radius
inline CorrespondenceBatch correspondence_batch_half_integers(double radius, cplx k = cplx(0.5),
                                                              int pvi_window = 50) {
    CorrespondenceBatch batch;
    int n = int(std::floor(2.0 * radius));
    for (int i0 = -n; i0 <= n; ++i0)
        for (int i1 = -n; i1 <= n; ++i1)
            for (int i2 = -n; i2 <= n; ++i2)
                for (int i3 = -n; i3 <= n; ++i3) {
                    // aggregate construction: the Darboux conditions are plain
                    // arithmetic and remain meaningful on the excluded xi set
                    DarbouxParams p{0.5 * i0, 0.5 * i1, 0.5 * i2, 0.5 * i3, k};
                    auto row = correspondence_scan(p, pvi_window);
                    batch.counts[std::size_t(row.verdict)]++;
                    batch.rows.push_back(std::move(row));
                }
    return batch;
}

}  // namespace darboux

#endif
