#ifndef DARBOUX_GAUGE_HPP
#define DARBOUX_GAUGE_HPP

// For mu = -(2q+3)/2 the hypergeometric-term expansion terminates after q+1
// terms, each an honest 2F1.  Folding every term through the contiguous
// reduction gives one first-order operator R (in d/ds, s = sn^2 u) acting on
// the base hypergeometric function: the solution equals
//     prefactor(u) * [ P(s) F(s) + Q(s) F'(s) ].

#include "darboux/hypergeom.hpp"
#include "darboux/series.hpp"

namespace darboux {

struct GaugeReduction {
    RationalOperator1 op;
    Gauss2F1Params base;
    DarbouxParams params;
    cplx h;

    cplx eval(cplx u) const {
        auto j = jacobi_sn_cn_dn(u, params.k);
        cplx s = j.sn * j.sn;
        cplx F = hyp2f1(base, s);
        cplx Fp = hyp2f1_deriv(base, s);
        return darboux_prefactor(params, j) * op.apply(F, Fp, s);
    }
};

inline GaugeReduction gauge_reduce_solution(const DarbouxParams &p, cplx h_j, double tol = 1e-8) {
    auto rep = termination_check(p);
    std::optional<int> q;
    for (const auto &e : rep.cases)
        if (e.kind == TerminationCase::HalfInteger) q = e.q;
    if (!q)
        throw contract_error("gauge_reduce_solution: needs the half-integer termination case");
    double resid =
        std::abs(continued_fraction_finite(hypergeom_series_recurrence(p, h_j), *q));
    if (resid > tol)
        throw contract_error("gauge_reduce_solution: h is not in the accessory spectrum");

    auto X = forward_run(hypergeom_series_recurrence(p, h_j), *q + 1);
    Gauss2F1Params base = hyp_term_params(p, 0);
    RationalFn P = RationalFn::constant(0.0), Q = RationalFn::constant(0.0);
    for (int m = 0; m <= *q; ++m) {
        auto opm = contiguous_reduce(m, base);
        cplx w = hyp_prefactor_scaled(p, m).value() * X[m];
        Poly spow(std::vector<cplx>(std::size_t(m) + 1, cplx(0.0)));
        spow.c[m] = w;
        RationalFn factor{spow, Poly::constant(1.0)};
        P = P + factor * opm.p;
        Q = Q + factor * opm.q;
    }
    return GaugeReduction{{P, Q}, base, p, h_j};
}

}  // namespace darboux

#endif
