#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "darboux/recurrence.hpp"

using namespace darboux;

namespace {
std::mt19937 rng(4242);
double urand(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
cplx crand(double s = 1.0) { return cplx(urand(-s, s), urand(-s, s)); }

ThreeTermRecurrence constant_rec(cplx R, cplx S, cplx P) {
    ThreeTermRecurrence rec;
    rec.coeff = [=](int) { return RecTriple{R, S, P}; };
    rec.limits = RecTriple{R, S, P};
    return rec;
}
}  // namespace

TEST_CASE("forward run, constant coefficients") {
    // C_{m+1} = 3 C_m - 2 C_{m-1}: C = 1, 3, 7, 15, 31, 63 (2^{m+1} - 1)
    auto rec = constant_rec(1.0, -3.0, 2.0);
    auto C = forward_run(rec, 5, 1.0);
    for (int m = 0; m <= 5; ++m) CHECK(std::abs(C[m] - (std::pow(2.0, m + 1) - 1.0)) < 1e-12);
}

TEST_CASE("forward run, two-term degenerate case") {
    ThreeTermRecurrence rec;
    rec.coeff = [](int m) { return RecTriple{cplx(1.0), cplx(0.5 + m), cplx(0.0)}; };
    auto C = forward_run(rec, 4, 1.0);
    cplx expect = 1.0;
    for (int m = 0; m < 4; ++m) {
        expect *= -(0.5 + m);
        CHECK(std::abs(C[m + 1] - expect) < 1e-13 * std::abs(expect));
    }
}

TEST_CASE("forward run reports vanishing leading coefficient") {
    ThreeTermRecurrence rec;
    rec.coeff = [](int m) { return RecTriple{cplx(m == 2 ? 0.0 : 1.0), cplx(1.0), cplx(1.0)}; };
    try {
        forward_run(rec, 5, 1.0);
        FAIL("expected vanishing_factor_error");
    } catch (const vanishing_factor_error &e) {
        CHECK(e.index == 2);
    }
}

TEST_CASE("characteristic roots") {
    // Darboux-type limits at k = 0.8: t^2 - 2(2k^2-1)t + 1 = 0, roots (k +- i k')^2
    double k = 0.8, kp = 0.6;
    auto rec = constant_rec(1.0, -2.0 * (2.0 * k * k - 1.0), 1.0);
    auto roots = characteristic_roots(rec);
    cplx r1 = std::pow(cplx(k, -kp), 2), r2 = std::pow(cplx(k, kp), 2);
    bool match = (std::abs(roots.t1 - r1) < 1e-12 && std::abs(roots.t2 - r2) < 1e-12) ||
                 (std::abs(roots.t1 - r2) < 1e-12 && std::abs(roots.t2 - r1) < 1e-12);
    CHECK(match);
    CHECK(std::abs(roots.t1) <= std::abs(roots.t2));
    CHECK(std::abs(roots.t1 * roots.t2 - 1.0) < 1e-12);  // P = R
    // real k: both roots on the unit circle
    CHECK(std::abs(std::abs(roots.t1) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(roots.t2) - 1.0) < 1e-12);

    // Vieta on random coefficients
    for (int i = 0; i < 20; ++i) {
        cplx R = crand() + cplx(2.0), S = crand(3.0), P = crand(2.0);
        auto rr = characteristic_roots(constant_rec(R, S, P));
        CHECK(std::abs(rr.t1 * rr.t2 - P / R) < 1e-12 * (std::abs(P / R) + 1.0));
        CHECK(std::abs(rr.t1 + rr.t2 + S / R) < 1e-12 * (std::abs(S / R) + 1.0));
    }
}

TEST_CASE("finite continued fraction, explicit low orders") {
    auto rec = constant_rec(2.0, 3.0, 0.7);
    // q=0: S_0/R_0
    CHECK(std::abs(continued_fraction_finite(rec, 0) - 1.5) < 1e-15);
    // q=1: S0/R0 - (P1/R1)/(S1/R1)
    CHECK(std::abs(continued_fraction_finite(rec, 1) - (1.5 - (0.35) / 1.5)) < 1e-15);
}

TEST_CASE("finite continued fraction equals tridiagonal determinant ratio") {
    for (int q = 2; q <= 8; ++q) {
        std::vector<RecTriple> cs(q + 1);
        for (auto &t : cs) t = RecTriple{crand() + cplx(2.5), crand(2.0) + cplx(3.0), crand()};
        ThreeTermRecurrence rec;
        rec.coeff = [cs](int m) { return cs[m]; };
        // determinants of tridiagonal tails, diag S_m, products P_{m+1} R_m
        std::function<cplx(int)> detFrom = [&](int m0) -> cplx {
            cplx dprev = 1.0, d = cs[q].S;
            for (int m = q - 1; m >= m0; --m) {
                cplx dn = cs[m].S * d - cs[m + 1].P * cs[m].R * dprev;
                dprev = d;
                d = dn;
            }
            return d;
        };
        cplx f = continued_fraction_finite(rec, q);
        cplx ratio = detFrom(0) / detFrom(1) / cs[0].R;
        CHECK(std::abs(f - ratio) < 1e-10 * (std::abs(f) + 1.0));
    }
}

TEST_CASE("infinite continued fraction: Bessel minimal ratio via Miller oracle") {
    // R = 1, S = -2(r+1)/x, P = 1 at x = 1; minimal solution C_r = J_{r+1}(x)
    double x = 1.0;
    ThreeTermRecurrence rec;
    rec.coeff = [x](int r) { return RecTriple{cplx(1.0), cplx(-2.0 * (r + 1) / x), cplx(1.0)}; };
    rec.limits = std::nullopt;
    auto cf = continued_fraction_infinite(rec);
    CHECK(cf.converged);
    // f - S_0/R_0 = minimal ratio C_1/C_0
    cplx minimal_ratio = cf.value - rec.coeff(0).S / rec.coeff(0).R;
    auto C = backward_run(rec, 1, 60);
    CHECK(std::abs(minimal_ratio - C[1]) < 1e-10);
}

TEST_CASE("infinite continued fraction warns on equal-modulus roots") {
    // real-k Darboux-type limits: |t1| = |t2| = 1
    ThreeTermRecurrence rec = constant_rec(1.0, -2.0 * (2.0 * 0.25 - 1.0), 1.0);
    bool warned = false;
    try {
        auto cf = continued_fraction_infinite(rec, 1e-14, 2000);
        warned = !cf.warning.empty();
    } catch (const non_convergence_error &) {
        warned = true;
    }
    CHECK(warned);
}

TEST_CASE("perron classification") {
    // |t1| = 0.5, |t2| = 2: C_{r+1} - 2.5 C_r + C_{r-1} = 0
    auto rec = constant_rec(1.0, -2.5, 1.0);
    auto roots = characteristic_roots(rec);
    CHECK(std::abs(roots.t1 - 0.5) < 1e-12);
    CHECK(std::abs(roots.t2 - 2.0) < 1e-12);

    auto fwd = forward_run(rec, 200, 1.0);
    auto rep1 = perron_classify(rec, fwd);
    CHECK(rep1.cls == PerronClass::Dominant);
    CHECK(std::abs(rep1.limit_estimate - 2.0) < 0.02);

    auto bwd = backward_run(rec, 200, 60);
    auto rep2 = perron_classify(rec, bwd);
    CHECK(rep2.cls == PerronClass::Minimal);
    CHECK(std::abs(rep2.limit_estimate - 0.5) < 0.01);

    // seeded exact geometric minimal sequence
    std::vector<cplx> geo(80);
    for (int i = 0; i < 80; ++i) geo[i] = std::pow(0.5, i);
    CHECK(perron_classify(rec, geo).cls == PerronClass::Minimal);
}

TEST_CASE("tridiagonal spectrum") {
    // family with diag S_m(h) = h + d_m, off-diagonals fixed
    std::vector<cplx> d{cplx(0.3, 0.1), cplx(-1.2, 0.4), cplx(2.1, -0.3)};
    std::vector<cplx> up{cplx(1.5), cplx(0.7), cplx(1.1)};
    std::vector<cplx> dn{cplx(0.0), cplx(0.4, 0.2), cplx(-0.8)};
    auto family = [&](cplx h) {
        ThreeTermRecurrence rec;
        rec.coeff = [&, h](int m) { return RecTriple{up[m], h + d[m], dn[m]}; };
        return rec;
    };

    SECTION("q=0: unique root of S_0(h)") {
        auto hs = tridiagonal_spectrum(family, 0);
        REQUIRE(hs.size() == 1);
        CHECK(std::abs(hs[0] + d[0]) < 1e-12);
    }
    SECTION("q=1: quadratic formula oracle") {
        auto hs = tridiagonal_spectrum(family, 1);
        REQUIRE(hs.size() == 2);
        // (h+d0)(h+d1) - P1 R0 = 0
        cplx b = d[0] + d[1], c = d[0] * d[1] - dn[1] * up[0];
        cplx disc = std::sqrt(b * b - 4.0 * c);
        cplx r1 = (-b + disc) / 2.0, r2 = (-b - disc) / 2.0;
        double err = std::min(std::abs(hs[0] - r1) + std::abs(hs[1] - r2),
                              std::abs(hs[0] - r2) + std::abs(hs[1] - r1));
        CHECK(err < 1e-12);
    }
    SECTION("every spectrum point zeroes the finite fraction") {
        auto hs = tridiagonal_spectrum(family, 2);
        REQUIRE(hs.size() == 3);
        for (cplx h : hs) {
            cplx f = continued_fraction_finite(family(h), 2);
            CHECK(std::abs(f) < 1e-9);
        }
    }
    SECTION("non-affine dependence is rejected") {
        auto bad = [&](cplx h) {
            ThreeTermRecurrence rec;
            rec.coeff = [&, h](int m) { return RecTriple{up[m], h * h + d[m], dn[m]}; };
            return rec;
        };
        CHECK_THROWS_AS(tridiagonal_spectrum(bad, 1), contract_error);
    }
}
