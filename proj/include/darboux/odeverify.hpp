#ifndef DARBOUX_ODEVERIFY_HPP
#define DARBOUX_ODEVERIFY_HPP

// Verification backbone: adaptive complex-path integration of second-order
// scalar ODEs and 2x2 first-order systems, residual evaluation of candidate
// solutions, and numeric monodromy along rectangular loops.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "darboux/matrix2.hpp"
#include "darboux/numeric.hpp"

namespace darboux {

struct ComplexPath {
    std::vector<cplx> waypoints;
    double max_step = 0.1;

    void validate(const std::vector<cplx> &singularities = {}, double margin = 1e-3) const {
        if (waypoints.size() < 2) throw contract_error("ComplexPath: need at least two waypoints");
        for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
            if (std::abs(waypoints[i + 1] - waypoints[i]) == 0.0)
                throw contract_error("ComplexPath: consecutive waypoints coincide");
            for (cplx s : singularities) {
                // distance from segment [a,b] to s
                cplx a = waypoints[i], b = waypoints[i + 1];
                cplx d = b - a;
                double t = std::clamp(((s - a) / d).real(), 0.0, 1.0);
                if (std::abs(a + t * d - s) < margin)
                    throw contract_error("ComplexPath: path passes a declared singularity");
            }
        }
    }
};

// y'' + p1(z) y' + p0(z) y = 0; p1 may be empty (vanishing first-order term)
struct ScalarODE {
    std::function<cplx(cplx)> p0;
    std::function<cplx(cplx)> p1;  // optional
};

namespace detail {

// Dormand-Prince 5(4) over a straight segment for a 2-component complex state.
template <typename Rhs>
Vec2 dopri5_segment(const Rhs &f, cplx za, cplx zb, Vec2 y, double rtol, double max_step) {
    const double atol = 1e-14;
    double L = std::abs(zb - za);
    cplx dir = (zb - za) / L;
    auto rhs = [&](double s, const Vec2 &v) {
        Vec2 g = f(za + s * dir, v);
        return Vec2{dir * g[0], dir * g[1]};
    };
    double s = 0.0;
    double h = std::min(max_step, L);
    int rejected_in_row = 0;
    for (int iter = 0; iter < 2000000 && s < L; ++iter) {
        if (s + h > L) h = L - s;
        auto add = [](const Vec2 &a, const Vec2 &b, double c) {
            return Vec2{a[0] + c * b[0], a[1] + c * b[1]};
        };
        Vec2 k1 = rhs(s, y);
        Vec2 t = add(add(y, k1, 0.2 * h), k1, 0.0);
        Vec2 k2 = rhs(s + 0.2 * h, t);
        t = y;
        t = add(t, k1, h * 3.0 / 40.0);
        t = add(t, k2, h * 9.0 / 40.0);
        Vec2 k3 = rhs(s + 0.3 * h, t);
        t = y;
        t = add(t, k1, h * 44.0 / 45.0);
        t = add(t, k2, -h * 56.0 / 15.0);
        t = add(t, k3, h * 32.0 / 9.0);
        Vec2 k4 = rhs(s + 0.8 * h, t);
        t = y;
        t = add(t, k1, h * 19372.0 / 6561.0);
        t = add(t, k2, -h * 25360.0 / 2187.0);
        t = add(t, k3, h * 64448.0 / 6561.0);
        t = add(t, k4, -h * 212.0 / 729.0);
        Vec2 k5 = rhs(s + 8.0 / 9.0 * h, t);
        t = y;
        t = add(t, k1, h * 9017.0 / 3168.0);
        t = add(t, k2, -h * 355.0 / 33.0);
        t = add(t, k3, h * 46732.0 / 5247.0);
        t = add(t, k4, h * 49.0 / 176.0);
        t = add(t, k5, -h * 5103.0 / 18656.0);
        Vec2 k6 = rhs(s + h, t);
        Vec2 y5 = y;
        y5 = add(y5, k1, h * 35.0 / 384.0);
        y5 = add(y5, k3, h * 500.0 / 1113.0);
        y5 = add(y5, k4, h * 125.0 / 192.0);
        y5 = add(y5, k5, -h * 2187.0 / 6784.0);
        y5 = add(y5, k6, h * 11.0 / 84.0);
        Vec2 k7 = rhs(s + h, y5);
        Vec2 y4 = y;
        y4 = add(y4, k1, h * 5179.0 / 57600.0);
        y4 = add(y4, k3, h * 7571.0 / 16695.0);
        y4 = add(y4, k4, h * 393.0 / 640.0);
        y4 = add(y4, k5, -h * 92097.0 / 339200.0);
        y4 = add(y4, k6, h * 187.0 / 2100.0);
        y4 = add(y4, k7, h / 40.0);
        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / sc);
        }
        if (err <= 1.0) {
            s += h;
            y = y5;
            rejected_in_row = 0;
        } else if (++rejected_in_row > 60) {
            throw non_convergence_error(
                "dopri5: step size collapse near z = " + std::to_string((za + s * dir).real()) +
                    (std::signbit((za + s * dir).imag()) ? "-" : "+") +
                    std::to_string(std::abs((za + s * dir).imag())) + "i",
                y[0], y[1]);
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::clamp(fac, 0.2, 5.0);
        h = std::min(h, max_step);
        if (h < 1e-15 * L)
            throw non_convergence_error("dopri5: step underflow", y[0], y[1]);
    }
    return y;
}

}  // namespace detail

// integrate y'' + p1 y' + p0 y = 0 along the path; returns (y, y') at the end
inline Vec2 integrate_scalar(const ScalarODE &ode, const ComplexPath &path, cplx y0, cplx y0p,
                             double rtol = 1e-11) {
    path.validate();
    Vec2 y{y0, y0p};
    auto f = [&](cplx z, const Vec2 &v) {
        cplx acc = -ode.p0(z) * v[0];
        if (ode.p1) acc -= ode.p1(z) * v[1];
        return Vec2{v[1], acc};
    };
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
        y = detail::dopri5_segment(f, path.waypoints[i], path.waypoints[i + 1], y, rtol,
                                   path.max_step);
    return y;
}

// integrate Y' = A(z) Y for a 2-vector Y along the path
inline Vec2 integrate_system(const std::function<Mat2(cplx)> &A, const ComplexPath &path, Vec2 y0,
                             double rtol = 1e-11) {
    path.validate();
    auto f = [&](cplx z, const Vec2 &v) {
        Mat2 a = A(z);
        return Vec2{a.m00 * v[0] + a.m01 * v[1], a.m10 * v[0] + a.m11 * v[1]};
    };
    Vec2 y = y0;
    for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i)
        y = detail::dopri5_segment(f, path.waypoints[i], path.waypoints[i + 1], y, rtol,
                                   path.max_step);
    return y;
}

// |y'' + q y| at the given points, y'' by Richardson-extrapolated central
// differences of the sampler (default analytic step 2e-3, three levels)
inline std::vector<double> residual_scalar(const std::function<cplx(cplx)> &sampler,
                                           const std::function<cplx(cplx)> &q,
                                           const std::vector<cplx> &points, double step = 2e-3) {
    std::vector<double> out;
    out.reserve(points.size());
    for (cplx u : points) {
        cplx y = sampler(u);
        auto d2 = [&](double hh) {
            return (sampler(u + hh) - 2.0 * y + sampler(u - hh)) / (hh * hh);
        };
        cplx D1 = d2(step), D2 = d2(step / 2.0), D3 = d2(step / 4.0);
        cplx R1 = (4.0 * D2 - D1) / 3.0;
        cplx R2 = (4.0 * D3 - D2) / 3.0;
        cplx ypp = (16.0 * R2 - R1) / 15.0;
        out.push_back(std::abs(ypp + q(u) * y));
    }
    return out;
}

struct MonodromyResult {
    Mat2 m;           // continuation operator on (y, y') data at the base point
    cplx singularity; // the point the loop encircles
    bool near_defective = false;
};

// rectangular counterclockwise loop of half-width d around s, entered from
// base via a straight approach; >= min_steps sample points on the rectangle
inline ComplexPath rectangle_loop(cplx base, cplx s, double d, int min_steps = 256) {
    ComplexPath path;
    std::vector<cplx> corners{s + cplx(d, -d), s + cplx(d, d), s + cplx(-d, d), s + cplx(-d, -d)};
    // start at the corner closest to base
    int c0 = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(corners[i] - base) < std::abs(corners[c0] - base)) c0 = i;
    path.waypoints.push_back(base);
    int per_side = std::max(min_steps / 4, 8);
    for (int side = 0; side < 4; ++side) {
        cplx a = corners[(c0 + side) % 4], b = corners[(c0 + side + 1) % 4];
        for (int i = 0; i < per_side; ++i)
            path.waypoints.push_back(a + (b - a) * (double(i) / per_side));
    }
    path.waypoints.push_back(corners[c0]);
    path.waypoints.push_back(base);
    path.max_step = std::max(d / 8.0, 1e-3);
    return path;
}

// continuation matrix around one singularity in the standard (y, y') frame
inline MonodromyResult monodromy_loop(const ScalarODE &ode, cplx base, cplx s, double d,
                                      double rtol = 1e-11, int min_steps = 256) {
    ComplexPath loop = rectangle_loop(base, s, d, min_steps);
    Vec2 c1 = integrate_scalar(ode, loop, 1.0, 0.0, rtol);
    Vec2 c2 = integrate_scalar(ode, loop, 0.0, 1.0, rtol);
    MonodromyResult r;
    r.m = Mat2{c1[0], c2[0], c1[1], c2[1]};
    r.singularity = s;
    auto ev = r.m.eigenvalues();
    double sep = std::abs(ev[0] - ev[1]);
    double off = std::abs(r.m.m01) + std::abs(r.m.m10);
    r.near_defective = sep < 1e-6 * (std::abs(ev[0]) + std::abs(ev[1])) && off > 1e-6 * r.m.norm();
    return r;
}

}  // namespace darboux

#endif
