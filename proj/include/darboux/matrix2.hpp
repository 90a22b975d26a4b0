#ifndef DARBOUX_MATRIX2_HPP
#define DARBOUX_MATRIX2_HPP

#include <array>
#include <cmath>

#include "darboux/numeric.hpp"

namespace darboux {

using Vec2 = std::array<cplx, 2>;

struct Mat2 {
    cplx m00{0.0}, m01{0.0}, m10{0.0}, m11{0.0};

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    cplx trace() const { return m00 + m11; }
    cplx det() const { return m00 * m11 - m01 * m10; }

    Mat2 inverse() const {
        cplx d = det();
        if (std::abs(d) < 1e-300) throw contract_error("Mat2: singular matrix");
        return {m11 / d, -m01 / d, -m10 / d, m00 / d};
    }
    // eigenvalues, |first| <= |second|
    std::array<cplx, 2> eigenvalues() const {
        cplx t = trace(), disc = std::sqrt(t * t - 4.0 * det());
        cplx l1 = 0.5 * (t + disc), l2 = 0.5 * (t - disc);
        if (std::abs(l1) > std::abs(l2)) std::swap(l1, l2);
        return {l1, l2};
    }
    double norm() const {
        return std::abs(m00) + std::abs(m01) + std::abs(m10) + std::abs(m11);
    }

    friend Mat2 operator*(const Mat2 &a, const Mat2 &b) {
        return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
    }
    friend Vec2 operator*(const Mat2 &a, const Vec2 &v) {
        return {a.m00 * v[0] + a.m01 * v[1], a.m10 * v[0] + a.m11 * v[1]};
    }
    friend Mat2 operator*(cplx s, const Mat2 &a) {
        return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
    }
    friend Mat2 operator+(const Mat2 &a, const Mat2 &b) {
        return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
    }
    friend Mat2 operator-(const Mat2 &a, const Mat2 &b) {
        return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
    }
};

}  // namespace darboux

#endif
