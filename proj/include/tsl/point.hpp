#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "tsl/dyadic.hpp"

namespace tsl {

template <class T>
struct Point2 {
    T x1{};
    T x2{};

    friend Point2 operator+(const Point2& a, const Point2& b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend Point2 operator-(const Point2& a, const Point2& b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend Point2 operator-(const Point2& a) { return {-a.x1, -a.x2}; }
    friend Point2 operator*(const T& s, const Point2& a) { return {s * a.x1, s * a.x2}; }
    Point2& operator+=(const Point2& b) { x1 = x1 + b.x1; x2 = x2 + b.x2; return *this; }
    friend bool operator==(const Point2& a, const Point2& b) = default;
};

using Vec2 = Point2<double>;
using DyadicPoint = Point2<Dyadic>;

inline double norm(const Vec2& v) { return std::hypot(v.x1, v.x2); }
inline double dot(const Vec2& a, const Vec2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }

inline Vec2 to_vec(const DyadicPoint& p) { return {p.x1.to_double(), p.x2.to_double()}; }
inline Vec2 to_vec(const Vec2& p) { return p; }

/// 2x2 real matrix, m[i][j] = d(out_i)/d(in_j).
struct Mat2 {
    double a11 = 1, a12 = 0, a21 = 0, a22 = 1;

    static Mat2 identity() { return {}; }
    static Mat2 zero() { return {0, 0, 0, 0}; }
    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    double frobenius() const { return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22); }
    /// Spectral norm.
    double op_norm() const
    {
        double f2 = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
        double d = det();
        double disc = std::sqrt(std::max(0.0, f2 * f2 - 4 * d * d));
        return std::sqrt(0.5 * (f2 + disc));
    }
    Mat2 inverse() const
    {
        double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
    friend Mat2 operator*(const Mat2& a, const Mat2& b)
    {
        return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
                a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
    }
    friend Mat2 operator+(const Mat2& a, const Mat2& b)
    {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
    }
    friend Mat2 operator*(double s, const Mat2& a) { return {s * a.a11, s * a.a12, s * a.a21, s * a.a22}; }
    friend Vec2 operator*(const Mat2& a, const Vec2& v)
    {
        return {a.a11 * v.x1 + a.a12 * v.x2, a.a21 * v.x1 + a.a22 * v.x2};
    }
};

// Scalar shims so geometry and exact flows can be written once for double and Dyadic.
inline std::int64_t ifloor(double x) { return static_cast<std::int64_t>(std::floor(x)); }
inline std::int64_t ifloor(const Dyadic& x) { return x.floor(); }
inline double scale2(double x, int k) { return std::ldexp(x, k); }
inline Dyadic scale2(const Dyadic& x, int k) { return x.scaled(k); }
inline double sabs(double x) { return std::fabs(x); }
inline Dyadic sabs(const Dyadic& x) { return abs(x); }
inline double to_real(double x) { return x; }
inline double to_real(const Dyadic& x) { return x.to_double(); }
inline std::int64_t sfloor_div(double a, double b) { return ifloor(a / b); }
inline std::int64_t sfloor_div(const Dyadic& a, const Dyadic& b) { return floor_div(a, b); }

}  // namespace tsl
