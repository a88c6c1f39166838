#pragma once

#include <algorithm>
#include <vector>

#include "tsl/building_blocks.hpp"
#include "tsl/geometry.hpp"

namespace tsl {

/// Position on the level square max(|x1|,|x2|) = r, by arclength from the corner (r,-r)
/// in counterclockwise order.
template <class T>
struct PerimeterPosition {
    T r;
    T s;
};

template <class T>
PerimeterPosition<T> perimeter_position(const Point2<T>& p)
{
    T a1 = sabs(p.x1), a2 = sabs(p.x2);
    T r = a1 > a2 ? a1 : a2;
    T s;
    if (p.x1 == r && p.x2 < r) s = p.x2 + r;
    else if (p.x2 == r) s = r + r + (r - p.x1);
    else if (p.x1 == -r) s = T(4) * r + (r - p.x2);
    else s = T(6) * r + (p.x1 + r);
    return {r, s};
}

template <class T>
Point2<T> perimeter_point(const PerimeterPosition<T>& pp)
{
    const T& r = pp.r;
    const T& s = pp.s;
    if (s < r + r) return {r, s - r};
    if (s < T(4) * r) return {T(3) * r - s, r};
    if (s < T(6) * r) return {-r, T(5) * r - s};
    return {s - T(7) * r, -r};
}

/// Flow of v for time t: arclength 4 r t along the level square, period 2.
/// Identity for r = 0 or r >= 1/2.  Exact for Dyadic inputs.
template <class T>
Point2<T> flow_v(const T& t, const Point2<T>& x, Orientation o = Orientation::Counterclockwise)
{
    const T half = scale2(T(1), -1);
    T a1 = sabs(x.x1), a2 = sabs(x.x2);
    T r = a1 > a2 ? a1 : a2;
    if (r == T(0) || !(r < half)) return x;
    PerimeterPosition<T> pp = perimeter_position(x);
    T tt = o == Orientation::Counterclockwise ? t : -t;
    T total = pp.s + T(4) * r * tt;
    T period = T(8) * r;
    pp.s = total - T(sfloor_div(total, period)) * period;
    return perimeter_point(pp);
}

/// Flow of the periodised field u_level for v-time t (time is unchanged by the rescaling).
template <class T>
Point2<T> flow_u(int level, const T& t, const Point2<T>& x, Orientation o = Orientation::Counterclockwise)
{
    const T half = scale2(T(1), -1);
    Point2<T> z{scale2(x.x1, level), scale2(x.x2, level)};
    std::int64_t m1 = ifloor(z.x1 + half), m2 = ifloor(z.x2 + half);
    Point2<T> d{z.x1 - T(m1), z.x2 - T(m2)};
    if (d.x1 == -half || d.x2 == -half || ((m1 + m2) & 1) != 0) return x;
    Point2<T> p = flow_v(t, d, o);
    return {scale2(T(m1) + p.x1, -level), scale2(T(m2) + p.x2, -level)};
}

/// Time interval on which the exact field equals sign * u_lambda(2^k x).
template <class T>
struct StagePiece {
    int k;
    int sign;  ///< +1 forward, reflection sign on backward stages (orientation not included)
    T t0, t1;
};

/// Pieces of nonzero field intersecting [a, b] (a <= b), clipped, in increasing time.
template <class T>
std::vector<StagePiece<T>> pieces_between(const ExactSpec& spec, const T& a, const T& b, const ExactOptions& opt)
{
    const T one(1);
    std::vector<StagePiece<T>> out;
    if (!(a <= b)) return out;
    if (a < T(0) || b > T(2)) throw DomainError("flow time outside [0,2]");
    if (spec.trunc == Truncation::None && !(b < one) && !(a > one))
        throw SingularTimeError("flow of the untruncated field across t = 1");
    if (a < one) {
        int kmax = spec.trunc == Truncation::None ? 1 << 20 : spec.forward_stages();
        for (int k = 0; k < kmax; ++k) {
            T t0 = one - scale2(one, -k), t1 = one - scale2(one, -k - 1);
            if (!(t0 < b)) break;
            if (!(t1 > a)) continue;
            out.push_back({k, 1, t0 < a ? a : t0, t1 < b ? t1 : b});
        }
    }
    if (b > one) {
        int kstart = spec.trunc == Truncation::None ? stage_of(a).k : spec.backward_stages() - 1;
        for (int k = kstart; k >= 0; --k) {
            T t0 = one + scale2(one, -k - 1), t1 = one + scale2(one, -k);
            if (!(t1 > a) || !(t0 < b)) continue;
            out.push_back({k, opt.reflection_sign, t0 < a ? a : t0, t1 < b ? t1 : b});
        }
    }
    return out;
}

/// Exact flow of an exact field from time s to time t.
template <class T>
Point2<T> flow_field(const ExactSpec& spec, const T& s, const T& t, const Point2<T>& x, const ExactOptions& opt = {})
{
    if (s == t) {
        if (spec.trunc == Truncation::None && s == T(1)) throw SingularTimeError("flow query at t = 1");
        return x;
    }
    bool fwd = s < t;
    auto ps = fwd ? pieces_between(spec, s, t, opt) : pieces_between(spec, t, s, opt);
    if (!fwd) std::reverse(ps.begin(), ps.end());
    Point2<T> y = x;
    for (const auto& p : ps) {
        T dur = scale2(p.t1 - p.t0, p.k);
        if (!fwd) dur = -dur;
        if (p.sign < 0) dur = -dur;
        y = flow_u(spec.lambda + p.k, dur, y, opt.orientation);
    }
    return y;
}

template <class T>
Point2<T> inverse_flow(const ExactSpec& spec, const T& s, const T& t, const Point2<T>& x, const ExactOptions& opt = {})
{
    return flow_field(spec, t, s, x, opt);
}

/// Stage boundary times in [0,2] at which the exact field changes (sorted, including 0 and 2).
std::vector<double> stage_boundaries(const ExactSpec& spec, int kmax_untruncated = 12);

}  // namespace tsl

namespace tsl {

struct RigidityReport {
    std::int64_t cells = 0;
    std::int64_t filled_cells = 0;
    std::int64_t mismatches = 0;
};

/// Checks, at the centres of all cells of level lambda + extra_levels in one period window, that
/// the flow of b_lambda over [0, 1/2] is a quarter rotation of each filled S2 square of level
/// lambda about its centre and the identity on empty squares.
RigidityReport check_rigidity(int lambda, int extra_levels, Orientation o = Orientation::Counterclockwise);

}  // namespace tsl
