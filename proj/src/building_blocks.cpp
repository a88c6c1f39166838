#include "tsl/building_blocks.hpp"

#include <vector>

namespace tsl {

Vec2 eval_v(const Vec2& x)
{
    double a1 = std::fabs(x.x1), a2 = std::fabs(x.x2);
    if (0.5 > a1 && a1 > a2) return {0.0, 4.0 * x.x1};
    if (0.5 > a2 && a2 > a1) return {-4.0 * x.x2, 0.0};
    return {0.0, 0.0};
}

namespace {

// Offset of z from the nearest even-sum integer pair, or false if z lies in an empty square
// or on a square boundary.
bool local_coordinates(const Vec2& z, Vec2& d)
{
    double m1 = std::floor(z.x1 + 0.5), m2 = std::floor(z.x2 + 0.5);
    d = {z.x1 - m1, z.x2 - m2};
    if (d.x1 == -0.5 || d.x2 == -0.5) return false;
    long long parity = static_cast<long long>(m1) + static_cast<long long>(m2);
    return (parity & 1) == 0;
}

}  // namespace

Vec2 eval_u(int lambda, const Vec2& x)
{
    Vec2 z{std::ldexp(x.x1, lambda), std::ldexp(x.x2, lambda)};
    Vec2 d;
    if (!local_coordinates(z, d)) return {0.0, 0.0};
    Vec2 v = eval_v(d);
    return {std::ldexp(v.x1, -lambda), std::ldexp(v.x2, -lambda)};
}

URegion u_region(int level, const Vec2& x)
{
    Vec2 z{std::ldexp(x.x1, level), std::ldexp(x.x2, level)};
    URegion r{static_cast<std::int64_t>(std::floor(z.x1 + 0.5)), static_cast<std::int64_t>(std::floor(z.x2 + 0.5)), 0};
    Vec2 d;
    if (!local_coordinates(z, d)) return r;
    double a1 = std::fabs(d.x1), a2 = std::fabs(d.x2);
    r.sector = a1 > a2 ? 1 : (a2 > a1 ? 2 : 0);
    return r;
}

Vec2 eval_u_region(int level, const URegion& r, const Vec2& x)
{
    if (r.sector == 0) return {0.0, 0.0};
    Vec2 d{std::ldexp(x.x1, level) - double(r.m1), std::ldexp(x.x2, level) - double(r.m2)};
    Vec2 v = r.sector == 1 ? Vec2{0.0, 4.0 * d.x1} : Vec2{-4.0 * d.x2, 0.0};
    return {std::ldexp(v.x1, -level), std::ldexp(v.x2, -level)};
}

Vec2 eval_b(int lambda, double t, const Vec2& x, const ExactOptions& opt)
{
    if (!(t >= 0.0 && t <= 2.0)) throw DomainError("eval_b: time outside [0,2]");
    if (t == 1.0) return {0.0, 0.0};
    StageIndex s = stage_of(t);
    double sign = opt.orientation_sign() * (s.side == Side::Backward ? opt.reflection_sign : 1);
    Vec2 u = eval_u(lambda, {std::ldexp(x.x1, s.k), std::ldexp(x.x2, s.k)});
    return {sign * u.x1, sign * u.x2};
}

Vec2 eval_trunc(const ExactSpec& spec, double t, const Vec2& x, const ExactOptions& opt)
{
    if (!(t >= 0.0 && t <= 2.0)) throw DomainError("eval_trunc: time outside [0,2]");
    if (in_truncation_window(spec, t)) return {0.0, 0.0};
    return eval_b(spec.lambda, t, x, opt);
}

double stream_function(int level, const Vec2& x)
{
    Vec2 z{std::ldexp(x.x1, level), std::ldexp(x.x2, level)};
    Vec2 d;
    double psi = 0.5;
    if (local_coordinates(z, d)) {
        double r = std::max(std::fabs(d.x1), std::fabs(d.x2));
        psi = 2.0 * r * r;
    }
    return std::ldexp(psi, -2 * level);
}

double sup_norm(int lambda) { return std::ldexp(1.0, 1 - lambda); }

double tv_estimate(const std::function<Vec2(const Vec2&)>& field, const Rect& region, double h)
{
    int n1 = static_cast<int>(std::lround((region.x1 - region.x0) / h));
    int n2 = static_cast<int>(std::lround((region.y1 - region.y0) / h));
    if (n1 < 2 || n2 < 2) return 0.0;
    std::vector<Vec2> s(static_cast<std::size_t>(n1) * n2);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i)
            s[std::size_t(j) * n1 + i] = field({region.x0 + (i + 0.5) * h, region.y0 + (j + 0.25) * h});
    double total = 0.0;
    for (int j = 0; j < n2; ++j) {
        double row = 0.0;
        for (int i = 0; i < n1; ++i) {
            // forward differences, mirrored to backward ones on the last row/column
            int ia = i + 1 < n1 ? i : i - 1, ja = j + 1 < n2 ? j : j - 1;
            Vec2 d1 = s[std::size_t(j) * n1 + ia + 1] - s[std::size_t(j) * n1 + ia];
            Vec2 d2 = s[std::size_t(ja + 1) * n1 + i] - s[std::size_t(ja) * n1 + i];
            row += std::sqrt(d1.x1 * d1.x1 + d1.x2 * d1.x2 + d2.x1 * d2.x1 + d2.x2 * d2.x2);
        }
        total += row;
    }
    return total * h;
}

}  // namespace tsl
