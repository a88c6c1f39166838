/// @file test_building_blocks.cpp
/// @brief Pointwise values of v, u_lambda, b_lambda and the truncations; scaling, periodicity,
///        sup bound, weak divergence and the TV estimator.

#include "doctest.h"

#include <cmath>
#include <random>

#include "tsl/building_blocks.hpp"

using namespace tsl;

namespace {

bool same(const Vec2& a, const Vec2& b) { return a.x1 == b.x1 && a.x2 == b.x2; }

}  // namespace

TEST_CASE("eval_v examples")
{
    CHECK(same(eval_v({0.25, 0.0}), {0.0, 1.0}));
    Vec2 v = eval_v({0.1, 0.3});
    CHECK(v.x1 == doctest::Approx(-1.2));
    CHECK(v.x2 == 0.0);
    CHECK(same(eval_v({0.3, 0.3}), {0.0, 0.0}));
    CHECK(same(eval_v({0.7, 0.1}), {0.0, 0.0}));
    CHECK(same(eval_v({0.5, 0.1}), {0.0, 0.0}));
}

TEST_CASE("eval_u examples")
{
    CHECK(same(eval_u(0, {0.25, 0.0}), {0.0, 1.0}));
    CHECK(same(eval_u(1, {0.125, 0.0}), {0.0, 0.5}));
    CHECK(same(eval_u(0, {1.1, 0.05}), {0.0, 0.0}));
    // filled square centred at (1,1)
    Vec2 u = eval_u(0, {1.25, 1.0});
    CHECK(u.x1 == 0.0);
    CHECK(u.x2 == doctest::Approx(1.0));
}

TEST_CASE("eval_u periodicity and exact scaling")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int lambda = 0; lambda <= 4; ++lambda) {
        double per = std::ldexp(1.0, 1 - lambda);
        for (int n = 0; n < 2000; ++n) {
            // dyadic sample points keep the shifted evaluations exact
            Vec2 x{std::ldexp(std::round(std::ldexp(U(rng), 20)), -20), std::ldexp(std::round(std::ldexp(U(rng), 20)), -20)};
            Vec2 u = eval_u(lambda, x);
            CHECK(same(eval_u(lambda, {x.x1 + per, x.x2}), u));
            CHECK(same(eval_u(lambda, {x.x1, x.x2 + per}), u));
            Vec2 u0 = eval_u(0, {std::ldexp(x.x1, lambda), std::ldexp(x.x2, lambda)});
            CHECK(same(u, {std::ldexp(u0.x1, -lambda), std::ldexp(u0.x2, -lambda)}));
        }
    }
}

TEST_CASE("eval_b stages and reflection")
{
    CHECK(same(eval_b(0, 0.25, {0.25, 0.0}), {0.0, 1.0}));
    CHECK(same(eval_b(0, 0.6, {0.125, 0.0}), {0.0, 1.0}));
    CHECK(same(eval_b(0, 1.4, {0.125, 0.0}), {0.0, -1.0}));
    ExactOptions plus;
    plus.reflection_sign = 1;
    CHECK(same(eval_b(0, 1.4, {0.125, 0.0}, plus), {0.0, 1.0}));
    ExactOptions cw;
    cw.orientation = Orientation::Clockwise;
    CHECK(same(eval_b(0, 0.25, {0.25, 0.0}, cw), {0.0, -1.0}));
    CHECK(same(eval_b(0, 1.0, {0.25, 0.0}), {0.0, 0.0}));
    CHECK_THROWS_AS(eval_b(0, 2.5, {0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(eval_b(0, -0.1, {0.0, 0.0}), DomainError);
}

TEST_CASE("stage lookup is lower-closed")
{
    CHECK(stage_of(0.0) == StageIndex{0, Side::Forward});
    CHECK(stage_of(0.5) == StageIndex{1, Side::Forward});
    CHECK(stage_of(0.49) == StageIndex{0, Side::Forward});
    CHECK(stage_of(0.75) == StageIndex{2, Side::Forward});
    CHECK(stage_of(1.5) == StageIndex{0, Side::Backward});
    CHECK(stage_of(1.25) == StageIndex{1, Side::Backward});
    CHECK(stage_of(1.3) == StageIndex{1, Side::Backward});
    CHECK(stage_of(2.0) == StageIndex{0, Side::Backward});
    CHECK(stage_of(Dyadic::from_parts(7, 3)) == StageIndex{3, Side::Forward});
    CHECK(stage_of(Dyadic::from_parts(9, 3)) == StageIndex{2, Side::Backward});
    CHECK(stage_of(Dyadic::from_parts(17, 4)) == StageIndex{3, Side::Backward});
    CHECK(stage_of(Dyadic::from_parts(5, 3)) == StageIndex{1, Side::Forward});
}

TEST_CASE("truncated fields")
{
    ExactSpec s2 = ExactSpec::sym(0, 2), a2 = ExactSpec::asym(0, 2);
    CHECK(same(eval_trunc(s2, 1.1, {0.1, 0.0}), {0.0, 0.0}));
    CHECK(same(eval_trunc(s2, 0.6, {0.125, 0.0}), {0.0, 1.0}));
    CHECK(same(eval_trunc(a2, 0.95, {0.01, 0.0}), {0.0, 0.0}));
    CHECK(same(eval_trunc(a2, 0.8, {0.125, 0.0}), eval_b(0, 0.8, {0.125, 0.0})));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> T(0.0, 2.0), X(-1.0, 1.0);
    for (int n = 0; n < 5000; ++n) {
        double t = T(rng);
        Vec2 x{X(rng), X(rng)};
        for (const ExactSpec& s : {s2, a2, ExactSpec::sym(1, 1), ExactSpec::asym(1, 3)}) {
            Vec2 v = eval_trunc(s, t, x);
            if (in_truncation_window(s, t)) CHECK(same(v, {0.0, 0.0}));
            else CHECK(same(v, eval_b(s.lambda, t, x)));
        }
    }
}

TEST_CASE("sup bound")
{
    for (int lambda = 0; lambda <= 3; ++lambda) {
        CHECK(sup_norm(lambda) == std::ldexp(1.0, 1 - lambda));
        double mx = 0.0;
        int n = 400;
        double per = std::ldexp(1.0, 1 - lambda);
        for (double t : {0.1, 0.6, 0.8, 1.3, 1.7})
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Vec2 x{(i + 0.37) * per / n, (j + 0.11) * per / n};
                    mx = std::max(mx, norm(eval_b(lambda, t, x)));
                }
        CHECK(mx <= sup_norm(lambda));
        CHECK(mx >= 0.97 * sup_norm(lambda));
    }
}

TEST_CASE("stream function generates u")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> X(-2.0, 2.0);
    const double h = 1e-6;
    int checked = 0;
    for (int n = 0; n < 3000; ++n) {
        int level = n % 3;
        Vec2 x{X(rng), X(rng)};
        Vec2 u = eval_u(level, x);
        // skip points within 4h of a kink (diagonals or square boundaries)
        Vec2 z{std::ldexp(x.x1, level), std::ldexp(x.x2, level)};
        Vec2 d{z.x1 - std::floor(z.x1 + 0.5), z.x2 - std::floor(z.x2 + 0.5)};
        double gap = std::min({std::fabs(std::fabs(d.x1) - std::fabs(d.x2)), 0.5 - std::fabs(d.x1), 0.5 - std::fabs(d.x2)});
        if (gap < std::ldexp(4 * h, level)) continue;
        double d1 = (stream_function(level, {x.x1 + h, x.x2}) - stream_function(level, {x.x1 - h, x.x2})) / (2 * h);
        double d2 = (stream_function(level, {x.x1, x.x2 + h}) - stream_function(level, {x.x1, x.x2 - h})) / (2 * h);
        CHECK(-d2 == doctest::Approx(u.x1).epsilon(1e-6).scale(1.0));
        CHECK(d1 == doctest::Approx(u.x2).epsilon(1e-6).scale(1.0));
        ++checked;
    }
    CHECK(checked > 1000);
}

TEST_CASE("b is weakly divergence free")
{
    // int b . grad(phi) over one period, phi periodic; midpoint rule on a shifted grid
    for (int lambda = 0; lambda <= 1; ++lambda)
        for (double t : {0.3, 0.7, 1.2, 1.8}) {
            double per = std::ldexp(1.0, 1 - lambda);
            int n = 1024;
            double w = 2 * M_PI / per, sum = 0.0, scale = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    Vec2 x{(i + 0.5) * per / n, (j + 0.3) * per / n};
                    Vec2 g{w * std::cos(w * x.x1) * std::sin(2 * w * x.x2), 2 * w * std::sin(w * x.x1) * std::cos(2 * w * x.x2)};
                    Vec2 b = eval_b(lambda, t, x);
                    sum += dot(b, g);
                    scale += std::fabs(dot(b, g));
                }
            CHECK(std::fabs(sum) <= 2e-3 * scale);
        }
}

TEST_CASE("tv_estimate")
{
    Rect unit{0, 0, 1, 1};
    CHECK(tv_estimate([](const Vec2&) { return Vec2{1.0, -2.0}; }, unit, 1.0 / 64) == 0.0);
    CHECK(tv_estimate([](const Vec2& x) { return Vec2{3.0 * x.x1, 0.0}; }, unit, 1.0 / 128) ==
          doctest::Approx(3.0).epsilon(0.01));
    Rect sq{-0.5, -0.5, 0.5, 0.5};
    double prev = 0.0, prev_diff = 1e9;
    for (int m = 6; m <= 10; ++m) {
        double tv = tv_estimate([](const Vec2& x) { return eval_v(x); }, sq, std::ldexp(1.0, -m));
        MESSAGE("TV_h(v), h = 2^-" << m << ": " << tv);
        // absolutely continuous part 4 plus the diagonal jumps (4 in Frobenius norm; the staircase
        // of a 45-degree line inflates this by at most sqrt(2))
        CHECK(tv >= 8.0 * 0.99);
        CHECK(tv <= (4.0 + 4.0 * std::sqrt(2.0)) * 1.01);
        if (m > 6) {
            double diff = std::fabs(tv - prev);
            CHECK(diff <= prev_diff);
            prev_diff = diff;
        }
        if (m == 10) {
            // first-order convergence; the extrapolated limit matches 4 + 4 * (1 + sqrt 2) / 2, the
            // staircase weight of a 45-degree jump under forward differences
            double limit = 2 * tv - prev;
            CHECK(limit == doctest::Approx(6.0 + 2.0 * std::sqrt(2.0)).epsilon(1e-3));
        }
        prev = tv;
    }
}
