/// @file test_exact_flow.cpp
/// @brief Closed-form flows: level-square transport, stage composition, group property,
///        rigid quarter rotations and measure preservation.

#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "tsl/exact_flow.hpp"

using namespace tsl;

namespace {

Dyadic dy(std::int64_t n, int e) { return Dyadic::from_parts(n, e); }

DyadicPoint random_point(std::mt19937_64& rng, int bits, double range)
{
    std::int64_t m = static_cast<std::int64_t>(std::ldexp(range, bits));
    std::uniform_int_distribution<std::int64_t> U(-m, m);
    // odd numerators keep points off grid lines and diagonals of coarser levels
    return {dy(2 * U(rng) + 1, bits + 1), dy(2 * U(rng) + 1, bits + 2)};
}

}  // namespace

TEST_CASE("flow_v examples")
{
    DyadicPoint x{dy(1, 2), Dyadic(0)};
    CHECK(flow_v(dy(1, 1), x) == DyadicPoint{Dyadic(0), dy(1, 2)});
    CHECK(flow_v(Dyadic(2), x) == x);
    CHECK(flow_v(dy(1, 2), x) == DyadicPoint{dy(1, 2), dy(1, 2)});
    DyadicPoint out{dy(11, 4), dy(1, 3)};
    CHECK(flow_v(dy(3, 2), out) == out);
    CHECK(flow_v(dy(1, 1), x, Orientation::Clockwise) == DyadicPoint{Dyadic(0), dy(-1, 2)});
    Vec2 d = flow_v(0.5, Vec2{0.25, 0.0});
    CHECK(d.x1 == doctest::Approx(0.0));
    CHECK(d.x2 == doctest::Approx(0.25));
}

TEST_CASE("flow_v period 2, constant speed, dyadic/double agreement")
{
    std::mt19937_64 rng(1);
    for (int n = 0; n < 3000; ++n) {
        DyadicPoint x = random_point(rng, 8, 0.6);
        Dyadic t = dy(std::int64_t(rng() % 4096) - 2048, 9);
        CHECK(flow_v(t + Dyadic(2), x) == flow_v(t, x));
        CHECK(flow_v(-t, flow_v(t, x)) == x);
        DyadicPoint y = flow_v(t, x);
        Vec2 yd = flow_v(t.to_double(), to_vec(x));
        CHECK(std::fabs(yd.x1 - y.x1.to_double()) < 1e-12);
        CHECK(std::fabs(yd.x2 - y.x2.to_double()) < 1e-12);
        // arclength advance equals 4 r t modulo the perimeter
        auto p0 = perimeter_position(x);
        auto p1 = perimeter_position(y);
        CHECK(p0.r == p1.r);
        if (p0.r < dy(1, 1)) {
            Dyadic adv = p1.s - p0.s - Dyadic(4) * p0.r * t;
            CHECK(floor_div(adv, Dyadic(8) * p0.r) * (Dyadic(8) * p0.r) == adv);
        }
    }
}

TEST_CASE("flow_field examples and errors")
{
    ExactSpec b0 = ExactSpec::building_block(0);
    DyadicPoint x{dy(1, 2), Dyadic(0)};
    CHECK(flow_field(b0, Dyadic(0), dy(1, 1), x) == DyadicPoint{Dyadic(0), dy(1, 2)});
    CHECK_THROWS_AS(flow_field(b0, Dyadic(0), Dyadic(1), x), SingularTimeError);
    CHECK_THROWS_AS(flow_field(b0, dy(1, 1), dy(3, 1), x), SingularTimeError);
    CHECK_THROWS_AS(flow_field(b0, Dyadic(1), Dyadic(1), x), SingularTimeError);
    ExactSpec s1 = ExactSpec::sym(0, 1);
    DyadicPoint z{dy(3, 4), dy(5, 5)};
    CHECK(flow_field(s1, Dyadic(1), dy(7, 3), z) == z);
    CHECK(flow_field(s1, Dyadic(1), dy(45, 5), z) == z);
    CHECK(flow_field(s1, Dyadic(1), dy(1, 1), z) == z);
    CHECK(flow_field(s1, Dyadic(1), dy(7, 5), z) != z);
    CHECK(flow_field(b0, dy(1, 3), dy(1, 3), z) == z);
}

TEST_CASE("group property and inverses")
{
    std::mt19937_64 rng(2);
    std::vector<ExactSpec> specs{ExactSpec::sym(0, 2), ExactSpec::asym(0, 2), ExactSpec::asym(1, 1), ExactSpec::sym(2, 3)};
    for (const auto& spec : specs)
        for (int n = 0; n < 400; ++n) {
            DyadicPoint x = random_point(rng, 10, 1.0);
            Dyadic t[3];
            for (auto& ti : t) ti = dy(std::int64_t(rng() % 1025), 9);
            CHECK(flow_field(spec, t[0], t[2], x) == flow_field(spec, t[1], t[2], flow_field(spec, t[0], t[1], x)));
            CHECK(inverse_flow(spec, t[0], t[1], flow_field(spec, t[0], t[1], x)) == x);
        }
    // untruncated field on one side of t = 1
    ExactSpec b1 = ExactSpec::building_block(1);
    for (int n = 0; n < 400; ++n) {
        DyadicPoint x = random_point(rng, 10, 1.0);
        Dyadic a = dy(std::int64_t(rng() % 511), 9), b = dy(std::int64_t(rng() % 511), 9), c = dy(std::int64_t(rng() % 511), 9);
        CHECK(flow_field(b1, a, c, x) == flow_field(b1, b, c, flow_field(b1, a, b, x)));
        Dyadic a2 = Dyadic(2) - a, c2 = Dyadic(2) - c;
        CHECK(inverse_flow(b1, a2, c2, flow_field(b1, a2, c2, x)) == x);
    }
    // truncated flows through s = 1
    for (int n = 0; n < 200; ++n) {
        DyadicPoint x = random_point(rng, 10, 1.0);
        ExactSpec s = ExactSpec::sym(0, 2);
        CHECK(flow_field(s, Dyadic(0), Dyadic(1), flow_field(s, Dyadic(1), Dyadic(0), x)) == x);
    }
}

TEST_CASE("symmetric truncation returns every point at t = 2")
{
    std::mt19937_64 rng(4);
    for (int q = 1; q <= 4; ++q)
        for (int n = 0; n < 500; ++n) {
            DyadicPoint x = random_point(rng, 12, 2.0);
            CHECK(flow_field(ExactSpec::sym(0, q), Dyadic(0), Dyadic(2), x) == x);
            CHECK(flow_field(ExactSpec::sym(1, q), Dyadic(0), Dyadic(2), x) == x);
        }
}

TEST_CASE("rigidity: filled squares rotate by a quarter turn, empty squares are fixed")
{
    for (int lambda = 0; lambda <= 2; ++lambda)
        for (auto o : {Orientation::Counterclockwise, Orientation::Clockwise}) {
            RigidityReport r = check_rigidity(lambda, 4, o);
            CHECK(r.cells == (std::int64_t(1) << (2 * (1 + 4))));
            CHECK(r.mismatches == 0);
            CHECK(r.filled_cells * 2 == r.cells);
        }
}

TEST_CASE("measure preservation at stage boundaries")
{
    for (int lambda = 0; lambda <= 1; ++lambda) {
        ExactSpec spec = ExactSpec::asym(lambda, 2);
        int level = lambda + 6;
        int n = period_cells(lambda, level);
        Dyadic per = Dyadic::pow2(1 - lambda);
        for (double tc : stage_boundaries(spec)) {
            Dyadic t = Dyadic::from_double(tc);
            std::set<std::pair<std::int64_t, std::int64_t>> hit;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    DyadicPoint c{dy(2 * i + 1, level + 1), dy(2 * j + 1, level + 1)};
                    DyadicPoint y = flow_field(spec, Dyadic(0), t, c);
                    // reduce to the window and convert back to a cell index
                    Dyadic y1 = y.x1 - Dyadic(floor_div(y.x1, per)) * per, y2 = y.x2 - Dyadic(floor_div(y.x2, per)) * per;
                    Dyadic a = y1.scaled(level + 1), b = y2.scaled(level + 1);
                    REQUIRE(a.exponent() == 0);
                    REQUIRE(b.exponent() == 0);
                    CHECK(a.numerator() % 2 != 0);
                    hit.insert({a.numerator() / 2, b.numerator() / 2});
                }
            CHECK(hit.size() == std::size_t(n) * n);
        }
    }
}
