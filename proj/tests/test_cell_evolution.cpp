/// @file test_cell_evolution.cpp
/// @brief Checkpoint engine against the pointwise oracle, mixing identities, truncation
///        dichotomy, observation (O) and the dictionary gap.

#include "doctest.h"

#include "tsl/cell_evolution.hpp"

using namespace tsl;

namespace {

Dyadic one_minus(int k) { return Dyadic(1) - Dyadic::pow2(-k); }
Dyadic one_plus(int k) { return Dyadic(1) + Dyadic::pow2(-k); }

CellGrid complement(CellGrid g)
{
    for (auto& v : g.values()) v = Dyadic(1) - v;
    return g;
}

std::vector<Dyadic> checkpoints(int depth)
{
    std::vector<Dyadic> ts;
    for (int k = 0; k <= depth; ++k) ts.push_back(one_minus(k));
    ts.push_back(Dyadic(1));
    for (int k = depth; k >= 0; --k) ts.push_back(one_plus(k));
    return ts;
}

}  // namespace

TEST_CASE("checkpoint times")
{
    CHECK(is_checkpoint(Dyadic(0)));
    CHECK(is_checkpoint(Dyadic(2)));
    CHECK(is_checkpoint(one_minus(5)));
    CHECK(is_checkpoint(one_plus(3)));
    CHECK_FALSE(is_checkpoint(Dyadic::from_parts(5, 3) + Dyadic::pow2(-6)));
    CHECK_THROWS_AS(solution_grid(0, SolutionVariant::unmixing(), Dyadic::from_parts(3, 3)), AlignmentError);
}

TEST_CASE("half-time chessboard and the mixing identities")
{
    for (auto o : {Orientation::Counterclockwise, Orientation::Clockwise}) {
        EvolutionOptions opt;
        opt.exact.orientation = o;
        for (int lambda = 0; lambda <= 2; ++lambda)
            for (int k = 0; k <= 6; ++k) {
                CellGrid g = solution_grid(lambda, SolutionVariant::unmixing(), one_minus(k), opt);
                CHECK(g.level() == lambda + k);
                CellGrid fine = chessboard_grid(lambda + k, lambda + k, lambda);
                CHECK(g == (k % 2 == 0 ? fine : complement(fine)));
            }
    }
}

TEST_CASE("unmixing and symmetric truncation return to the datum at t = 2")
{
    for (int lambda = 0; lambda <= 2; ++lambda) {
        CellGrid datum = chessboard_grid(lambda, lambda, lambda);
        CHECK(l1_per_area(solution_grid(lambda, SolutionVariant::unmixing(), Dyadic(2)), datum) == Dyadic(0));
        for (int q = 1; q <= 4; ++q)
            CHECK(l1_per_area(solution_grid(lambda, SolutionVariant::sym(q), Dyadic(2)), datum) == Dyadic(0));
    }
}

TEST_CASE("mixed solution")
{
    bool limit = true;
    CellGrid g = solution_grid(0, SolutionVariant::mixed(), Dyadic::from_parts(3, 1), {}, &limit);
    CHECK_FALSE(limit);
    for (const auto& v : g.values()) CHECK(v == Dyadic::pow2(-1));
    solution_grid(0, SolutionVariant::unmixing(), Dyadic(1), {}, &limit);
    CHECK(limit);
    CHECK(pointwise_density(0, SolutionVariant::unmixing(), 1.0, Vec2{0.3, 0.2}).limit_value);
}

TEST_CASE("asymmetric truncation at t = 2")
{
    for (int lambda = 0; lambda <= 1; ++lambda)
        for (int q = 1; q <= 4; ++q) {
            CellGrid g = solution_grid(lambda, SolutionVariant::asym(q), Dyadic(2));
            int fine = lambda + q + 2;
            REQUIRE(g.level() == fine);
            // every aligned 2x2 block of the finest cells is a checker pattern
            bool checker = true;
            for (int j = 0; j < g.ny(); j += 2)
                for (int i = 0; i < g.nx(); i += 2)
                    checker = checker && g(i, j) == g(i + 1, j + 1) && g(i + 1, j) == g(i, j + 1) &&
                              g(i, j) + g(i + 1, j) == Dyadic(1);
            CHECK(checker);
            Dictionary dict{lambda, lambda, fine - 1};
            CellGrid half(lambda, 0, 0, period_cells(lambda, lambda), period_cells(lambda, lambda), Dyadic::pow2(-1));
            CHECK(weak_star_gap(g, half, dict) == Dyadic(0));
            CHECK(weak_star_gap(g, half, Dictionary{lambda, fine, fine}) == Dyadic::pow2(-1));
            CHECK(l1_per_area(solution_grid(lambda, SolutionVariant::sym(q), Dyadic(2)), g) == Dyadic::pow2(-1));
            // backward quarter turns complement the fine chessboard on half of the window, so the
            // t = 2 pattern is not the global fine chessboard
            CHECK(l1_per_area(g, chessboard_grid(fine, fine, lambda)) == Dyadic::pow2(-1));
        }
}

TEST_CASE("engine agrees with the pointwise flow oracle")
{
    EvolutionOptions opt;
    opt.k_max = 6;
    std::vector<SolutionVariant> variants{SolutionVariant::unmixing(), SolutionVariant::sym(1), SolutionVariant::sym(3),
                                          SolutionVariant::asym(1), SolutionVariant::asym(2)};
    for (int lambda = 0; lambda <= 2; ++lambda)
        for (const auto& v : variants)
            for (const Dyadic& t : checkpoints(6)) {
                if (v.kind == VariantKind::Unmixing && t == Dyadic(1)) continue;
                CellGrid g = solution_grid(lambda, v, t, opt);
                CellGrid oracle = sample_density_grid(lambda, v, t, g.level(), opt.exact);
                CHECK(g == oracle);
                CHECK(total_mass(g) == Dyadic::pow2(1 - 2 * lambda));
            }
}

TEST_CASE("truncated density is frozen on the truncation window")
{
    Vec2 x{0.3125, 0.8125};
    for (int q = 1; q <= 3; ++q) {
        auto frozen = pointwise_density(0, SolutionVariant::sym(q), 1.0 - std::ldexp(1.0, -q), x).value;
        for (double t : {1.0 - std::ldexp(1.0, -q - 1), 1.0, 1.0 + std::ldexp(0.9, -q)})
            CHECK(pointwise_density(0, SolutionVariant::sym(q), t, x).value == frozen);
    }
    CHECK(pointwise_density(0, SolutionVariant::unmixing(), 0.0, Vec2{0.5, 0.25}).value == Dyadic(0));
}

TEST_CASE("observation (O)")
{
    for (auto [lambda, q] : {std::pair{0, 3}, std::pair{1, 2}, std::pair{2, 1}}) {
        auto rep = observation_O_check(lambda, q);
        CHECK(rep.size() == std::size_t(q));
        for (const auto& r : rep) CHECK(r.pass);
    }
    auto rep = observation_O_check(0, 1, 3);
    CHECK(rep.back().level == 3);
    CHECK_FALSE(rep.back().pass);
}

TEST_CASE("weak star gap")
{
    CellGrid g = solution_grid(0, SolutionVariant::unmixing(), one_minus(3));
    CHECK(weak_star_gap(g, g, Dictionary{0, 0, 3}) == Dyadic(0));
    CHECK_THROWS_AS(weak_star_gap(g, g, Dictionary{0, 0, 4}), AlignmentError);
}
