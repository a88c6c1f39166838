/// @file test_perturbed_transport.cpp
/// @brief Perturbed fields, composed flows, push-forward densities and their certificates.

#include "doctest.h"

#include <cmath>
#include <random>

#include "tsl/exact_flow.hpp"
#include "tsl/perturbed_transport.hpp"

using namespace tsl;

namespace {

SmoothFieldDef field(ProfileKind k, double strength)
{
    SmoothFieldParams p;
    p.profile = k;
    p.strength = strength;
    return builtin_field(p);
}

PerturbedSpec spec(int lambda, SolutionVariant v, const SmoothFieldDef& w, double h = 1e-3)
{
    PerturbedSpec s;
    s.lambda = lambda;
    s.branch = v;
    s.w = w;
    s.flow.h = h;
    return s;
}

std::vector<Vec2> seeded(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec2> out;
    for (int i = 0; i < n; ++i) out.push_back({U(rng), U(rng)});
    return out;
}

}  // namespace

TEST_CASE("w = 0 reduces to the exact field")
{
    SmoothFieldDef zero = field(ProfileKind::Zero, 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> T(0.0, 2.0);
    for (int lambda : {0, 1, 2}) {
        PerturbedSpec s = spec(lambda, SolutionVariant::unmixing(), zero);
        for (const Vec2& x : seeded(200, lambda)) {
            double t = T(rng);
            CHECK(eval_perturbed_field(s, t, x) == eval_b(lambda, t, x));
        }
    }
}

TEST_CASE("inside the truncation window only w remains")
{
    SmoothFieldDef w = field(ProfileKind::Swirl, 1.0);
    PerturbedSpec s = spec(0, SolutionVariant::sym(2), w);
    for (const Vec2& x : seeded(20, 3)) {
        Vec2 v = eval_perturbed_field(s, 1.1, x);
        CHECK(norm(v - w.value(1.1, x)) < 1e-15);
    }
    PerturbedSpec a = spec(0, SolutionVariant::asym(2), w);
    CHECK(norm(eval_perturbed_field(a, 0.95, {0.3, 0.6}) - w.value(0.95, {0.3, 0.6})) < 1e-15);
}

TEST_CASE("Lp distance: zero-field oracle and halving")
{
    LpOptions o;
    o.ny = 2048;
    o.nt = 128;
    // int |u_lambda| = (2/3) 2^-lambda per unit area, |u_lambda|^2 averages 4^-lambda
    auto zero = lp_distance_table(field(ProfileKind::Zero, 0.0), {0, 1, 2, 3}, {1, 2}, o);
    for (const LpResult& r : zero) {
        double exact = r.p == 1 ? (4.0 / 3.0) * std::ldexp(1.0, -r.lambda) : std::sqrt(2.0) * std::ldexp(1.0, -r.lambda);
        CHECK(r.distance == doctest::Approx(exact).epsilon(0.01));
        CHECK(r.distance <= r.bound);
    }
    for (ProfileKind k : {ProfileKind::Swirl, ProfileKind::Compression}) {
        auto tab = lp_distance_table(field(k, k == ProfileKind::Swirl ? 1.0 : 0.5), {2, 3, 4}, {1}, o);
        for (std::size_t i = 0; i + 1 < tab.size(); ++i) {
            double ratio = tab[i + 1].distance / tab[i].distance;
            CHECK(ratio == doctest::Approx(0.5).epsilon(0.15));
        }
        for (const LpResult& r : tab) {
            CHECK(r.distance <= r.bound);
            CHECK(r.distance <= r.bound_sharp);
        }
    }
}

TEST_CASE("composed flow")
{
    SmoothFieldDef zero = field(ProfileKind::Zero, 0.0);
    PerturbedSpec s0 = spec(1, SolutionVariant::asym(1), zero);
    for (const Vec2& x : seeded(20, 9))
        for (double t : {0.0, 0.3, 1.7, 2.0}) CHECK(composed_flow(s0, t, x) == flow_field<double>(s0.field(), 1.0, t, x));

    // inside the window the exact part is frozen, only X_w moves
    SmoothFieldDef w = field(ProfileKind::Swirl, 1.0);
    PerturbedSpec s = spec(0, SolutionVariant::sym(2), w);
    for (const Vec2& x : seeded(10, 2)) CHECK(composed_flow(s, 1.2, x) == flow_w(w, 1.2, x).endpoint);
    CHECK_THROWS_AS(composed_flow(spec(0, SolutionVariant::unmixing(), w), 0.5, {0.1, 0.1}), SingularTimeError);
}

TEST_CASE("composed flow equals direct integration of the assembled field")
{
    for (ProfileKind k : {ProfileKind::Swirl, ProfileKind::Compression}) {
        SmoothFieldDef w = field(k, k == ProfileKind::Swirl ? 1.0 : 0.5);
        for (int lambda : {0, 1})
            for (SolutionVariant v : {SolutionVariant::sym(1), SolutionVariant::asym(2)}) {
                PerturbedSpec s = spec(lambda, v, w);
                double worst = 0;
                for (const Vec2& x : seeded(12, 17 + lambda))
                    for (double t : {0.0, 2.0})
                        worst = std::max(worst, norm(composed_flow(s, t, x) - direct_assembled_flow(s, t, x, {1e-3, 2e-2})));
                CHECK(worst < 1e-4);
            }
    }
}

TEST_CASE("pairing")
{
    SmoothFieldDef zero = field(ProfileKind::Zero, 0.0);
    Rect unit{0, 0, 1, 1};
    // w = 0: indicator pairings are exact cell averages of the exact solution
    PerturbedSpec s = spec(1, SolutionVariant::sym(1), zero);
    CellGrid g = solution_grid(1, SolutionVariant::sym(1), Dyadic::pow2(-1));
    auto ind = [](const Vec2& x) { return x.x1 < 0.5 && x.x2 < 0.5 ? 1.0 : 0.0; };
    double avg = cell_average(g, SquareId{1, 0, 0, Family::S1}).to_double();
    CHECK(pairing(s, 0.5, ind, unit, 64) == doctest::Approx(0.25 * avg).epsilon(1e-12));

    // mass conservation with phi = 1 over a whole period
    SmoothFieldDef w = field(ProfileKind::Compression, 0.5);
    PerturbedSpec sw = spec(1, SolutionVariant::asym(1), w, 1e-2);
    auto one = [](const Vec2&) { return 1.0; };
    double m0 = pairing(sw, 0.0, one, unit, 64);
    for (double t : {0.5, 1.5, 2.0}) CHECK(pairing(sw, t, one, unit, 64) == doctest::Approx(m0).epsilon(1e-12));
    CHECK(m0 == doctest::Approx(0.5));

    // mixed branch after t = 1 pairs as (1/2) int phi(X_w)
    PerturbedSpec mx = spec(0, SolutionVariant::mixed(), w, 1e-2);
    auto phi = [](const Vec2& x) { return std::sin(3 * x.x1) * x.x2; };
    double half = 0;
    const int n = 32;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) half += 0.5 * phi(flow_w(w, 1.5, {(i + 0.5) / n, (j + 0.5) / n}, {.h = 1e-2}).endpoint);
    half /= n * n;
    CHECK(pairing(mx, 1.5, phi, unit, n) == doctest::Approx(half).epsilon(1e-12));
}

TEST_CASE("density evaluation")
{
    SmoothFieldDef sw = field(ProfileKind::Swirl, 1.0);
    PerturbedSpec s = spec(0, SolutionVariant::mixed(), sw, 1e-2);
    for (const Vec2& x : seeded(30, 4))
        for (double t : {0.3, 1.4}) {
            double d = density_eval(s, t, x);
            bool ok = std::fabs(d) < 1e-6 || std::fabs(d - 0.5) < 1e-6 || std::fabs(d - 1) < 1e-6;
            CHECK(ok);
        }
    SmoothFieldDef cm = field(ProfileKind::Compression, 0.5);
    PerturbedSpec c = spec(0, SolutionVariant::mixed(), cm);
    for (double t : {1.0, 1.5, 2.0})
        CHECK(density_eval(c, t, {0.52, 0.49}) == doctest::Approx(0.5 * std::exp(-2 * 0.5 * (t - 1))).epsilon(1e-9));
    // t = 0 is the initial datum: zeta_bar pushed forward by X_w(0, .)
    PerturbedSpec a = spec(0, SolutionVariant::asym(2), cm, 1e-2);
    for (const Vec2& x : seeded(30, 8)) {
        FlowResult inv = inverse_flow_w_jac(cm, 0.0, x, {.h = 1e-2});
        double datum = chessboard(0, inv.endpoint) * inv.jacobian_det;
        CHECK(density_eval(a, 0.0, x) == doctest::Approx(datum).epsilon(1e-12));
        for (double t : {0.0, 0.7, 1.6, 2.0}) CHECK(density_eval(a, t, x) <= density_bound(a) + 1e-12);
    }
}

TEST_CASE("compressibility certificate")
{
    std::vector<double> times{0.0, 2.0};
    CompressibilityReport z = compressibility_certificate(spec(0, SolutionVariant::sym(1), field(ProfileKind::Zero, 0.0), 1e-2),
                                                          times, 1 << 14, 8);
    CHECK(z.pass);
    CHECK(z.constant == 1.0);
    for (const auto& c : z.cells) CHECK(c.composed == doctest::Approx(1.0).epsilon(0.05));

    CompressibilityReport s = compressibility_certificate(spec(1, SolutionVariant::asym(1), field(ProfileKind::Swirl, 1.0), 1e-2),
                                                          times, 1 << 14, 8);
    CHECK(s.pass);
    CompressibilityReport c =
        compressibility_certificate(spec(0, SolutionVariant::sym(2), field(ProfileKind::Compression, 0.5), 1e-2), times,
                                    1 << 15, 8);
    CHECK(c.pass);
    CHECK(c.constant >= std::exp(1.0) - 1e-12);
    // the exact part is measure preserving: composed and X_w-only histograms agree within noise
    CHECK(c.max_factor_gap < 5.0);
}

TEST_CASE("distinct limits survive the perturbation")
{
    SmoothFieldParams wp;
    wp.profile = ProfileKind::Compression;
    wp.strength = 0.5;
    wp.centre = {1.5, 0.5};
    SmoothFieldDef w = builtin_field(wp);
    for (int q : {1, 2}) {
        PerturbedSpec sym = spec(0, SolutionVariant::sym(q), w, 1e-2);
        PerturbedSpec asym = spec(0, SolutionVariant::asym(q), w, 1e-2);
        // phi = indicator of X_w(2, Q) for the unit cell Q where zeta_bar_0 = 1
        Vec2 c{1.5, 0.5};
        CHECK(chessboard(0, c) == 1);
        auto phi = [&](const Vec2& x) {
            Vec2 y = inverse_flow_w(w, 2.0, x, {.h = 1e-2});
            return y.x1 >= 1 && y.x1 < 2 && y.x2 >= 0 && y.x2 < 1 ? 1.0 : 0.0;
        };
        Rect box{0.5, -0.5, 2.5, 1.5};
        double gap = std::fabs(pairing(sym, 2.0, phi, box, 64) - pairing(asym, 2.0, phi, box, 64));
        double D = w.div_integral(0.0, 2.0);
        CHECK(gap >= 0.5 * std::exp(-D) * 1.0);
        CHECK(gap == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("bounded variation of the assembled field")
{
    PerturbedSpec s = spec(0, SolutionVariant::asym(1), field(ProfileKind::Swirl, 1.0), 1e-2);
    Rect win{0.25, 0.25, 0.75, 0.75};
    auto rows = tv_ladder(s, 0.3, win, {1.0 / 32, 1.0 / 64, 1.0 / 128});
    double bound = tv_bound(s, 0.3, win);
    for (const auto& r : rows) CHECK(r.tv <= bound);
    CHECK(rows[2].tv == doctest::Approx(rows[1].tv).epsilon(0.1));
}

TEST_CASE("unboundedness diagnostic")
{
    SmoothFieldDef w = field(ProfileKind::Swirl, 4.0);
    auto rows = remark41_diagnostic(6, w, {0.0, 0.5, 1.5, 2.0}, 24);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.lower == doctest::Approx(r.w_sup - r.transported_sup));
        CHECK(r.w_sup > 0);
        CHECK(r.transported_sup <= std::exp(w.c1_integral(0, 2)) * sup_norm(6));
    }
}
