/// @file test_smooth_fields.cpp
/// @brief Built-in perturbations, RK4 flows with variational Jacobians, time mollification.

#include "doctest.h"

#include <cmath>
#include <random>

#include "tsl/errors.hpp"
#include "tsl/quadrature.hpp"
#include "tsl/smooth_fields.hpp"

using namespace tsl;

namespace {

SmoothFieldDef swirl(double omega = 1.0)
{
    SmoothFieldParams p;
    p.strength = omega;
    return builtin_field(p);
}

SmoothFieldDef compression(double alpha = 0.5)
{
    SmoothFieldParams p;
    p.profile = ProfileKind::Compression;
    p.strength = alpha;
    return builtin_field(p);
}

std::vector<SmoothFieldDef> all_builtin()
{
    std::vector<SmoothFieldDef> out;
    for (ProfileKind k : {ProfileKind::Zero, ProfileKind::Swirl, ProfileKind::Compression, ProfileKind::Shear})
        for (EnvelopeKind e : {EnvelopeKind::Constant, EnvelopeKind::Oscillating, EnvelopeKind::Tent}) {
            SmoothFieldParams p;
            p.profile = k;
            p.strength = k == ProfileKind::Compression ? 0.4 : 1.0;
            p.envelope = e;
            p.eps = e == EnvelopeKind::Constant ? 0.0 : 0.3;
            p.freq = 2.0;
            p.t0 = 0.7;
            out.push_back(builtin_field(p));
        }
    return out;
}

std::vector<Vec2> seeded_points(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.05, 0.95);
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) pts.push_back({U(rng), U(rng)});
    return pts;
}

Vec2 rotate(const Vec2& x, const Vec2& c, double a)
{
    Vec2 y = x - c;
    return c + Vec2{std::cos(a) * y.x1 - std::sin(a) * y.x2, std::sin(a) * y.x1 + std::cos(a) * y.x2};
}

}  // namespace

TEST_CASE("builtin field examples")
{
    SmoothFieldDef z = swirl(0.0);
    CHECK(z.value(0.3, {0.5, 0.6}) == Vec2{0, 0});
    SmoothFieldDef s = swirl(2.0);
    Vec2 x{0.55, 0.45};  // inside the flat core around (1/2, 1/2)
    CHECK(s.value(0.3, x).x1 == doctest::Approx(-2.0 * (x.x2 - 0.5)));
    CHECK(s.value(0.3, x).x2 == doctest::Approx(2.0 * (x.x1 - 0.5)));
    CHECK(s.divergence(0.3, x) == 0.0);
    SmoothFieldDef c = compression(0.7);
    CHECK(c.value(1.2, x).x1 == doctest::Approx(0.7 * (x.x1 - 0.5)));
    CHECK(c.divergence(1.2, x) == doctest::Approx(1.4));
    CHECK(c.budget.div == doctest::Approx(1.4));

    SmoothFieldParams bad;
    bad.r1 = 0.1;
    CHECK_THROWS_AS(builtin_field(bad), ConfigError);
    bad = {};
    bad.eps = 1.5;
    CHECK_THROWS_AS(builtin_field(bad), ConfigError);
    CHECK_THROWS_AS(parse_profile("vortex"), ConfigError);
    CHECK(parse_envelope("tent") == EnvelopeKind::Tent);
}

TEST_CASE("divergence equals trace and support is respected")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.2, 1.2), T(0.0, 2.0);
    for (const SmoothFieldDef& w : all_builtin()) {
        for (int i = 0; i < 500; ++i) {
            Vec2 x{U(rng), U(rng)};
            double t = T(rng);
            CHECK(std::fabs(w.divergence(t, x) - w.jacobian(t, x).trace()) <= 1e-10);
            if (norm(x) > w.support_radius()) CHECK(w.value(t, x) == Vec2{0, 0});
            // analytic jacobian against central differences
            const double e = 1e-6;
            Vec2 d1 = (1.0 / (2 * e)) * (w.value(t, x + Vec2{e, 0}) - w.value(t, x - Vec2{e, 0}));
            Vec2 d2 = (1.0 / (2 * e)) * (w.value(t, x + Vec2{0, e}) - w.value(t, x - Vec2{0, e}));
            Mat2 J = w.jacobian(t, x);
            CHECK(std::fabs(J.a11 - d1.x1) < 1e-6);
            CHECK(std::fabs(J.a21 - d1.x2) < 1e-6);
            CHECK(std::fabs(J.a12 - d2.x1) < 1e-6);
            CHECK(std::fabs(J.a22 - d2.x2) < 1e-6);
        }
    }
}

TEST_CASE("flow of the zero field is the identity")
{
    FlowResult r = flow_w(swirl(0.0), 0.3, {0.4, 0.7});
    CHECK(r.endpoint == Vec2{0.4, 0.7});
    CHECK(r.jacobian_det == 1.0);
    CHECK(inverse_flow_w(swirl(0.0), 1.7, {0.1, 0.2}) == Vec2{0.1, 0.2});
}

TEST_CASE("closed-form flows in the flat core")
{
    Vec2 c{0.5, 0.5};
    Vec2 x{0.53, 0.46};
    SmoothFieldDef s = swirl(1.5);
    for (double t : {0.0, 0.4, 1.3, 2.0}) {
        FlowResult r = flow_w(s, t, x);
        Vec2 ex = rotate(x, c, 1.5 * (t - 1));
        CHECK(norm(r.endpoint - ex) < 1e-11);
        CHECK(std::fabs(r.jacobian_det - 1.0) < 1e-11);
        Vec2 back = inverse_flow_w(s, t, ex);
        CHECK(norm(back - x) < 1e-11);
    }
    SmoothFieldDef cm = compression(0.5);
    Vec2 xc{0.51, 0.505};  // stays within the core for |tau| <= 1
    for (double t : {0.0, 0.5, 1.5, 2.0}) {
        double tau = t - 1;
        FlowResult r = flow_w(cm, t, xc);
        CHECK(norm(r.endpoint - (c + std::exp(0.5 * tau) * (xc - c))) < 1e-11);
        CHECK(r.jacobian_det == doctest::Approx(std::exp(tau)).epsilon(1e-11));
        // the Groenwall envelope is attained
        double D = cm.div_integral(1.0, t);
        CHECK(r.jacobian_det == doctest::Approx(tau > 0 ? std::exp(D) : std::exp(-D)).epsilon(1e-9));
    }
}

TEST_CASE("fourth order convergence")
{
    // outside the core the swirl is a nonuniform rotation: r is conserved, angular speed omega g(r)
    SmoothFieldDef s = swirl(3.0);
    Vec2 c{0.5, 0.5};
    Vec2 x{0.5 + 0.27, 0.5};
    double r = 0.27;
    double s_ = (r - 0.15) / 0.25;
    double g = 1 - s_ * s_ * s_ * (10 - 15 * s_ + 6 * s_ * s_);
    Vec2 ex = rotate(x, c, 3.0 * g * 1.0);
    double e1 = norm(flow_w(s, 2.0, x, {.h = 0.1}).endpoint - ex);
    double e2 = norm(flow_w(s, 2.0, x, {.h = 0.05}).endpoint - ex);
    double ratio = e1 / e2;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);

    SmoothFieldDef cm = compression(0.8);
    Vec2 xc{0.52, 0.49};
    Vec2 exc = c + std::exp(0.8) * (xc - c);
    double c1 = norm(flow_w(cm, 2.0, xc, {.h = 0.2}).endpoint - exc);
    double c2 = norm(flow_w(cm, 2.0, xc, {.h = 0.1}).endpoint - exc);
    CHECK(c1 / c2 >= 12.0);
    CHECK(c1 / c2 <= 20.0);
}

TEST_CASE("jacobian matches finite differences of the flow map")
{
    const double h = 1e-3, e = 1e-5;
    for (const SmoothFieldDef& w : all_builtin()) {
        for (const Vec2& x : seeded_points(6, 11)) {
            for (double t : {0.2, 1.8}) {
                FlowResult r = flow_w(w, t, x, {.h = h});
                Vec2 d1 = (1.0 / (2 * e)) * (flow_w(w, t, x + Vec2{e, 0}).endpoint - flow_w(w, t, x - Vec2{e, 0}).endpoint);
                Vec2 d2 = (1.0 / (2 * e)) * (flow_w(w, t, x + Vec2{0, e}).endpoint - flow_w(w, t, x - Vec2{0, e}).endpoint);
                double tol = std::max(1e-6, 100 * std::pow(h, 4));
                CHECK(std::fabs(r.jacobian_matrix.a11 - d1.x1) < tol);
                CHECK(std::fabs(r.jacobian_matrix.a21 - d1.x2) < tol);
                CHECK(std::fabs(r.jacobian_matrix.a12 - d2.x1) < tol);
                CHECK(std::fabs(r.jacobian_matrix.a22 - d2.x2) < tol);
                CHECK(std::fabs(r.jacobian_det - r.jacobian_matrix.det()) < 1e-10);
                CHECK(r.jacobian_det > 0);
                // independent Liouville integration of the determinant
                CHECK(std::fabs(liouville_det(w, t, x) - r.jacobian_det) < 1e-9);
            }
        }
    }
}

TEST_CASE("semigroup and round trip")
{
    for (const SmoothFieldDef& w : all_builtin()) {
        for (const Vec2& x : seeded_points(8, 5)) {
            // X(t2) = X_{t1 -> t2}(X(t1)); step grids line up because h divides every leg
            Vec2 a = flow_w(w, 1.6, x).endpoint;
            Vec2 b = flow_w_between(w, 1.6, 0.4, a).endpoint;
            CHECK(norm(b - flow_w(w, 0.4, x).endpoint) < 1e-8);
            for (double t : {0.0, 0.7, 2.0}) {
                Vec2 y = flow_w(w, t, x).endpoint;
                CHECK(norm(inverse_flow_w(w, t, y) - x) <= 1e-8);
                CHECK(norm(flow_w(w, t, inverse_flow_w(w, t, x)).endpoint - x) <= 1e-8);
            }
        }
    }
}

TEST_CASE("step-halving validation")
{
    SmoothFieldDef s = swirl(20.0);
    CHECK_THROWS_AS(flow_w(s, 2.0, {0.7, 0.5}, {.h = 0.25, .validate = true, .tol = 1e-6}), StepError);
    CHECK_NOTHROW(flow_w(s, 2.0, {0.7, 0.5}, {.h = 1e-3, .validate = true, .tol = 1e-6}));
    CHECK_THROWS_AS(flow_w(s, 2.5, {0.7, 0.5}), DomainError);
}

TEST_CASE("time mollification")
{
    for (int k : {1, 2, 4, 16, 128})
        for (double t : {0.0, 0.3, 1.0, 1.999})
            CHECK(mollifier_mass(k, t) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bump_cdf(1.0) == 1.0);
    CHECK(bump_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));

    SmoothFieldDef s = swirl(1.0);
    SmoothFieldDef sk = time_mollify(s, 8);
    CHECK(sk.autonomous);
    CHECK(sk.value(0.3, {0.6, 0.6}) == s.value(0.3, {0.6, 0.6}));

    // Lipschitz-in-time envelope: error at the kink halves as k doubles
    SmoothFieldParams p;
    p.envelope = EnvelopeKind::Tent;
    p.eps = 0.5;
    p.t0 = 0.8;
    SmoothFieldDef w = builtin_field(p);
    Vec2 x{0.55, 0.5};
    double prev = 0;
    for (int k = 4; k <= 256; k *= 2) {
        double err = norm(time_mollify(w, k).value(0.8, x) - w.value(0.8, x));
        // at the kink the error is exactly eps * |x - c| * int |u| eta / k
        CHECK(err == doctest::Approx(0.5 * 0.05 * bump_abs_moment() / k).epsilon(1e-6));
        if (prev > 0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.05));
        prev = err;
    }
    // convergence at continuity times of a step envelope
    p.envelope = EnvelopeKind::Step;
    SmoothFieldDef st = builtin_field(p);
    CHECK(std::fabs(time_mollify(st, 64).envelope(0.5) - 1.0) < 1e-12);
    CHECK(std::fabs(time_mollify(st, 64).envelope(1.2) - 1.5) < 1e-12);
    CHECK(time_mollify(st, 64).envelope(0.8) == doctest::Approx(1.25).epsilon(1e-6));
}

TEST_CASE("estimate checks")
{
    std::vector<Vec2> pts = seeded_points(4, 3);
    pts.push_back({0.51, 0.5});
    FlowOptions o{.h = 5e-3};
    SmoothFieldDef s = swirl(1.0);
    EstimateReport r = estimate_checks(s, {0.0, 2.0}, pts, 1e-3, o);
    CHECK(r.all_ok);
    for (const auto& smp : r.samples) {
        CHECK(std::fabs(smp.det - 1.0) < 1e-8);
        CHECK(smp.pushforward == doctest::Approx(1.0).epsilon(1e-5));
    }
    EstimateReport z = estimate_checks(swirl(0.0), {0.0}, pts, 1e-3, o);
    for (const auto& smp : z.samples) {
        CHECK(smp.det == 1.0);
        CHECK(smp.det_lower == 1.0);
        CHECK(smp.det_upper == 1.0);
        CHECK(smp.grad_bound == 1.0);
    }
    SmoothFieldDef c = compression(0.5);
    EstimateReport cr = estimate_checks(c, {0.0, 2.0}, {{0.51, 0.5}}, 1e-3, o);
    CHECK(cr.all_ok);
    // the core point saturates the lower/upper envelope
    CHECK(cr.samples[0].det == doctest::Approx(cr.samples[0].det_lower).epsilon(1e-9));
    CHECK(cr.samples[1].det == doctest::Approx(cr.samples[1].det_upper).epsilon(1e-9));
    CHECK(cr.samples[0].pushforward == doctest::Approx(1.0 / cr.samples[0].det).epsilon(1e-3));
    for (const SmoothFieldDef& w : all_builtin()) CHECK(estimate_checks(w, {0.0, 1.5}, pts, 1e-3, {.h = 1e-2}).all_ok);
}
