#include "tsl/perturbed_transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tsl/exact_flow.hpp"

namespace tsl {

namespace {

double frac(double x) { return x - std::floor(x); }

FlowResult inverse_with_jac(const SmoothFieldDef& w, double t, const Vec2& x, double h)
{
    if (w.outside_support(x)) return {x, Mat2::identity(), 1.0};
    return flow_w_between(w, t, 1.0, x, {.h = h});
}

// sup over the two halves of int |e| over [0,1] and [1,2]
double half_envelope_integral(const SmoothFieldDef& w)
{
    return std::max(w.envelope_integral(0.0, 1.0), w.envelope_integral(1.0, 2.0));
}

// Time pieces between 1 and t in the direction of travel, with the stage active on each (or none).
struct TimeSegment {
    double a, b;
    bool active;
    StagePiece<double> piece;
};

std::vector<TimeSegment> segments(const ExactSpec& spec, double t, const ExactOptions& opt)
{
    double lo = std::min(1.0, t), hi = std::max(1.0, t);
    auto ps = pieces_between(spec, lo, hi, opt);
    std::vector<double> cuts{lo, hi};
    for (const auto& p : ps) {
        cuts.push_back(p.t0);
        cuts.push_back(p.t1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<TimeSegment> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double m = 0.5 * (cuts[i] + cuts[i + 1]);
        TimeSegment s{cuts[i], cuts[i + 1], false, {}};
        for (const auto& p : ps)
            if (p.t0 < m && m < p.t1) {
                s.active = true;
                s.piece = p;
            }
        out.push_back(s);
    }
    if (t < 1.0) {
        std::reverse(out.begin(), out.end());
        for (auto& s : out) std::swap(s.a, s.b);
    }
    return out;
}

struct AssembledContext {
    const PerturbedSpec& spec;
    const TimeSegment& seg;
    double inner_h;
    int level() const { return spec.lambda + seg.piece.k; }
    double scale() const
    {
        return std::ldexp(1.0, seg.piece.k) * seg.piece.sign * spec.exact.orientation_sign();
    }

    URegion region(double t, const Vec2& z) const
    {
        if (!seg.active) return {};
        return u_region(level(), inverse_with_jac(spec.w, t, z, inner_h).endpoint);
    }

    Vec2 field(double t, const Vec2& z, const URegion& r) const
    {
        Vec2 wv = spec.w.value(t, z);
        if (!seg.active || r.sector == 0) return wv;
        FlowResult inv = inverse_with_jac(spec.w, t, z, inner_h);
        Vec2 b = scale() * eval_u_region(level(), r, inv.endpoint);
        return inv.jacobian_matrix.inverse() * b + wv;
    }

    Vec2 rk4(double t, const Vec2& z, double dt, const URegion& r) const
    {
        Vec2 k1 = field(t, z, r);
        Vec2 k2 = field(t + 0.5 * dt, z + (0.5 * dt) * k1, r);
        Vec2 k3 = field(t + 0.5 * dt, z + (0.5 * dt) * k2, r);
        Vec2 k4 = field(t + dt, z + dt * k3, r);
        return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

}  // namespace

Vec2 r2_point(std::uint64_t n)
{
    constexpr double g = 1.32471795724474602596;
    constexpr double a1 = 1.0 / g, a2 = 1.0 / (g * g);
    return {frac(0.5 + a1 * double(n)), frac(0.5 + a2 * double(n))};
}

Vec2 eval_perturbed_field(const PerturbedSpec& spec, double t, const Vec2& x)
{
    Vec2 wv = spec.w.value(t, x);
    if (spec.w.outside_support(x)) {
        Vec2 b = eval_trunc(spec.field(), t, x, spec.exact);
        return b + wv;
    }
    FlowResult inv = inverse_flow_w_jac(spec.w, t, x, spec.flow);
    Vec2 b = eval_trunc(spec.field(), t, inv.endpoint, spec.exact);
    return inv.jacobian_matrix.inverse() * b + wv;
}

std::vector<LpResult> lp_distance_table(const SmoothFieldDef& w, const std::vector<int>& lambdas,
                                        const std::vector<int>& ps, const LpOptions& o, const ExactOptions& exact)
{
    const double margin = w.budget.c0 * w.envelope_sup;
    const Rect box{o.K.x0 - margin, o.K.y0 - margin, o.K.x1 + margin, o.K.y1 + margin};
    const int nl = int(lambdas.size()), np = int(ps.size());
    // substeps per quadrature cell so that the RK4 step stays below h_max
    const int sub = std::max(1, int(std::ceil(1.0 / (2.0 * o.nt * o.h_max) - 1e-9)));
    const double hs = 1.0 / (2.0 * o.nt * sub);
    std::vector<double> partial(std::size_t(o.ny) * nl * np, 0.0);
    auto inside = [&](const Vec2& x) { return x.x1 >= o.K.x0 && x.x1 < o.K.x1 && x.x2 >= o.K.y0 && x.x2 < o.K.y1; };

#pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < o.ny; ++i) {
        Vec2 u = r2_point(std::uint64_t(i));
        Vec2 y{box.x0 + u.x1 * (box.x1 - box.x0), box.y0 + u.x2 * (box.y1 - box.y0)};
        double* acc = &partial[std::size_t(i) * nl * np];
        auto record = [&](double t, const FlowResult& f) {
            if (!inside(f.endpoint)) return;
            for (int a = 0; a < nl; ++a) {
                Vec2 v = f.jacobian_matrix * eval_b(lambdas[a], t, y, exact);
                double m = norm(v);
                for (int c = 0; c < np; ++c) acc[a * np + c] += std::pow(m, ps[c]) * f.jacobian_det;
            }
        };
        for (int dir : {1, -1}) {
            FlowResult f{y, Mat2::identity(), 1.0};
            double t = 1.0;
            bool moving = !w.outside_support(y);
            // midpoints of the nt-grid are the odd multiples of 1/(2 nt)
            for (int j = 0; j < o.nt; ++j) {
                for (int half = 0; half < 2; ++half) {
                    double tn = 1.0 + dir * double(2 * j + half + 1) / (2.0 * o.nt);
                    if (moving) {
                        FlowResult step = flow_w_between(w, t, tn, f.endpoint, {.h = hs});
                        f.endpoint = step.endpoint;
                        f.jacobian_matrix = step.jacobian_matrix * f.jacobian_matrix;
                        f.jacobian_det = f.jacobian_matrix.det();
                    }
                    t = tn;
                    if (half == 0) record(t, f);
                }
            }
        }
    }

    const double A = (box.x1 - box.x0) * (box.y1 - box.y0);
    const double weight = A / o.ny / o.nt;
    const double L3 = 2.0 * o.K.area();
    const double half = half_envelope_integral(w);
    const double E = (w.budget.c0 + w.budget.c1 + w.budget.div) * half;
    std::vector<LpResult> out;
    for (int a = 0; a < nl; ++a)
        for (int c = 0; c < np; ++c) {
            double s = 0;
            for (int i = 0; i < o.ny; ++i) s += partial[(std::size_t(i) * nl + a) * np + c];
            double p = ps[c];
            LpResult r;
            r.lambda = lambdas[a];
            r.p = ps[c];
            r.distance = std::pow(s * weight, 1.0 / p);
            r.bound = std::pow(L3, 1.0 / p) * std::exp(E / p) * sup_norm(lambdas[a]);
            r.bound_sharp = std::pow(L3 * std::exp(w.budget.div * half), 1.0 / p) * std::exp(w.budget.c1 * half) *
                            sup_norm(lambdas[a]);
            out.push_back(r);
        }
    return out;
}

LpResult lp_distance_to_w(int lambda, const SmoothFieldDef& w, int p, const LpOptions& o, const ExactOptions& exact)
{
    if (p < 1) throw DomainError("p must be >= 1");
    return lp_distance_table(w, {lambda}, {p}, o, exact).front();
}

Vec2 composed_flow(const PerturbedSpec& spec, double t, const Vec2& x)
{
    if (!spec.truncated()) throw SingularTimeError("composed flow needs a truncated branch");
    Vec2 y = flow_field<double>(spec.field(), 1.0, t, x, spec.exact);
    return flow_w(spec.w, t, y, spec.flow).endpoint;
}

Vec2 direct_assembled_flow(const PerturbedSpec& spec, double t, const Vec2& x, const DirectOptions& o)
{
    if (!spec.truncated()) throw SingularTimeError("direct flow needs a truncated branch");
    if (t < 0.0 || t > 2.0) throw DomainError("flow time outside [0,2]");
    Vec2 z = x;
    for (const TimeSegment& seg : segments(spec.field(), t, spec.exact)) {
        AssembledContext ctx{spec, seg, o.inner_h};
        double tc = seg.a;
        while (tc != seg.b) {
            double rem = seg.b - tc;
            int n = std::max(1, int(std::ceil(std::fabs(rem) / o.h - 1e-9)));
            double dt = rem / n;
            URegion r = ctx.region(tc, z);
            Vec2 zn = ctx.rk4(tc, z, dt, r);
            double tn = n == 1 ? seg.b : tc + dt;
            if (seg.active && !(ctx.region(tn, zn) == r)) {
                // locate the piece change: smallest partial step whose endpoint leaves the region
                double lo = 0.0, hi = dt;
                for (int it = 0; it < 200 && std::fabs(hi - lo) > 1e-14; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (ctx.region(tc + mid, ctx.rk4(tc, z, mid, r)) == r) lo = mid;
                    else hi = mid;
                }
                // step off the null set where the region is undetermined
                double gap = hi - lo;
                while (std::fabs(hi) < std::fabs(dt) && ctx.region(tc + hi, ctx.rk4(tc, z, hi, r)).sector == 0) {
                    gap *= 2;
                    hi = std::fabs(hi + gap) < std::fabs(dt) ? hi + gap : dt;
                }
                zn = ctx.rk4(tc, z, hi, r);
                tn = hi == dt ? tn : tc + hi;
            }
            z = zn;
            tc = tn;
        }
    }
    return z;
}

double exact_density(const PerturbedSpec& spec, double t, const Vec2& y)
{
    return pointwise_density<double>(spec.lambda, spec.branch, t, y, spec.exact).value.to_double();
}

double pairing(const PerturbedSpec& spec, double t, const std::function<double(const Vec2&)>& phi, const Rect& ybox,
               int n)
{
    const double dx = (ybox.x1 - ybox.x0) / n, dy = (ybox.y1 - ybox.y0) / n;
    std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < n; ++i) {
            Vec2 y{ybox.x0 + (i + 0.5) * dx, ybox.y0 + (j + 0.5) * dy};
            double z = exact_density(spec, t, y);
            if (z == 0.0) continue;
            s += phi(flow_w(spec.w, t, y, spec.flow).endpoint) * z;
        }
        rows[j] = s;
    }
    double total = 0;
    for (double r : rows) total += r;
    return total * dx * dy;
}

std::vector<double> pairings(const PerturbedSpec& spec, const std::vector<double>& times,
                             const std::vector<std::function<double(const Vec2&)>>& phis, const Rect& ybox, int n)
{
    const double dx = (ybox.x1 - ybox.x0) / n, dy = (ybox.y1 - ybox.y0) / n;
    const std::size_t m = times.size() * phis.size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(m, 0.0));
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
        std::vector<double>& acc = rows[j];
        for (int i = 0; i < n; ++i) {
            Vec2 y{ybox.x0 + (i + 0.5) * dx, ybox.y0 + (j + 0.5) * dy};
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                double z = exact_density(spec, times[ti], y);
                if (z == 0.0) continue;
                Vec2 p = flow_w(spec.w, times[ti], y, spec.flow).endpoint;
                for (std::size_t d = 0; d < phis.size(); ++d) acc[ti * phis.size() + d] += phis[d](p) * z;
            }
        }
    }
    std::vector<double> out(m, 0.0);
    for (const auto& r : rows)
        for (std::size_t e = 0; e < m; ++e) out[e] += r[e];
    for (double& v : out) v *= dx * dy;
    return out;
}

double density_eval(const PerturbedSpec& spec, double t, const Vec2& x)
{
    FlowResult inv = inverse_flow_w_jac(spec.w, t, x, spec.flow);
    return exact_density(spec, t, inv.endpoint) * inv.jacobian_det;
}

double density_bound(const PerturbedSpec& spec) { return std::exp(spec.w.div_integral(0.0, 2.0)); }

CompressibilityReport compressibility_certificate(const PerturbedSpec& spec, const std::vector<double>& times,
                                                  int n_samples, int bins)
{
    if (!spec.truncated()) throw SingularTimeError("compressibility certificate needs a truncated branch");
    const double P = spec.lambda == 0 ? 2.0 : 1.0;
    CompressibilityReport rep;
    double Dmax = 0;
    for (double t : times) Dmax = std::max(Dmax, spec.w.div_integral(1.0, t));
    rep.constant = std::exp(Dmax);
    rep.lower = 1.0 / rep.constant;
    rep.upper = rep.constant;
    const double cell = 1.0 * bins * bins / n_samples;
    for (double t : times) {
        double D = spec.w.div_integral(1.0, t);
        double lo = std::exp(-D), hi = std::exp(D);
        std::vector<int> bin_c(n_samples), bin_w(n_samples);
        auto bin_of = [&](Vec2 z) {
            z = {z.x1 - P * std::floor(z.x1 / P), z.x2 - P * std::floor(z.x2 / P)};
            int i = std::min(bins - 1, int(z.x1 / P * bins)), j = std::min(bins - 1, int(z.x2 / P * bins));
            return j * bins + i;
        };
#pragma omp parallel for schedule(dynamic, 256)
        for (int s = 0; s < n_samples; ++s) {
            Vec2 u = r2_point(std::uint64_t(s));
            Vec2 y{P * u.x1, P * u.x2};
            Vec2 xb = flow_field<double>(spec.field(), 1.0, t, y, spec.exact);
            xb = {xb.x1 - P * std::floor(xb.x1 / P), xb.x2 - P * std::floor(xb.x2 / P)};
            bin_c[s] = bin_of(flow_w(spec.w, t, xb, spec.flow).endpoint);
            bin_w[s] = bin_of(flow_w(spec.w, t, y, spec.flow).endpoint);
        }
        std::vector<int> cc(bins * bins, 0), cw(bins * bins, 0);
        for (int s = 0; s < n_samples; ++s) {
            ++cc[bin_c[s]];
            ++cw[bin_w[s]];
        }
        for (int j = 0; j < bins; ++j)
            for (int i = 0; i < bins; ++i) {
                CompressibilityCell c;
                c.t = t;
                c.i = i;
                c.j = j;
                c.composed = cc[j * bins + i] * cell;
                c.flow_w_only = cw[j * bins + i] * cell;
                double pcell = double(cc[j * bins + i]) / n_samples;
                c.stderr_ = std::sqrt(std::max(pcell * (1 - pcell), 1.0 / n_samples) / n_samples) * bins * bins;
                double tol = 1e-3 + 3 * c.stderr_;
                double viol = std::max({0.0, lo - c.composed, c.composed - hi}) / tol;
                rep.max_violation = std::max(rep.max_violation, viol);
                rep.max_factor_gap = std::max(rep.max_factor_gap, std::fabs(c.composed - c.flow_w_only) / c.stderr_);
                rep.cells.push_back(c);
            }
    }
    rep.pass = rep.max_violation <= 1.0;
    return rep;
}

std::vector<Remark41Row> remark41_diagnostic(int lambda, const SmoothFieldDef& w, const std::vector<double>& cuts,
                                             int grid, const ExactOptions& exact)
{
    std::vector<Remark41Row> out;
    const double pad = w.budget.c0 * w.envelope_sup;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        Remark41Row r;
        r.t0 = cuts[c];
        r.t1 = cuts[c + 1];
        for (int s = 0; s < 4; ++s) {
            double t = r.t0 + (s + 0.5) * (r.t1 - r.t0) / 4;
            for (int j = 0; j < grid; ++j)
                for (int i = 0; i < grid; ++i) {
                    Vec2 x{-pad + (i + 0.5) * (1 + 2 * pad) / grid, -pad + (j + 0.5) * (1 + 2 * pad) / grid};
                    r.w_sup = std::max(r.w_sup, norm(w.value(t, x)));
                    Mat2 DX = w.outside_support(x) ? Mat2::identity() : flow_w(w, t, x, {.h = 1e-2}).jacobian_matrix;
                    r.transported_sup = std::max(r.transported_sup, norm(DX * eval_b(lambda, t, x, exact)));
                }
        }
        r.lower = r.w_sup - r.transported_sup;
        out.push_back(r);
    }
    return out;
}

std::vector<TvRow> tv_ladder(const PerturbedSpec& spec, double t, const Rect& window, const std::vector<double>& hs)
{
    std::vector<TvRow> out;
    for (double h : hs)
        out.push_back({h, tv_estimate([&](const Vec2& x) { return eval_perturbed_field(spec, t, x); }, window, h)});
    return out;
}

double tv_bound(const PerturbedSpec& spec, double t, const Rect& window)
{
    const SmoothFieldDef& w = spec.w;
    double c2norm = (w.budget.c0 + w.budget.c1 + w.budget.c2) * w.envelope_sup;
    double II = std::sqrt(2.0) * w.budget.c1 * w.envelope_sup * window.area();
    if (t == 1.0 || in_truncation_window(spec.field(), t)) return II;
    StageIndex st = stage_of(t);
    double s = std::ldexp(1.0, -spec.lambda - st.k);  // side of the stage's squares
    double pad = w.budget.c0 * w.envelope_sup * std::fabs(t - 1.0) + s;
    double wx = window.x1 - window.x0 + 2 * pad, wy = window.y1 - window.y0 + 2 * pad;
    double squares = std::ceil(wx / s + 1) * std::ceil(wy / s + 1);
    // variation of one filled square: interior (6 + 2 sqrt 2) plus its boundary jumps 8, scaled to side s
    double tv_b = squares * (14.0 + 2.0 * std::numbers::sqrt2) * std::ldexp(1.0, -spec.lambda) * s;
    double Mx = std::exp(2.0 * c2norm);
    double I = Mx * Mx * (4.0 * sup_norm(spec.lambda) * wx * wy + tv_b);
    return I + II;
}

}  // namespace tsl
