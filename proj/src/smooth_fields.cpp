#include "tsl/smooth_fields.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "tsl/errors.hpp"
#include "tsl/quadrature.hpp"

namespace tsl {

namespace {

struct Cutoff {
    double g = 0, dg = 0;  // g(r), g'(r)
};

Cutoff cutoff(double r, double r0, double r1)
{
    if (r <= r0) return {1.0, 0.0};
    if (r >= r1) return {0.0, 0.0};
    double s = (r - r0) / (r1 - r0);
    double s2 = s * s, s3 = s2 * s;
    return {1.0 - s3 * (10.0 - 15.0 * s + 6.0 * s2), -30.0 * s2 * (1.0 - s) * (1.0 - s) / (r1 - r0)};
}

struct ProfileEval {
    Vec2 v;
    Mat2 d = Mat2::zero();
};

ProfileEval profile_eval(const SmoothFieldParams& p, const Vec2& x)
{
    Vec2 y = x - p.centre;
    double r = norm(y);
    ProfileEval out;
    if (p.profile == ProfileKind::Zero || r >= p.r1) return out;
    Cutoff c = cutoff(r, p.r0, p.r1);
    double a = p.strength;
    // g' x_i x_j / r, zero in the flat core
    double q11 = 0, q12 = 0, q22 = 0;
    if (r > p.r0) {
        q11 = c.dg * y.x1 * y.x1 / r;
        q12 = c.dg * y.x1 * y.x2 / r;
        q22 = c.dg * y.x2 * y.x2 / r;
    }
    switch (p.profile) {
    case ProfileKind::Swirl:
        out.v = {-a * c.g * y.x2, a * c.g * y.x1};
        out.d = {-a * q12, -a * (c.g + q22), a * (c.g + q11), a * q12};
        break;
    case ProfileKind::Compression:
        out.v = {a * c.g * y.x1, a * c.g * y.x2};
        out.d = {a * (c.g + q11), a * q12, a * q12, a * (c.g + q22)};
        break;
    case ProfileKind::Shear:
        out.v = {a * c.g * y.x2, 0.0};
        out.d = {a * q12, a * (c.g + q22), 0.0, 0.0};
        break;
    case ProfileKind::Zero: break;
    }
    return out;
}

FieldBudget sample_budget(const SmoothFieldParams& p)
{
    FieldBudget b;
    if (p.profile == ProfileKind::Zero || p.strength == 0.0) return b;
    const int n = 401;
    const double fd = 1e-5;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Vec2 x{p.centre.x1 - p.r1 + 2 * p.r1 * i / (n - 1), p.centre.x2 - p.r1 + 2 * p.r1 * j / (n - 1)};
            ProfileEval e = profile_eval(p, x);
            b.c0 = std::max(b.c0, norm(e.v));
            b.c1 = std::max(b.c1, e.d.op_norm());
            b.div = std::max(b.div, std::fabs(e.d.trace()));
            for (int dir = 0; dir < 2; ++dir) {
                Vec2 s = dir == 0 ? Vec2{fd, 0} : Vec2{0, fd};
                Mat2 dp = profile_eval(p, x + s).d, dm = profile_eval(p, x - s).d;
                for (double v : {dp.a11 - dm.a11, dp.a12 - dm.a12, dp.a21 - dm.a21, dp.a22 - dm.a22})
                    b.c2 = std::max(b.c2, std::fabs(v) / (2 * fd));
            }
        }
    }
    // the flat core attains the extremes of the rigid part exactly
    double a = std::fabs(p.strength);
    if (p.profile == ProfileKind::Compression) b.div = std::max(b.div, 2 * a);
    return b;
}

double sample_envelope_sup(const std::function<double(double)>& e, const std::vector<double>& breaks)
{
    double m = 0;
    for (int i = 0; i <= 4000; ++i) m = std::max(m, std::fabs(e(2.0 * i / 4000)));
    for (double b : breaks)
        for (double d : {-1e-12, 0.0, 1e-12})
            if (b + d >= 0 && b + d <= 2) m = std::max(m, std::fabs(e(b + d)));
    return m;
}

// Integration panels of [a, b] (a <= b) split at the given breakpoints, each cut into `sub` pieces.
std::vector<std::pair<double, double>> panels(double a, double b, const std::vector<double>& breaks, int sub)
{
    std::vector<double> cuts{a};
    for (double x : breaks)
        if (x > a && x < b) cuts.push_back(x);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double h = (cuts[i + 1] - cuts[i]) / sub;
        for (int j = 0; j < sub; ++j) out.emplace_back(cuts[i] + j * h, j + 1 == sub ? cuts[i + 1] : cuts[i] + (j + 1) * h);
    }
    return out;
}

const QuadratureRule& gl10()
{
    static const QuadratureRule r = gauss_legendre(10);
    return r;
}

double integrate_abs_envelope(const SmoothFieldDef& w, double a, double b)
{
    if (a > b) std::swap(a, b);
    if (w.autonomous) return std::fabs(w.envelope(0.0)) * (b - a);
    double s = 0;
    for (auto [lo, hi] : panels(a, b, w.breaks, 16)) {
        QuadratureRule q = gl10().mapped(lo, hi);
        for (std::size_t i = 0; i < q.x.size(); ++i) s += q.w[i] * std::fabs(w.envelope(q.x[i]));
    }
    return s;
}

// Mollifier quadrature in u = k (t - s) in (-1, 1), split where t - u/k crosses a breakpoint.
struct MollifierNodes {
    std::vector<double> u, wt;  // wt includes eta(u)
};

MollifierNodes mollifier_nodes(int k, double t, const std::vector<double>& breaks)
{
    std::vector<double> ub;
    for (double b : breaks) ub.push_back(k * (t - b));
    ub.push_back(k * t);
    ub.push_back(k * (t - 2.0));
    MollifierNodes m;
    for (auto [lo, hi] : panels(-1.0, 1.0, ub, 32)) {
        QuadratureRule q = gl10().mapped(lo, hi);
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            m.u.push_back(q.x[i]);
            m.wt.push_back(q.w[i] * bump(q.x[i]));
        }
    }
    return m;
}

struct RhsEval {
    Vec2 v;
    Mat2 d;
};

RhsEval rhs(const SmoothFieldDef& w, double t, const Vec2& x)
{
    ProfileEval p = profile_eval(w.params, x);
    double e = w.autonomous ? w.envelope(0.0) : w.envelope(t);
    return {e * p.v, e * p.d};
}

FlowResult integrate(const SmoothFieldDef& w, double s, double t, const Vec2& x, int n)
{
    FlowResult r{x, Mat2::identity(), 1.0};
    if (w.outside_support(x) || s == t) return r;
    double dt = (t - s) / n;
    Vec2 X = x;
    Mat2 M = Mat2::identity();
    for (int i = 0; i < n; ++i) {
        double tn = s + i * dt;
        RhsEval k1 = rhs(w, tn, X);
        Mat2 m1 = k1.d * M;
        RhsEval k2 = rhs(w, tn + 0.5 * dt, X + (0.5 * dt) * k1.v);
        Mat2 m2 = k2.d * (M + (0.5 * dt) * m1);
        RhsEval k3 = rhs(w, tn + 0.5 * dt, X + (0.5 * dt) * k2.v);
        Mat2 m3 = k3.d * (M + (0.5 * dt) * m2);
        RhsEval k4 = rhs(w, tn + dt, X + dt * k3.v);
        Mat2 m4 = k4.d * (M + dt * m3);
        X += (dt / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        M = M + (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
    }
    r.endpoint = X;
    r.jacobian_matrix = M;
    r.jacobian_det = M.det();
    return r;
}

int step_count(double s, double t, double h)
{
    if (!(h > 0)) throw DomainError("flow step must be positive");
    return std::max(1, static_cast<int>(std::ceil(std::fabs(t - s) / h - 1e-9)));
}

void check_time(double t)
{
    if (t < 0.0 || t > 2.0) throw DomainError("flow time outside [0,2]");
}

}  // namespace

Vec2 SmoothFieldDef::value(double t, const Vec2& x) const { return rhs(*this, t, x).v; }
Mat2 SmoothFieldDef::jacobian(double t, const Vec2& x) const { return rhs(*this, t, x).d; }
double SmoothFieldDef::divergence(double t, const Vec2& x) const { return jacobian(t, x).trace(); }

double SmoothFieldDef::support_radius() const
{
    return params.profile == ProfileKind::Zero ? 0.0 : norm(params.centre) + params.r1;
}

bool SmoothFieldDef::outside_support(const Vec2& x) const
{
    return params.profile == ProfileKind::Zero || params.strength == 0.0 || norm(x - params.centre) >= params.r1;
}

double SmoothFieldDef::div_sup(double t) const { return std::fabs(envelope(t)) * budget.div; }
double SmoothFieldDef::div_integral(double a, double b) const { return budget.div * envelope_integral(a, b); }
double SmoothFieldDef::c1_integral(double a, double b) const { return budget.c1 * envelope_integral(a, b); }
double SmoothFieldDef::envelope_integral(double a, double b) const { return integrate_abs_envelope(*this, a, b); }

SmoothFieldDef builtin_field(const SmoothFieldParams& p)
{
    if (!(p.r0 > 0 && p.r1 > p.r0)) throw ConfigError("field radii must satisfy 0 < r0 < r1");
    if (!std::isfinite(p.strength) || std::fabs(p.strength) > 100) throw ConfigError("field strength out of range");
    if (!(std::fabs(p.eps) < 1)) throw ConfigError("envelope eps must satisfy |eps| < 1");
    if (!(p.freq > 0)) throw ConfigError("envelope frequency must be positive");
    if (p.t0 < 0 || p.t0 > 2) throw ConfigError("envelope t0 must lie in [0,2]");

    SmoothFieldDef w;
    w.params = p;
    w.name = to_string(p.profile) + "/" + to_string(p.envelope);
    double eps = p.eps, nu = p.freq, t0 = p.t0;
    switch (p.envelope) {
    case EnvelopeKind::Constant: w.envelope = [](double) { return 1.0; }; break;
    case EnvelopeKind::Oscillating:
        w.envelope = [eps, nu](double t) { return 1.0 + eps * std::sin(2 * std::numbers::pi * nu * t); };
        break;
    case EnvelopeKind::Tent:
        w.envelope = [eps, t0](double t) { return 1.0 + eps * std::fabs(t - t0); };
        w.breaks = {t0};
        break;
    case EnvelopeKind::Step:
        w.envelope = [eps, t0](double t) { return t < t0 ? 1.0 : 1.0 + eps; };
        w.breaks = {t0};
        break;
    }
    w.autonomous = p.envelope == EnvelopeKind::Constant || eps == 0.0;
    if (w.autonomous) {
        w.envelope = [](double) { return 1.0; };
        w.breaks.clear();
    }
    w.budget = sample_budget(p);
    w.envelope_sup = sample_envelope_sup(w.envelope, w.breaks);
    return w;
}

ProfileKind parse_profile(const std::string& s)
{
    if (s == "zero") return ProfileKind::Zero;
    if (s == "swirl") return ProfileKind::Swirl;
    if (s == "compression") return ProfileKind::Compression;
    if (s == "shear") return ProfileKind::Shear;
    throw ConfigError("unknown field kind '" + s + "'");
}

EnvelopeKind parse_envelope(const std::string& s)
{
    if (s == "constant") return EnvelopeKind::Constant;
    if (s == "oscillating") return EnvelopeKind::Oscillating;
    if (s == "tent") return EnvelopeKind::Tent;
    if (s == "step") return EnvelopeKind::Step;
    throw ConfigError("unknown envelope '" + s + "'");
}

std::string to_string(ProfileKind k)
{
    switch (k) {
    case ProfileKind::Zero: return "zero";
    case ProfileKind::Swirl: return "swirl";
    case ProfileKind::Compression: return "compression";
    case ProfileKind::Shear: return "shear";
    }
    return "?";
}

std::string to_string(EnvelopeKind k)
{
    switch (k) {
    case EnvelopeKind::Constant: return "constant";
    case EnvelopeKind::Oscillating: return "oscillating";
    case EnvelopeKind::Tent: return "tent";
    case EnvelopeKind::Step: return "step";
    }
    return "?";
}

FlowResult flow_w_between(const SmoothFieldDef& w, double s, double t, const Vec2& x, const FlowOptions& o)
{
    check_time(s);
    check_time(t);
    int n = step_count(s, t, o.h);
    FlowResult r = integrate(w, s, t, x, n);
    if (o.validate) {
        FlowResult fine = integrate(w, s, t, x, 2 * n);
        if (norm(fine.endpoint - r.endpoint) > o.tol)
            throw StepError("flow step too large: halving changed the endpoint by " +
                            std::to_string(norm(fine.endpoint - r.endpoint)));
    }
    return r;
}

FlowResult flow_w(const SmoothFieldDef& w, double t, const Vec2& x, const FlowOptions& o)
{
    return flow_w_between(w, 1.0, t, x, o);
}

Vec2 inverse_flow_w(const SmoothFieldDef& w, double t, const Vec2& y, const FlowOptions& o)
{
    return flow_w_between(w, t, 1.0, y, o).endpoint;
}

FlowResult inverse_flow_w_jac(const SmoothFieldDef& w, double t, const Vec2& y, const FlowOptions& o)
{
    return flow_w_between(w, t, 1.0, y, o);
}

double liouville_det(const SmoothFieldDef& w, double t, const Vec2& x, const FlowOptions& o)
{
    check_time(t);
    if (w.outside_support(x) || t == 1.0) return 1.0;
    int n = step_count(1.0, t, o.h);
    double dt = (t - 1.0) / n;
    Vec2 X = x;
    double J = 1.0;
    // dJ/dt = div w(t, X) J in both time directions
    for (int i = 0; i < n; ++i) {
        double tn = 1.0 + i * dt;
        RhsEval k1 = rhs(w, tn, X);
        double j1 = k1.d.trace() * J;
        RhsEval k2 = rhs(w, tn + 0.5 * dt, X + (0.5 * dt) * k1.v);
        double j2 = k2.d.trace() * (J + 0.5 * dt * j1);
        RhsEval k3 = rhs(w, tn + 0.5 * dt, X + (0.5 * dt) * k2.v);
        double j3 = k3.d.trace() * (J + 0.5 * dt * j2);
        RhsEval k4 = rhs(w, tn + dt, X + dt * k3.v);
        double j4 = k4.d.trace() * (J + dt * j3);
        X += (dt / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
        J += dt / 6.0 * (j1 + 2 * j2 + 2 * j3 + j4);
    }
    return J;
}

double mollifier_mass(int k, double t)
{
    MollifierNodes m = mollifier_nodes(k, t, {});
    double s = 0;
    for (double v : m.wt) s += v;
    return s;
}

SmoothFieldDef time_mollify(const SmoothFieldDef& w, int k)
{
    if (k < 1) throw DomainError("mollification index must be >= 1");
    if (w.autonomous) return w;
    SmoothFieldDef out = w;
    out.name = w.name + "*eta^" + std::to_string(k);
    auto base = std::make_shared<std::function<double(double)>>(w.envelope);
    std::vector<double> breaks = w.breaks;
    out.envelope = [base, breaks, k](double t) {
        MollifierNodes m = mollifier_nodes(k, t, breaks);
        double num = 0, den = 0;
        for (std::size_t i = 0; i < m.u.size(); ++i) {
            double s = std::clamp(t - m.u[i] / k, 0.0, 2.0);
            num += m.wt[i] * (*base)(s);
            den += m.wt[i];
        }
        return num / den;
    };
    out.breaks.clear();
    out.envelope_sup = sample_envelope_sup(out.envelope, {});
    return out;
}

double pushforward_area_ratio(const SmoothFieldDef& w, double t, const Vec2& x, double delta, int m,
                              const FlowOptions& o)
{
    // walk the boundary of the square counterclockwise and take the shoelace area of its image
    std::vector<Vec2> img;
    img.reserve(4 * m);
    const double h = delta / m, lo1 = x.x1 - delta / 2, lo2 = x.x2 - delta / 2;
    for (int side = 0; side < 4; ++side)
        for (int i = 0; i < m; ++i) {
            double a = i * h;
            Vec2 y = side == 0 ? Vec2{lo1 + a, lo2}
                   : side == 1 ? Vec2{lo1 + delta, lo2 + a}
                   : side == 2 ? Vec2{lo1 + delta - a, lo2 + delta}
                               : Vec2{lo1, lo2 + delta - a};
            img.push_back(flow_w(w, t, y, o).endpoint);
        }
    double area = 0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const Vec2& p = img[i];
        const Vec2& q = img[(i + 1) % img.size()];
        area += p.x1 * q.x2 - q.x1 * p.x2;
    }
    return delta * delta / (0.5 * area);
}

EstimateReport estimate_checks(const SmoothFieldDef& w, const std::vector<double>& times,
                               const std::vector<Vec2>& points, double tol, const FlowOptions& o)
{
    EstimateReport rep;
    for (double t : times) {
        double D = w.div_integral(1.0, t);
        double G = w.c1_integral(1.0, t);
        for (const Vec2& x : points) {
            EstimateSample s;
            s.t = t;
            s.x = x;
            FlowResult f = flow_w(w, t, x, o);
            s.det = f.jacobian_det;
            s.det_lower = std::exp(-D);
            s.det_upper = std::exp(D);
            s.pushforward = pushforward_area_ratio(w, t, x, 0.01, 32, o);
            s.grad_norm = f.jacobian_matrix.op_norm();
            s.grad_bound = std::exp(G);
            s.det_ok = s.det >= s.det_lower - tol && s.det <= s.det_upper + tol;
            s.pushforward_ok = s.pushforward >= s.det_lower - tol && s.pushforward <= s.det_upper + tol;
            s.grad_ok = s.grad_norm <= s.grad_bound * (1 + tol);
            double viol = std::max({0.0, s.det_lower - s.det, s.det - s.det_upper, s.det_lower - s.pushforward,
                                    s.pushforward - s.det_upper});
            rep.max_det_violation = std::max(rep.max_det_violation, viol);
            rep.all_ok = rep.all_ok && s.det_ok && s.pushforward_ok && s.grad_ok;
            rep.samples.push_back(s);
        }
    }
    return rep;
}

}  // namespace tsl
