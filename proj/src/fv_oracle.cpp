#include "tsl/fv_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "tsl/exact_flow.hpp"
#include "tsl/quadrature.hpp"

namespace tsl {

namespace {

// Normal face velocities (or face fluxes divided by h) of one step.
// ux(i, j): face x1 = i h between cells i-1 and i; uy(i, j): face x2 = j h.
struct Faces {
    int n1 = 0, n2 = 0;
    std::vector<double> ux, uy;
};

template <class Row>
void for_rows(FVKernel k, int n, Row&& row)
{
    if (k == FVKernel::Parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < n; ++j) row(j);
    } else {
        for (int j = 0; j < n; ++j) row(j);
    }
}

double max_speed(const Faces& f)
{
    double m = 0.0;
    for (double u : f.ux) m = std::max(m, std::fabs(u));
    for (double u : f.uy) m = std::max(m, std::fabs(u));
    return m;
}

void check_finite(const Faces& f)
{
    for (double u : f.ux)
        if (!std::isfinite(u)) throw DomainError("fv_advance: non-finite field sample");
    for (double u : f.uy)
        if (!std::isfinite(u)) throw DomainError("fv_advance: non-finite field sample");
}

void upwind_update(RealGrid& g, const Faces& f, double dt_over_h, FVKernel k)
{
    const int n1 = g.nx(), n2 = g.ny();
    const std::vector<double> old = g.values();
    std::vector<double>& out = g.values();
    auto at = [&](int i, int j) { return old[std::size_t((j + n2) % n2) * n1 + std::size_t((i + n1) % n1)]; };
    auto flux_x = [&](int i, int j) {
        double u = f.ux[std::size_t(j) * n1 + i];
        return u > 0 ? u * at(i - 1, j) : u * at(i, j);
    };
    auto flux_y = [&](int i, int j) {
        double u = f.uy[std::size_t(j) * n1 + i];
        return u > 0 ? u * at(i, j - 1) : u * at(i, j);
    };
    for_rows(k, n2, [&](int j) {
        for (int i = 0; i < n1; ++i) {
            double fe = flux_x((i + 1) % n1, j), fw = flux_x(i, j);
            double fn = flux_y(i, (j + 1) % n2), fs = flux_y(i, j);
            out[std::size_t(j) * n1 + i] = old[std::size_t(j) * n1 + i] - dt_over_h * ((fe - fw) + (fn - fs));
        }
    });
}

template <class Sample>
void advance(FVState& s, Sample&& sample, double t_end, const FVOptions& o)
{
    if (t_end < s.time) throw DomainError("fv_advance: t_end before the state time");
    const int n1 = s.grid.nx(), n2 = s.grid.ny();
    const double h = std::ldexp(1.0, -s.grid.level());
    Faces f{n1, n2, std::vector<double>(std::size_t(n1) * n2), std::vector<double>(std::size_t(n1) * n2)};
    std::vector<double> breaks = o.breaks;
    std::sort(breaks.begin(), breaks.end());
    while (s.time < t_end) {
        double t = s.time;
        double stop = t_end;
        for (double b : breaks)
            if (b > t) {
                stop = std::min(stop, b);
                break;
            }
        sample(t, f, h, o.kernel);
        check_finite(f);
        double m = max_speed(f);
        double dt = m > 0 ? s.cfl * h / m : stop - t;
        if (t + dt >= stop) dt = stop - t;
        upwind_update(s.grid, f, dt / h, o.kernel);
        s.time = t + dt == stop ? stop : t + dt;
        ++s.steps;
    }
}

}  // namespace

FVState make_fv_state(const RealGrid& initial, double t0, double cfl)
{
    if (!(cfl > 0 && cfl < 1)) throw ConfigError("cfl must lie in (0, 1)");
    FVState s;
    s.grid = initial;
    s.time = t0;
    s.cfl = cfl;
    return s;
}

void fv_advance(FVState& state, const FieldSampler& field, double t_end, const FVOptions& o)
{
    const double x0 = std::ldexp(double(state.grid.i0()), -state.grid.level());
    const double y0 = std::ldexp(double(state.grid.j0()), -state.grid.level());
    advance(
        state,
        [&](double t, Faces& f, double h, FVKernel k) {
            for_rows(k, f.n2, [&](int j) {
                for (int i = 0; i < f.n1; ++i) {
                    f.ux[std::size_t(j) * f.n1 + i] = field(t, {x0 + i * h, y0 + (j + 0.5) * h}).x1;
                    f.uy[std::size_t(j) * f.n1 + i] = field(t, {x0 + (i + 0.5) * h, y0 + j * h}).x2;
                }
            });
        },
        t_end, o);
}

void fv_advance_stream(FVState& state, const StreamSampler& stream, double t_end, const FVOptions& o)
{
    const double x0 = std::ldexp(double(state.grid.i0()), -state.grid.level());
    const double y0 = std::ldexp(double(state.grid.j0()), -state.grid.level());
    const int n1 = state.grid.nx(), n2 = state.grid.ny();
    std::vector<double> psi(std::size_t(n1 + 1) * (n2 + 1));
    advance(
        state,
        [&](double t, Faces& f, double h, FVKernel k) {
            for_rows(k, n2 + 1, [&](int j) {
                for (int i = 0; i <= n1; ++i) psi[std::size_t(j) * (n1 + 1) + i] = stream(t, {x0 + i * h, y0 + j * h});
            });
            auto p = [&](int i, int j) { return psi[std::size_t(j) * (n1 + 1) + i]; };
            for_rows(k, n2, [&](int j) {
                for (int i = 0; i < n1; ++i) {
                    f.ux[std::size_t(j) * n1 + i] = -(p(i, j + 1) - p(i, j)) / h;
                    f.uy[std::size_t(j) * n1 + i] = (p(i + 1, j) - p(i, j)) / h;
                }
            });
        },
        t_end, o);
}

double fv_mass(const RealGrid& grid)
{
    const int n1 = grid.nx(), n2 = grid.ny();
    std::vector<double> rows(n2, 0.0);
    for (int j = 0; j < n2; ++j) {
        double r = 0.0;
        for (int i = 0; i < n1; ++i) r += grid.values()[std::size_t(j) * n1 + i];
        rows[j] = r;
    }
    double total = 0.0;
    for (double r : rows) total += r;
    return std::ldexp(total, -2 * grid.level());
}

double stream_b(int lambda, double t, const Vec2& x, const ExactOptions& opt)
{
    if (!(t >= 0.0 && t <= 2.0)) throw DomainError("stream_b: time outside [0,2]");
    if (t == 1.0) return 0.0;
    StageIndex s = stage_of(t);
    double sign = opt.orientation_sign() * (s.side == Side::Backward ? opt.reflection_sign : 1);
    // b = sign u_lambda(2^k x) = sign 2^k u_{lambda+k}(x)
    return sign * std::ldexp(stream_function(lambda + s.k, x), s.k);
}

double l1_per_area(const RealGrid& a, const RealGrid& b)
{
    if (!a.same_window(b)) throw AlignmentError("l1_per_area: grids do not share a window");
    const int n1 = a.nx(), n2 = a.ny();
    double total = 0.0;
    for (int j = 0; j < n2; ++j) {
        double r = 0.0;
        for (int i = 0; i < n1; ++i) r += std::fabs(a.values()[std::size_t(j) * n1 + i] - b.values()[std::size_t(j) * n1 + i]);
        total += r;
    }
    return total / (double(n1) * n2);
}

namespace {

// bump on (0, 1) and its derivative
double chi(double s) { return s <= 0 || s >= 1 ? 0.0 : 2.0 * bump(2 * s - 1); }
double chi_prime(double s)
{
    if (s <= 0 || s >= 1) return 0.0;
    double u = 2 * s - 1, d = 1 - u * u;
    return 2.0 * bump(u) * (-2 * u / (d * d)) * 2.0;
}

}  // namespace

double TestFunction::value(double t, const Vec2& x) const
{
    double w = std::ldexp(M_PI, lambda);
    return chi((t - t0) / (t1 - t0)) * std::cos(w * (a1 * x.x1 + a2 * x.x2) + phase);
}

double TestFunction::dt(double t, const Vec2& x) const
{
    double w = std::ldexp(M_PI, lambda);
    return chi_prime((t - t0) / (t1 - t0)) / (t1 - t0) * std::cos(w * (a1 * x.x1 + a2 * x.x2) + phase);
}

Vec2 TestFunction::grad(double t, const Vec2& x) const
{
    double w = std::ldexp(M_PI, lambda);
    double g = -chi((t - t0) / (t1 - t0)) * w * std::sin(w * (a1 * x.x1 + a2 * x.x2) + phase);
    return {g * a1, g * a2};
}

std::vector<TestFunction> residual_battery(int lambda)
{
    // modes (m, +-m) resonate with the chessboard transported during stages of scale 1/m
    std::vector<TestFunction> v{
        {0.05, 0.45, 1, 1, 0.0},   {0.05, 0.45, 1, -1, 0.3}, {0.55, 0.7, 2, 2, 0.0},  {0.1, 0.9, 1, 2, 0.3},
        {0.3, 0.7, 2, 2, 1.1},     {1.55, 1.95, 1, 1, 0.3},  {1.125, 1.375, 2, 2, 0.0}, {1.3, 1.7, 1, -1, 0.4},
        {1.05, 1.45, 2, -2, 0.2},  {1.1, 1.9, 0, 1, 0.5},
    };
    for (auto& f : v) f.lambda = lambda;
    return v;
}

namespace {

// Gauss-Legendre over [t0, t1] cut at the breaks; g(t) is the spatial integral.
template <class G>
double time_integral(double t0, double t1, std::vector<double> breaks, int nodes, double panel, G&& g)
{
    panel = std::min(panel, (t1 - t0) / 32);
    breaks.push_back(t0);
    breaks.push_back(t1);
    std::sort(breaks.begin(), breaks.end());
    QuadratureRule rule = gauss_legendre(nodes);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double a = std::max(breaks[i], t0), b = std::min(breaks[i + 1], t1);
        if (!(b > a)) continue;
        int m = std::max(1, static_cast<int>(std::ceil((b - a) / panel - 1e-9)));
        for (int p = 0; p < m; ++p) {
            QuadratureRule r = rule.mapped(a + (b - a) * p / m, a + (b - a) * (p + 1) / m);
            for (std::size_t n = 0; n < r.x.size(); ++n) total += r.w[n] * g(r.x[n]);
        }
    }
    return total;
}

// Midpoint rule over the period window with per-row partial sums.
template <class F>
double window_integral(int lambda, int level, FVKernel k, F&& f)
{
    int n = period_cells(lambda, level);
    double h = std::ldexp(1.0, -level);
    std::vector<double> rows(n, 0.0);
    for_rows(k, n, [&](int j) {
        double r = 0.0;
        for (int i = 0; i < n; ++i) r += f(Vec2{(i + 0.5) * h, (j + 0.5) * h});
        rows[j] = r;
    });
    double total = 0.0;
    for (double r : rows) total += r;
    return total * h * h;
}

std::vector<double> b_breaks(int lambda, const std::vector<double>& extra)
{
    std::vector<double> br = stage_boundaries(ExactSpec::building_block(lambda), 12);
    br.insert(br.end(), extra.begin(), extra.end());
    return br;
}

}  // namespace

double weak_residual(const DensitySeries& rho, const FieldSampler& b, const TestFunction& phi, const ResidualOptions& o)
{
    return time_integral(phi.t0, phi.t1, o.breaks, o.time_nodes, o.time_panel, [&](double t) {
        return window_integral(phi.lambda, o.space_level, o.kernel, [&](const Vec2& x) {
            double r = rho(t, x);
            return r == 0.0 ? 0.0 : r * (phi.dt(t, x) + dot(b(t, x), phi.grad(t, x)));
        });
    });
}

double weak_residual_unmixing(int lambda, const TestFunction& phi, const ExactOptions& opt, const ResidualOptions& o)
{
    if (phi.t0 < 1.0 && phi.t1 > 1.0) throw DomainError("weak_residual_unmixing: test function support contains t = 1");
    const ExactSpec bb = ExactSpec::building_block(lambda);
    return time_integral(phi.t0, phi.t1, b_breaks(lambda, o.breaks), o.time_nodes, o.time_panel, [&](double t) {
        // zeta(t) = zeta(2 - t) is the push-forward of zeta_bar by the forward flow up to min(t, 2 - t)
        double tf = t < 1.0 ? t : 2.0 - t;
        return window_integral(lambda, o.space_level, o.kernel, [&](const Vec2& y) {
            if (chessboard(lambda, y) == 0) return 0.0;
            Vec2 x = flow_field(bb, 0.0, tf, y, opt);
            return phi.dt(t, x) + dot(eval_b(lambda, t, x, opt), phi.grad(t, x));
        });
    });
}

}  // namespace tsl
