#include "tsl/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "tsl/exact_flow.hpp"
#include "tsl/quadrature.hpp"

namespace tsl {

namespace {

// int_{uL}^{uR} (A + B u + C u^2) eta(u) du
double poly_moment(double A, double B, double C, double uL, double uR)
{
    uL = std::clamp(uL, -1.0, 1.0);
    uR = std::clamp(uR, -1.0, 1.0);
    if (uR <= uL) return 0.0;
    double m0 = bump_moment(0, uR) - bump_moment(0, uL);
    double m1 = bump_moment(1, uR) - bump_moment(1, uL);
    double m2 = bump_moment(2, uR) - bump_moment(2, uL);
    return A * m0 + B * m1 + C * m2;
}

// I(z1, s) = int g(a, s) eta_kappa(z1 - a) da, exact piece by piece
double inner(double kappa, double z1, double s)
{
    const double r = 1.0 / kappa;
    const std::int64_t m2 = static_cast<std::int64_t>(std::floor(s + 0.5));
    const double e = std::fabs(s - double(m2));
    double total = 0.0;
    const std::int64_t lo = static_cast<std::int64_t>(std::floor(z1 - r + 0.5));
    const std::int64_t hi = static_cast<std::int64_t>(std::floor(z1 + r + 0.5));
    auto u_of = [&](double a) { return kappa * (z1 - a); };
    for (std::int64_t m1 = lo; m1 <= hi; ++m1) {
        const double c = z1 - double(m1);
        const double left = double(m1) - 0.5, right = double(m1) + 0.5;
        if (((m1 + m2) & 1) != 0) {
            total += 0.5 * poly_moment(1.0, 0.0, 0.0, u_of(right), u_of(left));
            continue;
        }
        // 2 (a - m1)^2 = 2 c^2 - (4c/kappa) u + (2/kappa^2) u^2
        const double A = 2 * c * c, B = -4 * c / kappa, C = 2 / (kappa * kappa);
        total += poly_moment(A, B, C, u_of(double(m1) - e), u_of(left));
        total += 2 * e * e * poly_moment(1.0, 0.0, 0.0, u_of(double(m1) + e), u_of(double(m1) - e));
        total += poly_moment(A, B, C, u_of(right), u_of(double(m1) + e));
    }
    return total;
}

const QuadratureRule& gl10()
{
    static const QuadratureRule r = gauss_legendre(10);
    return r;
}

double second_moment()
{
    static const double m = bump_moment(2, 1.0);
    return m;
}

}  // namespace

double mollified_stream_direct(double kappa, const Vec2& z)
{
    const double r = 1.0 / kappa;
    const std::int64_t m1 = static_cast<std::int64_t>(std::floor(z.x1 + 0.5));
    const std::int64_t m2 = static_cast<std::int64_t>(std::floor(z.x2 + 0.5));
    const double d1 = z.x1 - double(m1), d2 = z.x2 - double(m2);
    const double a1 = std::fabs(d1), a2 = std::fabs(d2);
    // kernel support inside one polynomial piece: closed form
    if (a1 + r < 0.5 && a2 + r < 0.5) {
        if (((m1 + m2) & 1) != 0) return 0.5;
        const double var = second_moment() / (kappa * kappa);
        if (a1 - r > a2 + r) return 2 * (d1 * d1 + var);
        if (a2 - r > a1 + r) return 2 * (d2 * d2 + var);
    }
    // outer integral over u = kappa y2, split where z2 - u / kappa crosses (1/2) Z
    std::vector<double> cuts;
    for (int i = 0; i <= 8; ++i) cuts.push_back(-1.0 + 0.25 * i);
    for (std::int64_t j = static_cast<std::int64_t>(std::floor(2 * (z.x2 - r))); j <= std::floor(2 * (z.x2 + r)) + 1; ++j) {
        double u = kappa * (z.x2 - 0.5 * double(j));
        if (u > -1.0 && u < 1.0) cuts.push_back(u);
    }
    std::sort(cuts.begin(), cuts.end());
    const QuadratureRule& g = gl10();
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        double a = cuts[p], b = cuts[p + 1];
        if (b - a < 1e-15) continue;
        double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            double u = c + h * g.x[i];
            total += h * g.w[i] * bump(u) * inner(kappa, z.x1, z.x2 - u / kappa);
        }
    }
    return total;
}

MollifiedStream::MollifiedStream(double kappa, int nodes) : kappa_(kappa), n_(nodes)
{
    const int m = n_ + 3;
    values_.assign(std::size_t(m) * m, 0.0);
    const double dz = 1.0 / n_;
    // g and the kernel are symmetric under z1 <-> z2: fill the lower triangle and mirror
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < m; ++j)
        for (int i = 0; i <= j; ++i) {
            double v = mollified_stream_direct(kappa_, {(i - 1) * dz, (j - 1) * dz});
            values_[std::size_t(j) * m + i] = v;
            values_[std::size_t(i) * m + j] = v;
        }
}

namespace {

struct Fold {
    double f;   // position inside the cell
    int i;      // cell index
    double s;   // derivative sign from the reflection
};

Fold fold(double z, int n)
{
    double p = z - 2.0 * std::floor(z / 2.0);
    double s = 1.0;
    if (p > 1.0) {
        p = 2.0 - p;
        s = -1.0;
    }
    double q = p * n;
    int i = std::min(n - 1, static_cast<int>(q));
    return {q - i, i, s};
}

void catmull_rom(double f, double w[4], double dw[4], double ddw[4])
{
    double f2 = f * f, f3 = f2 * f;
    w[0] = 0.5 * (-f + 2 * f2 - f3);
    w[1] = 0.5 * (2 - 5 * f2 + 3 * f3);
    w[2] = 0.5 * (f + 4 * f2 - 3 * f3);
    w[3] = 0.5 * (-f2 + f3);
    dw[0] = 0.5 * (-1 + 4 * f - 3 * f2);
    dw[1] = 0.5 * (-10 * f + 9 * f2);
    dw[2] = 0.5 * (1 + 8 * f - 9 * f2);
    dw[3] = 0.5 * (-2 * f + 3 * f2);
    ddw[0] = 0.5 * (4 - 6 * f);
    ddw[1] = 0.5 * (-10 + 18 * f);
    ddw[2] = 0.5 * (8 - 18 * f);
    ddw[3] = 0.5 * (-2 + 6 * f);
}

}  // namespace

double MollifiedStream::psi(const Vec2& z) const
{
    Fold a = fold(z.x1, n_), b = fold(z.x2, n_);
    double w1[4], d1[4], e1[4], w2[4], d2[4], e2[4];
    catmull_rom(a.f, w1, d1, e1);
    catmull_rom(b.f, w2, d2, e2);
    const int m = n_ + 3;
    double s = 0;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) s += w1[i] * w2[j] * values_[std::size_t(b.i + j) * m + (a.i + i)];
    return s;
}

Vec2 MollifiedStream::velocity(const Vec2& z, Mat2& jac) const
{
    Fold a = fold(z.x1, n_), b = fold(z.x2, n_);
    double w1[4], d1[4], e1[4], w2[4], d2[4], e2[4];
    catmull_rom(a.f, w1, d1, e1);
    catmull_rom(b.f, w2, d2, e2);
    const int m = n_ + 3;
    double p1 = 0, p2 = 0, p11 = 0, p12 = 0, p22 = 0;
    for (int j = 0; j < 4; ++j) {
        const double* row = &values_[std::size_t(b.i + j) * m + a.i];
        double r0 = 0, r1 = 0, r2 = 0;
        for (int i = 0; i < 4; ++i) {
            r0 += w1[i] * row[i];
            r1 += d1[i] * row[i];
            r2 += e1[i] * row[i];
        }
        p1 += w2[j] * r1;
        p2 += d2[j] * r0;
        p11 += w2[j] * r2;
        p12 += d2[j] * r1;
        p22 += e2[j] * r0;
    }
    const double n = n_;
    p1 *= a.s * n;
    p2 *= b.s * n;
    p11 *= n * n;
    p22 *= n * n;
    p12 *= a.s * b.s * n * n;
    jac = {-p12, -p22, p11, p12};
    return {-p2, p1};
}

Vec2 MollifiedStream::velocity(const Vec2& z) const
{
    Mat2 j;
    return velocity(z, j);
}

std::shared_ptr<const MollifiedStream> mollified_stream(int e, const RegularizationOptions& o)
{
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const MollifiedStream>> cache;
    const double kappa = std::ldexp(1.0, e);
    int nodes = std::clamp(static_cast<int>(std::min<double>(o.max_nodes, o.nodes_per_width * kappa)), 64, o.max_nodes);
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(e, nodes);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto s = std::make_shared<const MollifiedStream>(kappa, nodes);
    cache.emplace(key, s);
    return s;
}

namespace {

int exponent_of(int k)
{
    if (k < 1 || (k & (k - 1)) != 0) throw DomainError("mollification index must be a power of two");
    int e = 0;
    while ((1 << e) < k) ++e;
    return e;
}

}  // namespace

Vec2 mollify_space(const ExactSpec& spec, int k, double t, const Vec2& x, const ExactOptions& exact,
                   const RegularizationOptions& o)
{
    if (spec.trunc == Truncation::None) throw SingularTimeError("only truncated fields are mollified");
    if (t < 0.0 || t > 2.0) throw DomainError("time outside [0,2]");
    if (in_truncation_window(spec, t)) return {0.0, 0.0};
    StageIndex st = stage_of(t);
    int sign = st.side == Side::Forward ? 1 : exact.reflection_sign;
    int level = spec.lambda + st.k;
    auto s = mollified_stream(exponent_of(k) - level, o);
    double c = exact.orientation_sign() * sign * std::ldexp(1.0, -spec.lambda);
    Vec2 v = s->velocity({std::ldexp(x.x1, level), std::ldexp(x.x2, level)});
    return {c * v.x1, c * v.x2};
}

MollifiedField::MollifiedField(const PerturbedSpec& base, int k, const RegularizationOptions& o)
    : base_(base), k_(k), opt_(o), wk_(time_mollify(base.w, k))
{
    if (!base.truncated()) throw SingularTimeError("regularisation needs a truncated branch");
    const int e = exponent_of(k);
    const ExactSpec spec = base.field();
    auto ps = pieces_between(spec, 0.0, 2.0, base.exact);
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Piece p;
        p.level = spec.lambda + ps[i].k;
        p.coeff = base.exact.orientation_sign() * ps[i].sign * std::ldexp(1.0, -spec.lambda);
        p.t0 = ps[i].t0;
        p.t1 = ps[i].t1;
        // the field is frozen outside [0, 2] for the time convolution
        if (opt_.time_mollify_b && p.t0 == 0.0) p.t0 = -HUGE_VAL;
        if (opt_.time_mollify_b && p.t1 == 2.0) p.t1 = HUGE_VAL;
        p.stream = mollified_stream(e - p.level, opt_);
        pieces_.push_back(p);
    }
}

double MollifiedField::weight(const Piece& p, double t) const
{
    if (!opt_.time_mollify_b) return (p.t0 <= t && t < p.t1) || (t == 2.0 && p.t1 == 2.0) ? 1.0 : 0.0;
    double a = std::isinf(p.t0) ? 1.0 : bump_cdf(k_ * (t - p.t0));
    double b = std::isinf(p.t1) ? 0.0 : bump_cdf(k_ * (t - p.t1));
    return a - b;
}

Vec2 MollifiedField::exact_part(double t, const Vec2& x, Mat2& jac) const
{
    Vec2 out{0.0, 0.0};
    jac = Mat2::zero();
    for (const Piece& p : pieces_) {
        double wgt = weight(p, t);
        if (wgt == 0.0) continue;
        Mat2 j;
        Vec2 v = p.stream->velocity({std::ldexp(x.x1, p.level), std::ldexp(x.x2, p.level)}, j);
        double c = wgt * p.coeff;
        out += c * v;
        jac = jac + (c * std::ldexp(1.0, p.level)) * j;
    }
    return out;
}

Vec2 MollifiedField::exact_part(double t, const Vec2& x) const
{
    Mat2 j;
    return exact_part(t, x, j);
}

Vec2 MollifiedField::assembled(double t, const Vec2& x) const
{
    if (wk_.outside_support(x)) return exact_part(t, x) + wk_.value(t, x);
    FlowResult inv = inverse_flow_w_jac(wk_, t, x, base_.flow);
    FlowResult fw = flow_w(wk_, t, inv.endpoint, base_.flow);
    return fw.jacobian_matrix * exact_part(t, inv.endpoint) + wk_.value(t, x);
}

std::vector<double> MollifiedField::time_breaks() const
{
    std::vector<double> out{0.0, 2.0};
    for (const Piece& p : pieces_)
        for (double b : {p.t0, p.t1}) {
            if (std::isinf(b)) continue;
            if (opt_.time_mollify_b) {
                out.push_back(std::clamp(b - 1.0 / k_, 0.0, 2.0));
                out.push_back(std::clamp(b + 1.0 / k_, 0.0, 2.0));
            } else {
                out.push_back(b);
            }
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double MollifiedField::step_for(double a, double b) const
{
    // Lipschitz scale of the active pieces: 2^s (4 + 2 kappa_s) with kappa_s = k 2^-(lambda+s)
    double lo = std::min(a, b), hi = std::max(a, b);
    double L = 1.0;
    for (const Piece& p : pieces_) {
        double reach = opt_.time_mollify_b ? 1.0 / k_ : 0.0;
        if (p.t1 + reach <= lo || p.t0 - reach >= hi) continue;
        int s = p.level - base_.lambda;
        L = std::max(L, std::ldexp(4.0, s) + 2.0 * k_ * std::ldexp(1.0, -base_.lambda));
    }
    return opt_.step_factor / L;
}

FlowResult MollifiedField::flow_Z(double s, double t, const Vec2& x, bool jacobian) const
{
    FlowResult r{x, Mat2::identity(), 1.0};
    if (s == t) return r;
    std::vector<double> cuts{s, t};
    for (double b : time_breaks())
        if (b > std::min(s, t) && b < std::max(s, t)) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    if (t < s) std::reverse(cuts.begin(), cuts.end());
    Vec2 z = x;
    Mat2 M = Mat2::identity();
    auto f = [&](double tt, const Vec2& p, const Mat2& m, Mat2& dm) {
        Mat2 j;
        Vec2 v = exact_part(tt, p, j);
        if (jacobian) dm = j * m;
        return v;
    };
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        double a = cuts[c], b = cuts[c + 1];
        double hmax = step_for(a, b) / (jacobian ? opt_.jacobian_refine : 1);
        int n = std::max(1, static_cast<int>(std::ceil(std::fabs(b - a) / hmax)));
        double h = (b - a) / n;
        for (int i = 0; i < n; ++i) {
            double tt = a + i * h;
            Mat2 k1m, k2m, k3m, k4m;
            Vec2 k1 = f(tt, z, M, k1m);
            Vec2 k2 = f(tt + h / 2, z + (h / 2) * k1, M + (h / 2) * k1m, k2m);
            Vec2 k3 = f(tt + h / 2, z + (h / 2) * k2, M + (h / 2) * k2m, k3m);
            Vec2 k4 = f(tt + h, z + h * k3, M + h * k3m, k4m);
            z = z + (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (jacobian) M = M + (h / 6) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m);
        }
    }
    r.endpoint = z;
    r.jacobian_matrix = M;
    r.jacobian_det = M.det();
    return r;
}

std::vector<Vec2> MollifiedField::flow_Z_path(const Vec2& x, const std::vector<double>& times) const
{
    std::vector<Vec2> out;
    out.reserve(times.size());
    double tc = 0.0;
    Vec2 z = x;
    for (double t : times) {
        z = flow_Z(tc, t, z).endpoint;
        tc = t;
        out.push_back(z);
    }
    return out;
}

FlowResult MollifiedField::flow_Y(int anchor, double t, const Vec2& x) const
{
    if (anchor != 0 && anchor != 1) throw DomainError("anchor must be 0 or 1");
    FlowResult pre{x, Mat2::identity(), 1.0};
    double s = 1.0;
    if (anchor == 0) {
        pre = inverse_flow_w_jac(wk_, 0.0, x, base_.flow);
        s = 0.0;
    }
    FlowResult z = flow_Z(s, t, pre.endpoint, true);
    FlowResult post = flow_w(wk_, t, z.endpoint, base_.flow);
    Mat2 D = post.jacobian_matrix * z.jacobian_matrix * pre.jacobian_matrix;
    return {post.endpoint, D, D.det()};
}

double MollifiedField::density(double t, const Vec2& x) const
{
    // Y_0(t)^{-1} = X_{w^k}(0) o Z(t -> 0) o X_{w^k}(t)^{-1}; det D Z = 1
    FlowResult a = inverse_flow_w_jac(wk_, t, x, base_.flow);
    Vec2 z = flow_Z(t, 0.0, a.endpoint).endpoint;
    FlowResult b = flow_w(wk_, 0.0, z, base_.flow);
    double rho_bar = density_eval(base_, 0.0, b.endpoint);
    return rho_bar * a.jacobian_det * b.jacobian_det;
}

double MollifiedField::pairing(double t, const std::function<double(const Vec2&)>& phi, const Rect& ybox, int n) const
{
    const double dx = (ybox.x1 - ybox.x0) / n, dy = (ybox.y1 - ybox.y0) / n;
    const bool cancel = base_.w.autonomous;  // then w^k = w and X_{w^k}(0)^{-1} X_w(0) = id
    std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
        double acc = 0;
        for (int i = 0; i < n; ++i) {
            Vec2 y{ybox.x0 + (i + 0.5) * dx, ybox.y0 + (j + 0.5) * dy};
            double z0 = chessboard(base_.lambda, y);
            if (z0 == 0.0) continue;
            Vec2 p = y;
            if (!cancel) p = inverse_flow_w(wk_, 0.0, flow_w(base_.w, 0.0, y, base_.flow).endpoint, base_.flow);
            p = flow_Z(0.0, t, p).endpoint;
            p = flow_w(wk_, t, p, base_.flow).endpoint;
            acc += z0 * phi(p);
        }
        rows[j] = acc;
    }
    double total = 0;
    for (double r : rows) total += r;
    return total * dx * dy;
}

std::vector<double> MollifiedField::pairings(const std::vector<double>& times,
                                            const std::vector<std::function<double(const Vec2&)>>& phis,
                                            const Rect& ybox, int n) const
{
    const double dx = (ybox.x1 - ybox.x0) / n, dy = (ybox.y1 - ybox.y0) / n;
    const bool cancel = base_.w.autonomous;
    const std::size_t m = times.size() * phis.size();
    std::vector<std::vector<double>> rows(n, std::vector<double>(m, 0.0));
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < n; ++j) {
        std::vector<double>& acc = rows[j];
        for (int i = 0; i < n; ++i) {
            Vec2 y{ybox.x0 + (i + 0.5) * dx, ybox.y0 + (j + 0.5) * dy};
            double z0 = chessboard(base_.lambda, y);
            if (z0 == 0.0) continue;
            Vec2 p = y;
            if (!cancel) p = inverse_flow_w(wk_, 0.0, flow_w(base_.w, 0.0, y, base_.flow).endpoint, base_.flow);
            std::vector<Vec2> path = flow_Z_path(p, times);
            for (std::size_t ti = 0; ti < times.size(); ++ti) {
                Vec2 x = flow_w(wk_, times[ti], path[ti], base_.flow).endpoint;
                for (std::size_t d = 0; d < phis.size(); ++d) acc[ti * phis.size() + d] += z0 * phis[d](x);
            }
        }
    }
    std::vector<double> out(m, 0.0);
    for (const auto& r : rows)
        for (std::size_t e = 0; e < m; ++e) out[e] += r[e];
    for (double& v : out) v *= dx * dy;
    return out;
}

std::vector<double> regularization_time_mesh(const ExactSpec& spec, int uniform)
{
    std::vector<double> m = stage_boundaries(spec);
    for (int i = 0; i <= uniform; ++i) m.push_back(2.0 * i / uniform);
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    return m;
}

std::vector<double> refine_mesh(const std::vector<double>& mesh)
{
    std::vector<double> out;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        out.push_back(mesh[i]);
        if (i + 1 < mesh.size()) out.push_back(0.5 * (mesh[i] + mesh[i + 1]));
    }
    return out;
}

namespace {

// #{n in Z^2 : |y + n P - c| <= R}
std::int64_t lattice_count(const Vec2& y, double P, const Vec2& c, double R)
{
    std::int64_t count = 0;
    double dx0 = c.x1 - y.x1, dy0 = c.x2 - y.x2;
    std::int64_t n1lo = static_cast<std::int64_t>(std::ceil((dx0 - R) / P));
    std::int64_t n1hi = static_cast<std::int64_t>(std::floor((dx0 + R) / P));
    for (std::int64_t n1 = n1lo; n1 <= n1hi; ++n1) {
        double a = y.x1 + n1 * P - c.x1;
        double rem = R * R - a * a;
        if (rem < 0) continue;
        double h = std::sqrt(rem);
        std::int64_t lo = static_cast<std::int64_t>(std::ceil((dy0 - h) / P));
        std::int64_t hi = static_cast<std::int64_t>(std::floor((dy0 + h) / P));
        if (hi >= lo) count += hi - lo + 1;
    }
    return count;
}

L1Profile l1_direct(const MollifiedField& f, double radius, const std::vector<double>& times, int n_samples)
{
    L1Profile out;
    out.times = times;
    out.distance.assign(times.size(), 0.0);
    const int n = std::max(8, static_cast<int>(std::sqrt(double(n_samples))));
    const double h = 2 * radius / n;
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> rows(n, 0.0);
#pragma omp parallel for schedule(dynamic)
        for (int j = 0; j < n; ++j) {
            double acc = 0;
            for (int a = 0; a < n; ++a) {
                Vec2 x{-radius + (a + 0.5) * h, -radius + (j + 0.5) * h};
                if (norm(x) > radius) continue;
                acc += std::fabs(f.density(times[i], x) - density_eval(f.base(), times[i], x));
            }
            rows[j] = acc;
        }
        double acc = 0;
        for (double r : rows) acc += r;
        out.distance[i] = acc * h * h;
    }
    return out;
}

}  // namespace

std::vector<L1Profile> regularization_l1(const MollifiedField& f, const std::vector<double>& radii,
                                         const std::vector<double>& times, int n_samples)
{
    std::vector<L1Profile> out(radii.size());
    const PerturbedSpec& base = f.base();
    const SmoothFieldDef& w = base.w;
    const Vec2 origin{0.0, 0.0};
    const Vec2 c = w.params.centre;
    double cdist = norm(c - origin);
    double wr = w.params.r1 * 1.0000001;
    bool trivial_w = w.params.profile == ProfileKind::Zero || w.params.strength == 0.0;
    std::vector<std::size_t> fast;
    std::vector<char> straddle;  // w moves mass across the boundary of B
    for (std::size_t r = 0; r < radii.size(); ++r) {
        out[r].times = times;
        out[r].distance.assign(times.size(), 0.0);
        if (radii[r] <= 0.0) continue;
        if (w.autonomous || trivial_w) {
            out[r].periodic_path = true;
            fast.push_back(r);
            straddle.push_back(!trivial_w && cdist + wr > radii[r] && cdist - wr < radii[r]);
        } else {
            out[r] = l1_direct(f, radii[r], times, n_samples);
        }
    }
    if (!fast.empty()) {
        const double P = std::ldexp(1.0, 1 - base.lambda);
        const std::size_t m = times.size() * fast.size();
        std::vector<std::vector<double>> per(n_samples);
#pragma omp parallel for schedule(dynamic, 64)
        for (int s = 0; s < n_samples; ++s) {
            Vec2 u = r2_point(std::uint64_t(s));
            Vec2 z{P * u.x1, P * u.x2};
            double z0 = chessboard(base.lambda, z);
            std::vector<Vec2> path = f.flow_Z_path(z, times);
            std::vector<double>& v = per[s];
            v.assign(m, 0.0);
            for (std::size_t i = 0; i < times.size(); ++i) {
                double exact = exact_density(base, times[i], path[i]);
                if (exact == z0) continue;
                // copies inside the support of w are tested through X_w(t): both densities are pushed
                // forward by the same X_w(t), so the L1 over B is the mismatch over X_w(t)^-1(B)
                std::vector<std::pair<Vec2, Vec2>> moved;
                if (std::find(straddle.begin(), straddle.end(), 1) != straddle.end()) {
                    const Vec2& y = path[i];
                    auto n1lo = std::ceil((c.x1 - wr - y.x1) / P), n1hi = std::floor((c.x1 + wr - y.x1) / P);
                    auto n2lo = std::ceil((c.x2 - wr - y.x2) / P), n2hi = std::floor((c.x2 + wr - y.x2) / P);
                    for (double n1 = n1lo; n1 <= n1hi; ++n1)
                        for (double n2 = n2lo; n2 <= n2hi; ++n2) {
                            Vec2 pnt{y.x1 + n1 * P, y.x2 + n2 * P};
                            if (norm(pnt - c) >= wr) continue;
                            moved.emplace_back(pnt, flow_w(w, times[i], pnt, base.flow).endpoint);
                        }
                }
                for (std::size_t r = 0; r < fast.size(); ++r) {
                    const double R = radii[fast[r]];
                    double count = double(lattice_count(path[i], P, origin, R));
                    if (straddle[r])
                        for (const auto& [from, to] : moved) count += double(norm(to) <= R) - double(norm(from) <= R);
                    v[i * fast.size() + r] = count * std::fabs(exact - z0);
                }
            }
        }
        // fixed summation order over samples
        for (std::size_t i = 0; i < times.size(); ++i)
            for (std::size_t r = 0; r < fast.size(); ++r) {
                double acc = 0;
                for (int s = 0; s < n_samples; ++s) acc += per[s][i * fast.size() + r];
                out[fast[r]].distance[i] = acc * P * P / n_samples;
            }
    }
    for (L1Profile& p : out)
        for (double d : p.distance) p.sup = std::max(p.sup, d);
    return out;
}

L1Profile regularization_l1(const MollifiedField& f, double radius, const std::vector<double>& times, int n_samples)
{
    return regularization_l1(f, std::vector<double>{radius}, times, n_samples).front();
}

std::vector<SelectionResult> select_k(int q, int lambda, const SmoothFieldDef& w, const std::vector<double>& windows,
                                      const SelectOptions& o, const ExactOptions& exact)
{
    std::vector<SelectionResult> res(windows.size());
    auto make = [&](SolutionVariant v, int k) {
        PerturbedSpec s;
        s.lambda = lambda;
        s.branch = v;
        s.w = w;
        s.exact = exact;
        return MollifiedField(s, k, o.reg);
    };
    auto mesh_of = [&](SolutionVariant v) { return regularization_time_mesh(v.field(lambda), o.uniform_times); };
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        SelectionResult& r = res[i];
        r.q = q;
        r.window_radius = windows[i] < 0 ? std::ldexp(1.0, q) : windows[i];
        r.bound = std::ldexp(1.0, -q) * (1.0 + o.slack);
        if (r.window_radius == 0.0) {
            r.k_q = o.k_min;
            r.success = r.verified = true;
            r.ladder.push_back({o.k_min, 0.0, 0.0});
        } else {
            open.push_back(i);
        }
    }
    auto radii_of = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> radii;
        for (std::size_t i : idx) radii.push_back(res[i].window_radius);
        return radii;
    };
    for (int k = o.k_min; k <= o.k_max && !open.empty(); k *= 2) {
        std::vector<double> radii = radii_of(open);
        std::vector<L1Profile> ls = regularization_l1(make(SolutionVariant::sym(q), k), radii,
                                                      mesh_of(SolutionVariant::sym(q)), o.n_samples);
        std::vector<L1Profile> la = regularization_l1(make(SolutionVariant::asym(q), k), radii,
                                                      mesh_of(SolutionVariant::asym(q)), o.n_samples);
        std::vector<std::size_t> still;
        for (std::size_t j = 0; j < open.size(); ++j) {
            SelectionResult& r = res[open[j]];
            r.ladder.push_back({k, ls[j].sup, la[j].sup});
            r.achieved_distance = std::max(ls[j].sup, la[j].sup);
            if (r.achieved_distance < r.bound) {
                r.k_q = k;
                r.success = true;
            } else {
                still.push_back(open[j]);
            }
        }
        open = std::move(still);
    }
    for (SelectionResult& r : res) {
        if (!r.success || r.verified) continue;
        double vs = regularization_l1(make(SolutionVariant::sym(q), r.k_q), r.window_radius,
                                      refine_mesh(mesh_of(SolutionVariant::sym(q))), o.n_samples).sup;
        double va = regularization_l1(make(SolutionVariant::asym(q), r.k_q), r.window_radius,
                                      refine_mesh(mesh_of(SolutionVariant::asym(q))), o.n_samples).sup;
        r.verified_distance = std::max(vs, va);
        r.verified = r.verified_distance < 1.1 * r.bound;
    }
    return res;
}

SelectionResult select_k(int q, int lambda, const SmoothFieldDef& w, const SelectOptions& o, const ExactOptions& exact)
{
    return select_k(q, lambda, w, std::vector<double>{o.window_radius}, o, exact).front();
}

std::vector<Rect> demo_dictionary(int lambda)
{
    const double c = std::ldexp(1.0, -lambda);
    std::vector<Rect> out;
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) out.push_back({i * c, j * c, (i + 1) * c, (j + 1) * c});
    return out;
}

std::vector<DemoResult> theorem_demo(int lambda, const SmoothFieldDef& w, const std::vector<int>& qs,
                                     const std::vector<double>& windows, const DemoOptions& o,
                                     const ExactOptions& exact)
{
    std::vector<DemoResult> res(windows.size());
    const double threshold = 0.4 * std::exp(-w.div_integral(0.0, 2.0));
    const std::vector<Rect> dict = demo_dictionary(lambda);
    const double P = std::ldexp(1.0, 1 - lambda);
    const double margin = 2.0 * std::ldexp(1.0, -lambda) + w.budget.c0 * w.envelope_sup * 2.0;
    const Rect ybox{-margin, -margin, P + margin, P + margin};
    const int n = o.pairing_n;
    auto spec_of = [&](SolutionVariant v) {
        PerturbedSpec s;
        s.lambda = lambda;
        s.branch = v;
        s.w = w;
        s.exact = exact;
        return s;
    };
    std::vector<std::function<double(const Vec2&)>> phis;
    for (const Rect& r : dict) {
        double inv = 1.0 / r.area();
        phis.push_back([r, inv](const Vec2& x) {
            return x.x1 >= r.x0 && x.x1 < r.x1 && x.x2 >= r.y0 && x.x2 < r.y1 ? inv : 0.0;
        });
    }
    const std::size_t nd = dict.size();
    // limits: unmixing (for sym) and mixed (for asym) perturbed solutions
    std::vector<double> limit_sym = pairings(spec_of(SolutionVariant::unmixing()), o.times, phis, ybox, n);
    std::vector<double> limit_asym = pairings(spec_of(SolutionVariant::mixed()), o.times, phis, ybox, n);
    for (DemoResult& d : res) d.threshold = threshold;
    for (int q : qs) {
        std::vector<SelectionResult> sels = select_k(q, lambda, w, windows, o.select, exact);
        std::vector<double> es = pairings(spec_of(SolutionVariant::sym(q)), o.times, phis, ybox, n);
        std::vector<double> ea = pairings(spec_of(SolutionVariant::asym(q)), o.times, phis, ybox, n);
        std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_k;  // windows may share k
        for (std::size_t wi = 0; wi < windows.size(); ++wi) {
            DemoResult& d = res[wi];
            const SelectionResult& sel = sels[wi];
            d.selections.push_back(sel);
            int k = sel.k_q > 0 ? sel.k_q : o.select.k_max;
            if (!by_k.count(k)) {
                MollifiedField fs(spec_of(SolutionVariant::sym(q)), k, o.select.reg);
                MollifiedField fa(spec_of(SolutionVariant::asym(q)), k, o.select.reg);
                by_k[k] = {fs.pairings(o.times, phis, ybox, n), fa.pairings(o.times, phis, ybox, n)};
            }
            const auto& [ps, pa] = by_k[k];
            double mutual = 0;
            for (std::size_t ti = 0; ti < o.times.size(); ++ti) {
                double t = o.times[ti];
                for (std::size_t di = 0; di < nd; ++di) {
                    std::size_t e = ti * nd + di;
                    double cb = std::ldexp(1.0, -q) / dict[di].area();
                    d.rows.push_back({q, k, "sym", t, int(di), std::fabs(ps[e] - limit_sym[e]),
                                      std::fabs(es[e] - limit_sym[e]), cb});
                    d.rows.push_back({q, k, "asym", t, int(di), std::fabs(pa[e] - limit_asym[e]),
                                      std::fabs(ea[e] - limit_asym[e]), cb});
                    if (t == 2.0) mutual = std::max(mutual, std::fabs(ps[e] - pa[e]));
                }
            }
            d.mutual_gap.push_back(mutual);
        }
    }
    return res;
}

DemoResult theorem_demo(int lambda, const SmoothFieldDef& w, const std::vector<int>& qs, const DemoOptions& o,
                        const ExactOptions& exact)
{
    return theorem_demo(lambda, w, qs, std::vector<double>{o.select.window_radius}, o, exact).front();
}

Anchor0Report anchor0_compressibility(const MollifiedField& f, const std::vector<double>& times,
                                      const std::vector<Vec2>& points, double tol)
{
    Anchor0Report rep;
    double D = f.base().w.div_integral(0.0, 2.0);
    rep.lower = std::exp(-3 * D);
    rep.upper = std::exp(3 * D);
    rep.min_density = HUGE_VAL;
    rep.max_density = 0;
    for (double t : times)
        for (const Vec2& x : points) {
            FlowResult y = f.flow_Y(0, t, x);
            double dens = 1.0 / y.jacobian_det;
            rep.min_density = std::min(rep.min_density, dens);
            rep.max_density = std::max(rep.max_density, dens);
            FlowResult z = f.flow_Z(0.0, t, x, true);
            rep.max_z_det_error = std::max(rep.max_z_det_error, std::fabs(z.jacobian_det - 1.0));
        }
    rep.pass = rep.min_density >= rep.lower - tol && rep.max_density <= rep.upper + tol && rep.max_z_det_error <= 1e-6;
    return rep;
}

}  // namespace tsl
