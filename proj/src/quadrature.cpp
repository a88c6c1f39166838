#include "tsl/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace tsl {

namespace {

template <unsigned N>
QuadratureRule expand()
{
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    QuadratureRule r;
    for (std::size_t i = a.size(); i-- > 0;) {
        if (a[i] == 0.0) continue;
        r.x.push_back(-a[i]);
        r.w.push_back(w[i]);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        r.x.push_back(a[i]);
        r.w.push_back(w[i]);
    }
    return r;
}

double raw_bump(double u) { return std::fabs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

// non-adaptive: relative tolerances are meaningless where the bump underflows
double raw_integral(double a, double b)
{
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(raw_bump, a, b, 0);
}

double composite(double a, double b, int n)
{
    double s = 0;
    for (int i = 0; i < n; ++i) s += raw_integral(a + (b - a) * i / n, a + (b - a) * (i + 1) / n);
    return s;
}

const double kBumpMass = composite(-1.0, 1.0, 64);

// cumulative moment tables on a uniform grid, interpolated with cubic Hermite (derivative = u^j bump)
constexpr int kCdfN = 2048;
using Table = std::array<double, kCdfN + 1>;

Table moment_table(int j)
{
    Table t{};
    double acc = 0.0;
    t[0] = 0.0;
    for (int i = 1; i <= kCdfN; ++i) {
        double a = -1.0 + 2.0 * (i - 1) / kCdfN, b = -1.0 + 2.0 * i / kCdfN;
        acc += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [j](double u) { return std::pow(u, j) * raw_bump(u); }, a, b, 0);
        t[i] = acc / kBumpMass;
    }
    return t;
}

const std::array<Table, 3> kMoments = {moment_table(0), moment_table(1), moment_table(2)};
const Table& kCdf = kMoments[0];

double hermite(const Table& tab, int j, double u)
{
    double s = (u + 1.0) * kCdfN / 2.0;
    int i = std::min(kCdfN - 1, static_cast<int>(s));
    double f = s - i, dx = 2.0 / kCdfN;
    double a = -1.0 + i * dx, b = a + dx;
    double p0 = tab[i], p1 = tab[i + 1];
    double m0 = std::pow(a, j) * raw_bump(a) / kBumpMass * dx, m1 = std::pow(b, j) * raw_bump(b) / kBumpMass * dx;
    double f2 = f * f, f3 = f2 * f;
    return (2 * f3 - 3 * f2 + 1) * p0 + (f3 - 2 * f2 + f) * m0 + (-2 * f3 + 3 * f2) * p1 + (f3 - f2) * m1;
}

}  // namespace

QuadratureRule QuadratureRule::mapped(double a, double b) const
{
    QuadratureRule r;
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.x.push_back(c + h * x[i]);
        r.w.push_back(h * w[i]);
    }
    return r;
}

QuadratureRule gauss_legendre(int n)
{
    switch (n) {
    case 4: return expand<4>();
    case 7: return expand<7>();
    case 10: return expand<10>();
    case 15: return expand<15>();
    case 20: return expand<20>();
    case 25: return expand<25>();
    case 30: return expand<30>();
    default: throw std::invalid_argument("unsupported Gauss-Legendre order");
    }
}

double bump(double u) { return raw_bump(u) / kBumpMass; }

double bump_cdf(double u)
{
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return hermite(kCdf, 0, u);
}

double bump_moment(int j, double u)
{
    if (j < 0 || j > 2) throw std::invalid_argument("bump moment order must be 0, 1 or 2");
    if (u <= -1.0) return 0.0;
    return hermite(kMoments[j], j, std::min(u, 1.0));
}

double bump_abs_moment()
{
    static const double m = [] {
        double s = 0;
        for (int i = 0; i < 64; ++i)
            s += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                [](double u) { return u * raw_bump(u); }, i / 64.0, (i + 1) / 64.0, 0);
        return 2.0 * s / kBumpMass;
    }();
    return m;
}

}  // namespace tsl
