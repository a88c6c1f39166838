#include "tsl/geometry.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace tsl {

DyadicPoint SquareId::lower_corner() const
{
    Dyadic off = family == Family::S2 ? Dyadic::pow2(-1) : Dyadic(0);
    return {(Dyadic(i1) + off).scaled(-level), (Dyadic(i2) + off).scaled(-level)};
}

DyadicPoint SquareId::centre() const
{
    Dyadic off = family == Family::S2 ? Dyadic(1) : Dyadic::pow2(-1);
    return {(Dyadic(i1) + off).scaled(-level), (Dyadic(i2) + off).scaled(-level)};
}

SquareId square_of(const DyadicPoint& x, int level, Family family)
{
    Dyadic shift = family == Family::S2 ? Dyadic::pow2(-1) : Dyadic(0);
    return {level, (x.x1.scaled(level) - shift).floor(), (x.x2.scaled(level) - shift).floor(), family};
}

SquareId square_of(const Vec2& x, int level, Family family)
{
    double shift = family == Family::S2 ? 0.5 : 0.0;
    return {level, ifloor(std::ldexp(x.x1, level) - shift), ifloor(std::ldexp(x.x2, level) - shift), family};
}

int period_cells(int lambda, int level)
{
    int e = 1 - lambda + level;
    if (e < 0 || e > 24) throw AlignmentError("period window does not fit the grid level");
    return 1 << e;
}

CellGrid chessboard_grid(int lambda, int level, int window_lambda)
{
    if (level < lambda) throw AlignmentError("grid level coarser than the chessboard");
    if (window_lambda < 0) window_lambda = lambda;
    if (window_lambda > lambda) throw AlignmentError("window smaller than the chessboard period");
    int n = period_cells(window_lambda, level);
    CellGrid g(level, 0, 0, n, n, Dyadic(0));
    int shift = level - lambda;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = Dyadic(((i >> shift) + (j >> shift)) & 1);
    return g;
}

namespace {

struct CellRange {
    std::int64_t i_begin, j_begin, n;
    int shift;  // log2(n)
};

template <class V>
CellRange cells_of(const BasicCellGrid<V>& grid, const SquareId& sq)
{
    int d = grid.level() - sq.level;
    if (d < 0 || (sq.family == Family::S2 && d < 1))
        throw AlignmentError("square is not a union of grid cells");
    std::int64_t n = std::int64_t(1) << d;
    std::int64_t off = sq.family == Family::S2 ? n / 2 : 0;
    CellRange r{sq.i1 * n + off, sq.i2 * n + off, n, d};
    if (!grid.contains(r.i_begin, r.j_begin) || !grid.contains(r.i_begin + n - 1, r.j_begin + n - 1))
        throw AlignmentError("square outside the grid window");
    return r;
}

}  // namespace

Dyadic cell_average(const CellGrid& grid, const SquareId& square)
{
    CellRange r = cells_of(grid, square);
    Dyadic sum(0);
    for (std::int64_t j = r.j_begin; j < r.j_begin + r.n; ++j)
        for (std::int64_t i = r.i_begin; i < r.i_begin + r.n; ++i) sum += grid(i, j);
    return sum.scaled(-2 * r.shift);
}

double cell_average(const RealGrid& grid, const SquareId& square)
{
    CellRange r = cells_of(grid, square);
    double sum = 0;
    for (std::int64_t j = r.j_begin; j < r.j_begin + r.n; ++j)
        for (std::int64_t i = r.i_begin; i < r.i_begin + r.n; ++i) sum += grid(i, j);
    return std::ldexp(sum, -2 * r.shift);
}

Dyadic total_mass(const CellGrid& grid)
{
    Dyadic sum(0);
    for (const auto& v : grid.values()) sum += v;
    return sum.scaled(-2 * grid.level());
}

double total_mass(const RealGrid& grid)
{
    double sum = 0;
    for (double v : grid.values()) sum += v;
    return std::ldexp(sum, -2 * grid.level());
}

CellGrid refine(const CellGrid& grid, int level)
{
    int d = level - grid.level();
    if (d < 0) throw AlignmentError("refine to a coarser level");
    if (d == 0) return grid;
    std::int64_t f = std::int64_t(1) << d;
    CellGrid out(level, grid.i0() * f, grid.j0() * f, int(grid.nx() * f), int(grid.ny() * f));
    for (std::int64_t j = out.j0(); j < out.j0() + out.ny(); ++j)
        for (std::int64_t i = out.i0(); i < out.i0() + out.nx(); ++i) out(i, j) = grid(i >> d, j >> d);
    return out;
}

Dyadic l1_per_area(const CellGrid& g1, const CellGrid& g2)
{
    int level = std::max(g1.level(), g2.level());
    CellGrid a = refine(g1, level), b = refine(g2, level);
    if (!a.same_window(b)) throw AlignmentError("grids do not share a window");
    Dyadic sum(0);
    for (std::size_t n = 0; n < a.size(); ++n) sum += abs(a.values()[n] - b.values()[n]);
    // divide by the cell count, a product of powers of two for period windows
    std::uint64_t count = a.size();
    if ((count & (count - 1)) != 0) throw AlignmentError("window cell count is not a power of two");
    return sum.scaled(-__builtin_ctzll(count));
}

RealGrid to_real(const CellGrid& grid)
{
    RealGrid out(grid.level(), grid.i0(), grid.j0(), grid.nx(), grid.ny());
    for (std::size_t n = 0; n < grid.size(); ++n) out.values()[n] = grid.values()[n].to_double();
    return out;
}

std::string format_real(double x)
{
    if (x == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

template <class V, class F>
void write_csv_impl(std::ostream& os, const BasicCellGrid<V>& g, F fmt)
{
    os << "# tsl-grid v1 level=" << g.level() << " i0=" << g.i0() << " j0=" << g.j0() << " nx=" << g.nx()
       << " ny=" << g.ny() << "\n";
    os << "row,col,value\n";
    for (std::int64_t j = g.j0(); j < g.j0() + g.ny(); ++j)
        for (std::int64_t i = g.i0(); i < g.i0() + g.nx(); ++i) os << j << ',' << i << ',' << fmt(g(i, j)) << '\n';
}

}  // namespace

void write_grid_csv(std::ostream& os, const CellGrid& grid)
{
    write_csv_impl(os, grid, [](const Dyadic& d) { return d.str(); });
}

void write_grid_csv(std::ostream& os, const RealGrid& grid)
{
    write_csv_impl(os, grid, [](double d) { return format_real(d); });
}

RealGrid read_grid_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# tsl-grid v1", 0) != 0)
        throw ConfigError("grid csv: missing version header");
    int level = 0, nx = 0, ny = 0;
    std::int64_t i0 = 0, j0 = 0;
    std::istringstream hs(line.substr(13));
    std::string tok;
    while (hs >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string k = tok.substr(0, eq);
        long long v = std::stoll(tok.substr(eq + 1));
        if (k == "level") level = int(v);
        else if (k == "i0") i0 = v;
        else if (k == "j0") j0 = v;
        else if (k == "nx") nx = int(v);
        else if (k == "ny") ny = int(v);
    }
    if (!std::getline(is, line) || line != "row,col,value") throw ConfigError("grid csv: missing column header");
    RealGrid g(level, i0, j0, nx, ny);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        std::getline(ls, c, ',');
        std::int64_t j = std::stoll(a), i = std::stoll(b);
        if (!g.contains(i, j)) throw ConfigError("grid csv: cell outside window");
        g(i, j) = std::stod(c);
    }
    return g;
}

void write_grid_svg(std::ostream& os, const RealGrid& g, int px)
{
    int w = g.nx() * px, h = g.ny() * px;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
       << ' ' << h << "\" shape-rendering=\"crispEdges\">\n";
    for (int r = 0; r < g.ny(); ++r) {
        std::int64_t j = g.j0() + g.ny() - 1 - r;  // x2 grows upward
        for (int c = 0; c < g.nx(); ++c) {
            double v = std::clamp(g(g.i0() + c, j), 0.0, 1.0);
            int shade = int(std::lround(255.0 * (1.0 - v)));
            os << "<rect x=\"" << c * px << "\" y=\"" << r * px << "\" width=\"" << px << "\" height=\"" << px
               << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade << ")\"/>\n";
        }
    }
    os << "</svg>\n";
}

}  // namespace tsl
