#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsl/dyadic.hpp"
#include "tsl/errors.hpp"
#include "tsl/point.hpp"

namespace tsl {

/// Chessboard datum: (floor(2^lambda x1) + floor(2^lambda x2)) mod 2, in {0,1}.
template <class T>
int chessboard(int lambda, const Point2<T>& x)
{
    std::int64_t s = ifloor(scale2(x.x1, lambda)) + ifloor(scale2(x.x2, lambda));
    return static_cast<int>(((s % 2) + 2) % 2);
}

/// S1: squares with vertices on 2^-j Z^2.  S2: the same lattice shifted by half a side.
enum class Family { S1, S2 };

struct SquareId {
    int level = 0;
    std::int64_t i1 = 0;
    std::int64_t i2 = 0;
    Family family = Family::S1;

    friend bool operator==(const SquareId&, const SquareId&) = default;

    Dyadic side() const { return Dyadic::pow2(-level); }
    DyadicPoint lower_corner() const;
    DyadicPoint centre() const;
};

/// Square of the given family/level containing x (lower-closed cells).
SquareId square_of(const DyadicPoint& x, int level, Family family);
SquareId square_of(const Vec2& x, int level, Family family);

/// Piecewise-constant density on a rectangle of cells of side 2^-level.
/// Cells are addressed by absolute integer indices (i, j): cell [i, i+1) x [j, j+1) scaled by 2^-level.
template <class V>
class BasicCellGrid {
public:
    BasicCellGrid() = default;
    BasicCellGrid(int level, std::int64_t i0, std::int64_t j0, int nx, int ny, V fill = V{})
        : level_(level), i0_(i0), j0_(j0), nx_(nx), ny_(ny), values_(static_cast<std::size_t>(nx) * ny, fill)
    {
    }

    int level() const { return level_; }
    std::int64_t i0() const { return i0_; }
    std::int64_t j0() const { return j0_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return values_.size(); }

    bool contains(std::int64_t i, std::int64_t j) const
    {
        return i >= i0_ && i < i0_ + nx_ && j >= j0_ && j < j0_ + ny_;
    }
    std::size_t index(std::int64_t i, std::int64_t j) const
    {
        return static_cast<std::size_t>(j - j0_) * nx_ + static_cast<std::size_t>(i - i0_);
    }
    V& operator()(std::int64_t i, std::int64_t j) { return values_[index(i, j)]; }
    const V& operator()(std::int64_t i, std::int64_t j) const { return values_[index(i, j)]; }

    /// Periodic lookup: wraps indices into the window.
    const V& wrapped(std::int64_t i, std::int64_t j) const
    {
        std::int64_t a = ((i - i0_) % nx_ + nx_) % nx_;
        std::int64_t b = ((j - j0_) % ny_ + ny_) % ny_;
        return values_[static_cast<std::size_t>(b) * nx_ + static_cast<std::size_t>(a)];
    }

    std::vector<V>& values() { return values_; }
    const std::vector<V>& values() const { return values_; }

    bool same_window(const BasicCellGrid& o) const
    {
        return level_ == o.level_ && i0_ == o.i0_ && j0_ == o.j0_ && nx_ == o.nx_ && ny_ == o.ny_;
    }

    friend bool operator==(const BasicCellGrid&, const BasicCellGrid&) = default;

private:
    int level_ = 0;
    std::int64_t i0_ = 0, j0_ = 0;
    int nx_ = 0, ny_ = 0;
    std::vector<V> values_;
};

using CellGrid = BasicCellGrid<Dyadic>;
using RealGrid = BasicCellGrid<double>;

/// Side length in cells of the period window [0, 2^(1-lambda))^2 at the given level.
int period_cells(int lambda, int level);

/// Grid of zeta_bar_lambda at the given level on the period window of window_lambda
/// (defaults to lambda's own period window).
CellGrid chessboard_grid(int lambda, int level, int window_lambda = -1);

/// Exact mean of the grid over a square that is a union of whole cells inside the window.
Dyadic cell_average(const CellGrid& grid, const SquareId& square);
double cell_average(const RealGrid& grid, const SquareId& square);

/// Sum of values times cell area.
Dyadic total_mass(const CellGrid& grid);
double total_mass(const RealGrid& grid);

/// Same window, refined to a finer level (values copied onto subcells).
CellGrid refine(const CellGrid& grid, int level);

/// Mean |g1 - g2| over the common window (grids may differ in level).
Dyadic l1_per_area(const CellGrid& g1, const CellGrid& g2);

RealGrid to_real(const CellGrid& grid);

/// Shortest round-trip decimal form of a double ("-0" printed as "0").
std::string format_real(double x);

/// CSV: "# tsl-grid v1 level=L i0=.. j0=.. nx=.. ny=..", then "row,col,value".
/// row is the x2 cell index, col the x1 cell index (absolute).
void write_grid_csv(std::ostream& os, const CellGrid& grid);
void write_grid_csv(std::ostream& os, const RealGrid& grid);
RealGrid read_grid_csv(std::istream& is);

/// SVG chessboard rendering (grey level = density, clamped to [0,1]).
void write_grid_svg(std::ostream& os, const RealGrid& grid, int pixels_per_cell = 4);

}  // namespace tsl
