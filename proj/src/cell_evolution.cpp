#include "tsl/cell_evolution.hpp"

#include <algorithm>

#include "tsl/exact_flow.hpp"

namespace tsl {

ExactSpec SolutionVariant::field(int lambda) const
{
    switch (kind) {
    case VariantKind::TruncSym: return ExactSpec::sym(lambda, q);
    case VariantKind::TruncAsym: return ExactSpec::asym(lambda, q);
    default: return ExactSpec::building_block(lambda);
    }
}

bool is_checkpoint(const Dyadic& t)
{
    const Dyadic one(1);
    if (t < Dyadic(0) || t > Dyadic(2)) return false;
    if (t == one) return true;
    return is_pow2(t < one ? one - t : t - one);
}

namespace {

// m with t = 1 -+ 2^-m
int checkpoint_depth(const Dyadic& t)
{
    const Dyadic one(1);
    return -floor_log2(t < one ? one - t : t - one);
}

}  // namespace

std::vector<BlockRotation> rotation_schedule(int lambda, const SolutionVariant& v, const Dyadic& t,
                                             const EvolutionOptions& opt)
{
    if (t < Dyadic(0) || t > Dyadic(2)) throw DomainError("solution time outside [0,2]");
    if (!is_checkpoint(t)) throw AlignmentError("not a checkpoint time: " + t.str());
    const Dyadic one(1);
    const int orient = opt.exact.orientation_sign();
    const int back = opt.exact.reflection_sign * orient;
    std::vector<BlockRotation> ops;
    switch (v.kind) {
    case VariantKind::Unmixing:
    case VariantKind::Mixed: {
        if (t == one) break;  // limit value, handled by the caller
        int m = checkpoint_depth(t);
        if (t < one) {
            for (int k = 0; k < m; ++k) ops.push_back({lambda + k, orient});
        } else if (v.kind == VariantKind::Unmixing) {
            int K = std::max(m, opt.k_max);
            for (int k = 0; k < K; ++k) ops.push_back({lambda + k, orient});
            for (int k = K - 1; k >= m; --k) ops.push_back({lambda + k, back});
        }
        break;
    }
    case VariantKind::TruncSym:
    case VariantKind::TruncAsym: {
        for (const auto& p : pieces_between(v.field(lambda), Dyadic(0), t, opt.exact))
            ops.push_back({lambda + p.k, p.sign * orient});
        break;
    }
    }
    return ops;
}

void rotate_filled_squares(CellGrid& grid, int level, int direction)
{
    int d = grid.level() - level;
    if (d < 1) throw AlignmentError("rotation level needs at least two cells per square side");
    if (grid.i0() != 0 || grid.j0() != 0 || grid.nx() != grid.ny()) throw AlignmentError("rotation needs a period window");
    const std::int64_t n = std::int64_t(1) << d, W = grid.nx(), count = W / n;
    const std::vector<Dyadic> src = grid.values();
    std::vector<Dyadic>& dst = grid.values();
    for (std::int64_t s2 = 0; s2 < count; ++s2)
        for (std::int64_t s1 = 0; s1 < count; ++s1) {
            if ((s1 + s2) & 1) continue;
            const std::int64_t bi = s1 * n + n / 2, bj = s2 * n + n / 2;
            for (std::int64_t b = 0; b < n; ++b)
                for (std::int64_t a = 0; a < n; ++a) {
                    std::int64_t ra = direction > 0 ? n - 1 - b : b;
                    std::int64_t rb = direction > 0 ? a : n - 1 - a;
                    std::int64_t si = (bi + a) % W, sj = (bj + b) % W;
                    std::int64_t di = (bi + ra) % W, dj = (bj + rb) % W;
                    dst[std::size_t(dj * W + di)] = src[std::size_t(sj * W + si)];
                }
        }
}

CellGrid solution_grid(int lambda, const SolutionVariant& v, const Dyadic& t, const EvolutionOptions& opt,
                       bool* limit_value)
{
    if (limit_value) *limit_value = false;
    auto ops = rotation_schedule(lambda, v, t, opt);
    const Dyadic one(1);
    if ((v.kind == VariantKind::Mixed && t >= one) || (v.kind == VariantKind::Unmixing && t == one)) {
        if (limit_value && v.kind == VariantKind::Unmixing) *limit_value = true;
        int n = period_cells(lambda, lambda);
        return CellGrid(lambda, 0, 0, n, n, Dyadic::pow2(-1));
    }
    int level = lambda;
    for (const auto& op : ops) level = std::max(level, op.level + 1);
    CellGrid g = chessboard_grid(lambda, level, lambda);
    for (const auto& op : ops) rotate_filled_squares(g, op.level, op.direction);
    return g;
}

template <class T>
DensityValue pointwise_density(int lambda, const SolutionVariant& v, const T& t, const Point2<T>& x,
                               const ExactOptions& opt)
{
    const T one(1);
    if (t < T(0) || t > T(2)) throw DomainError("density time outside [0,2]");
    switch (v.kind) {
    case VariantKind::Mixed:
    case VariantKind::Unmixing: {
        if (v.kind == VariantKind::Mixed && !(t < one)) return {Dyadic::pow2(-1), false};
        if (t == one) return {Dyadic::pow2(-1), true};
        T tf = t < one ? t : T(2) - t;
        Point2<T> y = flow_field(ExactSpec::building_block(lambda), tf, T(0), x, opt);
        return {Dyadic(chessboard(lambda, y)), false};
    }
    default: {
        Point2<T> y = flow_field(v.field(lambda), t, T(0), x, opt);
        return {Dyadic(chessboard(lambda, y)), false};
    }
    }
}

template DensityValue pointwise_density<double>(int, const SolutionVariant&, const double&, const Vec2&,
                                                const ExactOptions&);
template DensityValue pointwise_density<Dyadic>(int, const SolutionVariant&, const Dyadic&, const DyadicPoint&,
                                                const ExactOptions&);

std::vector<ObservationLevel> observation_O_check(int lambda, int q, int extra_level, const EvolutionOptions& opt)
{
    std::vector<ObservationLevel> out;
    const Dyadic half = Dyadic::pow2(-1);
    auto check = [&](int qp, int level) {
        CellGrid g = solution_grid(lambda, SolutionVariant::asym(q), Dyadic(1) + Dyadic::pow2(-qp), opt);
        int n = period_cells(lambda, level);
        ObservationLevel r{qp, level, std::int64_t(n) * n, true};
        for (int b = 0; b < n && r.pass; ++b)
            for (int a = 0; a < n; ++a)
                if (cell_average(g, SquareId{level, a, b, Family::S1}) != half) {
                    r.pass = false;
                    break;
                }
        out.push_back(r);
    };
    for (int qp = 1; qp <= q; ++qp) check(qp, lambda + qp);
    if (extra_level >= 0) check(q, extra_level);
    return out;
}

std::vector<SquareId> Dictionary::squares() const
{
    std::vector<SquareId> out;
    for (int level = min_level; level <= max_level; ++level) {
        int n = period_cells(lambda, level);
        for (int b = 0; b < n; ++b)
            for (int a = 0; a < n; ++a) out.push_back({level, a, b, Family::S1});
    }
    return out;
}

Dyadic weak_star_gap(const CellGrid& g1, const CellGrid& g2, const Dictionary& dict)
{
    int level = std::max(g1.level(), g2.level());
    CellGrid a = refine(g1, level), b = refine(g2, level);
    if (!a.same_window(b)) throw AlignmentError("grids do not share a window");
    Dyadic gap(0);
    for (const auto& sq : dict.squares()) {
        Dyadic d = abs(cell_average(a, sq) - cell_average(b, sq));
        if (d > gap) gap = d;
    }
    return gap;
}

CellGrid sample_density_grid(int lambda, const SolutionVariant& v, const Dyadic& t, int level, const ExactOptions& opt)
{
    int n = period_cells(lambda, level);
    CellGrid g(level, 0, 0, n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            DyadicPoint c{Dyadic::from_parts(2 * i + 1, level + 1), Dyadic::from_parts(2 * j + 1, level + 1)};
            g(i, j) = pointwise_density(lambda, v, t, c, opt).value;
        }
    return g;
}

}  // namespace tsl
