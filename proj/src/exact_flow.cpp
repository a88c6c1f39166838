#include "tsl/exact_flow.hpp"

#include <cmath>

namespace tsl {

std::vector<double> stage_boundaries(const ExactSpec& spec, int kmax)
{
    int kf = spec.trunc == Truncation::None ? kmax : spec.forward_stages();
    int kb = spec.trunc == Truncation::None ? kmax : spec.backward_stages();
    std::vector<double> out;
    for (int k = 0; k <= kf; ++k) out.push_back(1.0 - std::ldexp(1.0, -k));
    for (int k = kb; k >= 0; --k) out.push_back(1.0 + std::ldexp(1.0, -k));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace tsl

namespace tsl {

RigidityReport check_rigidity(int lambda, int extra_levels, Orientation o)
{
    ExactOptions opt;
    opt.orientation = o;
    ExactSpec spec = ExactSpec::building_block(lambda);
    int level = lambda + extra_levels;
    int n = period_cells(lambda, level);
    RigidityReport rep;
    const Dyadic half = Dyadic::pow2(-1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            DyadicPoint x{Dyadic::from_parts(2 * i + 1, level + 1), Dyadic::from_parts(2 * j + 1, level + 1)};
            SquareId sq = square_of(x, lambda, Family::S2);
            DyadicPoint expect = x;
            if (((sq.i1 + sq.i2) & 1) == 0) {
                DyadicPoint c = sq.centre();
                DyadicPoint d = x - c;
                DyadicPoint rd = o == Orientation::Counterclockwise ? DyadicPoint{-d.x2, d.x1} : DyadicPoint{d.x2, -d.x1};
                expect = c + rd;
                ++rep.filled_cells;
            }
            if (flow_field(spec, Dyadic(0), half, x, opt) != expect) ++rep.mismatches;
            ++rep.cells;
        }
    return rep;
}

}  // namespace tsl
