#pragma once

#include <vector>

#include "tsl/building_blocks.hpp"
#include "tsl/geometry.hpp"

namespace tsl {

enum class VariantKind { Unmixing, Mixed, TruncSym, TruncAsym };

/// The four exact solutions: zeta (unmixing), zeta~ (mixed), and the two truncated ones.
struct SolutionVariant {
    VariantKind kind = VariantKind::Unmixing;
    int q = 1;

    static SolutionVariant unmixing() { return {VariantKind::Unmixing, 1}; }
    static SolutionVariant mixed() { return {VariantKind::Mixed, 1}; }
    static SolutionVariant sym(int q) { return {VariantKind::TruncSym, q}; }
    static SolutionVariant asym(int q) { return {VariantKind::TruncAsym, q}; }

    /// Field whose flow transports this solution (Mixed/Unmixing: the untruncated b_lambda).
    ExactSpec field(int lambda) const;
};

struct EvolutionOptions {
    ExactOptions exact;
    /// Depth of the forward evolution from which the unmixing solution is rebuilt for t > 1.
    int k_max = 8;
};

/// t in {0, 1, 2} or 1 +- 2^-k.
bool is_checkpoint(const Dyadic& t);

/// One quarter-rotation step of the checkpoint engine.
struct BlockRotation {
    int level;      ///< S2 squares of side 2^-level are rotated
    int direction;  ///< +1 counterclockwise, -1 clockwise
};

/// Rotations realising the evolution of the variant from time 0 to the checkpoint t.
std::vector<BlockRotation> rotation_schedule(int lambda, const SolutionVariant& v, const Dyadic& t,
                                             const EvolutionOptions& opt = {});

/// Rotates every filled S2 square of the given level in a periodic grid by a quarter turn.
void rotate_filled_squares(CellGrid& grid, int level, int direction);

/// Exact density at a checkpoint time on the period window [0, 2^(1-lambda))^2.
/// limit_value (optional) is set when the result is the weak* limit 1/2 of the unmixing
/// solution at t = 1 rather than a pointwise value.
CellGrid solution_grid(int lambda, const SolutionVariant& v, const Dyadic& t, const EvolutionOptions& opt = {},
                       bool* limit_value = nullptr);

struct DensityValue {
    Dyadic value;
    bool limit_value = false;
};

/// zeta_bar_lambda composed with the inverse flow.
template <class T>
DensityValue pointwise_density(int lambda, const SolutionVariant& v, const T& t, const Point2<T>& x,
                               const ExactOptions& opt = {});

struct ObservationLevel {
    int q_prime;
    int level;
    std::int64_t squares;
    bool pass;
};

/// Cell averages of TruncAsym(q) at 1 + 2^-q' over S1 squares of side 2^(-lambda-q'), q' = 1..q.
/// extra_level >= 0 appends the same check at that (finer) square level at q' = q.
std::vector<ObservationLevel> observation_O_check(int lambda, int q, int extra_level = -1,
                                                  const EvolutionOptions& opt = {});

/// S1 squares of levels min_level..max_level inside the period window of lambda.
struct Dictionary {
    int lambda = 0;
    int min_level = 0;
    int max_level = 0;

    std::vector<SquareId> squares() const;
};

/// max over dictionary squares of |mean(g1) - mean(g2)|.
Dyadic weak_star_gap(const CellGrid& g1, const CellGrid& g2, const Dictionary& dict);

/// Brute-force oracle: pointwise_density at every cell centre of the given level.
CellGrid sample_density_grid(int lambda, const SolutionVariant& v, const Dyadic& t, int level,
                             const ExactOptions& opt = {});

}  // namespace tsl
