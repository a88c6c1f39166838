#pragma once

#include <cmath>
#include <functional>

#include "tsl/errors.hpp"
#include "tsl/point.hpp"

namespace tsl {

enum class Orientation { Counterclockwise, Clockwise };

/// Conventions of the exact construction.
struct ExactOptions {
    int reflection_sign = -1;  ///< sigma in b(t) = sigma * b(2 - t) for t > 1
    Orientation orientation = Orientation::Counterclockwise;

    int orientation_sign() const { return orientation == Orientation::Counterclockwise ? 1 : -1; }
};

enum class Truncation { None, Sym, Asym };

/// The exact (non-perturbed) fields: b_lambda and its two truncations.
struct ExactSpec {
    int lambda = 0;
    Truncation trunc = Truncation::None;
    int q = 1;

    static ExactSpec building_block(int lambda) { return {lambda, Truncation::None, 1}; }
    static ExactSpec sym(int lambda, int q) { return {lambda, Truncation::Sym, q}; }
    static ExactSpec asym(int lambda, int q) { return {lambda, Truncation::Asym, q}; }

    /// Number of forward stages kept by a truncation (all of them for None).
    int forward_stages() const { return trunc == Truncation::Sym ? q : q + 2; }
    int backward_stages() const { return q; }
};

enum class Side { Forward, Backward };

struct StageIndex {
    int k = 0;
    Side side = Side::Forward;
    friend bool operator==(const StageIndex&, const StageIndex&) = default;
};

inline int floor_log2_s(double d)
{
    int e = 0;
    std::frexp(d, &e);
    return e - 1;
}
inline int floor_log2_s(const Dyadic& d) { return floor_log2(d); }
inline bool is_pow2_s(double d)
{
    int e = 0;
    return std::fabs(std::frexp(d, &e)) == 0.5;
}
inline bool is_pow2_s(const Dyadic& d) { return is_pow2(d); }

/// Lower-closed stage containing t in [0,2] \ {1}; t = 2 belongs to backward stage 0.
template <class T>
StageIndex stage_of(const T& t)
{
    const T one(1);
    if (t < T(0) || t > T(2)) throw DomainError("time outside [0,2]");
    if (t == one) throw SingularTimeError("t = 1 has no stage");
    if (t < one) {
        T d = one - t;  // in (2^-k-1, 2^-k]
        int fl = floor_log2_s(d);
        return {is_pow2_s(d) ? -fl : -fl - 1, Side::Forward};
    }
    if (t == T(2)) return {0, Side::Backward};
    T d = t - one;  // in [2^-k-1, 2^-k)
    return {-floor_log2_s(d) - 1, Side::Backward};
}

template <class T>
T stage_start(const StageIndex& s)
{
    T one(1);
    return s.side == Side::Forward ? one - scale2(one, -s.k) : one + scale2(one, -s.k - 1);
}

template <class T>
T stage_end(const StageIndex& s)
{
    T one(1);
    return s.side == Side::Forward ? one - scale2(one, -s.k - 1) : one + scale2(one, -s.k);
}

/// True if the truncated field vanishes at t (open window around 1).
template <class T>
bool in_truncation_window(const ExactSpec& spec, const T& t)
{
    const T one(1);
    switch (spec.trunc) {
    case Truncation::None: return t == one;
    case Truncation::Sym: return one - scale2(one, -spec.q) < t && t < one + scale2(one, -spec.q);
    case Truncation::Asym: return one - scale2(one, -spec.q - 2) < t && t < one + scale2(one, -spec.q);
    }
    return false;
}

/// v(x) = (0, 4x1) if 1/2 > |x1| > |x2|, (-4x2, 0) if 1/2 > |x2| > |x1|, 0 otherwise.
Vec2 eval_v(const Vec2& x);

/// Periodised field 2^-lambda * sum over even-sum integer pairs y of v(2^lambda x - y).
Vec2 eval_u(int lambda, const Vec2& x);

/// Smooth piece of u_level containing a point: the square centred at 2^-level (m1, m2) and the
/// triangle inside it (1: |d1| > |d2|, 2: |d2| > |d1|); sector 0 marks empty squares and the
/// null set where eval_u is 0 by convention.
struct URegion {
    std::int64_t m1 = 0, m2 = 0;
    int sector = 0;
    friend bool operator==(const URegion&, const URegion&) = default;
};

URegion u_region(int level, const Vec2& x);

/// The formula of u_level on the given region, extended smoothly to all x.
Vec2 eval_u_region(int level, const URegion& r, const Vec2& x);

/// Time-staged field b_lambda; throws DomainError for t outside [0,2].
Vec2 eval_b(int lambda, double t, const Vec2& x, const ExactOptions& opt = {});

/// b_lambda with its truncation window removed (identical to eval_b for Truncation::None).
Vec2 eval_trunc(const ExactSpec& spec, double t, const Vec2& x, const ExactOptions& opt = {});

/// Stream function psi_level of u_level: u_level = (-d2 psi, d1 psi).  Continuous, equal to
/// 2^(-2 level) / 2 outside the filled squares.
double stream_function(int level, const Vec2& x);

/// sup |b_lambda| = 2^(1-lambda).
double sup_norm(int lambda);

struct Rect {
    double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
    double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Finite-difference total variation: sum over cells of |[u(x+h e1)-u(x), u(x+h e2)-u(x)]|_F * h.
/// Samples sit at cell centres shifted by (0, -h/4) so that the diagonals of the building block
/// never pass through a sample.
double tv_estimate(const std::function<Vec2(const Vec2&)>& field, const Rect& region, double h);

}  // namespace tsl
