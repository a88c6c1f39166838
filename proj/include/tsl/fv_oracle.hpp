#pragma once

#include <functional>
#include <vector>

#include "tsl/building_blocks.hpp"
#include "tsl/geometry.hpp"

namespace tsl {

using FieldSampler = std::function<Vec2(double t, const Vec2& x)>;
/// psi with field = (-d2 psi, d1 psi).
using StreamSampler = std::function<double(double t, const Vec2& x)>;
using DensitySeries = std::function<double(double t, const Vec2& x)>;

enum class FVKernel { Serial, Parallel };

/// Uniform periodic grid of cell averages.
struct FVState {
    RealGrid grid;
    double time = 0.0;
    double cfl = 0.45;
    std::int64_t steps = 0;
};

struct FVOptions {
    FVKernel kernel = FVKernel::Parallel;
    /// Step ends are clipped to these times (discontinuities of the field in time).
    std::vector<double> breaks;
};

/// Periodic state on the period window of lambda at the given level, initialised with a grid.
FVState make_fv_state(const RealGrid& initial, double t0 = 0.0, double cfl = 0.45);

/// Donor-cell upwind with face-centred normal velocities; dt = cfl h / max face speed.
void fv_advance(FVState& state, const FieldSampler& field, double t_end, const FVOptions& o = {});
/// Same scheme with face fluxes psi(end) - psi(start): discretely divergence-free.
void fv_advance_stream(FVState& state, const StreamSampler& stream, double t_end, const FVOptions& o = {});

/// Mass with per-row partial sums added in row order.
double fv_mass(const RealGrid& grid);

/// Stream function of b_lambda (lower-closed stages, 0 at t = 1).
double stream_b(int lambda, double t, const Vec2& x, const ExactOptions& opt = {});

/// Mean of the absolute difference over a common window.
double l1_per_area(const RealGrid& a, const RealGrid& b);

/// phi(t, x) = chi((t - t0) / (t1 - t0)) * c(x) with chi a bump on (0, 1) and
/// c(x) = cos(pi (a1 x1 + a2 x2) 2^lambda + phase); periodic on the period window.
struct TestFunction {
    double t0 = 0.25, t1 = 0.75;
    int a1 = 1, a2 = 0;
    double phase = 0.0;
    int lambda = 0;

    double value(double t, const Vec2& x) const;
    double dt(double t, const Vec2& x) const;
    Vec2 grad(double t, const Vec2& x) const;
};

/// The fixed battery of ten test functions for the weak-solution residual (time supports on both
/// sides of t = 1, including (1.125, 1.375),
/// four of them on modes that resonate with the transported chessboard).
std::vector<TestFunction> residual_battery(int lambda);

struct ResidualOptions {
    int space_level = 8;     ///< midpoint rule on cells of side 2^-level
    int time_nodes = 4;             ///< Gauss-Legendre nodes per time panel
    double time_panel = 1.0 / 64;   ///< panel length cap (also at most 1/32 of the support)
    std::vector<double> breaks;
    FVKernel kernel = FVKernel::Parallel;
};

/// int int rho (d_t phi + b . grad phi) dx dt over the period window, space-time quadrature.
double weak_residual(const DensitySeries& rho, const FieldSampler& b, const TestFunction& phi,
                     const ResidualOptions& o = {});

/// The same pairing for the unmixing solution zeta_lambda, evaluated in Lagrangian form
/// int zeta_bar(y) F(t, X(t) y) dy; b uses the reflection sign in opt.
double weak_residual_unmixing(int lambda, const TestFunction& phi, const ExactOptions& opt = {},
                              const ResidualOptions& o = {});

}  // namespace tsl
