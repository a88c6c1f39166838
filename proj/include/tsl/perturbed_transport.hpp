#pragma once

#include <functional>
#include <vector>

#include "tsl/building_blocks.hpp"
#include "tsl/cell_evolution.hpp"
#include "tsl/smooth_fields.hpp"

namespace tsl {

/// b_{lambda,w} = D_x X_w(t, y) b(t, y) + w(t, x), y = X_w^{-1}(t, x), for the exact field of a
/// solution branch; the branch also fixes which exact solution is pushed forward by X_w.
struct PerturbedSpec {
    int lambda = 0;
    SolutionVariant branch = SolutionVariant::sym(1);
    SmoothFieldDef w;
    ExactOptions exact;
    FlowOptions flow;

    ExactSpec field() const { return branch.field(lambda); }
    bool truncated() const { return field().trunc != Truncation::None; }
};

Vec2 eval_perturbed_field(const PerturbedSpec& spec, double t, const Vec2& x);

struct LpOptions {
    Rect K{0, 0, 1, 1};  ///< spatial window; the time window is always [0, 2]
    int ny = 4096;       ///< quasi-random trajectory starts per window
    int nt = 512;        ///< quadrature cells per unit time
    double h_max = 2e-3;
};

struct LpResult {
    int lambda = 0;
    int p = 1;
    double distance = 0;       ///< ||b_{lambda,w} - w||_{L^p([0,2] x K)}
    double bound = 0;          ///< right-hand side of the density estimate with 1/p on every factor
    double bound_sharp = 0;    ///< ||D_x X_w||_inf ||J X_w||_inf^{1/p} ||b_lambda||_{L^p}, majorised
};

/// Distances for every lambda and p from one set of X_w trajectories (the samples do not depend on lambda).
std::vector<LpResult> lp_distance_table(const SmoothFieldDef& w, const std::vector<int>& lambdas,
                                        const std::vector<int>& ps, const LpOptions& o = {},
                                        const ExactOptions& exact = {});

LpResult lp_distance_to_w(int lambda, const SmoothFieldDef& w, int p, const LpOptions& o = {},
                          const ExactOptions& exact = {});

/// X_w(t, X_b(t, x)) with both flows started at time 1 (truncated branches only).
Vec2 composed_flow(const PerturbedSpec& spec, double t, const Vec2& x);

struct DirectOptions {
    double h = 1e-3;        ///< outer RK4 step
    double inner_h = 1e-2;  ///< step of the inverse X_w flow inside each field evaluation
};

/// Trajectory of the assembled field from time 1 to t by RK4 on eval_perturbed_field-type
/// evaluations, with steps cut at the times where the trajectory changes smooth piece.
Vec2 direct_assembled_flow(const PerturbedSpec& spec, double t, const Vec2& x, const DirectOptions& o = {});

/// Exact density zeta(t, y) of the branch (the weak* value 1/2 at unmixing t = 1).
double exact_density(const PerturbedSpec& spec, double t, const Vec2& y);

/// int phi(X_w(t, y)) zeta(t, y) dy by the midpoint rule on an n x n grid over ybox.
double pairing(const PerturbedSpec& spec, double t, const std::function<double(const Vec2&)>& phi,
               const Rect& ybox, int n);

/// pairing for every (time, test function) at once; entry [i * phis.size() + d]. One flow per sample point.
std::vector<double> pairings(const PerturbedSpec& spec, const std::vector<double>& times,
                             const std::vector<std::function<double(const Vec2&)>>& phis, const Rect& ybox, int n);

/// zeta(t, y) / J X_w(t, y) at y = X_w^{-1}(t, x).
double density_eval(const PerturbedSpec& spec, double t, const Vec2& x);

/// Upper bound for density_eval over [0, 2]: sup zeta * exp(int_0^2 ||div w||_inf).
double density_bound(const PerturbedSpec& spec);

struct CompressibilityCell {
    double t = 0;
    int i = 0, j = 0;
    double composed = 0;      ///< histogram density of composed_flow(t, .)# Lebesgue
    double flow_w_only = 0;   ///< histogram density of X_w(t, .)# Lebesgue
    double stderr_ = 0;       ///< binomial standard error of a cell density
};

struct CompressibilityReport {
    double lower = 1, upper = 1;  ///< exp(-+ sup_t |int_1^t ||div w||_inf|)
    double constant = 1;          ///< compressibility constant C: C^-1 <= density <= C
    double max_violation = 0;     ///< worst excursion beyond [lower, upper] in units of (1e-3 + 3 stderr)
    double max_factor_gap = 0;    ///< max |composed - flow_w_only| / stderr
    std::vector<CompressibilityCell> cells;
    bool pass = true;
};

/// Histogram push-forward densities of composed_flow and of X_w on the period window
/// [0, P)^2, P = max(1, 2^(1-lambda)), from n quasi-random samples per time.
CompressibilityReport compressibility_certificate(const PerturbedSpec& spec, const std::vector<double>& times,
                                                  int n_samples = 1 << 18, int bins = 16);

struct Remark41Row {
    double t0 = 0, t1 = 0;
    double w_sup = 0;          ///< sup |w| over the interval
    double transported_sup = 0;  ///< sup |D_x X_w b_lambda| over the interval
    double lower = 0;          ///< w_sup - transported_sup (triangle inequality)
};

/// Both norms of the unboundedness remark per time interval, sampled on a grid.
std::vector<Remark41Row> remark41_diagnostic(int lambda, const SmoothFieldDef& w, const std::vector<double>& cuts,
                                             int grid = 64, const ExactOptions& exact = {});

struct TvRow {
    double h = 0;
    double tv = 0;
};

/// tv_estimate of the assembled field at time t over a window for a ladder of grid sizes,
/// together with the bounded-variation constant assembled from the integration-by-parts bound.
std::vector<TvRow> tv_ladder(const PerturbedSpec& spec, double t, const Rect& window, const std::vector<double>& hs);
double tv_bound(const PerturbedSpec& spec, double t, const Rect& window);

/// Quasi-random R2 point n in [0,1)^2.
Vec2 r2_point(std::uint64_t n);

}  // namespace tsl
