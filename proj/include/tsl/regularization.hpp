#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tsl/perturbed_transport.hpp"

namespace tsl {

struct RegularizationOptions {
    bool time_mollify_b = true;  ///< also mollify the exact part in time with eta^k
    int nodes_per_width = 16;    ///< stream-function grid nodes per mollifier radius
    int max_nodes = 2048;        ///< cap on grid nodes per cell side
    double step_factor = 0.5;    ///< RK4 step = step_factor / (Lipschitz scale of the mollified field)
    int jacobian_refine = 32;    ///< step divisor when the Jacobian is integrated alongside
};

/// Stream function of the rescaled building block, g(z) = 2 max(d1^2, d2^2) on filled squares
/// (centres with even coordinate sum) and 1/2 elsewhere, convolved with the tensor-product
/// mollifier theta_kappa(z) = kappa^2 eta(kappa z1) eta(kappa z2).  Tabulated on the fold cell
/// [0,1]^2 and interpolated by Catmull-Rom bicubics, so its rotated gradient is exactly
/// divergence-free.
class MollifiedStream {
public:
    MollifiedStream(double kappa, int nodes);

    double kappa() const { return kappa_; }
    int nodes() const { return n_; }

    double psi(const Vec2& z) const;
    /// (-d2 psi, d1 psi).
    Vec2 velocity(const Vec2& z) const;
    /// Velocity together with its Jacobian.
    Vec2 velocity(const Vec2& z, Mat2& jac) const;

private:
    double kappa_;
    int n_;
    std::vector<double> values_;  ///< (n+3)^2 nodes, indices -1 .. n+1
};

/// Quadrature value of the mollified stream function (no tabulation).
double mollified_stream_direct(double kappa, const Vec2& z);

/// Shared immutable grid for kappa = 2^e.
std::shared_ptr<const MollifiedStream> mollified_stream(int e, const RegularizationOptions& o = {});

/// (b ⋆_x theta^k)(t, x) for a truncated exact field at a fixed time (no time mollification).
Vec2 mollify_space(const ExactSpec& spec, int k, double t, const Vec2& x, const ExactOptions& exact = {},
                   const RegularizationOptions& o = {});

/// The regularised field D X_{w^k}(t, y) (b ⋆ theta^k)(t, y) + w^k(t, x), y = X_{w^k}^{-1}(t, x),
/// for one truncated branch, together with its flows and the density it transports.
class MollifiedField {
public:
    MollifiedField(const PerturbedSpec& base, int k, const RegularizationOptions& o = {});

    int k() const { return k_; }
    const PerturbedSpec& base() const { return base_; }
    const SmoothFieldDef& wk() const { return wk_; }
    const RegularizationOptions& options() const { return opt_; }

    /// Mollified exact part (b ⋆_x theta^k, time-mollified when enabled).
    Vec2 exact_part(double t, const Vec2& x) const;
    Vec2 exact_part(double t, const Vec2& x, Mat2& jac) const;

    Vec2 assembled(double t, const Vec2& x) const;

    /// Flow Z of the mollified exact part from s to t, with its Jacobian matrix.
    FlowResult flow_Z(double s, double t, const Vec2& x, bool jacobian = false) const;
    /// Positions of the Z-flow started at time 0 at each of the sorted times in [0, 2].
    std::vector<Vec2> flow_Z_path(const Vec2& x, const std::vector<double>& times) const;

    /// Y_s^k(t, x) for anchor s in {0, 1}.
    FlowResult flow_Y(int anchor, double t, const Vec2& x) const;

    /// rho^{q,k}(t, x) = rho_bar(Y_0(t)^{-1} x) |det D Y_0(t)^{-1}(x)|.
    double density(double t, const Vec2& x) const;

    /// int rho^{q,k}(t, x) phi(x) dx = int zeta_bar(y) phi(Y_0(t, X_w(0, y))) dy, midpoint rule over ybox.
    double pairing(double t, const std::function<double(const Vec2&)>& phi, const Rect& ybox, int n) const;

    /// pairing at every time for every phi, entry [i * phis.size() + d]; follows one Z path per sample point.
    /// times must be nondecreasing in [0, 2].
    std::vector<double> pairings(const std::vector<double>& times,
                                 const std::vector<std::function<double(const Vec2&)>>& phis, const Rect& ybox,
                                 int n) const;

    /// Times where the field is not smooth in time (stage boundaries, or their 1/k neighbourhoods).
    std::vector<double> time_breaks() const;

private:
    struct Piece {
        int level;
        double coeff;  ///< orientation * sign * 2^-lambda
        double t0, t1;
        std::shared_ptr<const MollifiedStream> stream;
    };
    double weight(const Piece& p, double t) const;
    double step_for(double a, double b) const;

    PerturbedSpec base_;
    int k_;
    RegularizationOptions opt_;
    SmoothFieldDef wk_;
    std::vector<Piece> pieces_;
};

inline Vec2 assemble_regularized(const MollifiedField& f, double t, const Vec2& x) { return f.assembled(t, x); }
inline FlowResult flow_Y(const MollifiedField& f, int anchor, double t, const Vec2& x) { return f.flow_Y(anchor, t, x); }

/// Time mesh for sup_t: stage boundaries of the branch plus `uniform` equispaced points of [0, 2].
std::vector<double> regularization_time_mesh(const ExactSpec& spec, int uniform = 16);
/// Mesh with midpoints inserted between consecutive times.
std::vector<double> refine_mesh(const std::vector<double>& mesh);

struct L1Profile {
    std::vector<double> times;
    std::vector<double> distance;  ///< int_B |rho^{q,k}(t) - rho^q(t)| per time
    double sup = 0;
    bool periodic_path = false;    ///< computed from one period cell with lattice multiplicities
};

/// int over the disc B_R(0) of |rho^{q,k}(t) - rho^q(t)| at each time.  When w is autonomous both densities
/// are push-forwards by the same X_w(t), so the integral is the mismatch of zeta_bar(Z(0->t)^-1) against the
/// exact truncated density over X_w(t)^-1(B); that mismatch is periodic and is sampled on one period cell,
/// with lattice multiplicities (copies inside the support of w are tested through the flow).
L1Profile regularization_l1(const MollifiedField& f, double radius, const std::vector<double>& times,
                            int n_samples = 1 << 15);
/// Several radii from one set of flow samples (the fast path only reweights the lattice multiplicity).
std::vector<L1Profile> regularization_l1(const MollifiedField& f, const std::vector<double>& radii,
                                         const std::vector<double>& times, int n_samples = 1 << 15);

struct SelectionRow {
    int k = 0;
    double sym = 0, asym = 0;
};

struct SelectionResult {
    int q = 0;
    int k_q = 0;                    ///< 0 when the ladder was exhausted
    double achieved_distance = 0;   ///< max over both branches at k_q (or at the last k tried)
    double window_radius = 0;
    double bound = 0;               ///< 2^-q (1 + slack)
    bool success = false;
    bool verified = false;          ///< re-check on the refined mesh against 1.1 * bound
    double verified_distance = 0;
    std::vector<SelectionRow> ladder;
};

struct SelectOptions {
    int k_min = 4;
    int k_max = 256;
    double window_radius = -1;  ///< radius of B; negative means 2^q
    double slack = 0.0;
    int uniform_times = 16;
    int n_samples = 1 << 15;
    RegularizationOptions reg;
};

/// Smallest k of the doubling ladder for which both branches satisfy sup_t int_B |rho^{q,k} - rho^q| < 2^-q (1 + slack).
SelectionResult select_k(int q, int lambda, const SmoothFieldDef& w, const SelectOptions& o = {},
                         const ExactOptions& exact = {});
/// One ladder walk serving several window radii (o.window_radius is ignored); a rung is evaluated while
/// any window is still unresolved.
std::vector<SelectionResult> select_k(int q, int lambda, const SmoothFieldDef& w, const std::vector<double>& windows,
                                      const SelectOptions& o = {}, const ExactOptions& exact = {});

struct DemoRow {
    int q = 0;
    int k_q = 0;
    std::string branch;  ///< "sym" or "asym"
    double t = 0;
    int phi_id = 0;
    double gap = 0;        ///< |<rho^{q,k_q} - limit, phi>|
    double exact_gap = 0;  ///< |<rho^q - limit, phi>| (truncated exact solution)
    double cell_bound = 0; ///< 2^-q ||phi||_inf
};

struct DemoResult {
    std::vector<SelectionResult> selections;
    std::vector<DemoRow> rows;
    std::vector<double> mutual_gap;  ///< per q: max over the dictionary of |<rho^{q,k_q}(2) - rho~^{q,k_q}(2), phi>|
    double threshold = 0;            ///< 0.4 exp(-int_0^2 ||div w||_inf)
};

struct DemoOptions {
    SelectOptions select;
    std::vector<double> times{0.0, 0.5, 0.75, 1.25, 1.5, 2.0};
    int pairing_n = 128;
};

/// Dictionary of normalised cell indicators 1_Q / |Q| for the level-lambda cells of the period window.
std::vector<Rect> demo_dictionary(int lambda);

DemoResult theorem_demo(int lambda, const SmoothFieldDef& w, const std::vector<int>& qs, const DemoOptions& o = {},
                        const ExactOptions& exact = {});
/// The demonstration for each selection window radius, sharing the ladder and the limits.
std::vector<DemoResult> theorem_demo(int lambda, const SmoothFieldDef& w, const std::vector<int>& qs,
                                     const std::vector<double>& windows, const DemoOptions& o = {},
                                     const ExactOptions& exact = {});

struct Anchor0Report {
    double lower = 1, upper = 1;  ///< exp(-+3 int_0^2 ||div w||_inf)
    double min_density = 1, max_density = 1;
    double max_z_det_error = 0;   ///< max |det D Z - 1|
    bool pass = true;
};

/// Push-forward densities 1 / det D Y_0(t) and area ratios of small squares under Y_0(t) against the
/// factor-3 envelope, and the unit determinant of the Z-flow.
Anchor0Report anchor0_compressibility(const MollifiedField& f, const std::vector<double>& times,
                                      const std::vector<Vec2>& points, double tol = 1e-3);

}  // namespace tsl
