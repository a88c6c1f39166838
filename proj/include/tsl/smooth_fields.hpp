#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tsl/point.hpp"

namespace tsl {

enum class ProfileKind { Zero, Swirl, Compression, Shear };
enum class EnvelopeKind { Constant, Oscillating, Tent, Step };

/// Parameters of a built-in perturbation w(t, x) = e(t) * w0(x - c).
///
/// The spatial profile is cut off by the quintic smootherstep between radii r0 and r1 around c:
/// swirl w0 = omega g(r) (-x2, x1), compression w0 = alpha g(r) x, shear w0 = a g(r) (x2, 0).
/// Envelopes: constant 1; oscillating 1 + eps sin(2 pi nu t); tent 1 + eps |t - t0|;
/// step 1 for t < t0 and 1 + eps afterwards.
struct SmoothFieldParams {
    ProfileKind profile = ProfileKind::Swirl;
    double strength = 1.0;
    Vec2 centre{0.5, 0.5};
    double r0 = 0.15;
    double r1 = 0.4;
    EnvelopeKind envelope = EnvelopeKind::Constant;
    double eps = 0.0;
    double freq = 1.0;
    double t0 = 1.0;
};

/// Spatial norms of the profile w0, sampled on a grid over its support.
struct FieldBudget {
    double c0 = 0;   ///< sup |w0|
    double c1 = 0;   ///< sup |D w0| (spectral norm)
    double c2 = 0;   ///< sup |D^2 w0| (max entry)
    double div = 0;  ///< sup |div w0|
};

struct SmoothFieldDef {
    std::string name;
    SmoothFieldParams params;
    std::function<double(double)> envelope;
    std::vector<double> breaks;  ///< times where the envelope may fail to be smooth
    bool autonomous = true;
    FieldBudget budget;
    double envelope_sup = 1.0;  ///< sup over [0,2] of |e|

    Vec2 value(double t, const Vec2& x) const;
    Mat2 jacobian(double t, const Vec2& x) const;
    double divergence(double t, const Vec2& x) const;
    /// Radius of a disc about the origin outside which w vanishes.
    double support_radius() const;
    bool outside_support(const Vec2& x) const;

    /// ||div w(t)||_inf.
    double div_sup(double t) const;
    /// |int_a^b ||div w(s)||_inf ds| (either order of a, b).
    double div_integral(double a, double b) const;
    /// |int_a^b ||D w(s)||_inf ds|.
    double c1_integral(double a, double b) const;
    /// |int_a^b |e(s)| ds|.
    double envelope_integral(double a, double b) const;
};

/// Throws ConfigError for strength/radii/envelope parameters outside their documented ranges:
/// 0 < r0 < r1, |eps| < 1, freq > 0, t0 in [0,2].
SmoothFieldDef builtin_field(const SmoothFieldParams& p);

ProfileKind parse_profile(const std::string& s);
EnvelopeKind parse_envelope(const std::string& s);
std::string to_string(ProfileKind k);
std::string to_string(EnvelopeKind k);

struct FlowResult {
    Vec2 endpoint;
    Mat2 jacobian_matrix;
    double jacobian_det = 1.0;
};

struct FlowOptions {
    double h = 1e-3;
    bool validate = false;  ///< redo with h/2 and throw StepError when endpoints differ by > tol
    double tol = 1e-8;
};

/// X_w(t, x) from start time s = 1, with D_x X_w from the variational system.
FlowResult flow_w(const SmoothFieldDef& w, double t, const Vec2& x, const FlowOptions& o = {});

/// Flow from start time s to t (composition anchor for other start times).
FlowResult flow_w_between(const SmoothFieldDef& w, double s, double t, const Vec2& x, const FlowOptions& o = {});

/// X_w(t, .)^{-1}(y), integrated from t back to 1.
Vec2 inverse_flow_w(const SmoothFieldDef& w, double t, const Vec2& y, const FlowOptions& o = {});

/// Inverse flow together with D_y X_w^{-1}(t, y).
FlowResult inverse_flow_w_jac(const SmoothFieldDef& w, double t, const Vec2& y, const FlowOptions& o = {});

/// Jacobian determinant integrated separately from dJ/dt = div w(t, X) J.
double liouville_det(const SmoothFieldDef& w, double t, const Vec2& x, const FlowOptions& o = {});

/// w^k = w *_t eta^k with w frozen outside [0,2]; the same field when w is autonomous.
SmoothFieldDef time_mollify(const SmoothFieldDef& w, int k);

/// int eta^k(t - s) ds over the real line as computed by the mollification quadrature.
double mollifier_mass(int k, double t);

struct EstimateSample {
    double t = 0;
    Vec2 x;
    double det = 1;
    double det_lower = 1;      ///< exp(-|int_1^t ||div w||_inf|)
    double det_upper = 1;      ///< exp(+|int_1^t ||div w||_inf|)
    double pushforward = 1;    ///< area-ratio estimate of the push-forward density near X_w(t, x)
    double grad_norm = 1;      ///< |D_x X_w(t, x)|
    double grad_bound = 1;     ///< exp(|int_1^t ||D w||_inf|)
    bool det_ok = true;
    bool pushforward_ok = true;
    bool grad_ok = true;
};

struct EstimateReport {
    std::vector<EstimateSample> samples;
    double max_det_violation = 0;  ///< largest amount by which det or push-forward leaves its envelope
    bool all_ok = true;
};

/// Checks the Groenwall determinant envelope, the push-forward density bounds and the C^1 growth
/// of the flow at every (t, x) in the tensor product of times and points.
EstimateReport estimate_checks(const SmoothFieldDef& w, const std::vector<double>& times,
                               const std::vector<Vec2>& points, double tol = 1e-3, const FlowOptions& o = {});

/// Mean density of X_w(t,.)# Lebesgue over the image of the square of side delta centred at x,
/// |Q| / |X_w(t, Q)|, with the image area taken from m mapped points per side.
double pushforward_area_ratio(const SmoothFieldDef& w, double t, const Vec2& x, double delta, int m,
                              const FlowOptions& o = {});

}  // namespace tsl
