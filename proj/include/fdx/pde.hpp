#pragma once

// Radial u_t = Delta(u^m/m) on an annulus [r_in, r_out] with Dirichlet
// traces, discretized in x = log r:
//   Delta(u^m/m) = e^{-2x} [(u^m/m)_xx + (n-2)(u^m/m)_x],
// conservative three-point fluxes, backward Euler and Newton on the
// tridiagonal system.

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "fdx/params.hpp"
#include "fdx/profile.hpp"
#include "fdx/weight.hpp"

namespace fdx {

struct LogGrid {
    double r_in = 1e-3;
    double r_out = 1e3;
    int nodes = 513;

    double dx() const;
    std::vector<double> radii() const;
};

/// Dirichlet values at r_in and r_out as functions of time.
struct BoundaryTrace {
    std::function<double(double)> inner, outer;
};

struct RadialField {
    int n = 3;
    double m = 0.2;
    std::vector<double> r;  // log-spaced
    std::vector<double> u;
    double t = 0.0;
    BoundaryTrace bc;
    double dt_next = 0.0;  // step carried between evolve() calls; 0 = cfg.dt_init

    /// Throws RangeError unless u > 0, r is a uniform log grid and traces are
    /// positive at t.
    void validate() const;
};

struct EvolveConfig {
    double dt_init = 1e-4;
    double dt_max = 1e-2;
    double dt_max_rel = 0.0;   // if > 0, also dt <= dt_max_rel * t
    double dt_min = 1e-14;
    double newton_tol = 1e-12; // relative update and residual
    int newton_max = 30;
    int backtrack_max = 30;
    double growth = 1.5;       // dt factor after an easy step
    int easy_iters = 4;
    int hard_iters = 10;

    void validate() const;
};

struct EvolveStats {
    long steps = 0;
    long newton_iterations = 0;
    long rejected = 0;
    /// max over steps and interior nodes of
    /// ((u^{k+1}-u^k)/dt - u^{k+1}/((1-m)t^{k+1})) / (u^{k+1}/((1-m)t^{k+1})).
    double ab_max_excess = -1e300;
    double min_u = 1e300;
    double max_newton_residual = 0.0;
};

/// Backward-Euler evolution to exactly t_end. Throws NewtonDivergence when a
/// step cannot converge above dt_min and PositivityError when positivity
/// cannot be kept by backtracking above dt_min.
RadialField evolve(RadialField field, const EvolveConfig& cfg, double t_end, EvolveStats* stats = nullptr);

/// Discrete e^{-2x}[Phi_xx + (n-2)Phi_x] at the interior nodes (ends are 0).
std::vector<double> discrete_laplacian_phi(const RadialField& field);

/// max over interior nodes of (t Delta(u^m/m) - u/(1-m)) / (u/(1-m)); <= 0 when
/// the data satisfy the Aronson-Benilan bound at time t.
double aronson_benilan_margin(const RadialField& field);

/// f_lambda on demand from a base profile.
class SelfSimilar {
public:
    SelfSimilar(std::shared_ptr<const Profile> base, double lambda);

    double lambda() const { return lambda_; }
    const ParamSet& params() const { return base_->params; }
    /// f_lambda(r) = lambda^{2/(1-m)} f(lambda r)
    double f(double r) const;
    /// V_lambda(r, t) = t^{-alpha} f_lambda(t^{-beta} r)
    double V(double r, double t) const;
    BoundaryTrace trace(double r_in, double r_out) const;

private:
    std::shared_ptr<const Profile> base_;
    double lambda_;
};

/// V_lambda on the grid at time t with V_lambda traces. Throws RangeError if
/// t^{-beta} r lambda leaves the profile table.
RadialField make_self_similar_field(const SelfSimilar& v, double t, const LogGrid& grid);

/// Barenblatt B_k(x, t) = (T-t)^{alpha1} (C*/(k^2 + |(T-t)^{beta1} x|^2))^{1/(1-m)},
/// C* = 2(n-2-nm)/(1-m), beta1 = 1/(n-2-nm), alpha1 = (2 beta1 + 1)/(1-m).
struct Barenblatt {
    int n = 3;
    double m = 0.2;
    double k = 1.0;
    double T = 2.0;

    double operator()(double r, double t) const;
    RadialField field(double t, const LogGrid& grid) const;
};

struct OrderStudy {
    std::vector<int> nodes;       // coarse to fine
    std::vector<double> errors;   // max relative nodal error at t_end
    std::vector<double> orders;   // log2 of successive error ratios
    double ab_max_excess = -1e300;
    double min_u = 1e300;
};

/// Runs `levels` grids halving dx down to `finest`, with dt = dt_per_dx2 dx^2
/// held fixed on each grid, and compares with `exact` at t_end.
OrderStudy spatial_order_study(const std::function<RadialField(const LogGrid&)>& init,
                               const std::function<double(double, double)>& exact, double t_end,
                               const LogGrid& finest, int levels = 3, double dt_per_dx2 = 1.0);

struct RescaledField {
    std::vector<double> y;
    std::vector<double> u;  // t^alpha u(t^beta y, t)
    double tau = 0.0;
};

/// Resamples t^alpha u(t^beta y, t) onto y by six-point interpolation of
/// log u in log r. Throws RangeError if t^beta y leaves the field's grid.
RescaledField rescale_field(const RadialField& field, const ParamSet& p, std::span<const double> y);

struct Sandwich {
    SelfSimilar lower, upper;  // V_{lambda1} <= u <= V_{lambda2}
};

/// max over nodes of the relative excursion of u outside [lower, upper]; 0 when
/// sandwiched.
double sandwich_violation(const Sandwich& s, const RadialField& field);
/// Same against barrier fields on the field's grid.
double sandwich_violation(const RadialField& lower, const RadialField& upper, const RadialField& field);

struct ContractionResult {
    std::vector<double> t, dist_abs, dist_pos;
    /// max |u - v| / v over the compact radial range.
    std::vector<double> dist_sup_compact;
    double max_sandwich_violation = 0.0;
    /// max over samples of (v - u)_+ / u when u0 >= v0, else 0.
    double max_order_violation = 0.0;
    bool ordered = false;
    double initial_ab_margin_u = 0.0, initial_ab_margin_v = 0.0;
    EvolveStats stats_u, stats_v;
    EvolveStats stats_barriers;  // V_lambda1 and V_lambda2 evolved alongside
};

/// Evolves both fields and records the weighted L1 distances at each time.
/// Throws SandwichViolationError if u0 or v0 is not sandwiched at setup.
ContractionResult contraction_experiment(const RadialField& u0, const RadialField& v0,
                                         const WeightFunction& weight, std::span<const double> times,
                                         const EvolveConfig& cfg, const Sandwich& sandwich,
                                         double compact_lo = 0.1, double compact_hi = 10.0);

/// Smooth compactly supported bump in log r, equal to 1 at the center.
struct LogBump {
    double center = 0.0;  // log r
    double width = 1.0;   // half-width in log r
    double operator()(double r) const;
};

/// Random data V_lower + theta (V_upper - V_lower) with theta = min(1, sum of
/// a_j bump_j), a_j uniform in [0, 1], bump supports inside the grid, and
/// lower traces.
struct RandomDataSpec {
    int bumps = 3;
    double center_lo = 3e-3, center_hi = 3e-2;  // in r
    double width_lo = 1.5, width_hi = 2.5;      // half-width in log r
    int max_tries = 200;
};

/// Draws until the data satisfy the Aronson-Benilan bound at t0; throws
/// ConfigError after max_tries draws.
RadialField random_sandwiched_field(const Sandwich& s, double t0, const LogGrid& grid, const RandomDataSpec& spec,
                                    std::mt19937_64& rng);

struct ConvergenceSpec {
    double A0 = 1.0, A1 = 0.8, A2 = 1.4;
    double t0 = 1.0;
    double amplitude = 0.0;  // u0 = V_{lambda0}(., t0) (1 + amplitude * bump)
    LogBump bump{std::log(0.1), 1.5};
    LogGrid grid;
    std::vector<double> tau;  // sample times log(t / t0)
    std::vector<double> y;    // reference grid for the rescaled field
    double compact_lo = 0.1, compact_hi = 10.0;
};

struct ConvergenceResult {
    double lambda0 = 0.0, lambda1 = 0.0, lambda2 = 0.0;
    std::vector<double> tau, dist_L1w, rel_L1w, dist_sup_compact;
    double norm_f = 0.0;  // ||f_{lambda0}||_{L1(phi)} on the y grid
    double max_sandwich_violation = 0.0;
    double initial_ab_margin = 0.0;
    EvolveStats stats;
    EvolveStats stats_barriers;
};

/// lambda_i from A_i (lim r^gamma f_{lambda_i} = A_i), sandwich traces from
/// V_{lambda0}, distances of the rescaled solution to f_{lambda0}.
ConvergenceResult convergence_experiment(std::shared_ptr<const Profile> base, const ConvergenceSpec& spec,
                                         const WeightFunction& weight, const EvolveConfig& cfg);

}  // namespace fdx
