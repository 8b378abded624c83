#pragma once

// Singular self-similar profile f of (f^m/m)'' + (n-1)/r (f^m/m)' + alpha f + beta r f_r = 0.
//
// With s = log r, w~(s) = r^gamma f(r) and h = C1 + w~_s / w~, the tail
// s >= b1 is the fixed point of the map (Phi1, Phi2); the rest of the line is
// reached by integrating the h-equation backward from b1.

#include <cstddef>
#include <span>
#include <vector>

#include "fdx/params.hpp"

namespace fdx {

/// All profile grids are integer multiples of this spacing in s, so that
/// s = 0 is a node and the grid is symmetric under s -> -s.
inline constexpr double kProfileDs = 0.01;

struct TailSolution {
    ParamSet params;
    FPConstants fp;
    int stride = 1;             // tail spacing is kProfileDs / stride
    long first_index = 0;       // s_i = (first_index + i) * kProfileDs / stride
    std::vector<double> s, h, wt;
    std::vector<double> log_h, log_wt;
    double fp_residual = 0.0;   // weighted norm of Phi(x) - x at exit
    int iterations = 0;
    std::vector<double> update_norms;
    /// ||x_{k+1} - x_k|| / ||x_k - x_{k-1}||, recorded while the denominator is
    /// above the round-off floor.
    std::vector<double> ratios;

    double ds() const { return kProfileDs / stride; }
    double s_max() const { return s.back(); }
    /// Interpolated in log scale; exponential continuation beyond s_max.
    double h_at(double x) const;
    double wt_at(double x) const;
};

struct PicardOptions {
    double tol = 1e-12;
    double s_max = 0.0;  // 0: b1 + max(40, -log(tol)/C2)
    int max_iter = 200;
};

/// Seed (etaInf e^{-C1 s}, min(C3, eps1) e^{-C2 s}).
/// Throws NonContractionError when the update ratio exceeds 0.99 three times
/// in a row, ToleranceError at the iteration cap, BoundViolationError if an
/// iterate leaves D_{b1}.
TailSolution picard_solve(const ParamSet& p, const FPConstants& fp, const PicardOptions& opt = {});

/// Weighted distance between the iterate pair (w~, h) and D_{b1}'s bounds;
/// zero when all four membership inequalities hold.
double domain_violation(const ParamSet& p, const FPConstants& fp, std::span<const double> s,
                        std::span<const double> wt, std::span<const double> h);

/// Independent check of the fixed point: Phi is re-evaluated at `samples`
/// nodes with adaptive quadrature on the interpolated solution and compared in
/// the weighted sup norm max(|dw| e^{C1 s}, |dh| e^{C2 s / 2}).
double tail_integral_residual(const TailSolution& tail, int samples = 16, double quad_tol = 1e-14);

struct Profile {
    ParamSet params;
    FPConstants fp;
    /// Uniform s-grid, s_i = s0 + i ds.
    double s0 = 0.0;
    double ds = kProfileDs;
    std::vector<double> s, h, z, lw;  // lw = log w~, z = h - C1
    double eta_origin = 0.0;
    double eta_inf = 0.0;
    double log_lambda = 0.0;          // scaling applied to the base profile
    std::vector<double> richardson;   // successive origin extrapolants
    double fp_residual = 0.0;
    int iterations = 0;

    std::size_t size() const { return s.size(); }
    double s_min() const { return s.front(); }
    double s_max() const { return s.back(); }
    double r_min() const;
    double r_max() const;
    double wt(std::size_t i) const;
    double lnf(std::size_t i) const { return lw[i] - params.gamma * s[i]; }
    double f(std::size_t i) const;
    double rfr_over_f(std::size_t i) const { return z[i] - params.gamma; }

    /// log f and its logarithmic derivative r f_r / f at arbitrary s. Throws
    /// RangeError outside the tabulated range.
    double lnf_at(double x) const;
    double z_at(double x) const;
    double f_at_r(double r) const;
};

struct ContinueOptions {
    double s_min = 0.0;  // 0: -40 beta'/rho1
    double rel_tol = 1e-13;
    double abs_tol = 1e-300;
};

/// Integrates h' = (n-2 + P)h - C1 P - m h^2, P = beta' e^{-rho1 s/beta'} w~^{1-m},
/// together with z = h - C1 and log w~ backward from the first tail node.
/// Throws BoundViolationError if h leaves (0, C1) by more than the integrator
/// tolerance.
Profile continue_left(const TailSolution& tail, const ContinueOptions& opt = {});

struct RecoverOptions {
    double tol = 1e-8;       // Richardson agreement
    double rho_start = 1e-3; // largest r^{rho1/beta'} used
    int levels = 5;
};

/// Sets eta_origin by Richardson extrapolation of r^gamma f as r -> 0 and
/// eta_inf from r^{(n-2)/m} f at s_max corrected by the tail of h. Throws
/// ExtrapolationError when successive levels disagree by more than 10 tol.
void recover_profile(Profile& prof, const RecoverOptions& opt = {});

/// f_lambda(r) = lambda^{2/(1-m)} f(lambda r).
Profile rescale_profile(const Profile& prof, double lambda);

struct ProfileOptions {
    double eta_inf = 1.0;
    double b1_margin = 0.05;
    PicardOptions picard;
    ContinueOptions cont;
    RecoverOptions recover;
};

/// Picard tail, backward continuation and endpoint recovery in one call.
Profile build_profile(const ParamSet& p, const ProfileOptions& opt = {});

/// Base profile at eta_inf = 1 rescaled so that lim r^gamma f = target_eta.
Profile solve_for_eta(const ParamSet& p, double target_eta, const ProfileOptions& opt = {});

/// Scaling factor lambda that maps the base origin coefficient to target.
double lambda_for_eta(const ParamSet& p, double base_eta, double target_eta);

/// Relative defect of (f^m/m)'' + (n-1)/r (f^m/m)' + alpha f + beta r f_r at
/// node i, with derivatives of log f by eighth-order differences.
double f_equation_residual(const Profile& prof, std::size_t i);

/// Maximum of f_equation_residual over r in [r_lo, r_hi].
double f_equation_residual_max(const Profile& prof, double r_lo, double r_hi);

}  // namespace fdx
