#pragma once

// Origin expansion of the profile in rho = r^{rho1/beta'} and the inversion
// g(r) = r^{-(n-2)/m} f(1/r).

#include <cstddef>
#include <vector>

#include "fdx/params.hpp"
#include "fdx/profile.hpp"

namespace fdx {

struct ExpansionOptions {
    double rho_start = 1e-2;  // largest window is [rho_start, 4 rho_start]
    int levels = 6;           // windows shrink by 2 per level
};

struct ExpansionReport {
    double eta = 0.0;  // lim wbar
    double d1 = 0.0;   // wbar_rho(0)
    double d2 = 0.0;   // wbar_rhorho(0)
    double d1_ref = 0.0, d2_ref = 0.0;
    double rel_err1 = 0.0, rel_err2 = 0.0;
    /// Relative change between the last two extrapolation levels.
    double spread1 = 0.0, spread2 = 0.0;
    std::vector<double> rho_windows;
    std::vector<double> d1_levels, d2_levels;  // diagonal of the Richardson tables
    std::vector<double> d1_raw, d2_raw;        // per-window fits
    /// max of wbar_rho over the sampled rho > 0; negative when monotone.
    double max_wbar_rho = 0.0;
};

/// Quadratic least-squares fits of wbar_rho = w~ z / (k rho) on [rho, 4 rho],
/// extrapolated to rho = 0. Throws ResolutionError unless the table reaches
/// three decades below 1e-2 in rho.
ExpansionReport expansion_check(const Profile& prof, const ExpansionConstants& ec,
                                const ExpansionOptions& opt = {});

/// Defect of (wbar_rho/wbar)_rho + m (wbar_rho/wbar)^2 + a1/rho wbar_rho/wbar
/// + a2/rho^2 wbar_rho/wbar^m - a3/rho^2 at node i, relative to its largest
/// term; derivatives of log wbar by centered differences.
double wbar_ode_residual_at(const Profile& prof, const ExpansionConstants& ec, std::size_t i);

/// Maximum of wbar_ode_residual_at over rho in [rho_lo, rho_hi].
double wbar_ode_residual(const Profile& prof, const ExpansionConstants& ec, double rho_lo = 1e-4,
                         double rho_hi = 1.0);

/// log g on the mirrored grid sigma_i = -s_{N-1-i}.
struct InvertedTable {
    double s0 = 0.0, ds = 0.0;
    std::vector<double> s, lng;
};

/// Requires a grid symmetric in log r (s0 an integer multiple of ds).
InvertedTable invert_profile(const Profile& prof);

struct InversionReport {
    /// (g^m/m)'' + (n-1)/r (g^m/m)' + r^{(n-2-nm)/m - 2}(alpha~ g + beta~ r g_r),
    /// relative to the largest term, maximized over [r_lo, r_hi].
    double residual = 0.0;
    double alpha_t = 0.0, beta_t = 0.0;
    double g_origin = 0.0;           // g at the smallest tabulated radius
    double g_origin_gap = 0.0;       // |g_origin - eta_inf| / eta_inf
    double rho_g_rho_origin = 0.0;   // r g_r at the smallest radius
    /// min over all nodes of (C1 g + r g_r) / (C1 g); positive when the
    /// inequality holds everywhere.
    double min_positivity = 0.0;
};

InversionReport inversion_residual(const Profile& prof, double r_lo = 1e-2, double r_hi = 1e2);

/// Applies the g-transform twice, sampling the intermediate table between
/// its nodes, and returns the maximum relative deviation from f on
/// [r_lo, r_hi].
double double_inversion_error(const Profile& prof, double r_lo = 1e-2, double r_hi = 1e2);

struct OriginSeriesReport {
    double eta = 0.0;
    std::vector<double> rho;
    /// |r^gamma f - (eta + c1 rho + c2 rho^2)| / rho^2 at each rho.
    std::vector<double> scaled_deviation;
    bool deviation_decreasing = false;
    double fr_leading = 0.0, fr_leading_ref = 0.0;  // lim r^{gamma+1} f_r
    double fr_sub = 0.0, fr_sub_ref = 0.0;          // coefficient of rho in r^{gamma+1} f_r
    double fr_leading_rel_err = 0.0, fr_sub_rel_err = 0.0;
    double max_deviation = 0.0;
};

/// Compares f against its three-term series near the origin and fits the
/// first two coefficients of r^{gamma+1} f_r.
OriginSeriesReport origin_series_check(const Profile& prof, const ExpansionConstants& ec, double eta,
                                       const ExpansionOptions& opt = {});

}  // namespace fdx
