#include "fdx/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fdx/errors.hpp"
#include "fdx/numerics.hpp"

namespace fdx {

namespace {

// Least-squares quadratic y ~ c0 + c1 rho + c2 rho^2 over the nodes with
// rho in [lo, 4 lo]; the fit is done in x = rho / lo.
std::array<double, 3> fit_window(const Profile& prof, double lo,
                                 const std::function<double(std::size_t)>& y) {
    const double k = prof.params.origin_rate();
    double A[3][3] = {}, b[3] = {};
    int count = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double rho = std::exp(k * prof.s[i]);
        if (rho < lo || rho > 4.0 * lo) continue;
        const double x = rho / lo;
        const double phi[3] = {1.0, x, x * x};
        const double v = y(i);
        for (int a = 0; a < 3; ++a) {
            b[a] += phi[a] * v;
            for (int c = 0; c < 3; ++c) A[a][c] += phi[a] * phi[c];
        }
        ++count;
    }
    if (count < 8) throw ResolutionError("too few profile nodes in rho window starting at " + std::to_string(lo));
    // Gaussian elimination; the 3x3 system is symmetric positive definite.
    for (int p = 0; p < 3; ++p) {
        for (int r = p + 1; r < 3; ++r) {
            const double f = A[r][p] / A[p][p];
            for (int c = p; c < 3; ++c) A[r][c] -= f * A[p][c];
            b[r] -= f * b[p];
        }
    }
    double c[3];
    for (int r = 2; r >= 0; --r) {
        double v = b[r];
        for (int q = r + 1; q < 3; ++q) v -= A[r][q] * c[q];
        c[r] = v / A[r][r];
    }
    return {c[0], c[1] / lo, c[2] / (lo * lo)};
}

// Richardson table for windows shrinking by 2 with error terms rho^p0,
// rho^{p0+1}, ...; returns the diagonal.
std::vector<double> richardson(const std::vector<double>& raw, int p0) {
    std::vector<std::vector<double>> T(raw.size());
    std::vector<double> diag(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        T[j].resize(j + 1);
        T[j][0] = raw[j];
        for (std::size_t q = 1; q <= j; ++q) {
            const double f = std::ldexp(1.0, p0 + static_cast<int>(q) - 1);
            T[j][q] = (f * T[j][q - 1] - T[j - 1][q - 1]) / (f - 1.0);
        }
        diag[j] = T[j][j];
    }
    return diag;
}

void require_origin_range(const Profile& prof, const ExpansionOptions& opt) {
    if (opt.levels < 3 || !(opt.rho_start > 0.0)) throw ConfigError("expansion needs >= 3 levels and rho_start > 0");
    const double k = prof.params.origin_rate();
    const double rho_min = std::exp(k * prof.s_min());
    const double needed = std::min(1e-5, opt.rho_start * std::ldexp(1.0, -(opt.levels - 1)));
    if (rho_min > needed) {
        throw ResolutionError("profile reaches only rho = " + std::to_string(rho_min) + ", need " +
                              std::to_string(needed));
    }
}

double rel(double a, double ref) { return std::abs(a - ref) / std::abs(ref); }

}  // namespace

ExpansionReport expansion_check(const Profile& prof, const ExpansionConstants& ec, const ExpansionOptions& opt) {
    require_origin_range(prof, opt);
    const ParamSet& p = prof.params;
    const double k = p.origin_rate();
    auto wbar_rho = [&](std::size_t i) { return prof.wt(i) * prof.z[i] / (k * std::exp(k * prof.s[i])); };

    ExpansionReport rep;
    rep.eta = prof.eta_origin;
    rep.d1_ref = ec.a3 * std::pow(rep.eta, p.m) / ec.a2;
    rep.d2_ref = ec.a3 * (p.m * ec.a3 - ec.a1) * std::pow(rep.eta, 2.0 * p.m - 1.0) / (ec.a2 * ec.a2);
    for (int j = 0; j < opt.levels; ++j) {
        const double lo = opt.rho_start * std::ldexp(1.0, -j);
        const auto c = fit_window(prof, lo, wbar_rho);
        rep.rho_windows.push_back(lo);
        rep.d1_raw.push_back(c[0]);
        rep.d2_raw.push_back(c[1]);
    }
    // wbar_rho = d1 + d2 rho + O(rho^2): the quadratic fit leaves O(rho^3) in
    // the constant and O(rho^2) in the slope.
    rep.d1_levels = richardson(rep.d1_raw, 3);
    rep.d2_levels = richardson(rep.d2_raw, 2);
    const std::size_t L = rep.d1_levels.size() - 1;
    rep.d1 = rep.d1_levels[L];
    rep.d2 = rep.d2_levels[L];
    rep.rel_err1 = rel(rep.d1, rep.d1_ref);
    rep.rel_err2 = rel(rep.d2, rep.d2_ref);
    rep.spread1 = rel(rep.d1_levels[L - 1], rep.d1);
    rep.spread2 = rel(rep.d2_levels[L - 1], rep.d2);

    rep.max_wbar_rho = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < prof.size(); ++i) rep.max_wbar_rho = std::max(rep.max_wbar_rho, wbar_rho(i));
    return rep;
}

double wbar_ode_residual_at(const Profile& prof, const ExpansionConstants& ec, std::size_t i) {
    const ParamSet& p = prof.params;
    const double k = p.origin_rate();
    const auto d = numerics::central_diff8(prof.lw, i, prof.ds);
    const double rho = std::exp(k * prof.s[i]);
    // Multiplied through by rho^2 and written in s = log(rho)/k, with
    // l = log wbar: rho^2 (l_rho)_rho = l_ss/k^2 - l_s/k and rho l_rho = l_s/k.
    const double t1 = d.d2 / (k * k) - d.d1 / k;
    const double t2 = p.m * d.d1 * d.d1 / (k * k);
    const double t3 = ec.a1 * d.d1 / k;
    const double t4 = ec.a2 * std::exp((1.0 - p.m) * prof.lw[i]) * d.d1 / (k * rho);
    const double t5 = -ec.a3;
    const double big = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(t5)});
    return std::abs(t1 + t2 + t3 + t4 + t5) / big;
}

double wbar_ode_residual(const Profile& prof, const ExpansionConstants& ec, double rho_lo, double rho_hi) {
    const double k = prof.params.origin_rate();
    const double lo = std::log(rho_lo) / k, hi = std::log(rho_hi) / k;
    double worst = 0.0;
    bool any = false;
    for (std::size_t i = 4; i + 4 < prof.size(); ++i) {
        if (prof.s[i] < lo - 1e-12 || prof.s[i] > hi + 1e-12) continue;
        worst = std::max(worst, wbar_ode_residual_at(prof, ec, i));
        any = true;
    }
    if (!any) throw ResolutionError("no profile nodes in the requested rho range");
    return worst;
}

InvertedTable invert_profile(const Profile& prof) {
    const double q = prof.s0 / prof.ds;
    if (std::abs(q - std::round(q)) > 1e-6) {
        throw ConfigError("inversion needs a log grid containing s = 0");
    }
    const double C1 = prof.params.critical_exponent() - prof.params.gamma;
    const std::size_t N = prof.size();
    InvertedTable g;
    g.ds = prof.ds;
    g.s.resize(N);
    g.lng.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        const std::size_t j = N - 1 - i;
        g.s[i] = -prof.s[j];
        // log g(sigma) = -(n-2)/m sigma + log f(-sigma) = log w~(-sigma) - C1 sigma
        g.lng[i] = prof.lw[j] - C1 * g.s[i];
    }
    g.s0 = g.s.front();
    return g;
}

InversionReport inversion_residual(const Profile& prof, double r_lo, double r_hi) {
    const ParamSet& p = prof.params;
    const double kappa = p.critical_exponent();
    const InvertedTable g = invert_profile(prof);
    InversionReport rep;
    rep.alpha_t = p.alpha - kappa * p.beta;
    rep.beta_t = -p.beta;
    const double C1 = kappa - p.gamma;
    const std::size_t N = prof.size();
    // Differences are taken of log w~(-sigma); the linear part -C1 sigma of
    // log g is differentiated exactly, as its rounding would otherwise be
    // amplified by 1/ds^2.
    const std::vector<double> mirrored(prof.lw.rbegin(), prof.lw.rend());
    const double lo = std::log(r_lo), hi = std::log(r_hi);
    bool any = false;
    for (std::size_t i = 4; i + 4 < g.s.size(); ++i) {
        const double x = g.s[i];
        if (x < lo - 1e-12 || x > hi + 1e-12) continue;
        auto d = numerics::central_diff8(mirrored, i, g.ds);
        d.d1 -= C1;
        // Divided by r^{kappa-n-2} g: r^{n-kappa} g^{m-1} (L'' + m L'^2 + (n-2) L') + alpha~ + beta~ L'.
        const double c = std::exp((p.n - kappa) * x + (p.m - 1.0) * g.lng[i]);
        const double t1 = c * d.d2, t2 = c * p.m * d.d1 * d.d1, t3 = c * (p.n - 2.0) * d.d1;
        const double t4 = rep.alpha_t, t5 = rep.beta_t * d.d1;
        const double big = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(t5)});
        rep.residual = std::max(rep.residual, std::abs(t1 + t2 + t3 + t4 + t5) / big);
        any = true;
    }
    if (!any) throw ResolutionError("no inverted nodes in the requested radial range");

    // r g_r / g = -C1 - z(-sigma), so C1 g + r g_r = -z(-sigma) g.
    rep.min_positivity = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) rep.min_positivity = std::min(rep.min_positivity, -prof.z[j] / C1);
    rep.g_origin = std::exp(g.lng.front());
    rep.g_origin_gap = std::abs(rep.g_origin - prof.eta_inf) / prof.eta_inf;
    rep.rho_g_rho_origin = rep.g_origin * (-C1 - prof.z[N - 1]);
    return rep;
}

double double_inversion_error(const Profile& prof, double r_lo, double r_hi) {
    const double kappa = prof.params.critical_exponent();
    const InvertedTable g = invert_profile(prof);
    const double lo = std::log(r_lo), hi = std::log(r_hi);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < prof.size(); ++i) {
        const double s = prof.s[i] + 0.5 * prof.ds;
        if (s < lo || s > hi) continue;
        // f(r) = r^{-kappa} g(1/r)
        const double lnf2 = -kappa * s + numerics::lagrange6(g.lng, g.s0, g.ds, -s);
        worst = std::max(worst, std::abs(std::expm1(lnf2 - prof.lnf_at(s))));
    }
    return worst;
}

OriginSeriesReport origin_series_check(const Profile& prof, const ExpansionConstants& ec, double eta,
                                       const ExpansionOptions& opt) {
    require_origin_range(prof, opt);
    const ParamSet& p = prof.params;
    const double k = p.origin_rate();
    OriginSeriesReport rep;
    rep.eta = eta;
    const double c1 = ec.a3 * std::pow(eta, p.m) / ec.a2;
    const double c2 = ec.a3 * (p.m * ec.a3 - ec.a1) * std::pow(eta, 2.0 * p.m - 1.0) / (2.0 * ec.a2 * ec.a2);
    for (int q = 0; q <= 8; ++q) {
        const double rho = 1e-3 * std::pow(10.0, -q / 8.0);
        const double w = std::exp(numerics::lagrange6(prof.lw, prof.s0, prof.ds, std::log(rho) / k));
        const double dev = std::abs(w - (eta + c1 * rho + c2 * rho * rho)) / (rho * rho);
        rep.rho.push_back(rho);
        rep.scaled_deviation.push_back(dev);
        rep.max_deviation = std::max(rep.max_deviation, dev * rho * rho);
    }
    rep.deviation_decreasing = true;
    for (std::size_t q = 1; q < rep.scaled_deviation.size(); ++q) {
        if (!(rep.scaled_deviation[q] < rep.scaled_deviation[q - 1])) rep.deviation_decreasing = false;
    }

    // r^{gamma+1} f_r = w~ (z - gamma) = A + B rho + O(rho^2).
    auto y = [&](std::size_t i) { return prof.wt(i) * (prof.z[i] - p.gamma); };
    std::vector<double> A, B;
    for (int j = 0; j < opt.levels; ++j) {
        const auto c = fit_window(prof, opt.rho_start * std::ldexp(1.0, -j), y);
        A.push_back(c[0]);
        B.push_back(c[1]);
    }
    rep.fr_leading = richardson(A, 3).back();
    rep.fr_sub = richardson(B, 2).back();
    rep.fr_leading_ref = -p.gamma * eta;
    rep.fr_sub_ref = -(2.0 * p.beta - p.m * p.rho1) * ec.a3 / ((1.0 - p.m) * ec.a2 * p.beta) * std::pow(eta, p.m);
    rep.fr_leading_rel_err = rel(rep.fr_leading, rep.fr_leading_ref);
    rep.fr_sub_rel_err = rel(rep.fr_sub, rep.fr_sub_ref);
    return rep;
}

}  // namespace fdx
