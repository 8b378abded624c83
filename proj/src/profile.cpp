#include "fdx/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "fdx/errors.hpp"
#include "fdx/numerics.hpp"

namespace fdx {

namespace {

constexpr int kGauss = 4;

// Relative round-off allowance when testing D_{b1} membership.
constexpr double kDomainSlack = 1e-12;

struct PanelRule {
    // Outer Gauss nodes as fractions of a panel and, for each, inner nodes on
    // [0, theta_g] (fractions of the panel as well).
    std::array<double, kGauss> theta{}, weight{};
    std::array<std::array<double, kGauss>, kGauss> inner_theta{};
    // Lagrange weights for the centered stencil (nodes i-2 .. i+3).
    std::array<std::array<double, 6>, kGauss> w_outer{};
    std::array<std::array<std::array<double, 6>, kGauss>, kGauss> w_inner{};
};

const PanelRule& panel_rule() {
    static const PanelRule rule = [] {
        PanelRule r;
        const auto& g = numerics::gauss_legendre(kGauss);
        for (int a = 0; a < kGauss; ++a) {
            r.theta[a] = 0.5 * (1.0 + g.x[a]);
            r.weight[a] = 0.5 * g.w[a];
            numerics::lagrange6_weights(2.0 + r.theta[a], 0, r.w_outer[a].data());
            for (int b = 0; b < kGauss; ++b) {
                r.inner_theta[a][b] = r.theta[a] * 0.5 * (1.0 + g.x[b]);
                numerics::lagrange6_weights(2.0 + r.inner_theta[a][b], 0, r.w_inner[a][b].data());
            }
        }
        return r;
    }();
    return rule;
}

struct MapOutput {
    std::vector<double> wt, h;
    std::vector<double> w_scaled;  // wt e^{C1 s}
};

// One application of (Phi1, Phi2) on the uniform tail grid.
MapOutput apply_map(const ParamSet& p, const FPConstants& fp, std::span<const double> s,
                    double ds, std::span<const double> wt, std::span<const double> h) {
    const std::size_t N = s.size();
    const auto& R = panel_rule();
    const double k = p.origin_rate();
    const double bp = p.betaP;
    const double m = p.m;
    const double nm2 = p.n - 2.0;

    std::vector<double> lw(N), lh(N);
    for (std::size_t i = 0; i < N; ++i) {
        lw[i] = std::log(wt[i]);
        lh[i] = std::log(h[i]);
    }
    auto P_of = [&](double x, double log_w) { return bp * std::exp(-k * x + (1.0 - m) * log_w); };

    std::vector<double> Hp(N, 0.0), Pp(N, 0.0), Ip(N, 0.0);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        const long first = std::clamp<long>(static_cast<long>(i) - 2, 0, static_cast<long>(N) - 6);
        const bool centered = first == static_cast<long>(i) - 2;
        auto interp = [&](const std::vector<double>& y, double theta, const double* pre) {
            double w[6];
            if (!centered) {
                numerics::lagrange6_weights(static_cast<double>(i) + theta, static_cast<int>(first), w);
                pre = w;
            }
            double v = 0.0;
            for (int j = 0; j < 6; ++j) v += pre[j] * y[first + j];
            return v;
        };
        double hsum = 0.0, psum = 0.0, isum = 0.0;
        for (int a = 0; a < kGauss; ++a) {
            const double th = R.theta[a];
            const double x = s[i] + th * ds;
            const double P = P_of(x, interp(lw, th, R.w_outer[a].data()));
            const double hv = std::exp(interp(lh, th, R.w_outer[a].data()));
            double inner = 0.0;
            for (int b = 0; b < kGauss; ++b) {
                const double tb = R.inner_theta[a][b];
                inner += R.weight[b] * P_of(s[i] + tb * ds, interp(lw, tb, R.w_inner[a][b].data()));
            }
            inner *= th * ds;
            hsum += R.weight[a] * hv;
            psum += R.weight[a] * P;
            isum += R.weight[a] * std::exp(-inner - nm2 * th * ds) * (fp.C1 * P + m * hv * hv);
        }
        Hp[i] = hsum * ds;
        Pp[i] = psum * ds;
        Ip[i] = isum * ds;
    }

    MapOutput out;
    out.wt.resize(N);
    out.h.resize(N);
    out.w_scaled.resize(N);
    // Beyond s_max, h and P decay like e^{-C2 s}.
    const double PN = P_of(s[N - 1], lw[N - 1]);
    double H = h[N - 1] / fp.C2;
    double phi2 = fp.C1 * PN / (nm2 + fp.C2) + m * h[N - 1] * h[N - 1] / (nm2 + 2.0 * fp.C2);
    for (std::size_t j = N; j-- > 0;) {
        if (j + 1 < N) {
            H += Hp[j];
            phi2 = std::exp(-Pp[j] - nm2 * ds) * phi2 + Ip[j];
        }
        out.w_scaled[j] = fp.etaInf * std::exp(-H);
        out.wt[j] = out.w_scaled[j] * std::exp(-fp.C1 * s[j]);
        out.h[j] = phi2;
    }
    return out;
}

double weighted_diff(const FPConstants& fp, std::span<const double> s,
                     std::span<const double> wa_scaled, std::span<const double> wb_scaled,
                     std::span<const double> ha, std::span<const double> hb) {
    double norm = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        norm = std::max(norm, std::abs(wa_scaled[i] - wb_scaled[i]));
        norm = std::max(norm, std::abs(ha[i] - hb[i]) * std::exp(0.5 * fp.C2 * s[i]));
    }
    return norm;
}

}  // namespace

double domain_violation(const ParamSet&, const FPConstants& fp, std::span<const double> s,
                        std::span<const double> wt, std::span<const double> h) {
    double worst = 0.0;
    double dist = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double ws = wt[i] * std::exp(fp.C1 * s[i]);
        const double hs = h[i] * std::exp(fp.C2 * s[i]);
        worst = std::max(worst, (ws - fp.etaInf) / fp.etaInf);
        worst = std::max(worst, -hs / fp.C3);
        worst = std::max(worst, (hs - fp.C3) / fp.C3);
        dist = std::max(dist, std::abs(ws - fp.etaInf));
        dist = std::max(dist, std::abs(h[i]) * std::exp(0.5 * fp.C2 * s[i]));
    }
    worst = std::max(worst, (dist - fp.eps1) / fp.eps1);
    return std::max(worst, 0.0);
}

TailSolution picard_solve(const ParamSet& p, const FPConstants& fp, const PicardOptions& opt) {
    if (!(fp.b1 > fp.b0)) throw ConfigError("b1 must exceed b0");
    if (!(opt.tol > 0.0) || opt.max_iter < 1) throw ConfigError("Picard tolerance and iteration cap must be positive");

    TailSolution t;
    t.params = p;
    t.fp = fp;
    t.stride = std::max(1, static_cast<int>(std::ceil(fp.C2)));
    long k0 = static_cast<long>(std::ceil(fp.b1 / kProfileDs));
    if (k0 * kProfileDs < fp.b1) ++k0;
    const double min_span = 40.0 / fp.C2;
    double s_hi = opt.s_max > 0.0 ? opt.s_max : fp.b1 + std::max(40.0, -std::log(opt.tol) / fp.C2);
    if (s_hi < fp.b1 + min_span) {
        throw ConfigError("s_max must be at least b1 + 40/C2, got " + std::to_string(s_hi));
    }
    const long k1 = static_cast<long>(std::ceil(s_hi / kProfileDs));
    t.first_index = k0 * t.stride;
    const std::size_t N = static_cast<std::size_t>((k1 - k0) * t.stride + 1);
    const double ds = t.ds();
    t.s.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        t.s[i] = static_cast<double>(t.first_index + static_cast<long>(i)) * kProfileDs / t.stride;
    }

    std::vector<double> wt(N), h(N), ws(N);
    const double h0 = std::min(fp.C3, fp.eps1);
    for (std::size_t i = 0; i < N; ++i) {
        ws[i] = fp.etaInf;
        wt[i] = fp.etaInf * std::exp(-fp.C1 * t.s[i]);
        h[i] = h0 * std::exp(-fp.C2 * t.s[i]);
    }
    if (domain_violation(p, fp, t.s, wt, h) > kDomainSlack) {
        throw InternalError("Picard seed is outside D_b1");
    }

    const double noise_floor = 1e-12 * std::max(1.0, fp.etaInf);
    double prev_norm = -1.0;
    int over = 0;
    bool converged = false;
    for (int it = 0; it < opt.max_iter; ++it) {
        MapOutput next = apply_map(p, fp, t.s, ds, wt, h);
        const double norm = weighted_diff(fp, t.s, next.w_scaled, ws, next.h, h);
        t.update_norms.push_back(norm);
        if (prev_norm > noise_floor) {
            const double ratio = norm / prev_norm;
            t.ratios.push_back(ratio);
            over = ratio > 0.99 ? over + 1 : 0;
            if (over >= 3) {
                throw NonContractionError("Picard update ratio above 0.99 for three iterations");
            }
        }
        const double viol = domain_violation(p, fp, t.s, next.wt, next.h);
        if (viol > kDomainSlack) {
            throw BoundViolationError("Picard iterate " + std::to_string(it + 1) +
                                      " left D_b1 by " + std::to_string(viol));
        }
        wt = std::move(next.wt);
        h = std::move(next.h);
        ws = std::move(next.w_scaled);
        prev_norm = norm;
        t.iterations = it + 1;
        if (norm <= opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ToleranceError("Picard iteration did not reach tolerance in " +
                             std::to_string(opt.max_iter) + " iterations");
    }
    const MapOutput check = apply_map(p, fp, t.s, ds, wt, h);
    t.fp_residual = weighted_diff(fp, t.s, check.w_scaled, ws, check.h, h);

    t.wt = std::move(wt);
    t.h = std::move(h);
    t.log_wt.resize(N);
    t.log_h.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        t.log_wt[i] = std::log(t.wt[i]);
        t.log_h[i] = std::log(t.h[i]);
    }
    return t;
}

double TailSolution::h_at(double x) const {
    if (x >= s.back()) return h.back() * std::exp(-fp.C2 * (x - s.back()));
    return std::exp(numerics::lagrange6(log_h, s.front(), ds(), x));
}

double TailSolution::wt_at(double x) const {
    if (x >= s.back()) return wt.back() * std::exp(-fp.C1 * (x - s.back()));
    return std::exp(numerics::lagrange6(log_wt, s.front(), ds(), x));
}

double tail_integral_residual(const TailSolution& tail, int samples, double quad_tol) {
    const ParamSet& p = tail.params;
    const FPConstants& fp = tail.fp;
    const double k = p.origin_rate();
    const double nm2 = p.n - 2.0;
    const double sN = tail.s_max();
    auto P = [&](double x) { return p.betaP * std::exp(-k * x) * std::pow(tail.wt_at(x), 1.0 - p.m); };
    const double PN = P(sN), hN = tail.h.back();

    const std::size_t N = tail.s.size();
    double worst = 0.0;
    for (int q = 0; q < samples; ++q) {
        const std::size_t i = static_cast<std::size_t>(
            std::llround(static_cast<double>(q) * static_cast<double>(N - 2) / std::max(1, samples - 1)));
        const double s = tail.s[i];
        const double H = numerics::quad_adaptive([&](double x) { return tail.h_at(x); }, s, sN, quad_tol) +
                         hN / fp.C2;
        const double d1 = std::abs(fp.etaInf * std::exp(-H) - tail.wt[i] * std::exp(fp.C1 * s));

        // Integrands carry e^{C2 s} so that the quadrature target is relative
        // to the size of h(s).
        const double scale = std::exp(fp.C2 * s);
        auto inner = [&](double rho) {
            return numerics::quad_adaptive(P, s, rho, quad_tol);
        };
        const double body = numerics::quad_adaptive(
            [&](double rho) {
                const double hv = tail.h_at(rho);
                return scale * std::exp(-inner(rho) - nm2 * (rho - s)) * (fp.C1 * P(rho) + p.m * hv * hv);
            },
            s, sN, quad_tol);
        const double tail_part = scale * std::exp(-inner(sN) - nm2 * (sN - s)) *
                                 (fp.C1 * PN / (nm2 + fp.C2) + p.m * hN * hN / (nm2 + 2.0 * fp.C2));
        const double phi2 = (body + tail_part) / scale;
        const double d2 = std::abs(phi2 - tail.h[i]) * std::exp(0.5 * fp.C2 * s);
        worst = std::max({worst, d1, d2});
    }
    return worst;
}

Profile continue_left(const TailSolution& tail, const ContinueOptions& opt) {
    const ParamSet& p = tail.params;
    const FPConstants& fp = tail.fp;
    const double k = p.origin_rate();
    const double s_min = opt.s_min != 0.0 ? opt.s_min : -40.0 / k;
    const long kb = tail.first_index / tail.stride;
    const long kmin = static_cast<long>(std::floor(s_min / kProfileDs));
    if (kmin >= kb) throw ConfigError("s_min must lie below b1");
    const long ktop = (tail.first_index + static_cast<long>(tail.s.size()) - 1) / tail.stride;

    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(kb - kmin + 1));
    for (long j = kb; j >= kmin; --j) times.push_back(j * kProfileDs);

    const double nm2 = p.n - 2.0, m = p.m, bp = p.betaP, C1 = fp.C1, g = p.gamma;
    const double zc = m * g * C1, zl = 2.0 * m * g - nm2;
    auto Pf = [=](double s, double lw) { return bp * std::exp(-k * s + (1.0 - m) * lw); };
    auto rhs = [=](double s, const numerics::State& y, numerics::State& d) {
        const double P = Pf(s, y[2]);
        d[0] = nm2 * y[0] - m * y[0] * y[0] + P * y[1];
        d[1] = zc + zl * y[1] - m * y[1] * y[1] + P * y[1];
        d[2] = y[1];
    };
    auto jac = [=](double s, const numerics::State& y, std::vector<double>& J, numerics::State& ft) {
        const double P = Pf(s, y[2]);
        J[0] = nm2 - 2.0 * m * y[0];
        J[1] = P;
        J[2] = (1.0 - m) * P * y[1];
        J[3] = 0.0;
        J[4] = zl - 2.0 * m * y[1] + P;
        J[5] = (1.0 - m) * P * y[1];
        J[6] = 0.0;
        J[7] = 1.0;
        J[8] = 0.0;
        ft[0] = -k * P * y[1];
        ft[1] = -k * P * y[1];
        ft[2] = 0.0;
    };
    const double h0 = tail.h.front();
    numerics::Tolerances tol{opt.abs_tol, opt.rel_tol, 20'000'000};
    const auto tr = numerics::integrate_stiff_ode(rhs, jac, {h0, h0 - C1, tail.log_wt.front()}, times, tol);

    Profile prof;
    prof.params = p;
    prof.fp = fp;
    prof.ds = kProfileDs;
    prof.s0 = kmin * kProfileDs;
    prof.fp_residual = tail.fp_residual;
    prof.iterations = tail.iterations;
    const std::size_t M = static_cast<std::size_t>(ktop - kmin + 1);
    prof.s.resize(M);
    prof.h.resize(M);
    prof.z.resize(M);
    prof.lw.resize(M);
    for (long j = kmin; j <= ktop; ++j) {
        const auto idx = static_cast<std::size_t>(j - kmin);
        prof.s[idx] = j * kProfileDs;
        if (j < kb) {
            const auto& y = tr.y[static_cast<std::size_t>(kb - j)];
            prof.h[idx] = y[0];
            prof.z[idx] = y[1];
            prof.lw[idx] = y[2];
        } else {
            const auto ti = static_cast<std::size_t>((j - kb) * tail.stride);
            prof.h[idx] = tail.h[ti];
            prof.z[idx] = tail.h[ti] - C1;
            prof.lw[idx] = tail.log_wt[ti];
        }
    }
    const double slack = 10.0 * opt.rel_tol * C1;
    for (std::size_t i = 0; i < M; ++i) {
        if (prof.h[i] < -slack || prof.z[i] > slack) {
            throw BoundViolationError("h left (0, C1) at s=" + std::to_string(prof.s[i]) +
                                      ": h=" + std::to_string(prof.h[i]));
        }
    }
    return prof;
}

double Profile::r_min() const { return std::exp(s.front()); }
double Profile::r_max() const { return std::exp(s.back()); }
double Profile::wt(std::size_t i) const { return std::exp(lw[i]); }
double Profile::f(std::size_t i) const { return std::exp(lnf(i)); }

double Profile::lnf_at(double x) const {
    const double eps = 1e-9 * ds;
    if (x < s.front() - eps || x > s.back() + eps) {
        throw RangeError("log r = " + std::to_string(x) + " is outside the profile table [" +
                         std::to_string(s.front()) + ", " + std::to_string(s.back()) + "]");
    }
    return numerics::lagrange6(lw, s0, ds, x) - params.gamma * x;
}

double Profile::z_at(double x) const {
    const double eps = 1e-9 * ds;
    if (x < s.front() - eps || x > s.back() + eps) {
        throw RangeError("log r = " + std::to_string(x) + " is outside the profile table");
    }
    return numerics::lagrange6(z, s0, ds, x);
}

double Profile::f_at_r(double r) const {
    if (!(r > 0.0)) throw RangeError("profile radius must be positive");
    return std::exp(lnf_at(std::log(r)));
}

void recover_profile(Profile& prof, const RecoverOptions& opt) {
    const ParamSet& p = prof.params;
    const double k = p.origin_rate();
    if (opt.levels < 3) throw ConfigError("Richardson extrapolation needs at least three levels");
    std::vector<double> W(opt.levels);
    for (int j = 0; j < opt.levels; ++j) {
        const double sj = std::log(opt.rho_start * std::ldexp(1.0, -j)) / k;
        if (sj < prof.s_min() + 3.0 * prof.ds) {
            throw ResolutionError("profile does not reach r^{rho1/beta'} = " +
                                  std::to_string(opt.rho_start * std::ldexp(1.0, -j)));
        }
        W[j] = std::exp(numerics::lagrange6(prof.lw, prof.s0, prof.ds, sj));
    }
    // Neville table in the variable rho with ratio 2 between levels.
    std::vector<std::vector<double>> T(opt.levels);
    prof.richardson.assign(opt.levels, 0.0);
    for (int j = 0; j < opt.levels; ++j) {
        T[j].resize(j + 1);
        T[j][0] = W[j];
        for (int q = 1; q <= j; ++q) {
            const double f = std::ldexp(1.0, q);
            T[j][q] = (f * T[j][q - 1] - T[j - 1][q - 1]) / (f - 1.0);
        }
        prof.richardson[j] = T[j][j];
    }
    const double eta = prof.richardson.back();
    const double spread = std::abs(eta - prof.richardson[opt.levels - 2]) / std::abs(eta);
    if (spread > 10.0 * opt.tol) {
        throw ExtrapolationError("Richardson levels for lim r^gamma f disagree by " + std::to_string(spread));
    }
    prof.eta_origin = eta;
    const std::size_t N = prof.size() - 1;
    prof.eta_inf = std::exp(prof.lw[N] + prof.fp.C1 * prof.s[N] + prof.h[N] / prof.fp.C2);
}

Profile rescale_profile(const Profile& prof, double lambda) {
    if (!(lambda > 0.0)) throw RangeError("scaling factor must be positive");
    const ParamSet& p = prof.params;
    const double L = std::log(lambda);
    const double e_origin = p.pde_exponent() - p.gamma;
    const double e_inf = p.pde_exponent() - p.critical_exponent();
    Profile out = prof;
    out.s0 -= L;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.s[i] -= L;
        out.lw[i] += e_origin * L;
    }
    for (double& v : out.richardson) v *= std::exp(e_origin * L);
    out.eta_origin *= std::exp(e_origin * L);
    out.eta_inf *= std::exp(e_inf * L);
    out.log_lambda += L;
    return out;
}

Profile build_profile(const ParamSet& p, const ProfileOptions& opt) {
    const FPConstants fp = derive_fp_constants(p, opt.eta_inf, opt.b1_margin);
    const TailSolution tail = picard_solve(p, fp, opt.picard);
    Profile prof = continue_left(tail, opt.cont);
    recover_profile(prof, opt.recover);
    return prof;
}

double lambda_for_eta(const ParamSet& p, double base_eta, double target_eta) {
    if (!(target_eta > 0.0) || !(base_eta > 0.0)) throw RangeError("origin coefficients must be positive");
    return std::pow(target_eta / base_eta, 1.0 / (p.pde_exponent() - p.gamma));
}

Profile solve_for_eta(const ParamSet& p, double target_eta, const ProfileOptions& opt) {
    if (!(target_eta > 0.0)) throw RangeError("target eta must be positive");
    ProfileOptions base_opt = opt;
    base_opt.eta_inf = 1.0;
    const Profile base = build_profile(p, base_opt);
    return rescale_profile(base, lambda_for_eta(p, base.eta_origin, target_eta));
}

double f_equation_residual(const Profile& prof, std::size_t i) {
    const ParamSet& p = prof.params;
    const auto d = numerics::central_diff8(prof.lw, i, prof.ds);
    const double L1 = d.d1 - p.gamma;  // (log f)_s
    const double L2 = d.d2;
    const double lnf = prof.lnf(i);
    // Both sides divided by f: e^{-2s} f^{m-1}(L'' + m L'^2 + (n-2) L') + alpha + beta L'.
    const double c = std::exp((p.m - 1.0) * lnf - 2.0 * prof.s[i]);
    const double t1 = c * L2, t2 = c * p.m * L1 * L1, t3 = c * (p.n - 2.0) * L1;
    const double t4 = p.alpha, t5 = p.beta * L1;
    const double big = std::max({std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4), std::abs(t5)});
    return std::abs(t1 + t2 + t3 + t4 + t5) / big;
}

double f_equation_residual_max(const Profile& prof, double r_lo, double r_hi) {
    const double lo = std::log(r_lo), hi = std::log(r_hi);
    double worst = 0.0;
    bool any = false;
    for (std::size_t i = 4; i + 4 < prof.size(); ++i) {
        if (prof.s[i] < lo - 1e-12 || prof.s[i] > hi + 1e-12) continue;
        worst = std::max(worst, f_equation_residual(prof, i));
        any = true;
    }
    if (!any) throw ResolutionError("no profile nodes in the requested radial range");
    return worst;
}

}  // namespace fdx
