// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "fdx/asymptotics.hpp"
#include "fdx/params.hpp"
#include "fdx/pde.hpp"
#include "fdx/profile.hpp"
#include "fdx/weight.hpp"

using namespace fdx;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return b == 0.0 ? std::abs(a) : std::abs(a - b) / std::abs(b); }

const ParamSet& P() {
    static const ParamSet p = make_params(3, 0.2, 4.0);
    return p;
}

std::shared_ptr<const Profile> unit_profile() {
    static const auto prof = std::make_shared<const Profile>(solve_for_eta(P(), 1.0));
    return prof;
}

const Profile& base_profile() {
    static const Profile prof = build_profile(P());
    return prof;
}

const WeightFunction& weight() {
    static const WeightFunction w = build_weight({0.5, 3});
    return w;
}

// Largest relative Aronson-Benilan excess over every evolved field.
double g_ab_excess = -1e300;
int g_ab_fields = 0;
void note_ab(double excess) {
    g_ab_excess = std::max(g_ab_excess, excess);
    ++g_ab_fields;
}

Outcome constants() {
    const auto& p = P();
    const auto fp = derive_fp_constants(p, 1.0);
    const auto ec = derive_expansion_constants(p);
    const std::pair<double, double> cmp[] = {
        {p.alpha, -10.0 / 3.0}, {p.beta, -5.0 / 6.0}, {fp.C1, 1.0},      {fp.C2, 2.0},
        {fp.C3, 31.0 / 60.0},   {ec.a1, 0.5},         {ec.a2, -25.0 / 36.0}, {ec.a3, 5.0 / 9.0}};
    double worst = 0.0;
    for (auto [got, want] : cmp) worst = std::max(worst, rel(got, want));
    return {worst <= 1e-14, fmt("max relative error %.3g over alpha, beta, C1-C3, a1-a3", worst)};
}

Outcome picard() {
    const auto& p = P();
    const auto tail = picard_solve(p, derive_fp_constants(p, 1.0));
    const double ratio = tail.ratios.empty() ? 1.0 : *std::max_element(tail.ratios.begin(), tail.ratios.end());
    const double quad = tail_integral_residual(tail, 12);
    const bool ok = !tail.ratios.empty() && ratio <= 0.25 && tail.fp_residual <= 1e-10 && quad <= 1e-10;
    return {ok, fmt("max update ratio %.4f over %d iterations, fixed-point residual %.3g, quadrature residual %.3g",
                    ratio, tail.iterations, tail.fp_residual, quad)};
}

Outcome bounds() {
    const auto& prof = base_profile();
    // rf_r/f = -(n-2)/m + h = -gamma + z, so the strict bounds are h > 0 and z < 0.
    long violations = 0;
    double drift = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        if (!(prof.h[i] > 0.0) || !(prof.z[i] < 0.0)) ++violations;
        drift = std::max(drift, std::abs(prof.h[i] - prof.z[i] - prof.fp.C1));
    }
    return {violations == 0 && drift <= 1e-11,
            fmt("%ld violations over %zu nodes on s in [%.2f, %.2f]; |h - z - C1| <= %.2g", violations, prof.size(),
                prof.s_min(), prof.s_max(), drift)};
}

Outcome endpoints() {
    const auto& prof = base_profile();
    const auto& R = prof.richardson;
    double spread = 1.0;
    if (R.size() >= 3) {
        spread = 0.0;
        for (std::size_t j = R.size() - 3; j + 1 < R.size(); ++j) spread = std::max(spread, rel(R[j + 1], R.back()));
    }
    const std::size_t N = prof.size() - 1;
    const double far = std::exp(prof.lnf(N) + P().critical_exponent() * prof.s[N]);
    const double gap = std::abs(far - prof.fp.etaInf);
    const double bound = std::exp(-prof.fp.C2 * (prof.s_max() - prof.fp.b1)) + 1e-8;
    return {spread <= 1e-4 && gap <= bound,
            fmt("eta %.12f, last Richardson levels agree to %.2g; far-field gap %.3g <= %.3g", prof.eta_origin, spread,
                gap, bound)};
}

Outcome expansion() {
    const auto rep = expansion_check(*unit_profile(), derive_expansion_constants(P()));
    return {rep.rel_err1 <= 0.01 && rep.rel_err2 <= 0.02,
            fmt("wbar_rho(0) = %.6f vs %.6f (%.2g), wbar_rhorho(0) = %.6f vs %.6f (%.2g)", rep.d1, rep.d1_ref,
                rep.rel_err1, rep.d2, rep.d2_ref, rep.rel_err2)};
}

Outcome residuals() {
    const auto ec = derive_expansion_constants(P());
    const double f = f_equation_residual_max(base_profile(), 1e-3, 1e3);
    const double wb = wbar_ode_residual(*unit_profile(), ec);
    const double g = inversion_residual(base_profile()).residual;
    const double dbl = double_inversion_error(base_profile());
    return {f <= 1e-5 && wb <= 1e-5 && g <= 1e-5 && dbl <= 1e-8,
            fmt("f %.3g, wbar %.3g, g %.3g, double inversion %.3g", f, wb, g, dbl)};
}

Outcome weight_checks() {
    const BumpSpec spec{0.5, 3};
    const auto w1 = build_weight(spec, 1e-10);
    const auto w2 = build_weight(spec, 5e-11);
    const double a4_shift = rel(w1.a4(), w2.a4());

    const auto& w = weight();
    const double join = std::abs(w.table_phi().back() - w.a4() * w.k0());
    const double join_d = std::abs(w.table_dphi().back() - w.eval(2.0 * (1.0 + 1e-15)).dphi);

    const int n = spec.n;
    const auto rr = w.table_r();
    const auto ph = w.table_phi();
    const double dx = std::log(rr[1] / rr[0]);
    double worst = -1e300;
    for (std::size_t i = 1; i + 1 < rr.size(); ++i) {
        const double rp = std::sqrt(rr[i] * rr[i + 1]), rm = std::sqrt(rr[i] * rr[i - 1]);
        worst = std::max(worst, (std::pow(rp, n - 2.0) * (ph[i + 1] - ph[i]) -
                                 std::pow(rm, n - 2.0) * (ph[i] - ph[i - 1])) /
                                    (dx * dx * std::pow(rr[i], n)));
    }
    const double h = 1e-3;
    for (int k = 0; k < 4000; ++k) {
        const double x = std::log(1e-3) + k * 3.5e-3;
        auto phi = [&](double xx) { return w.eval(std::exp(xx)).phi; };
        worst = std::max(worst, (std::exp((n - 2.0) * (x + h / 2)) * (phi(x + h) - phi(x)) -
                                 std::exp((n - 2.0) * (x - h / 2)) * (phi(x) - phi(x - h))) /
                                    (h * h * std::exp(n * x)));
    }
    return {a4_shift <= 1e-8 && join <= 10.0 * w.quad_tol() && join_d <= 10.0 * w.quad_tol() && worst <= 1e-8,
            fmt("a4 %.12f shifts %.2g under tolerance halving; table/closed form gap %.2g (phi), %.2g (phi'); max "
                "discrete Laplacian %.3g",
                w.a4(), a4_shift, join, join_d, worst)};
}

Outcome pde_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    const LogGrid g{1e-3, 1e3, 513};
    const Barenblatt B{3, 0.2, 1.0, 2.0};
    const auto ob = spatial_order_study([&](const LogGrid& gg) { return B.field(0.5, gg); },
                                        [&](double r, double t) { return B(r, t); }, 1.0, g);
    const SelfSimilar V(unit_profile(), 1.0);
    const auto ov = spatial_order_study([&](const LogGrid& gg) { return make_self_similar_field(V, 1.0, gg); },
                                        [&](double r, double t) { return V.V(r, t); }, 2.0, g);
    note_ab(ob.ab_max_excess);
    note_ab(ov.ab_max_excess);

    RadialField c;
    c.r = g.radii();
    c.u.assign(c.r.size(), 0.7);
    c.t = 1.0;
    c.bc = {[](double) { return 0.7; }, [](double) { return 0.7; }};
    EvolveStats cs;
    const auto ce = evolve(c, EvolveConfig{}, 2.0, &cs);
    note_ab(cs.ab_max_excess);
    double cdev = 0.0;
    for (double v : ce.u) cdev = std::max(cdev, std::abs(v - 0.7));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool ok = cdev == 0.0 && secs <= 120.0;
    for (double q : ob.orders) ok = ok && q >= 1.7 && q <= 2.3;
    for (double q : ov.orders) ok = ok && q >= 1.7 && q <= 2.3;
    return {ok, fmt("Barenblatt orders %.3f, %.3f; V_lambda orders %.3f, %.3f (nodes 129/257/513); constant state "
                    "deviation %.3g; %.1f s",
                    ob.orders[0], ob.orders[1], ov.orders[0], ov.orders[1], cdev, secs)};
}

Outcome contraction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& p = P();
    const Sandwich s{SelfSimilar(unit_profile(), lambda_for_eta(p, 1.0, 0.8)),
                     SelfSimilar(unit_profile(), lambda_for_eta(p, 1.0, 1.4))};
    const LogGrid g{1e-3, 1e3, 513};
    std::vector<double> times;
    for (int k = 1; k <= 12; ++k) times.push_back(std::exp(0.15 * k));
    EvolveConfig cfg;
    cfg.dt_max = 1.0;
    cfg.dt_max_rel = 0.01;
    std::mt19937_64 rng(20261018);
    bool ok = true;
    double worst_abs = -1e300, worst_pos = -1e300, sandwich = 0.0;
    for (int pair = 0; pair < 5; ++pair) {
        const auto u = random_sandwiched_field(s, 1.0, g, RandomDataSpec{}, rng);
        const auto v = random_sandwiched_field(s, 1.0, g, RandomDataSpec{}, rng);
        const auto res = contraction_experiment(u, v, weight(), times, cfg, s);
        note_ab(res.stats_u.ab_max_excess);
        note_ab(res.stats_v.ab_max_excess);
        note_ab(res.stats_barriers.ab_max_excess);
        sandwich = std::max(sandwich, res.max_sandwich_violation);
        for (std::size_t k = 1; k < res.t.size(); ++k) {
            const double da = (res.dist_abs[k] - res.dist_abs[k - 1]) / (1.0 + res.dist_abs[0]);
            const double dp = (res.dist_pos[k] - res.dist_pos[k - 1]) / (1.0 + res.dist_pos[0]);
            worst_abs = std::max(worst_abs, da);
            worst_pos = std::max(worst_pos, dp);
            ok = ok && da <= 1e-6 && dp <= 1e-6;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {ok, fmt("5 pairs x %zu times; largest increment / (1 + initial): %.3g (|u-v|), %.3g ((u-v)+); sandwich "
                    "excursion %.2g; %.1f s",
                    times.size(), worst_abs, worst_pos, sandwich, secs)};
}

Outcome convergence() {
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceSpec cs;
    cs.grid = {1e-3, 1e3, 513};
    for (int k = 0; k <= 30; ++k) cs.tau.push_back(0.1 * k);
    for (int j = 0; j <= 800; ++j) cs.y.push_back(0.02 * std::pow(500.0 / 0.02, j / 800.0));
    EvolveConfig cfg;
    cfg.dt_max = 10.0;
    cfg.dt_max_rel = 2e-3;

    const auto exact = convergence_experiment(unit_profile(), cs, weight(), cfg);
    note_ab(exact.stats.ab_max_excess);
    note_ab(exact.stats_barriers.ab_max_excess);
    const double drift = *std::max_element(exact.rel_L1w.begin(), exact.rel_L1w.end());

    cs.amplitude = 0.3;
    const auto pert = convergence_experiment(unit_profile(), cs, weight(), cfg);
    note_ab(pert.stats.ab_max_excess);
    note_ab(pert.stats_barriers.ab_max_excess);
    bool monotone = true;
    for (std::size_t k = 1; k < pert.tau.size(); ++k) {
        if (pert.tau[k - 1] >= 0.5 - 1e-12) monotone = monotone && pert.dist_L1w[k] < pert.dist_L1w[k - 1];
    }
    const double ratio = pert.dist_L1w.back() / pert.dist_L1w.front();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {drift <= 5e-3 && monotone && ratio <= 0.1 && secs <= 600.0,
            fmt("self-similar drift %.3g; perturbed distance %.4g -> %.4g (ratio %.4f), monotone after tau 0.5: %s; "
                "%.1f s",
                drift, pert.dist_L1w.front(), pert.dist_L1w.back(), ratio, monotone ? "yes" : "no", secs)};
}

Outcome aronson_benilan() {
    return {g_ab_fields > 0 && g_ab_excess <= 1e-6,
            fmt("max relative excess %.4g over %d evolved fields", g_ab_excess, g_ab_fields)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"constants", constants},
        {"Picard contraction", picard},
        {"global bounds", bounds},
        {"profile endpoints", endpoints},
        {"origin expansion", expansion},
        {"consistency residuals", residuals},
        {"weight", weight_checks},
        {"PDE exactness", pde_exactness},
        {"weighted contraction", contraction},
        {"convergence", convergence},
        {"Aronson-Benilan", aronson_benilan},
    };
    int failed = 0, idx = 0;
    for (const auto& [name, fn] : criteria) {
        ++idx;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", idx - failed, idx);
    return failed == 0 ? 0 : 1;
}
