#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fdx/errors.hpp"
#include "fdx/params.hpp"
#include "fdx/profile.hpp"

using namespace fdx;

namespace {

const ParamSet& ref_params() {
    static const ParamSet p = make_params(3, 0.2, 4.0);
    return p;
}

const TailSolution& ref_tail() {
    static const TailSolution t = picard_solve(ref_params(), derive_fp_constants(ref_params(), 1.0));
    return t;
}

const Profile& ref_profile() {
    static const Profile prof = [] {
        Profile p = continue_left(ref_tail());
        recover_profile(p);
        return p;
    }();
    return prof;
}

}  // namespace

TEST_CASE("seed lies in D_b1 and the domain check catches violations") {
    const auto& p = ref_params();
    const auto fp = derive_fp_constants(p, 1.0);
    std::vector<double> s, wt, h;
    for (int i = 0; i <= 4000; ++i) {
        const double x = fp.b1 + i * 0.01;
        s.push_back(x);
        wt.push_back(fp.etaInf * std::exp(-fp.C1 * x));
        h.push_back(std::min(fp.C3, fp.eps1) * std::exp(-fp.C2 * x));
    }
    // wt e^{C1 s} reproduces eta_inf only to round-off.
    CHECK(domain_violation(p, fp, s, wt, h) <= 1e-15);

    auto bad_w = wt;
    bad_w[10] *= 1.01;  // above eta_inf e^{-C1 s}
    CHECK(domain_violation(p, fp, s, bad_w, h) > 1e-3);
    auto bad_h = h;
    bad_h[0] = -1e-3 * h[0];
    CHECK(domain_violation(p, fp, s, wt, bad_h) > 1e-4);
    bad_h = h;
    bad_h[5] = 1.1 * fp.C3 * std::exp(-fp.C2 * s[5]);
    CHECK(domain_violation(p, fp, s, wt, bad_h) > 1e-2);
}

TEST_CASE("Picard iteration contracts to the tail fixed point") {
    const auto& t = ref_tail();
    const auto& fp = t.fp;
    CHECK(t.iterations >= 2);
    REQUIRE(!t.ratios.empty());
    for (double r : t.ratios) CHECK(r <= 0.25);
    for (std::size_t i = 1; i < t.update_norms.size(); ++i) {
        CHECK(t.update_norms[i] <= (0.2 + 0.05) * t.update_norms[i - 1]);
    }
    CHECK(t.fp_residual <= 1e-10);
    CHECK(t.s.front() >= fp.b1);
    CHECK(t.s.back() >= fp.b1 + 40.0 / fp.C2);

    const double hb = t.h.front();
    CHECK(hb > 0.0);
    CHECK(hb <= fp.C3 * std::exp(-fp.C2 * fp.b1));
    for (std::size_t i = 0; i < t.s.size(); ++i) {
        CHECK(t.h[i] > 0.0);
        CHECK(t.h[i] <= fp.C3 * std::exp(-fp.C2 * t.s[i]) * (1.0 + 1e-12));
        const double ws = t.wt[i] * std::exp(fp.C1 * t.s[i]);
        CHECK(ws >= 0.5 * fp.etaInf);
        CHECK(ws <= fp.etaInf * (1.0 + 1e-12));
    }
}

TEST_CASE("fixed point verified with independent quadrature") {
    const auto& t = ref_tail();
    CHECK(tail_integral_residual(t, 12) <= 1e-10);

    // The check must see a perturbation of the solution.
    TailSolution bent = t;
    for (std::size_t i = 0; i < bent.s.size(); ++i) {
        bent.h[i] *= 1.0 + 1e-4 * std::exp(-(bent.s[i] - bent.s.front()));
        bent.log_h[i] = std::log(bent.h[i]);
    }
    CHECK(tail_integral_residual(bent, 12) > 1e-8);
}

TEST_CASE("Picard errors") {
    const auto& p = ref_params();
    const auto fp = derive_fp_constants(p, 1.0);
    PicardOptions opt;
    opt.s_max = fp.b1 + 5.0;
    CHECK_THROWS_AS(picard_solve(p, fp, opt), ConfigError);
    opt = {};
    opt.max_iter = 2;
    CHECK_THROWS_AS(picard_solve(p, fp, opt), ToleranceError);
    auto bad = fp;
    bad.b1 = 0.5 * bad.b0;
    CHECK_THROWS_AS(picard_solve(p, bad), ConfigError);
}

TEST_CASE("continued profile keeps 0 < h < C1 and the rf_r/f bounds") {
    const auto& prof = ref_profile();
    const auto& p = prof.params;
    const double C1 = prof.fp.C1;
    const double kappa = p.critical_exponent();
    const double k = p.origin_rate();
    CHECK(prof.s_min() <= -40.0 / k + prof.ds);
    int violations = 0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        // rf_r/f = -(n-2)/m + h = -gamma + z. Near either end one of the two
        // sums rounds onto its bound, so the strict inequalities are read off
        // h > 0 and z < 0, which are carried separately.
        if (!(prof.h[i] > 0.0) || !(prof.z[i] < 0.0)) ++violations;
        // h and z are integrated separately; they agree to the integrator tolerance.
        if (std::abs(prof.h[i] - prof.z[i] - C1) > 1e-11 * C1) ++violations;
        if (!(prof.rfr_over_f(i) <= -p.gamma) || !(prof.rfr_over_f(i) >= -kappa)) ++violations;
        if (!(prof.f(i) > 0.0)) ++violations;
        if (i > 0 && std::abs(prof.s[i] - prof.s[i - 1] - prof.ds) > 1e-9) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("h approaches C1 at the origin rate") {
    const auto& prof = ref_profile();
    const double k = prof.params.origin_rate();
    // z = h - C1 ~ c rho with rho = e^{k s}.
    for (std::size_t i : {std::size_t{100}, std::size_t{300}, std::size_t{600}}) {
        const double slope = (std::log(-prof.z[i + 1]) - std::log(-prof.z[i - 1])) / (2.0 * prof.ds);
        CHECK(slope == doctest::Approx(k).epsilon(1e-6));
    }
    const double c0 = -prof.z[100] / std::exp(k * prof.s[100]);
    const double c1 = -prof.z[600] / std::exp(k * prof.s[600]);
    CHECK(c0 == doctest::Approx(c1).epsilon(1e-6));
}

TEST_CASE("endpoint coefficients") {
    const auto& prof = ref_profile();
    const auto& R = prof.richardson;
    REQUIRE(R.size() >= 3);
    for (std::size_t j = R.size() - 3; j + 1 < R.size(); ++j) {
        CHECK(std::abs(R[j + 1] - R[j]) <= 1e-4 * std::abs(R.back()));
    }
    CHECK(prof.eta_origin > 0.0);

    // r^{(n-2)/m} f at s_max against eta_inf.
    const std::size_t N = prof.size() - 1;
    const double far = std::exp(prof.lnf(N) + prof.params.critical_exponent() * prof.s[N]);
    const double bound = std::exp(-prof.fp.C2 * (prof.s_max() - prof.fp.b1)) + 1e-8;
    CHECK(std::abs(far - prof.fp.etaInf) <= bound);
    CHECK(prof.eta_inf == doctest::Approx(1.0).epsilon(1e-12));

    // |r^gamma f - eta| <= K r^{rho1/beta'} near the origin, with K settling
    // once rho = r^{rho1/beta'} is small but the difference is above round-off.
    const double k = prof.params.origin_rate();
    double Kmin = 1e300, Kmax = 0.0;
    for (std::size_t i = 0; i < prof.size(); ++i) {
        const double rho = std::exp(k * prof.s[i]);
        if (rho < 1e-6 || rho > 1e-4) continue;
        const double K = std::abs(prof.wt(i) - prof.eta_origin) / rho;
        Kmin = std::min(Kmin, K);
        Kmax = std::max(Kmax, K);
    }
    CHECK(Kmin > 0.0);
    CHECK(Kmax <= 1.001 * Kmin);
}

TEST_CASE("f-equation residual") {
    const auto& prof = ref_profile();
    CHECK(f_equation_residual_max(prof, 1e-3, 1e3) <= 1e-6);
    CHECK_THROWS_AS(f_equation_residual_max(prof, 1e20, 1e21), ResolutionError);
}

TEST_CASE("tighter Picard tolerance leaves the profile unchanged") {
    const auto& p = ref_params();
    const auto fp = derive_fp_constants(p, 1.0);
    const double tol = 1e-12;
    PicardOptions opt;
    opt.tol = tol / 10.0;
    opt.s_max = ref_tail().s_max();
    const Profile fine = continue_left(picard_solve(p, fp, opt));
    const auto& base = ref_profile();
    REQUIRE(fine.size() == base.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        // f spans hundreds of decades over the grid; compare relatively.
        worst = std::max(worst, std::abs(std::expm1(fine.lnf(i) - base.lnf(i))));
    }
    CHECK(worst <= tol);
}

TEST_CASE("scaling family") {
    const auto& base = ref_profile();
    const auto& p = base.params;
    const Profile same = rescale_profile(base, 1.0);
    CHECK(same.s == base.s);
    CHECK(same.lw == base.lw);
    CHECK(same.eta_origin == base.eta_origin);

    const Profile big = rescale_profile(base, 2.0);
    const Profile small = rescale_profile(base, 0.5);
    for (double x = -20.0; x <= 20.0; x += 0.37) {
        CHECK(big.lnf_at(x) < small.lnf_at(x));
        // f_lambda(r) = lambda^{2/(1-m)} f(lambda r)
        CHECK(big.lnf_at(x) == doctest::Approx(p.pde_exponent() * std::log(2.0) + base.lnf_at(x + std::log(2.0)))
                                   .epsilon(1e-12));
    }
    const double e = p.pde_exponent() - p.gamma;
    CHECK(big.eta_origin / base.eta_origin == doctest::Approx(std::pow(2.0, e)).epsilon(1e-13));
    CHECK(big.eta_inf / base.eta_inf ==
          doctest::Approx(std::pow(2.0, p.pde_exponent() - p.critical_exponent())).epsilon(1e-13));

    // Re-extrapolating the rescaled table reproduces the scaled coefficient.
    Profile again = big;
    recover_profile(again);
    CHECK(again.eta_origin == doctest::Approx(big.eta_origin).epsilon(1e-8));
    CHECK_THROWS_AS(rescale_profile(base, 0.0), RangeError);
}

TEST_CASE("solving for a prescribed origin coefficient") {
    const auto& p = ref_params();
    const auto& base = ref_profile();
    CHECK(lambda_for_eta(p, base.eta_origin, base.eta_origin) == 1.0);
    const double l1 = lambda_for_eta(p, base.eta_origin, 1.0);
    const double l2 = lambda_for_eta(p, base.eta_origin, 2.0);
    CHECK(l2 / l1 == doctest::Approx(std::pow(2.0, 1.0 / (p.pde_exponent() - p.gamma))).epsilon(1e-14));
    CHECK(l2 < l1);

    const Profile prof = solve_for_eta(p, 1.0);
    Profile check = prof;
    recover_profile(check);
    CHECK(check.eta_origin == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(prof.log_lambda == doctest::Approx(std::log(l1)).epsilon(1e-12));
    CHECK_THROWS_AS(solve_for_eta(p, -1.0), RangeError);
}

TEST_CASE("a second parameter point") {
    const ParamSet p = make_params(4, 0.2, 6.0);
    ProfileOptions opt;
    opt.eta_inf = 2.0;
    const Profile prof = build_profile(p, opt);
    for (std::size_t i = 0; i < prof.size(); ++i) {
        CHECK(prof.h[i] > 0.0);
        CHECK(prof.z[i] < 0.0);
    }
    CHECK(prof.eta_inf == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(prof.iterations >= 2);
    CHECK(prof.fp_residual <= 1e-10);
    CHECK(f_equation_residual_max(prof, 1e-3, 1e3) <= 1e-6);
}
