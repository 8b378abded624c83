#include "fdx/weight.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdx/errors.hpp"
#include "fdx/numerics.hpp"

namespace fdx {

void BumpSpec::validate() const {
    if (n < 3) throw RangeError("weight dimension must satisfy n >= 3");
    if (!(mu > 0.0 && mu < n - 2.0)) throw RangeError("weight exponent must satisfy 0 < mu < n-2");
}

double smooth_ramp(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

double eta1(const BumpSpec& spec, double r) {
    if (r <= 1.0) return 0.0;
    const double tail = spec.mu * (spec.n - 2.0 - spec.mu) * std::pow(r, -spec.mu - 2.0);
    return r >= 2.0 ? tail : tail * smooth_ramp(r - 1.0);
}

double sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

namespace {

// Cumulative source integrals on the table panels. Gauss-Legendre with 12
// points per panel integrates the smooth bridge to round-off at 4096 panels.
constexpr int kPanelGauss = 12;

}  // namespace

WeightFunction build_weight(const BumpSpec& spec, double quad_tol) {
    spec.validate();
    if (!(quad_tol > 0.0)) throw ConfigError("weight quadrature tolerance must be positive");

    const int n = spec.n;
    const double mu = spec.mu;
    auto source = [&](double rho) { return std::pow(rho, n - 1.0) * eta1(spec, rho); };
    auto inner = [&](double s) { return numerics::quad_adaptive(source, 1.0, s, quad_tol * 0.1); };

    WeightFunction w;
    w.spec_ = spec;
    w.quad_tol_ = quad_tol;
    w.a5_ = numerics::quad_adaptive(source, 1.0, 2.0, quad_tol);
    const double j12 = numerics::quad_adaptive(
        [&](double s) { return std::pow(s, 1.0 - n) * inner(s); }, 1.0, 2.0, quad_tol);
    w.k0_ = (std::pow(2.0, 2.0 - n) * w.a5_ + (n - 2.0 - mu) * std::pow(2.0, -mu)) / (n - 2.0);
    w.a4_ = 1.0 / (j12 + w.k0_);
    w.tail_coeff_ = (w.a5_ - mu * std::pow(2.0, n - 2.0 - mu)) / (n - 2.0);

    // Table on [1, 2], log-spaced.
    const int N = WeightFunction::kTableNodes;
    w.log_step_ = std::log(2.0) / (N - 1);
    w.r_.resize(N);
    w.phi_.resize(N);
    w.dphi_.resize(N);
    w.src_int_.assign(N, 0.0);
    for (int i = 0; i < N; ++i) w.r_[i] = std::exp(i * w.log_step_);
    w.r_.back() = 2.0;

    const auto& g = numerics::gauss_legendre(kPanelGauss);
    auto panel = [&](double a, double b, auto&& fn) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t k = 0; k < g.x.size(); ++k) sum += g.w[k] * fn(c + h * g.x[k]);
        return sum * h;
    };
    double I = 0.0;       // \int_1^r t^{n-1} eta1
    double outer = 0.0;   // \int_1^r s^{1-n} I(s)
    w.phi_[0] = 1.0;
    w.dphi_[0] = 0.0;
    for (int i = 1; i < N; ++i) {
        const double a = w.r_[i - 1], b = w.r_[i];
        const double Ia = I;
        outer += panel(a, b, [&](double s) {
            return std::pow(s, 1.0 - n) * (Ia + panel(a, s, source));
        });
        I += panel(a, b, source);
        w.src_int_[i] = I;
        w.phi_[i] = 1.0 - w.a4_ * outer;
        w.dphi_[i] = -w.a4_ * std::pow(b, 1.0 - n) * I;
    }

    // Smallest radius past which both two-sided bounds hold at every
    // sampled radius up to 2e12.
    auto bounds_hold = [&](double r) {
        const auto [phi, dphi] = w.eval(r);
        const double p = w.a4_ * std::pow(r, -mu);
        const double dp = mu * w.a4_ * std::pow(r, -mu - 1.0);
        return 0.5 * p < phi && phi < 2.0 * p && -2.0 * dp < dphi && dphi < -0.5 * dp;
    };
    constexpr int kScan = 12000;
    int first_good = -1;
    for (int k = kScan; k >= 1; --k) {
        const double r = 2.0 * std::pow(10.0, k / 1000.0);
        if (bounds_hold(r)) {
            first_good = k;
        } else {
            break;
        }
    }
    if (first_good < 0) throw InternalError("far-field weight bounds never hold on the scan");
    w.R0_ = 2.0 * std::pow(10.0, first_good / 1000.0);
    return w;
}

WeightEval WeightFunction::eval(double r) const {
    const int n = spec_.n;
    const double mu = spec_.mu;
    if (r <= 1.0) return {1.0, 0.0};
    if (r > 2.0) {
        return {a4_ * tail_coeff_ * std::pow(r, 2.0 - n) + a4_ * std::pow(r, -mu),
                -(n - 2.0) * a4_ * tail_coeff_ * std::pow(r, 1.0 - n) -
                    mu * a4_ * std::pow(r, -mu - 1.0)};
    }
    // Cubic Hermite on the log-spaced table for phi; phi' from the cumulative
    // source integral, which keeps its sign where phi' is below round-off.
    const auto last = static_cast<std::ptrdiff_t>(r_.size()) - 2;
    auto i = static_cast<std::ptrdiff_t>(std::floor(std::log(r) / log_step_));
    i = std::clamp<std::ptrdiff_t>(i, 0, last);
    while (i > 0 && r < r_[i]) --i;
    while (i < last && r > r_[i + 1]) ++i;
    const double x0 = r_[i], x1 = r_[i + 1], h = x1 - x0;
    const double t = (r - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    const double phi = h00 * phi_[i] + h10 * h * dphi_[i] + h01 * phi_[i + 1] + h11 * h * dphi_[i + 1];
    const auto& g = numerics::gauss_legendre(kPanelGauss);
    const double c = 0.5 * (x0 + r), hw = 0.5 * (r - x0);
    double part = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
        const double s = c + hw * g.x[k];
        part += g.w[k] * std::pow(s, n - 1.0) * eta1(spec_, s);
    }
    const double dphi = -a4_ * std::pow(r, 1.0 - n) * (src_int_[i] + part * hw);
    return {std::min(phi, 1.0), dphi};
}

namespace {

double trapezoid_log(const WeightFunction& w, std::span<const double> r,
                     std::span<const double> a, std::span<const double> b, DistanceMode mode,
                     bool use_b) {
    if (r.size() != a.size() || (use_b && r.size() != b.size())) {
        throw GridMismatchError("fields must share the radial grid");
    }
    if (r.size() < 2) return 0.0;
    const int n = w.spec().n;
    std::vector<double> g(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0) || (i > 0 && !(r[i] > r[i - 1]))) {
            throw GridMismatchError("radial grid must be positive and strictly increasing");
        }
        double d = use_b ? a[i] - b[i] : a[i];
        d = mode == DistanceMode::Abs ? std::abs(d) : std::max(d, 0.0);
        g[i] = d * w.eval(r[i]).phi * std::pow(r[i], n);  // r^{n-1} dr = r^n d(log r)
    }
    double sum = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) {
        sum += 0.5 * (g[i] + g[i - 1]) * std::log(r[i] / r[i - 1]);
    }
    return sphere_area(n) * sum;
}

}  // namespace

double weighted_l1_distance(const WeightFunction& w, std::span<const double> r,
                            std::span<const double> a, std::span<const double> b,
                            DistanceMode mode) {
    return trapezoid_log(w, r, a, b, mode, true);
}

double weighted_l1_norm(const WeightFunction& w, std::span<const double> r,
                        std::span<const double> a) {
    return trapezoid_log(w, r, a, a, DistanceMode::Abs, false);
}

}  // namespace fdx
