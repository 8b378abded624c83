#include "fdx/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>
#include <string>

#include "fdx/errors.hpp"
#include "stiff_core.hpp"

namespace fdx::numerics {

namespace odeint = boost::numeric::odeint;

void Tolerances::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_steps < 1) {
        throw ConfigError("tolerances must be positive and max_steps >= 1");
    }
}

namespace {

void check_times(std::span<const double> times) {
    if (times.size() < 2) throw ConfigError("integration needs at least two sample times");
    const bool forward = times[1] > times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
        const bool ok = forward ? times[i] > times[i - 1] : times[i] < times[i - 1];
        if (!ok) throw ConfigError("sample times must be strictly monotone");
    }
}

template <class Vec>
void guard_state(const Vec& y, double t) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i]) || std::abs(y[i]) > kOverflowGuard) {
            throw BlowUpError("state component " + std::to_string(i) +
                              " exceeded the overflow guard at t=" + std::to_string(t));
        }
    }
}

double initial_step(std::span<const double> times) {
    const double span = times.back() - times.front();
    double dt = std::min(std::abs(times[1] - times[0]), std::abs(span)) * 1e-2;
    dt = std::max(dt, 1e-10 * std::abs(span));
    return span > 0 ? dt : -dt;
}

template <class Stepper, class System, class Vec, class Convert>
Trajectory run_times(Stepper stepper, System sys, Vec y, std::span<const double> times,
                     const Tolerances& tol, Convert to_state) {
    Trajectory out;
    out.t.reserve(times.size());
    out.y.reserve(times.size());
    auto observer = [&](const Vec& x, double t) {
        guard_state(x, t);
        out.t.push_back(t);
        out.y.push_back(to_state(x));
    };
    try {
        out.steps = odeint::integrate_times(stepper, sys, y, times.begin(), times.end(),
                                            initial_step(times), observer,
                                            odeint::max_step_checker(static_cast<int>(
                                                std::min<long>(tol.max_steps, 2'000'000'000L))));
    } catch (const odeint::step_adjustment_error& e) {
        throw StiffnessError(std::string("step size collapsed: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
        throw StiffnessError(std::string("step budget exhausted: ") + e.what());
    } catch (const odeint::odeint_error& e) {
        throw StiffnessError(std::string("integrator failure: ") + e.what());
    }
    if (out.t.size() != times.size()) {
        throw StiffnessError("integration stopped before the final sample time");
    }
    return out;
}

}  // namespace

Trajectory integrate_ode(const Rhs& rhs, State y0, std::span<const double> times,
                         const Tolerances& tol) {
    tol.validate();
    check_times(times);
    guard_state(y0, times[0]);
    auto stepper = odeint::make_controlled(tol.abs_tol, tol.rel_tol,
                                           odeint::runge_kutta_dopri5<State>());
    auto sys = [&rhs](const State& y, State& dy, double t) { rhs(t, y, dy); };
    return run_times(stepper, sys, std::move(y0), times, tol,
                     [](const State& x) { return x; });
}

Trajectory integrate_stiff_ode(const Rhs& rhs, const JacobianFn& jac, State y0,
                               std::span<const double> times, const Tolerances& tol) {
    tol.validate();
    check_times(times);
    guard_state(y0, times[0]);
    auto run = detail::rosenbrock_times(
        rhs, jac, std::move(y0), std::vector<double>(times.begin(), times.end()), tol.abs_tol,
        tol.rel_tol, tol.max_steps, initial_step(times), kOverflowGuard);
    using S = detail::StiffRun::Status;
    if (run.status == S::BlowUp) throw BlowUpError(run.message);
    if (run.status == S::StepFailure) throw StiffnessError("stiff integrator failure: " + run.message);
    if (run.t.size() != times.size()) {
        throw StiffnessError("integration stopped before the final sample time");
    }
    Trajectory out;
    out.t = std::move(run.t);
    out.y = std::move(run.y);
    out.steps = run.steps;
    return out;
}

namespace {

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk_panel(const std::function<double(double)>& f, double a, double b) {
    double err = 0.0;
    const double v =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
    return {a, b, v, err};
}

}  // namespace

// Global adaptive bisection: always split the panel with the largest error
// estimate until the summed estimate meets the target.
double quad_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
    if (a == b) return 0.0;
    std::function<double(double)> g = f;
    double lo = a, hi = b;
    if (std::isinf(b)) {
        // x = a + t/(1-t), t in [0, 1)
        g = [&f, a](double t) {
            if (t >= 1.0) return 0.0;
            const double u = 1.0 - t;
            return f(a + t / u) / (u * u);
        };
        lo = 0.0;
        hi = 1.0;
    }
    constexpr int kMaxPanels = 20000;
    std::priority_queue<Panel> heap;
    heap.push(gk_panel(g, lo, hi));
    double total = heap.top().value, err = heap.top().error;
    int panels = 1;
    while (err > tol * (1.0 + std::abs(total))) {
        if (panels >= kMaxPanels || !std::isfinite(total)) {
            throw QuadratureError("adaptive quadrature missed tolerance: estimated error " +
                                  std::to_string(err));
        }
        const Panel p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            throw QuadratureError("adaptive quadrature: panel width underflow");
        }
        const Panel l = gk_panel(g, p.a, mid), r = gk_panel(g, mid, p.b);
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
        ++panels;
        if (err < 0.0) {  // drift in the running sum; recompute
            total = err = 0.0;
            auto copy = heap;
            while (!copy.empty()) {
                total += copy.top().value;
                err += copy.top().error;
                copy.pop();
            }
        }
    }
    // Running sums drift; finish with an exact re-summation.
    total = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        heap.pop();
    }
    if (!std::isfinite(total)) throw QuadratureError("adaptive quadrature produced a non-finite value");
    return total;
}

double quad_with_tail(const std::function<double(double)>& f, double a, TailModel tail,
                      double tol) {
    if (!(tail.rate > 0.0) || (tail.kind == TailModel::Kind::Power && !(tail.rate > 1.0))) {
        throw ConfigError("tail model rate does not describe an integrable decay");
    }
    auto tail_at = [&](double x) {
        const double fx = f(x);
        return tail.kind == TailModel::Kind::Power ? fx * x / (tail.rate - 1.0)
                                                   : fx / tail.rate;
    };
    double len = std::max(1.0, std::abs(a));
    double cut = a + len;
    double body = quad_adaptive(f, a, cut, tol * 0.25);
    double prev = body + tail_at(cut);
    for (int k = 0; k < 60; ++k) {
        const double next_cut = a + 2.0 * (cut - a);
        body += quad_adaptive(f, cut, next_cut, tol * 0.25);
        cut = next_cut;
        const double est = body + tail_at(cut);
        if (std::abs(est - prev) <= 0.5 * tol * (1.0 + std::abs(est))) return est;
        prev = est;
    }
    throw QuadratureError("semi-infinite quadrature: tail model never settled");
}

const GaussRule& gauss_legendre(int points) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(points); it != cache.end()) return it->second;
    if (points < 1 || points > 64) throw ConfigError("unsupported Gauss-Legendre order");
    GaussRule rule;
    const auto zeros = boost::math::legendre_p_zeros<double>(points);
    for (double z : zeros) {
        const double dp = boost::math::legendre_p_prime(points, z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        if (z == 0.0) {
            rule.x.push_back(0.0);
            rule.w.push_back(w);
        } else {
            rule.x.push_back(-z);
            rule.w.push_back(w);
            rule.x.push_back(z);
            rule.w.push_back(w);
        }
    }
    return cache.emplace(points, std::move(rule)).first->second;
}

void lagrange6_weights(double t, int first, double out[6]) {
    // t is the abscissa in units of dx relative to node 0 of the table.
    for (int j = 0; j < 6; ++j) {
        double w = 1.0;
        const double xj = first + j;
        for (int k = 0; k < 6; ++k) {
            if (k == j) continue;
            const double xk = first + k;
            w *= (t - xk) / (xj - xk);
        }
        out[j] = w;
    }
}

double lagrange6(std::span<const double> y, double x0, double dx, double x) {
    const auto n = static_cast<long>(y.size());
    if (n < 6) throw ConfigError("six-point interpolation needs at least six samples");
    const double t = (x - x0) / dx;
    long first = static_cast<long>(std::floor(t)) - 2;
    first = std::clamp(first, 0L, n - 6);
    double w[6];
    lagrange6_weights(t, static_cast<int>(first), w);
    double v = 0.0;
    for (int j = 0; j < 6; ++j) v += w[j] * y[first + j];
    return v;
}

CentralDiff central_diff8(std::span<const double> y, std::size_t i, double h) {
    static constexpr double c1[5] = {0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    static constexpr double c2[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    if (i < 4 || i + 4 >= y.size()) throw ConfigError("central difference stencil leaves the table");
    double d1 = 0.0, d2 = c2[0] * y[i];
    for (std::size_t k = 1; k <= 4; ++k) {
        d1 += c1[k] * (y[i + k] - y[i - k]);
        d2 += c2[k] * (y[i + k] + y[i - k]);
    }
    return {d1 / h, d2 / (h * h)};
}

}  // namespace fdx::numerics
