#include "fdx/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fdx/errors.hpp"
#include "fdx/numerics.hpp"

namespace fdx {

double LogGrid::dx() const { return std::log(r_out / r_in) / (nodes - 1); }

std::vector<double> LogGrid::radii() const {
    if (!(r_in > 0.0) || !(r_out > r_in) || nodes < 7) {
        throw ConfigError("grid needs 0 < r_in < r_out and at least 7 nodes");
    }
    std::vector<double> r(static_cast<std::size_t>(nodes));
    const double x0 = std::log(r_in), h = dx();
    for (int i = 0; i < nodes; ++i) r[i] = std::exp(x0 + i * h);
    r.back() = r_out;
    return r;
}

void RadialField::validate() const {
    if (r.size() < 7 || u.size() != r.size()) throw RangeError("field needs at least 7 nodes and one value per node");
    const double h = std::log(r[1] / r[0]);
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(u[i] > 0.0) || !std::isfinite(u[i])) {
            throw RangeError("field value at r=" + std::to_string(r[i]) + " is not positive");
        }
        if (i > 0 && std::abs(std::log(r[i] / r[i - 1]) - h) > 1e-9 * (1.0 + h)) {
            throw RangeError("field grid is not uniform in log r");
        }
    }
    if (!bc.inner || !bc.outer) throw RangeError("field has no boundary traces");
    if (!(bc.inner(t) > 0.0) || !(bc.outer(t) > 0.0)) throw RangeError("boundary traces must be positive");
}

void EvolveConfig::validate() const {
    if (!(dt_init > 0.0) || !(dt_max > 0.0) || !(dt_min > 0.0) || dt_min > dt_max || dt_max_rel < 0.0 ||
        !(newton_tol > 0.0) || newton_max < 1 || backtrack_max < 1 || !(growth >= 1.0) ||
        easy_iters < 1 || hard_iters <= easy_iters) {
        throw ConfigError("invalid evolve configuration");
    }
}

namespace {

struct Stencil {
    std::vector<double> ap, am;  // coefficients of Phi_{i+1} - Phi_i and Phi_i - Phi_{i-1}
};

Stencil make_stencil(const RadialField& f) {
    const std::size_t N = f.r.size();
    const double h = std::log(f.r[1] / f.r[0]);
    const double up = std::exp(0.5 * (f.n - 2.0) * h) / (h * h);
    const double dn = std::exp(-0.5 * (f.n - 2.0) * h) / (h * h);
    Stencil s;
    s.ap.assign(N, 0.0);
    s.am.assign(N, 0.0);
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const double e = 1.0 / (f.r[i] * f.r[i]);
        s.ap[i] = e * up;
        s.am[i] = e * dn;
    }
    return s;
}

// Tridiagonal solve; a: sub, b: diag, c: super, d: rhs (overwritten with x).
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c, std::vector<double>& d) {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

enum class StepOutcome { Ok, NoConvergence, Positivity };

struct StepResult {
    StepOutcome outcome;
    int iterations;
    double residual;
};

StepResult implicit_step(const RadialField& f, const Stencil& st, const std::vector<double>& u_old, double t_new,
                         double dt, const EvolveConfig& cfg, std::vector<double>& u) {
    const std::size_t N = u_old.size();
    const std::size_t M = N - 2;
    const double m = f.m;
    u = u_old;
    u.front() = f.bc.inner(t_new);
    u.back() = f.bc.outer(t_new);
    std::vector<double> phi(N), dphi(N), a(M), b(M), c(M), d(M);
    double res = 0.0;
    for (int it = 1; it <= cfg.newton_max; ++it) {
        for (std::size_t i = 0; i < N; ++i) {
            dphi[i] = std::pow(u[i], m - 1.0);
            phi[i] = u[i] * dphi[i] / m;
        }
        res = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            const std::size_t i = k + 1;
            const double L = st.ap[i] * (phi[i + 1] - phi[i]) - st.am[i] * (phi[i] - phi[i - 1]);
            const double F = u[i] - u_old[i] - dt * L;
            res = std::max(res, std::abs(F) / u[i]);
            d[k] = -F;
            b[k] = 1.0 + dt * (st.ap[i] + st.am[i]) * dphi[i];
            a[k] = i > 1 ? -dt * st.am[i] * dphi[i - 1] : 0.0;
            c[k] = i + 2 < N ? -dt * st.ap[i] * dphi[i + 1] : 0.0;
        }
        thomas(a, b, c, d);
        double lambda = 1.0;
        int cuts = 0;
        for (;;) {
            bool positive = true;
            for (std::size_t k = 0; k < M; ++k) {
                if (!(u[k + 1] + lambda * d[k] > 0.0)) {
                    positive = false;
                    break;
                }
            }
            if (positive) break;
            if (++cuts > cfg.backtrack_max) return {StepOutcome::Positivity, it, res};
            lambda *= 0.5;
        }
        double upd = 0.0;
        for (std::size_t k = 0; k < M; ++k) {
            const double du = lambda * d[k];
            upd = std::max(upd, std::abs(du) / u[k + 1]);
            u[k + 1] += du;
        }
        if (!std::isfinite(upd)) return {StepOutcome::NoConvergence, it, res};
        if (upd <= cfg.newton_tol && lambda == 1.0) {
            // Residual at the accepted iterate.
            for (std::size_t i = 0; i < N; ++i) phi[i] = std::pow(u[i], m) / m;
            res = 0.0;
            for (std::size_t i = 1; i + 1 < N; ++i) {
                const double L = st.ap[i] * (phi[i + 1] - phi[i]) - st.am[i] * (phi[i] - phi[i - 1]);
                res = std::max(res, std::abs(u[i] - u_old[i] - dt * L) / u[i]);
            }
            return {StepOutcome::Ok, it, res};
        }
    }
    return {StepOutcome::NoConvergence, cfg.newton_max, res};
}

}  // namespace

RadialField evolve(RadialField field, const EvolveConfig& cfg, double t_end, EvolveStats* stats) {
    cfg.validate();
    field.validate();
    if (!(t_end > field.t)) throw ConfigError("t_end must be later than the field time");
    EvolveStats local;
    EvolveStats& S = stats ? *stats : local;
    const Stencil st = make_stencil(field);
    const double m = field.m;
    double dt = field.dt_next > 0.0 ? field.dt_next : cfg.dt_init;
    std::vector<double> u_new;
    while (field.t < t_end) {
        double cap = cfg.dt_max;
        if (cfg.dt_max_rel > 0.0) cap = std::min(cap, cfg.dt_max_rel * field.t);
        dt = std::min(dt, cap);
        const double remaining = t_end - field.t;
        const bool last = dt >= remaining * (1.0 - 1e-12);
        const double h = last ? remaining : dt;
        const double t_new = last ? t_end : field.t + h;
        const StepResult r = implicit_step(field, st, field.u, t_new, h, cfg, u_new);
        S.newton_iterations += r.iterations;
        if (r.outcome != StepOutcome::Ok) {
            ++S.rejected;
            dt = 0.5 * h;
            if (dt < cfg.dt_min) {
                if (r.outcome == StepOutcome::Positivity) {
                    throw PositivityError("positivity lost at t=" + std::to_string(field.t) +
                                          " after the backtracking cap, dt below dt_min");
                }
                throw NewtonDivergence("Newton failed at t=" + std::to_string(field.t) +
                                       " with dt below dt_min");
            }
            continue;
        }
        for (std::size_t i = 1; i + 1 < u_new.size(); ++i) {
            const double rhs = u_new[i] / ((1.0 - m) * t_new);
            S.ab_max_excess = std::max(S.ab_max_excess, ((u_new[i] - field.u[i]) / h - rhs) / rhs);
            S.min_u = std::min(S.min_u, u_new[i]);
        }
        S.max_newton_residual = std::max(S.max_newton_residual, r.residual);
        ++S.steps;
        field.u.swap(u_new);
        field.t = t_new;
        if (r.iterations <= cfg.easy_iters) {
            if (!last) dt = h * cfg.growth;
        } else if (r.iterations >= cfg.hard_iters) {
            dt = 0.7 * h;
        }
        if (last) break;
    }
    field.dt_next = dt;
    return field;
}

std::vector<double> discrete_laplacian_phi(const RadialField& field) {
    field.validate();
    const Stencil st = make_stencil(field);
    const std::size_t N = field.u.size();
    std::vector<double> phi(N), L(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) phi[i] = std::pow(field.u[i], field.m) / field.m;
    for (std::size_t i = 1; i + 1 < N; ++i) {
        L[i] = st.ap[i] * (phi[i + 1] - phi[i]) - st.am[i] * (phi[i] - phi[i - 1]);
    }
    return L;
}

double aronson_benilan_margin(const RadialField& field) {
    const auto L = discrete_laplacian_phi(field);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < L.size(); ++i) {
        const double rhs = field.u[i] / (1.0 - field.m);
        worst = std::max(worst, (field.t * L[i] - rhs) / rhs);
    }
    return worst;
}

SelfSimilar::SelfSimilar(std::shared_ptr<const Profile> base, double lambda)
    : base_(std::move(base)), lambda_(lambda) {
    if (!base_) throw ConfigError("self-similar solution needs a profile");
    if (!(lambda > 0.0)) throw RangeError("scaling factor must be positive");
}

double SelfSimilar::f(double r) const {
    const ParamSet& p = base_->params;
    return std::exp(p.pde_exponent() * std::log(lambda_) + base_->lnf_at(std::log(lambda_ * r)));
}

double SelfSimilar::V(double r, double t) const {
    const ParamSet& p = base_->params;
    if (!(t > 0.0)) throw RangeError("self-similar solution needs t > 0");
    const double lt = std::log(t);
    return std::exp(-p.alpha * lt + p.pde_exponent() * std::log(lambda_) +
                    base_->lnf_at(std::log(lambda_ * r) - p.beta * lt));
}

BoundaryTrace SelfSimilar::trace(double r_in, double r_out) const {
    SelfSimilar self = *this;
    return {[self, r_in](double t) { return self.V(r_in, t); },
            [self, r_out](double t) { return self.V(r_out, t); }};
}

RadialField make_self_similar_field(const SelfSimilar& v, double t, const LogGrid& grid) {
    RadialField f;
    f.n = v.params().n;
    f.m = v.params().m;
    f.r = grid.radii();
    f.t = t;
    f.u.resize(f.r.size());
    for (std::size_t i = 0; i < f.r.size(); ++i) f.u[i] = v.V(f.r[i], t);
    f.bc = v.trace(f.r.front(), f.r.back());
    return f;
}

double Barenblatt::operator()(double r, double t) const {
    const double d = n - 2.0 - n * m;
    if (!(d > 0.0)) throw RangeError("Barenblatt solution needs m < (n-2)/n");
    if (!(t < T)) throw RangeError("Barenblatt solution has vanished at t >= T");
    const double beta1 = 1.0 / d;
    const double alpha1 = (2.0 * beta1 + 1.0) / (1.0 - m);
    const double cstar = 2.0 * d / (1.0 - m);
    const double s = T - t;
    const double y = std::pow(s, beta1) * r;
    return std::pow(s, alpha1) * std::pow(cstar / (k * k + y * y), 1.0 / (1.0 - m));
}

RadialField Barenblatt::field(double t, const LogGrid& grid) const {
    RadialField f;
    f.n = n;
    f.m = m;
    f.r = grid.radii();
    f.t = t;
    f.u.resize(f.r.size());
    for (std::size_t i = 0; i < f.r.size(); ++i) f.u[i] = (*this)(f.r[i], t);
    const Barenblatt b = *this;
    const double ri = f.r.front(), ro = f.r.back();
    f.bc = {[b, ri](double s) { return b(ri, s); }, [b, ro](double s) { return b(ro, s); }};
    return f;
}

OrderStudy spatial_order_study(const std::function<RadialField(const LogGrid&)>& init,
                               const std::function<double(double, double)>& exact, double t_end,
                               const LogGrid& finest, int levels, double dt_per_dx2) {
    if (levels < 2 || !(dt_per_dx2 > 0.0)) throw ConfigError("order study needs two levels and dt_per_dx2 > 0");
    const int intervals = finest.nodes - 1;
    if (intervals % (1 << (levels - 1)) != 0) throw ConfigError("finest grid does not halve cleanly");
    OrderStudy out;
    for (int j = levels - 1; j >= 0; --j) {
        LogGrid g = finest;
        g.nodes = intervals / (1 << j) + 1;
        if (g.nodes < 7) throw ConfigError("coarsest grid has fewer than 7 nodes");
        const double dx = g.dx();
        EvolveConfig cfg;
        cfg.dt_init = cfg.dt_max = dt_per_dx2 * dx * dx;
        cfg.dt_min = std::min(cfg.dt_min, 1e-6 * cfg.dt_max);
        cfg.growth = 1.0;
        EvolveStats st;
        const RadialField f = evolve(init(g), cfg, t_end, &st);
        double err = 0.0;
        for (std::size_t i = 0; i < f.r.size(); ++i) {
            const double e = exact(f.r[i], t_end);
            err = std::max(err, std::abs(f.u[i] - e) / e);
        }
        out.nodes.push_back(g.nodes);
        out.errors.push_back(err);
        out.ab_max_excess = std::max(out.ab_max_excess, st.ab_max_excess);
        out.min_u = std::min(out.min_u, st.min_u);
    }
    for (std::size_t j = 1; j < out.errors.size(); ++j) {
        out.orders.push_back(std::log2(out.errors[j - 1] / out.errors[j]));
    }
    return out;
}

RescaledField rescale_field(const RadialField& field, const ParamSet& p, std::span<const double> y) {
    if (!(field.t > 0.0)) throw RangeError("rescaling needs t > 0");
    const double lt = std::log(field.t);
    const double x0 = std::log(field.r.front());
    const double h = std::log(field.r[1] / field.r[0]);
    const double x1 = std::log(field.r.back());
    std::vector<double> lu(field.u.size());
    for (std::size_t i = 0; i < lu.size(); ++i) lu[i] = std::log(field.u[i]);
    RescaledField out;
    out.y.assign(y.begin(), y.end());
    out.u.resize(y.size());
    out.tau = lt;
    const double eps = 1e-9 * h;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double x = p.beta * lt + std::log(y[j]);
        if (x < x0 - eps || x > x1 + eps) {
            throw RangeError("t^beta y = " + std::to_string(std::exp(x)) + " is outside the field grid");
        }
        out.u[j] = std::exp(p.alpha * lt + numerics::lagrange6(lu, x0, h, x));
    }
    return out;
}

double sandwich_violation(const Sandwich& s, const RadialField& field) {
    double worst = 0.0;
    for (std::size_t i = 0; i < field.r.size(); ++i) {
        const double lo = s.lower.V(field.r[i], field.t);
        const double hi = s.upper.V(field.r[i], field.t);
        worst = std::max({worst, (lo - field.u[i]) / lo, (field.u[i] - hi) / hi});
    }
    return worst;
}

double sandwich_violation(const RadialField& lower, const RadialField& upper, const RadialField& field) {
    if (lower.r != field.r || upper.r != field.r) throw GridMismatchError("barriers and field must share the grid");
    double worst = 0.0;
    for (std::size_t i = 0; i < field.r.size(); ++i) {
        worst = std::max({worst, (lower.u[i] - field.u[i]) / lower.u[i], (field.u[i] - upper.u[i]) / upper.u[i]});
    }
    return worst;
}

ContractionResult contraction_experiment(const RadialField& u0, const RadialField& v0, const WeightFunction& weight,
                                         std::span<const double> times, const EvolveConfig& cfg,
                                         const Sandwich& sandwich, double compact_lo, double compact_hi) {
    if (u0.r != v0.r || u0.t != v0.t) throw GridMismatchError("contraction pair must share grid and time");
    if (times.empty()) throw ConfigError("contraction experiment needs sample times");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > (i ? times[i - 1] : u0.t))) throw ConfigError("sample times must increase past t0");
    }
    constexpr double kSetupSlack = 1e-12;
    if (sandwich_violation(sandwich, u0) > kSetupSlack || sandwich_violation(sandwich, v0) > kSetupSlack) {
        throw SandwichViolationError("initial data are not between V_lambda1 and V_lambda2");
    }
    ContractionResult res;
    res.ordered = true;
    for (std::size_t i = 0; i < u0.u.size(); ++i) res.ordered = res.ordered && u0.u[i] >= v0.u[i];
    res.initial_ab_margin_u = aronson_benilan_margin(u0);
    res.initial_ab_margin_v = aronson_benilan_margin(v0);

    // Barriers evolved by the same scheme, so that ordering is the discrete
    // comparison principle rather than a discretization-error comparison.
    const LogGrid grid{u0.r.front(), u0.r.back(), static_cast<int>(u0.r.size())};
    RadialField lower = make_self_similar_field(sandwich.lower, u0.t, grid);
    RadialField upper = make_self_similar_field(sandwich.upper, u0.t, grid);
    lower.r = upper.r = u0.r;
    auto record = [&](const RadialField& u, const RadialField& v) {
        res.t.push_back(u.t);
        res.dist_abs.push_back(weighted_l1_distance(weight, u.r, u.u, v.u, DistanceMode::Abs));
        res.dist_pos.push_back(weighted_l1_distance(weight, u.r, u.u, v.u, DistanceMode::PositivePart));
        double sup = 0.0;
        for (std::size_t i = 0; i < u.r.size(); ++i) {
            if (u.r[i] >= compact_lo && u.r[i] <= compact_hi) sup = std::max(sup, std::abs(u.u[i] - v.u[i]) / v.u[i]);
        }
        res.dist_sup_compact.push_back(sup);
        res.max_sandwich_violation = std::max(
            {res.max_sandwich_violation, sandwich_violation(lower, upper, u), sandwich_violation(lower, upper, v)});
        if (res.ordered) {
            for (std::size_t i = 0; i < u.u.size(); ++i) {
                res.max_order_violation = std::max(res.max_order_violation, (v.u[i] - u.u[i]) / u.u[i]);
            }
        }
    };
    RadialField u = u0, v = v0;
    record(u, v);
    for (double t : times) {
        u = evolve(std::move(u), cfg, t, &res.stats_u);
        v = evolve(std::move(v), cfg, t, &res.stats_v);
        lower = evolve(std::move(lower), cfg, t, &res.stats_barriers);
        upper = evolve(std::move(upper), cfg, t, &res.stats_barriers);
        record(u, v);
    }
    return res;
}

double LogBump::operator()(double r) const {
    const double xi = (std::log(r) - center) / width;
    if (std::abs(xi) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - xi * xi));
}

RadialField random_sandwiched_field(const Sandwich& s, double t0, const LogGrid& grid, const RandomDataSpec& spec,
                                    std::mt19937_64& rng) {
    if (spec.bumps < 1 || !(spec.center_lo > 0.0) || spec.center_hi < spec.center_lo || !(spec.width_lo > 0.0) ||
        spec.width_hi < spec.width_lo || spec.max_tries < 1) {
        throw ConfigError("invalid random data settings");
    }
    const RadialField lower = make_self_similar_field(s.lower, t0, grid);
    const RadialField upper = make_self_similar_field(s.upper, t0, grid);
    const double x_in = std::log(grid.r_in), x_out = std::log(grid.r_out);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int attempt = 0; attempt < spec.max_tries; ++attempt) {
        std::vector<LogBump> bumps;
        std::vector<double> amp;
        for (int j = 0; j < spec.bumps; ++j) {
            const double w = spec.width_lo + unit(rng) * (spec.width_hi - spec.width_lo);
            const double lo = std::max(std::log(spec.center_lo), x_in + w);
            const double hi = std::min(std::log(spec.center_hi), x_out - w);
            if (hi < lo) throw ConfigError("bump widths do not fit inside the grid");
            bumps.push_back({lo + unit(rng) * (hi - lo), w});
            amp.push_back(unit(rng));
        }
        RadialField f = lower;
        for (std::size_t i = 1; i + 1 < f.r.size(); ++i) {
            double theta = 0.0;
            for (std::size_t j = 0; j < bumps.size(); ++j) theta += amp[j] * bumps[j](f.r[i]);
            f.u[i] = lower.u[i] + std::min(theta, 1.0) * (upper.u[i] - lower.u[i]);
        }
        if (aronson_benilan_margin(f) <= 0.0) return f;
    }
    throw ConfigError("no draw satisfied the Aronson-Benilan bound");
}

ConvergenceResult convergence_experiment(std::shared_ptr<const Profile> base, const ConvergenceSpec& spec,
                                         const WeightFunction& weight, const EvolveConfig& cfg) {
    if (!base) throw ConfigError("convergence experiment needs a profile");
    const ParamSet& p = base->params;
    if (!p.convergence_regime) throw ConfigError("convergence experiment needs n <= gamma < (n-2)/m");
    if (!(spec.A1 < spec.A0 && spec.A0 < spec.A2) || !(spec.A1 > 0.0)) {
        throw ConfigError("need 0 < A1 < A0 < A2");
    }
    if (!(spec.t0 > 0.0) || spec.tau.empty() || spec.y.size() < 7) {
        throw ConfigError("convergence experiment needs t0 > 0, sample times and a y grid");
    }
    if (spec.amplitude < 0.0 || spec.amplitude >= spec.A2 / spec.A0 - 1.0) {
        throw ConfigError("bump amplitude must lie in [0, A2/A0 - 1)");
    }
    ConvergenceResult res;
    res.lambda0 = lambda_for_eta(p, base->eta_origin, spec.A0);
    res.lambda1 = lambda_for_eta(p, base->eta_origin, spec.A1);
    res.lambda2 = lambda_for_eta(p, base->eta_origin, spec.A2);
    const SelfSimilar V0(base, res.lambda0);
    const Sandwich sandwich{SelfSimilar(base, res.lambda1), SelfSimilar(base, res.lambda2)};

    RadialField u = make_self_similar_field(V0, spec.t0, spec.grid);
    for (std::size_t i = 0; i < u.r.size(); ++i) u.u[i] *= 1.0 + spec.amplitude * spec.bump(u.r[i]);
    if (sandwich_violation(sandwich, u) > 1e-12) {
        throw SandwichViolationError("perturbed initial data leave the V_lambda1..V_lambda2 sandwich");
    }
    res.initial_ab_margin = aronson_benilan_margin(u);

    std::vector<double> f0(spec.y.size());
    for (std::size_t j = 0; j < f0.size(); ++j) f0[j] = V0.f(spec.y[j]);
    res.norm_f = weighted_l1_norm(weight, spec.y, f0);

    RadialField lower = make_self_similar_field(sandwich.lower, spec.t0, spec.grid);
    RadialField upper = make_self_similar_field(sandwich.upper, spec.t0, spec.grid);
    for (double tau : spec.tau) {
        const double t = spec.t0 * std::exp(tau);
        if (t > u.t * (1.0 + 1e-15)) {
            u = evolve(std::move(u), cfg, t, &res.stats);
            lower = evolve(std::move(lower), cfg, t, &res.stats_barriers);
            upper = evolve(std::move(upper), cfg, t, &res.stats_barriers);
        }
        res.max_sandwich_violation = std::max(res.max_sandwich_violation, sandwich_violation(lower, upper, u));
        const RescaledField ut = rescale_field(u, p, spec.y);
        const double d = weighted_l1_distance(weight, spec.y, ut.u, f0);
        double sup = 0.0;
        for (std::size_t j = 0; j < f0.size(); ++j) {
            if (spec.y[j] < spec.compact_lo || spec.y[j] > spec.compact_hi) continue;
            sup = std::max(sup, std::abs(ut.u[j] - f0[j]) / f0[j]);
        }
        res.tau.push_back(std::log(u.t / spec.t0));
        res.dist_L1w.push_back(d);
        res.rel_L1w.push_back(d / res.norm_f);
        res.dist_sup_compact.push_back(sup);
    }
    return res;
}

}  // namespace fdx
