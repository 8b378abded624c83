#include "fdx/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fdx/asymptotics.hpp"
#include "fdx/errors.hpp"
#include "fdx/params.hpp"
#include "fdx/pde.hpp"
#include "fdx/profile.hpp"
#include "fdx/weight.hpp"

namespace fdx::cli {

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

struct ParamFlags {
    std::string file;
    std::optional<int> n;
    std::optional<double> m, gamma, rho1, eta_inf, b1_margin;
};

struct GridFlags {
    double r_in = 1e-3, r_out = 1e3;
    int nodes = 513;
};

struct StepFlags {
    double dt_init = 1e-4, dt_max = 10.0, dt_max_rel = 2e-3, dt_min = 1e-14, newton_tol = 1e-12;
};

struct Options {
    std::string out = ".";
    ParamFlags params;
    double mu = 0.5;
    double quad_tol = 1e-12;

    // profile / expansion
    std::optional<double> eta;
    double r_lo = 1e-3, r_hi = 1e3;
    int stride = 1;

    // weight
    std::optional<double> w_mu;
    std::optional<int> w_n;
    double w_rmin = 1e-3, w_rmax = 1e3;
    int w_nodes = 601;

    // pde
    GridFlags grid;
    StepFlags step;
    std::string data = "selfsimilar";
    double A0 = 1.0, A1 = 0.8, A2 = 1.4;
    double t0 = 1.0, tau_max = 3.0;
    int samples = 30;
    double bk = 1.0, bT = 2.0;
    int pairs = 5;
    unsigned long long seed = 12345;
    double amplitude = 0.0, bump_center = 0.1, bump_width = 1.5;
    double y_min = 0.02, y_max = 500.0;
    int y_nodes = 801;
    double compact_lo = 0.1, compact_hi = 10.0;
};

struct Artifact {
    std::string name;
    std::string content;
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_row(std::initializer_list<double> values) {
    std::string line;
    bool first = true;
    for (double v : values) {
        if (!first) line += ',';
        line += num(v);
        first = false;
    }
    line += '\n';
    return line;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ParamSet resolve_params(const ParamFlags& pf, double& eta_inf, double& b1_margin) {
    ordered_json file;
    if (!pf.file.empty()) {
        std::ifstream in(pf.file);
        if (!in) throw ConfigError("cannot read parameter file " + pf.file);
        try {
            in >> file;
        } catch (const ordered_json::exception& e) {
            throw ConfigError("parameter file is not valid JSON: " + std::string(e.what()));
        }
        if (!file.is_object()) throw ConfigError("parameter file must hold a JSON object");
    }
    auto pick = [&](const auto& flag, const char* key, auto fallback, bool required) {
        using T = std::decay_t<decltype(fallback)>;
        if (flag) return static_cast<T>(*flag);
        if (file.contains(key)) {
            try {
                return file.at(key).template get<T>();
            } catch (const ordered_json::exception&) {
                throw ConfigError(std::string("parameter '") + key + "' has the wrong type");
            }
        }
        if (required) throw ConfigError(std::string("missing required flag --") + key);
        return fallback;
    };
    const int n = pick(pf.n, "n", 0, true);
    const double m = pick(pf.m, "m", 0.0, true);
    const double gamma = pick(pf.gamma, "gamma", 0.0, true);
    const double rho1 = pick(pf.rho1, "rho1", 1.0, false);
    eta_inf = pick(pf.eta_inf, "eta_inf", 1.0, false);
    b1_margin = pick(pf.b1_margin, "b1_margin", 0.05, false);
    if (!(eta_inf > 0.0)) throw ConfigError("eta_inf must be positive");
    if (!(b1_margin > 0.0)) throw ConfigError("b1_margin must be positive");
    return make_params(n, m, gamma, rho1);
}

struct Resolved {
    ParamSet p;
    double eta_inf = 1.0, b1_margin = 0.05;
    ProfileOptions popt;
};

Resolved resolve(const Options& o) {
    Resolved r;
    r.p = resolve_params(o.params, r.eta_inf, r.b1_margin);
    r.popt.eta_inf = r.eta_inf;
    r.popt.b1_margin = r.b1_margin;
    return r;
}

ordered_json derived_constants(const ParamSet& p, double eta_inf, double b1_margin, const WeightFunction* w) {
    ordered_json d;
    d["alpha"] = p.alpha;
    d["beta"] = p.beta;
    const FPConstants fp = derive_fp_constants(p, eta_inf, b1_margin);
    d["C1"] = fp.C1;
    d["C2"] = fp.C2;
    d["C3"] = fp.C3;
    d["C4"] = fp.C4;
    d["C5"] = fp.C5;
    d["eps1"] = fp.eps1;
    d["b0"] = fp.b0;
    d["b1"] = fp.b1;
    d["eta_inf"] = fp.etaInf;
    const ExpansionConstants ec = derive_expansion_constants(p);
    d["a1"] = ec.a1;
    d["a2"] = ec.a2;
    d["a3"] = ec.a3;
    if (w) {
        d["mu"] = w->spec().mu;
        d["a4"] = w->a4();
        d["a5"] = w->a5();
    }
    return d;
}

ordered_json params_json(const ParamSet& p) {
    return {{"n", p.n}, {"m", p.m}, {"gamma", p.gamma}, {"rho1", p.rho1}};
}

EvolveConfig evolve_config(const StepFlags& s) {
    EvolveConfig c;
    c.dt_init = s.dt_init;
    c.dt_max = s.dt_max;
    c.dt_max_rel = s.dt_max_rel;
    c.dt_min = s.dt_min;
    c.newton_tol = s.newton_tol;
    c.validate();
    return c;
}

ordered_json evolve_config_json(const EvolveConfig& c) {
    return {{"dt_init", c.dt_init},       {"dt_max", c.dt_max},         {"dt_max_rel", c.dt_max_rel},
            {"dt_min", c.dt_min},         {"newton_tol", c.newton_tol}, {"newton_max", c.newton_max},
            {"backtrack_max", c.backtrack_max}, {"growth", c.growth},   {"easy_iters", c.easy_iters},
            {"hard_iters", c.hard_iters}};
}

ordered_json grid_json(const LogGrid& g) { return {{"r_in", g.r_in}, {"r_out", g.r_out}, {"nodes", g.nodes}}; }

ordered_json stats_json(const EvolveStats& s) {
    return {{"steps", s.steps},
            {"newton_iterations", s.newton_iterations},
            {"rejected", s.rejected},
            {"ab_max_excess", s.ab_max_excess},
            {"min_u", s.min_u},
            {"max_newton_residual", s.max_newton_residual}};
}

struct Run {
    std::vector<Artifact> artifacts;
    ordered_json manifest;
};

const char* kSeriesHeader = "t,tau,dist_L1w,dist_sup_compact";

Run cmd_profile(const Options& o) {
    const Resolved r = resolve(o);
    if (o.stride < 1) throw ConfigError("--stride must be at least 1");
    const Profile prof = o.eta ? solve_for_eta(r.p, *o.eta, r.popt) : build_profile(r.p, r.popt);
    std::string csv = "s,r,h,wt,f,rfr_over_f\n";
    for (std::size_t i = 0; i < prof.size(); i += static_cast<std::size_t>(o.stride)) {
        csv += csv_row({prof.s[i], std::exp(prof.s[i]), prof.h[i], prof.wt(i), prof.f(i), prof.rfr_over_f(i)});
    }
    ordered_json summary;
    summary["eta_origin"] = prof.eta_origin;
    summary["eta_inf"] = prof.eta_inf;
    summary["fp_residual"] = prof.fp_residual;
    summary["ode_residual_max"] = f_equation_residual_max(prof, o.r_lo, o.r_hi);
    summary["iterations"] = prof.iterations;
    summary["log_lambda"] = prof.log_lambda;
    summary["richardson"] = prof.richardson;
    summary["s_min"] = prof.s_min();
    summary["s_max"] = prof.s_max();
    Run run;
    run.artifacts = {{"profile.csv", csv}, {"profile.json", dump(summary)}};
    run.manifest["config"] = {{"eta", o.eta ? ordered_json(*o.eta) : ordered_json(nullptr)},
                              {"r_lo", o.r_lo},
                              {"r_hi", o.r_hi},
                              {"stride", o.stride}};
    return run;
}

Run cmd_expansion(const Options& o) {
    const Resolved r = resolve(o);
    const ExpansionConstants ec = derive_expansion_constants(r.p);
    const double eta = o.eta.value_or(1.0);
    const Profile base = build_profile(r.p, r.popt);
    const Profile prof = solve_for_eta(r.p, eta, r.popt);
    const ExpansionReport rep = expansion_check(prof, ec);
    const OriginSeriesReport os = origin_series_check(prof, ec, rep.eta);
    const InversionReport inv = inversion_residual(base);

    ordered_json j;
    j["eta"] = rep.eta;
    j["d1"] = rep.d1;
    j["d2"] = rep.d2;
    j["d1_ref"] = rep.d1_ref;
    j["d2_ref"] = rep.d2_ref;
    j["rel_err1"] = rep.rel_err1;
    j["rel_err2"] = rep.rel_err2;
    j["spread1"] = rep.spread1;
    j["spread2"] = rep.spread2;
    j["rho_windows"] = rep.rho_windows;
    j["d1_levels"] = rep.d1_levels;
    j["d2_levels"] = rep.d2_levels;
    j["d1_raw"] = rep.d1_raw;
    j["d2_raw"] = rep.d2_raw;
    j["max_wbar_rho"] = rep.max_wbar_rho;
    j["fr_leading"] = os.fr_leading;
    j["fr_leading_ref"] = os.fr_leading_ref;
    j["fr_sub"] = os.fr_sub;
    j["fr_sub_ref"] = os.fr_sub_ref;
    j["series_deviation_decreasing"] = os.deviation_decreasing;
    j["residuals"] = {{"f_equation", f_equation_residual_max(prof, o.r_lo, o.r_hi)},
                      {"wbar_equation", wbar_ode_residual(prof, ec)},
                      {"inversion", inv.residual},
                      {"double_inversion", double_inversion_error(base)},
                      {"g_origin_gap", inv.g_origin_gap},
                      {"inversion_min_positivity", inv.min_positivity}};
    Run run;
    run.artifacts = {{"expansion.json", dump(j)}};
    run.manifest["config"] = {{"eta", eta}, {"r_lo", o.r_lo}, {"r_hi", o.r_hi}};
    return run;
}

Run cmd_weight(const Options& o) {
    const BumpSpec spec{*o.w_mu, *o.w_n};
    const WeightFunction w = build_weight(spec, o.quad_tol);
    if (!(o.w_rmin > 0.0) || !(o.w_rmax > o.w_rmin) || o.w_nodes < 2) {
        throw ConfigError("weight sampling needs 0 < r_min < r_max and at least 2 nodes");
    }
    std::string csv = "# a4=" + num(w.a4()) + " a5=" + num(w.a5()) + " mu=" + num(spec.mu) +
                      " n=" + std::to_string(spec.n) + "\nr,phi,dphi\n";
    for (int i = 0; i < o.w_nodes; ++i) {
        const double r = o.w_rmin * std::pow(o.w_rmax / o.w_rmin, i / (o.w_nodes - 1.0));
        const WeightEval e = w.eval(r);
        csv += csv_row({r, e.phi, e.dphi});
    }
    ordered_json summary{{"a4", w.a4()}, {"a5", w.a5()}, {"k0", w.k0()}, {"R0", w.R0()},
                         {"mu", spec.mu}, {"n", spec.n}, {"quad_tol", w.quad_tol()}};
    Run run;
    run.artifacts = {{"weight.csv", csv}, {"weight.json", dump(summary)}};
    run.manifest["config"] = {{"mu", spec.mu}, {"n", spec.n}, {"quad_tol", o.quad_tol},
                              {"r_min", o.w_rmin}, {"r_max", o.w_rmax}, {"nodes", o.w_nodes}};
    run.manifest["derived"] = {{"mu", spec.mu}, {"a4", w.a4()}, {"a5", w.a5()}};
    return run;
}

std::vector<double> sample_times(double t0, double tau_max, int samples) {
    if (!(t0 > 0.0) || !(tau_max > 0.0) || samples < 1) {
        throw ConfigError("need t0 > 0, tau_max > 0 and at least one sample");
    }
    std::vector<double> t;
    for (int k = 1; k <= samples; ++k) t.push_back(t0 * std::exp(tau_max * k / samples));
    return t;
}

Run cmd_evolve(const Options& o, const WeightFunction& w) {
    const Resolved r = resolve(o);
    const LogGrid grid{o.grid.r_in, o.grid.r_out, o.grid.nodes};
    const EvolveConfig cfg = evolve_config(o.step);
    std::function<double(double, double)> exact;
    RadialField u;
    if (o.data == "selfsimilar") {
        auto base = std::make_shared<const Profile>(build_profile(r.p, r.popt));
        const SelfSimilar V(base, lambda_for_eta(r.p, base->eta_origin, o.A0));
        exact = [V](double x, double t) { return V.V(x, t); };
        u = make_self_similar_field(V, o.t0, grid);
    } else if (o.data == "barenblatt") {
        const Barenblatt B{r.p.n, r.p.m, o.bk, o.bT};
        exact = [B](double x, double t) { return B(x, t); };
        u = B.field(o.t0, grid);
    } else {
        throw ConfigError("--data must be selfsimilar or barenblatt");
    }
    const double ab0 = aronson_benilan_margin(u);
    EvolveStats st;
    std::string csv = std::string(kSeriesHeader) + "\n";
    auto record = [&](const RadialField& f) {
        std::vector<double> e(f.r.size());
        double sup = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            e[i] = exact(f.r[i], f.t);
            if (f.r[i] >= o.compact_lo && f.r[i] <= o.compact_hi) sup = std::max(sup, std::abs(f.u[i] - e[i]) / e[i]);
        }
        const double d = weighted_l1_distance(w, f.r, f.u, e);
        csv += csv_row({f.t, std::log(f.t / o.t0), d, sup});
        return std::make_pair(d, sup);
    };
    auto last = record(u);
    for (double t : sample_times(o.t0, o.tau_max, o.samples)) {
        u = evolve(std::move(u), cfg, t, &st);
        last = record(u);
    }
    ordered_json summary{{"data", o.data},
                         {"t_end", u.t},
                         {"dist_L1w_end", last.first},
                         {"dist_sup_compact_end", last.second},
                         {"initial_ab_margin", ab0},
                         {"stats", stats_json(st)}};
    Run run;
    run.artifacts = {{"evolve.csv", csv}, {"evolve.json", dump(summary)}};
    run.manifest["config"] = {{"data", o.data}, {"A0", o.A0}, {"k", o.bk}, {"T", o.bT}, {"t0", o.t0},
                              {"tau_max", o.tau_max}, {"samples", o.samples},
                              {"compact_lo", o.compact_lo}, {"compact_hi", o.compact_hi}};
    run.manifest["evolve_config"] = evolve_config_json(cfg);
    run.manifest["grid"] = grid_json(grid);
    return run;
}

Run cmd_contract(const Options& o, const WeightFunction& w) {
    const Resolved r = resolve(o);
    if (o.pairs < 1) throw ConfigError("--pairs must be at least 1");
    if (!(o.A1 > 0.0 && o.A1 < o.A2)) throw ConfigError("need 0 < A1 < A2");
    const LogGrid grid{o.grid.r_in, o.grid.r_out, o.grid.nodes};
    const EvolveConfig cfg = evolve_config(o.step);
    auto base = std::make_shared<const Profile>(build_profile(r.p, r.popt));
    const Sandwich s{SelfSimilar(base, lambda_for_eta(r.p, base->eta_origin, o.A1)),
                     SelfSimilar(base, lambda_for_eta(r.p, base->eta_origin, o.A2))};
    const auto times = sample_times(o.t0, o.tau_max, o.samples);
    std::mt19937_64 rng(o.seed);
    std::string csv = std::string(kSeriesHeader) + ",pair,dist_pos_L1w\n";
    ordered_json pairs = ordered_json::array();
    for (int k = 0; k < o.pairs; ++k) {
        const RadialField u = random_sandwiched_field(s, o.t0, grid, RandomDataSpec{}, rng);
        const RadialField v = random_sandwiched_field(s, o.t0, grid, RandomDataSpec{}, rng);
        const ContractionResult res = contraction_experiment(u, v, w, times, cfg, s, o.compact_lo, o.compact_hi);
        double inc_abs = -1e300, inc_pos = -1e300;
        for (std::size_t i = 0; i < res.t.size(); ++i) {
            csv += csv_row({res.t[i], std::log(res.t[i] / o.t0), res.dist_abs[i], res.dist_sup_compact[i],
                            static_cast<double>(k), res.dist_pos[i]});
            if (i > 0) {
                inc_abs = std::max(inc_abs, (res.dist_abs[i] - res.dist_abs[i - 1]) / (1.0 + res.dist_abs[0]));
                inc_pos = std::max(inc_pos, (res.dist_pos[i] - res.dist_pos[i - 1]) / (1.0 + res.dist_pos[0]));
            }
        }
        pairs.push_back({{"pair", k},
                         {"dist_L1w_initial", res.dist_abs.front()},
                         {"dist_L1w_end", res.dist_abs.back()},
                         {"dist_pos_L1w_initial", res.dist_pos.front()},
                         {"dist_pos_L1w_end", res.dist_pos.back()},
                         {"max_rel_increment", inc_abs},
                         {"max_rel_increment_pos", inc_pos},
                         {"max_sandwich_violation", res.max_sandwich_violation},
                         {"initial_ab_margin", {res.initial_ab_margin_u, res.initial_ab_margin_v}},
                         {"ab_max_excess", std::max({res.stats_u.ab_max_excess, res.stats_v.ab_max_excess,
                                                     res.stats_barriers.ab_max_excess})}});
    }
    Run run;
    run.artifacts = {{"contract.csv", csv}, {"contract.json", dump(ordered_json{{"pairs", pairs}})}};
    run.manifest["config"] = {{"pairs", o.pairs}, {"seed", o.seed}, {"A1", o.A1}, {"A2", o.A2}, {"t0", o.t0},
                              {"tau_max", o.tau_max}, {"samples", o.samples},
                              {"compact_lo", o.compact_lo}, {"compact_hi", o.compact_hi}};
    run.manifest["evolve_config"] = evolve_config_json(cfg);
    run.manifest["grid"] = grid_json(grid);
    return run;
}

Run cmd_converge(const Options& o, const WeightFunction& w) {
    const Resolved r = resolve(o);
    if (!(o.bump_center > 0.0) || !(o.bump_width > 0.0)) throw ConfigError("bump center and width must be positive");
    if (!(o.y_min > 0.0) || !(o.y_max > o.y_min) || o.y_nodes < 7) {
        throw ConfigError("y grid needs 0 < y_min < y_max and at least 7 nodes");
    }
    auto base = std::make_shared<const Profile>(build_profile(r.p, r.popt));
    ConvergenceSpec cs;
    cs.A0 = o.A0;
    cs.A1 = o.A1;
    cs.A2 = o.A2;
    cs.t0 = o.t0;
    cs.amplitude = o.amplitude;
    cs.bump = {std::log(o.bump_center), o.bump_width};
    cs.grid = {o.grid.r_in, o.grid.r_out, o.grid.nodes};
    cs.tau.push_back(0.0);
    for (double t : sample_times(o.t0, o.tau_max, o.samples)) cs.tau.push_back(std::log(t / o.t0));
    for (int j = 0; j < o.y_nodes; ++j) cs.y.push_back(o.y_min * std::pow(o.y_max / o.y_min, j / (o.y_nodes - 1.0)));
    cs.compact_lo = o.compact_lo;
    cs.compact_hi = o.compact_hi;
    const EvolveConfig cfg = evolve_config(o.step);
    const ConvergenceResult res = convergence_experiment(base, cs, w, cfg);

    std::string csv = std::string(kSeriesHeader) + ",rel_L1w\n";
    for (std::size_t k = 0; k < res.tau.size(); ++k) {
        csv += csv_row({o.t0 * std::exp(res.tau[k]), res.tau[k], res.dist_L1w[k], res.dist_sup_compact[k],
                        res.rel_L1w[k]});
    }
    ordered_json summary{{"lambda0", res.lambda0},
                         {"lambda1", res.lambda1},
                         {"lambda2", res.lambda2},
                         {"norm_f", res.norm_f},
                         {"dist_L1w_initial", res.dist_L1w.front()},
                         {"dist_L1w_end", res.dist_L1w.back()},
                         {"rel_L1w_max", *std::max_element(res.rel_L1w.begin(), res.rel_L1w.end())},
                         {"max_sandwich_violation", res.max_sandwich_violation},
                         {"initial_ab_margin", res.initial_ab_margin},
                         {"stats", stats_json(res.stats)},
                         {"stats_barriers", stats_json(res.stats_barriers)}};
    Run run;
    run.artifacts = {{"converge.csv", csv}, {"converge.json", dump(summary)}};
    run.manifest["config"] = {{"A0", o.A0}, {"A1", o.A1}, {"A2", o.A2}, {"t0", o.t0},
                              {"tau_max", o.tau_max}, {"samples", o.samples},
                              {"amplitude", o.amplitude}, {"bump_center", o.bump_center},
                              {"bump_width", o.bump_width}, {"y_min", o.y_min}, {"y_max", o.y_max},
                              {"y_nodes", o.y_nodes}, {"compact_lo", o.compact_lo}, {"compact_hi", o.compact_hi}};
    run.manifest["evolve_config"] = evolve_config_json(cfg);
    run.manifest["grid"] = grid_json(cs.grid);
    return run;
}

void add_param_flags(CLI::App* sub, ParamFlags& pf) {
    sub->add_option("--params", pf.file, "JSON parameter block {n, m, gamma, rho1, eta_inf, b1_margin}");
    sub->add_option("--n", pf.n, "dimension");
    sub->add_option("--m", pf.m, "diffusion exponent");
    sub->add_option("--gamma", pf.gamma, "origin singularity exponent");
    sub->add_option("--rho1", pf.rho1, "origin rate parameter (default 1)");
    sub->add_option("--eta-inf", pf.eta_inf, "far-field coefficient of the base profile (default 1)");
    sub->add_option("--b1-margin", pf.b1_margin, "b1 = b0 (1 + margin) (default 0.05)");
}

void add_pde_flags(CLI::App* sub, Options& o) {
    sub->add_option("--r-in", o.grid.r_in, "inner radius")->capture_default_str();
    sub->add_option("--r-out", o.grid.r_out, "outer radius")->capture_default_str();
    sub->add_option("--nodes", o.grid.nodes, "grid nodes")->capture_default_str();
    sub->add_option("--dt-init", o.step.dt_init, "initial step")->capture_default_str();
    sub->add_option("--dt-max", o.step.dt_max, "largest step")->capture_default_str();
    sub->add_option("--dt-max-rel", o.step.dt_max_rel, "largest step relative to t")->capture_default_str();
    sub->add_option("--dt-min", o.step.dt_min, "smallest step before giving up")->capture_default_str();
    sub->add_option("--newton-tol", o.step.newton_tol, "Newton tolerance")->capture_default_str();
    sub->add_option("--t0", o.t0, "initial time")->capture_default_str();
    sub->add_option("--tau-max", o.tau_max, "final log(t/t0)")->capture_default_str();
    sub->add_option("--samples", o.samples, "sample times after t0")->capture_default_str();
    sub->add_option("--mu", o.mu, "weight exponent")->capture_default_str();
    sub->add_option("--compact-lo", o.compact_lo, "compact range for the sup distance")->capture_default_str();
    sub->add_option("--compact-hi", o.compact_hi, "compact range for the sup distance")->capture_default_str();
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return kExitConfig;
        case ErrorKind::Numerical: return kExitNumerical;
        case ErrorKind::Invariant: return kExitInvariant;
    }
    return kExitNumerical;
}

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Invariant: return "invariant";
    }
    return "numerical";
}

int fail(std::ostream& err, const std::string& command, const std::string& name, const std::string& kind,
         const std::string& message, int code) {
    ordered_json rec{{"error", name}, {"kind", kind}, {"message", message}, {"command", command}, {"exit_code", code}};
    err << rec.dump() << "\n";
    return code;
}

void write_artifacts(const std::filesystem::path& dir, const std::vector<Artifact>& artifacts) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& a : artifacts) {
        std::ofstream f(dir / a.name, std::ios::binary);
        f << a.content;
        if (!f) throw ConfigError("cannot write " + (dir / a.name).string());
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Singular self-similar profiles of fast diffusion and radial PDE experiments", "fdx"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.add_option("--out", o.out, "output directory (FDX_OUT overrides)")->capture_default_str();

    auto* profile = app.add_subcommand("profile", "build a profile; CSV and summary JSON");
    add_param_flags(profile, o.params);
    profile->add_option("--eta", o.eta, "target origin coefficient lim r^gamma f (default: base profile)");
    profile->add_option("--r-lo", o.r_lo, "residual range")->capture_default_str();
    profile->add_option("--r-hi", o.r_hi, "residual range")->capture_default_str();
    profile->add_option("--stride", o.stride, "write every stride-th node")->capture_default_str();

    auto* expansion = app.add_subcommand("expansion", "origin expansion and consistency residuals");
    add_param_flags(expansion, o.params);
    expansion->add_option("--eta", o.eta, "origin coefficient (default 1)");
    expansion->add_option("--r-lo", o.r_lo, "residual range")->capture_default_str();
    expansion->add_option("--r-hi", o.r_hi, "residual range")->capture_default_str();

    auto* weight = app.add_subcommand("weight", "weight phi_mu on a log grid");
    weight->add_option("--mu", o.w_mu, "exponent in (0, n-2)")->required();
    weight->add_option("--n", o.w_n, "dimension")->required();
    weight->add_option("--quad-tol", o.quad_tol, "quadrature tolerance")->capture_default_str();
    weight->add_option("--r-min", o.w_rmin, "smallest sampled radius")->capture_default_str();
    weight->add_option("--r-max", o.w_rmax, "largest sampled radius")->capture_default_str();
    weight->add_option("--nodes", o.w_nodes, "sampled radii")->capture_default_str();

    auto* evolve_cmd = app.add_subcommand("evolve", "evolve exact-solution data and track the error");
    add_param_flags(evolve_cmd, o.params);
    add_pde_flags(evolve_cmd, o);
    evolve_cmd->add_option("--data", o.data, "selfsimilar or barenblatt")->capture_default_str();
    evolve_cmd->add_option("--A0", o.A0, "origin amplitude of V_lambda")->capture_default_str();
    evolve_cmd->add_option("--k", o.bk, "Barenblatt k")->capture_default_str();
    evolve_cmd->add_option("--T", o.bT, "Barenblatt extinction time")->capture_default_str();

    auto* contract = app.add_subcommand("contract", "weighted L1 contraction for random sandwiched pairs");
    add_param_flags(contract, o.params);
    add_pde_flags(contract, o);
    contract->add_option("--pairs", o.pairs, "number of pairs")->capture_default_str();
    contract->add_option("--seed", o.seed, "random seed")->capture_default_str();
    contract->add_option("--A1", o.A1, "lower barrier origin amplitude")->capture_default_str();
    contract->add_option("--A2", o.A2, "upper barrier origin amplitude")->capture_default_str();

    auto* converge = app.add_subcommand("converge", "rescaled solution against f_lambda0");
    add_param_flags(converge, o.params);
    add_pde_flags(converge, o);
    converge->add_option("--A0", o.A0, "origin amplitude of f_lambda0")->capture_default_str();
    converge->add_option("--A1", o.A1, "lower barrier origin amplitude")->capture_default_str();
    converge->add_option("--A2", o.A2, "upper barrier origin amplitude")->capture_default_str();
    converge->add_option("--amplitude", o.amplitude, "relative bump on the initial data")->capture_default_str();
    converge->add_option("--bump-center", o.bump_center, "bump center in r")->capture_default_str();
    converge->add_option("--bump-width", o.bump_width, "bump half-width in log r")->capture_default_str();
    converge->add_option("--y-min", o.y_min, "rescaled grid")->capture_default_str();
    converge->add_option("--y-max", o.y_max, "rescaled grid")->capture_default_str();
    converge->add_option("--y-nodes", o.y_nodes, "rescaled grid")->capture_default_str();

    // Per-command step defaults before parsing so that flags override them.
    contract->preparse_callback([&o](std::size_t) { o.step.dt_max_rel = 1e-2; });

    std::string command;
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        if (!app.get_subcommands().empty()) command = app.get_subcommands().front()->get_name();
        return fail(err, command, "ConfigError", "config", e.what(), kExitConfig);
    }
    command = app.get_subcommands().front()->get_name();

    try {
        Run run;
        std::unique_ptr<WeightFunction> w;
        if (command != "weight") w = std::make_unique<WeightFunction>(build_weight({o.mu, o.params.n.value_or(3)}));
        if (command == "profile") run = cmd_profile(o);
        else if (command == "expansion") run = cmd_expansion(o);
        else if (command == "weight") run = cmd_weight(o);
        else if (command == "evolve") run = cmd_evolve(o, *w);
        else if (command == "contract") run = cmd_contract(o, *w);
        else run = cmd_converge(o, *w);

        ordered_json manifest;
        manifest["command"] = command;
        manifest["version"] = kVersion;
        if (command != "weight") {
            double eta_inf = 1.0, b1_margin = 0.05;
            const ParamSet p = resolve_params(o.params, eta_inf, b1_margin);
            manifest["params"] = params_json(p);
            manifest["params"]["eta_inf"] = eta_inf;
            manifest["params"]["b1_margin"] = b1_margin;
            manifest["derived"] = derived_constants(p, eta_inf, b1_margin, w.get());
        }
        for (auto& [k, v] : run.manifest.items()) manifest[k] = v;
        ordered_json names = ordered_json::array();
        for (const auto& a : run.artifacts) names.push_back(a.name);
        manifest["artifacts"] = names;
        run.artifacts.push_back({command + "_manifest.json", dump(manifest)});

        std::filesystem::path dir = o.out;
        if (const char* env = std::getenv("FDX_OUT"); env && *env) dir = env;
        write_artifacts(dir, run.artifacts);
        for (const auto& a : run.artifacts) out << (dir / a.name).string() << "\n";
        return kExitOk;
    } catch (const Error& e) {
        return fail(err, command, e.name(), kind_name(e.kind()), e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
        return fail(err, command, "InternalError", "invariant", e.what(), kExitInvariant);
    }
}

}  // namespace fdx::cli
