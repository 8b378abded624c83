#include "fdx/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fdx/errors.hpp"

namespace fdx {

namespace {

std::string describe(int n, double m, double gamma) {
    std::ostringstream os;
    os.precision(17);
    os << "(n=" << n << ", m=" << m << ", gamma=" << gamma << ")";
    return os.str();
}

}  // namespace

Exponents derive_exponents(int n, double m, double gamma, double rho1) {
    if (!(rho1 > 0.0) || !std::isfinite(rho1)) {
        throw RangeError("rho1 must be positive and finite");
    }
    if (n < 3) throw RangeError("dimension must satisfy n >= 3, got " + describe(n, m, gamma));
    const double mc = (n - 2.0) / n;
    if (!(m > 0.0 && m < mc)) {
        throw RangeError("diffusion exponent must satisfy 0 < m < (n-2)/n, got " +
                         describe(n, m, gamma));
    }
    const double denom = 2.0 - gamma * (1.0 - m);
    if (std::abs(denom) <= 8.0 * std::numeric_limits<double>::epsilon()) {
        throw DegenerateError("gamma = 2/(1-m) makes the self-similar exponents singular " +
                              describe(n, m, gamma));
    }
    if (!(gamma > 2.0 / (1.0 - m) && gamma < (n - 2.0) / m)) {
        throw RangeError("decay exponent must satisfy 2/(1-m) < gamma < (n-2)/m, got " +
                         describe(n, m, gamma));
    }
    const double beta = rho1 / denom;
    const double alpha = (2.0 * beta - rho1) / (1.0 - m);
    return {alpha, beta};
}

ParamSet make_params(int n, double m, double gamma, double rho1) {
    const auto [alpha, beta] = derive_exponents(n, m, gamma, rho1);
    ParamSet p;
    p.n = n;
    p.m = m;
    p.gamma = gamma;
    p.rho1 = rho1;
    p.alpha = alpha;
    p.beta = beta;
    p.alphaP = -alpha;
    p.betaP = -beta;
    p.convergence_regime = (gamma >= n) && (gamma < (n - 2.0) / m);
    return p;
}

FPConstants derive_fp_constants(const ParamSet& p, double etaInf, double b1_margin) {
    if (!(etaInf > 0.0) || !std::isfinite(etaInf)) {
        throw RangeError("eta_inf must be positive and finite");
    }
    if (!(b1_margin > 0.0)) throw RangeError("b1 margin must be positive");

    const double m = p.m;
    const double bp = p.betaP;
    FPConstants c{};
    c.etaInf = etaInf;
    // gamma = alpha/beta holds exactly by construction, so use gamma directly.
    c.C1 = p.critical_exponent() - p.gamma;
    c.C2 = p.rho1 / bp + (1.0 - m) * c.C1;
    c.C3 = (bp * c.C1 * std::pow(etaInf, 1.0 - m) + m) / c.C2;

    const double two_m = std::pow(2.0, m);
    const double eta_m = std::pow(etaInf, m);
    c.C4 = std::max({2.0 * c.C3 / c.C2,
                     two_m * bp * c.C1 / (eta_m * c.C2),
                     two_m * bp / (eta_m * c.C2 * c.C2) *
                         (bp * c.C1 * std::pow(etaInf, 1.0 - m) + c.C3 * c.C3)});
    c.C5 = c.C3 / c.C2;
    c.eps1 = 0.5 * std::min(1.0, etaInf);

    const double t1 = std::log(15.0 * c.C4);
    const double t2 = std::log((10.0 * etaInf + c.C3 + bp * std::pow(etaInf, 1.0 - m)) / c.C2);
    const double t3 = std::log((c.C3 + c.C5 * etaInf) / c.eps1);
    c.b0 = 4.0 / c.C2 * std::max({1.0, t1, t2, t3});
    c.b1 = c.b0 * (1.0 + b1_margin);

    if (!(c.C1 > 0.0 && c.C2 > 0.0)) {
        throw InternalError("contraction constants C1, C2 must be positive");
    }
    return c;
}

ExpansionConstants derive_expansion_constants(const ParamSet& p) {
    const double a = p.alpha;
    const double b = p.beta;
    const double r = p.rho1;
    ExpansionConstants e{};
    e.a1 = (2.0 * p.m * a - (p.n - 2.0) * b + r) / r;
    e.a2 = -(b * b) / r;
    e.a3 = (a * b * (p.n - 2.0) - p.m * a * a) / (r * r);
    if (!(e.a2 < 0.0)) throw InternalError("expansion constant a2 must be negative");
    if (!(e.a3 > 0.0)) throw InternalError("expansion constant a3 must be positive");
    return e;
}

}  // namespace fdx
