#pragma once

// Admissible parameter regime of the singular self-similar problem and the
// closed-form constants derived from it.

namespace fdx {

struct Exponents {
    double alpha;
    double beta;
};

/// Validated problem parameters. Construct through make_params().
struct ParamSet {
    int n = 3;
    double m = 0.2;
    double gamma = 4.0;
    double rho1 = 1.0;

    double alpha = 0.0;
    double beta = 0.0;
    double alphaP = 0.0;  // -alpha
    double betaP = 0.0;   // -beta

    /// n <= gamma < (n-2)/m, the regime in which rescaled solutions converge.
    bool convergence_regime = false;

    double critical_exponent() const { return (n - 2) / m; }  // (n-2)/m
    double pde_exponent() const { return 2.0 / (1.0 - m); }   // 2/(1-m)
    double origin_rate() const { return rho1 / betaP; }       // rho1/beta'
};

struct FPConstants {
    double C1, C2, C3, C4, C5;
    double eps1;
    double b0;
    double b1;
    double etaInf;
};

struct ExpansionConstants {
    double a1, a2, a3;
};

/// Throws DegenerateError when 2 - gamma(1-m) vanishes and RangeError when
/// n, m or gamma leave the admissible ranges.
Exponents derive_exponents(int n, double m, double gamma, double rho1 = 1.0);

ParamSet make_params(int n, double m, double gamma, double rho1 = 1.0);

/// C5 is fixed to its minimal admissible value C3/C2; b1 = b0 (1 + b1_margin).
FPConstants derive_fp_constants(const ParamSet& p, double etaInf,
                                double b1_margin = 0.05);

ExpansionConstants derive_expansion_constants(const ParamSet& p);

}  // namespace fdx
