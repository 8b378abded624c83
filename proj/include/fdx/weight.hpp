#pragma once

// Radial superharmonic weight phi_mu and weighted L1 distances.
//
// phi(r) = 1 - a4 \int_0^r s^{1-n} \int_0^s t^{n-1} eta1(t) dt ds, where eta1
// vanishes on [0,1], equals mu(n-2-mu) r^{-mu-2} on [2,inf) and is bridged by
// a C-infinity ramp in between. For r > 2 phi has the closed form
// a4 r^{2-n} (a5 - mu 2^{n-2-mu})/(n-2) + a4 r^{-mu}.

#include <span>
#include <vector>

namespace fdx {

struct BumpSpec {
    double mu = 0.5;
    int n = 3;

    void validate() const;
};

/// C-infinity ramp: 0 for x <= 0, 1 for x >= 1.
double smooth_ramp(double x);

/// The source term eta1(r) >= 0.
double eta1(const BumpSpec& spec, double r);

struct WeightEval {
    double phi;
    double dphi;
};

class WeightFunction {
public:
    static constexpr int kTableNodes = 4096;

    const BumpSpec& spec() const { return spec_; }
    double a4() const { return a4_; }
    double a5() const { return a5_; }
    double k0() const { return k0_; }
    /// Smallest tabulated radius beyond which the two-sided far-field bounds hold.
    double R0() const { return R0_; }
    double quad_tol() const { return quad_tol_; }

    WeightEval eval(double r) const;

    /// Table on [1, 2] (log-spaced); phi == 1 on [0, 1] and the closed form
    /// applies beyond 2.
    std::span<const double> table_r() const { return r_; }
    std::span<const double> table_phi() const { return phi_; }
    std::span<const double> table_dphi() const { return dphi_; }

private:
    friend WeightFunction build_weight(const BumpSpec&, double);

    BumpSpec spec_;
    double a4_ = 0.0, a5_ = 0.0, k0_ = 0.0, R0_ = 0.0, quad_tol_ = 0.0;
    double tail_coeff_ = 0.0;  // (a5 - mu 2^{n-2-mu}) / (n-2)
    double log_step_ = 0.0;
    std::vector<double> r_, phi_, dphi_;
    std::vector<double> src_int_;  // \int_1^r t^{n-1} eta1 at the table nodes
};

/// Throws QuadratureError if a quadrature misses quad_tol, RangeError for
/// mu outside (0, n-2).
WeightFunction build_weight(const BumpSpec& spec, double quad_tol = 1e-12);

inline WeightEval eval_weight(const WeightFunction& w, double r) { return w.eval(r); }

/// Surface area of the unit sphere in R^n.
double sphere_area(int n);

enum class DistanceMode { Abs, PositivePart };

/// \int |a-b| phi dx (or the positive part) over the annulus spanned by `r`,
/// with the radial measure omega_{n-1} r^{n-1} dr. Trapezoid rule in log r.
double weighted_l1_distance(const WeightFunction& w, std::span<const double> r,
                            std::span<const double> a, std::span<const double> b,
                            DistanceMode mode = DistanceMode::Abs);

/// \int |a| phi dx with the same rule.
double weighted_l1_norm(const WeightFunction& w, std::span<const double> r,
                        std::span<const double> a);

}  // namespace fdx
