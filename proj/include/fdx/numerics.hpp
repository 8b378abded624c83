#pragma once

// Shared kernels: adaptive ODE integration (explicit and linearly implicit)
// and adaptive Gauss-Kronrod quadrature, each with an explicit tolerance
// contract.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fdx::numerics {

struct Tolerances {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    long max_steps = 20'000'000;

    void validate() const;
};

/// Any state component beyond this magnitude is treated as blow-up.
inline constexpr double kOverflowGuard = 1e12;

using State = std::vector<double>;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;
/// Fills the row-major Jacobian d(rhs)/dy (size dim*dim) and the explicit
/// time derivative d(rhs)/dt.
using JacobianFn =
    std::function<void(double t, const State& y, std::vector<double>& jac, State& dfdt)>;

/// States at the requested sample times. Steps land exactly on every sample,
/// so no interpolation error enters the samples.
struct Trajectory {
    std::vector<double> t;
    std::vector<State> y;
    std::size_t steps = 0;

    double value(std::size_t sample, std::size_t component) const {
        return y[sample][component];
    }
};

/// Embedded Dormand-Prince 5(4) with step acceptance by error estimate.
/// `times` must be strictly monotone (either direction); times[0] is the
/// initial time. Throws StiffnessError when the step size collapses or the
/// step budget is exhausted, BlowUpError past kOverflowGuard or on NaN.
Trajectory integrate_ode(const Rhs& rhs, State y0, std::span<const double> times,
                         const Tolerances& tol);

/// Same contract, Rosenbrock-4 stepper for stiff problems.
Trajectory integrate_stiff_ode(const Rhs& rhs, const JacobianFn& jac, State y0,
                               std::span<const double> times, const Tolerances& tol);

/// Adaptive Gauss-Kronrod 7/15 on [a, b]; b may be +infinity. Guarantees an
/// estimated error <= tol * (1 + |result|) or throws QuadratureError.
double quad_adaptive(const std::function<double(double)>& f, double a, double b, double tol);

/// Known decay law of an integrand beyond a cut point.
struct TailModel {
    enum class Kind { Power, Exponential } kind;
    double rate;  // f ~ x^{-rate} (rate > 1) or f ~ e^{-rate x} (rate > 0)
};

/// Integral over [a, inf): quadrature on [a, X] plus the analytic tail of the
/// supplied model at X. X is pushed out until two successive cuts agree.
double quad_with_tail(const std::function<double(double)>& f, double a, TailModel tail,
                      double tol);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int points);

/// Six-point Lagrange interpolation of samples y_i = y(x0 + i dx), stencil
/// centered on the containing cell and clamped at the ends. x outside the
/// sampled range is extrapolated from the end stencil.
double lagrange6(std::span<const double> y, double x0, double dx, double x);

/// Lagrange weights for the stencil x0+first*dx .. x0+(first+5)*dx at x.
void lagrange6_weights(double t, int first, double out[6]);

struct CentralDiff {
    double d1, d2;
};
/// Eighth-order central first and second derivatives at interior node i
/// (needs i-4 .. i+4).
CentralDiff central_diff8(std::span<const double> y, std::size_t i, double h);

}  // namespace fdx::numerics
