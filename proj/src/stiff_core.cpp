#include "stiff_core.hpp"

#include <boost/numeric/odeint.hpp>
#include <boost/numeric/ublas/matrix.hpp>
#include <boost/numeric/ublas/vector.hpp>

#include <algorithm>
#include <cmath>
#include <utility>

namespace fdx::numerics::detail {

namespace odeint = boost::numeric::odeint;
namespace ublas = boost::numeric::ublas;

namespace {

struct GuardTripped {
    std::string what;
};

}  // namespace

StiffRun rosenbrock_times(const StiffRhs& rhs, const StiffJac& jac_flat, std::vector<double> y0,
                          const std::vector<double>& times, double abs_tol, double rel_tol,
                          long max_steps, double dt0, double guard) {
    using Vec = ublas::vector<double>;
    using Mat = ublas::matrix<double>;
    const std::size_t dim = y0.size();

    // The explicit time derivative is not integrated to full order by this
    // stepper, so time rides along as an extra state component (tau' = 1) and
    // the system handed to odeint is autonomous.
    const std::size_t ext = dim + 1;
    auto sys = [&rhs, dim](const Vec& y, Vec& dy, double) {
        std::vector<double> ys(y.begin(), y.begin() + dim), d(dim);
        rhs(y[dim], ys, d);
        std::copy(d.begin(), d.end(), dy.begin());
        dy[dim] = 1.0;
    };
    auto jsys = [&jac_flat, dim, ext](const Vec& y, Mat& J, double, Vec& dfdt) {
        std::vector<double> ys(y.begin(), y.begin() + dim), flat(dim * dim), ft(dim, 0.0);
        jac_flat(y[dim], ys, flat, ft);
        for (std::size_t i = 0; i < ext; ++i) {
            for (std::size_t j = 0; j < ext; ++j) {
                J(i, j) = (i < dim && j < dim) ? flat[i * dim + j] : (i < dim ? ft[i] : 0.0);
            }
            dfdt[i] = 0.0;
        }
    };

    StiffRun out;
    out.t.reserve(times.size());
    out.y.reserve(times.size());
    auto observer = [&](const Vec& x, double t) {
        for (std::size_t i = 0; i < dim; ++i) {
            if (!std::isfinite(x[i]) || std::abs(x[i]) > guard) {
                throw GuardTripped{"state component " + std::to_string(i) +
                                   " exceeded the overflow guard at t=" + std::to_string(t)};
            }
        }
        out.t.push_back(t);
        out.y.emplace_back(x.begin(), x.begin() + dim);
    };

    Vec y(ext);
    std::copy(y0.begin(), y0.end(), y.begin());
    y[dim] = times.front();
    auto stepper = odeint::make_controlled(abs_tol, rel_tol, odeint::rosenbrock4<double>());
    try {
        out.steps = odeint::integrate_times(
            stepper, std::make_pair(sys, jsys), y, times.begin(), times.end(), dt0, observer,
            odeint::max_step_checker(static_cast<int>(std::min<long>(max_steps, 2'000'000'000L))));
    } catch (const GuardTripped& g) {
        out.status = StiffRun::Status::BlowUp;
        out.message = g.what;
    } catch (const odeint::odeint_error& e) {
        out.status = StiffRun::Status::StepFailure;
        out.message = e.what();
    }
    return out;
}

}  // namespace fdx::numerics::detail
