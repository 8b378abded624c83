#pragma once

// Rosenbrock-4 driver kept free of C++20 headers: ublas in Boost 1.74 relies on
// allocator members removed in C++20, so stiff_core.cpp builds as C++17.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace fdx::numerics::detail {

struct StiffRun {
    enum class Status { Ok, StepFailure, BlowUp };
    Status status = Status::Ok;
    std::string message;
    std::vector<double> t;
    std::vector<std::vector<double>> y;
    std::size_t steps = 0;
};

using StiffRhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;
using StiffJac = std::function<void(double, const std::vector<double>&, std::vector<double>&,
                                    std::vector<double>&)>;

StiffRun rosenbrock_times(const StiffRhs& rhs, const StiffJac& jac_flat, std::vector<double> y0,
                          const std::vector<double>& times, double abs_tol, double rel_tol,
                          long max_steps, double dt0, double guard);

}  // namespace fdx::numerics::detail
