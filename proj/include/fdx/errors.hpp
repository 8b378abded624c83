#pragma once

#include <stdexcept>
#include <string>

namespace fdx {

/// Broad failure class; the CLI maps each to its own exit code.
enum class ErrorKind {
    Config,     // malformed or out-of-range input
    Numerical,  // a solver or quadrature failed to deliver
    Invariant,  // a computed quantity broke a proven bound
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(what), kind_(kind), name_(std::move(name)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

#define FDX_DEFINE_ERROR(Type, Kind)                                   \
    class Type : public Error {                                        \
    public:                                                            \
        explicit Type(const std::string& what)                         \
            : Error(ErrorKind::Kind, #Type, what) {}                   \
    };

FDX_DEFINE_ERROR(ConfigError, Config)
FDX_DEFINE_ERROR(RangeError, Config)
FDX_DEFINE_ERROR(DegenerateError, Config)
FDX_DEFINE_ERROR(GridMismatchError, Config)
FDX_DEFINE_ERROR(SandwichViolationError, Config)

FDX_DEFINE_ERROR(QuadratureError, Numerical)
FDX_DEFINE_ERROR(StiffnessError, Numerical)
FDX_DEFINE_ERROR(BlowUpError, Numerical)
FDX_DEFINE_ERROR(NonContractionError, Numerical)
FDX_DEFINE_ERROR(ToleranceError, Numerical)
FDX_DEFINE_ERROR(ExtrapolationError, Numerical)
FDX_DEFINE_ERROR(ResolutionError, Numerical)
FDX_DEFINE_ERROR(NewtonDivergence, Numerical)

FDX_DEFINE_ERROR(InternalError, Invariant)
FDX_DEFINE_ERROR(BoundViolationError, Invariant)
FDX_DEFINE_ERROR(PositivityError, Invariant)

#undef FDX_DEFINE_ERROR

}  // namespace fdx
