/** \file    error.hpp
    \brief   Exception type shared by all isochrone modules
*/
#pragma once
#include <stdexcept>
#include <string>
#include <string_view>

namespace isochrone {

/// Failure categories reported by the library; the CLI maps them onto exit codes.
enum class ErrorKind {
    InvalidParams,
    OutOfDomain,
    SingularPoint,
    NoBoundOrbit,
    UnboundOrbit,
    NoCircularOrbit,
    ToleranceNotMet,
    StepSizeUnderflow,
    DomainExit
};

std::string_view toString(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message) :
        std::runtime_error(std::string(toString(kind)) + ": " + message), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
private:
    ErrorKind kind_;
};

}  // namespace isochrone
