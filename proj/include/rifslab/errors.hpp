#ifndef RIFSLAB_ERRORS_HPP
#define RIFSLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rifslab {

enum class ErrorCode {
    Validation,
    BudgetExceeded,
    InsufficientScales,
    InvalidWord,
    OutOfDomain,
    BoundExceeded,
    EpsTooLarge,
    NotInTypeSpace,
    SaturationTimeout,
    NotPrimitive,
    NoConvergence,
    NoEta,
    NoR,
    NotSupercritical,
    InvalidParameters,
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::Validation:         return "Validation";
        case ErrorCode::BudgetExceeded:     return "BudgetExceeded";
        case ErrorCode::InsufficientScales: return "InsufficientScales";
        case ErrorCode::InvalidWord:        return "InvalidWord";
        case ErrorCode::OutOfDomain:        return "OutOfDomain";
        case ErrorCode::BoundExceeded:      return "BoundExceeded";
        case ErrorCode::EpsTooLarge:        return "EpsTooLarge";
        case ErrorCode::NotInTypeSpace:     return "NotInTypeSpace";
        case ErrorCode::SaturationTimeout:  return "SaturationTimeout";
        case ErrorCode::NotPrimitive:       return "NotPrimitive";
        case ErrorCode::NoConvergence:      return "NoConvergence";
        case ErrorCode::NoEta:              return "NoEta";
        case ErrorCode::NoR:                return "NoR";
        case ErrorCode::NotSupercritical:   return "NotSupercritical";
        case ErrorCode::InvalidParameters:  return "InvalidParameters";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace rifslab

#endif
