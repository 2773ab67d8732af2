#pragma once

#include <stdexcept>
#include <string>

namespace qvar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidMeshError : public Error { using Error::Error; };
class IncompatibleGridError : public Error { using Error::Error; };
class EllipticityError : public Error { using Error::Error; };
class SolverError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class StagnationError : public SolverError { using SolverError::SolverError; };
class MissingRegularizerError : public Error { using Error::Error; };
class OracleTooLargeError : public Error { using Error::Error; };
class InfeasibleError : public Error { using Error::Error; };
class OrderingViolationError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class NestingError : public Error { using Error::Error; };
class PreconditionError : public Error { using Error::Error; };

}  // namespace qvar
