#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace vibronic {

using cdouble = std::complex<double>;
using cldouble = std::complex<long double>;

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or non-finite input values.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Malformed file content or configuration.
class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// Operation requested outside its region of validity
/// (e.g. third-order model evaluated off the Qy=0 slice).
class UnsupportedRegionError : public Error {
public:
    explicit UnsupportedRegionError(const std::string& msg) : Error(msg) {}
};

/// Branch-following could not assign eigenvectors unambiguously between two
/// consecutive points; carries the offending segment so callers can refine.
class TrackingError : public Error {
public:
    TrackingError(const std::string& msg, std::size_t segment)
        : Error(msg), segment_index(segment) {}
    std::size_t segment_index;
};

/// Fit problem is rank-deficient or lacks required data coverage.
class IllPosedError : public Error {
public:
    explicit IllPosedError(const std::string& msg) : Error(msg) {}
};

/// A numerical procedure failed to converge or hit a singular configuration.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

/// Loop passes through (or unacceptably close to) a degeneracy.
class InvalidLoopError : public Error {
public:
    explicit InvalidLoopError(const std::string& msg) : Error(msg) {}
};

}  // namespace vibronic
