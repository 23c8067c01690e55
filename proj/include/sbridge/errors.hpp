#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sbridge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ModeError : public Error {
public:
    using Error::Error;
};

class DuplicateEntryError : public Error {
public:
    using Error::Error;
};

/// A sparse entry that is not in canonical form (zero or negative prior, wrong sign count).
class SparseFormatError : public Error {
public:
    using Error::Error;
};

/// Problem failed structural validation; message lists the violations.
class ValidationError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

/// No positive x solves a*x - b/x = c for the given coefficients.
class RootDomainError : public Error {
public:
    using Error::Error;
};

/// A constrained index has no active entries but a nonzero target, or a
/// classical marginal asks for mass on an empty row or column.
class InfeasibleStructureError : public Error {
public:
    InfeasibleStructureError(const std::string& what, std::size_t mode, std::size_t index)
        : Error(what), mode_(mode), index_(index) {}

    std::size_t mode() const noexcept { return mode_; }
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t mode_;
    std::size_t index_;
};

class AbsoluteContinuityError : public Error {
public:
    using Error::Error;
};

class UniformityError : public Error {
public:
    using Error::Error;
};

class InvalidHypergraphError : public Error {
public:
    using Error::Error;
};

/// Trace window contains an exact zero residual; the run already converged.
class RateUndefined : public Error {
public:
    using Error::Error;
};

class OracleFailed : public Error {
public:
    using Error::Error;
};

/// Malformed input document. `field()` holds the JSON path of the offending value.
class DocumentError : public Error {
public:
    DocumentError(const std::string& field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace sbridge
