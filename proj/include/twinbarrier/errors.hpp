#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace twinbarrier {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class EnergyOutOfRange : public Error { public: using Error::Error; };
class WavenumberOutOfRange : public Error { public: using Error::Error; };
class NumericalOverflow : public Error { public: using Error::Error; };
class SingularMatching : public Error { public: using Error::Error; };
class ResonanceSingularity : public Error { public: using Error::Error; };
class IndexError : public Error { public: using Error::Error; };
class QuadratureNotConverged : public Error { public: using Error::Error; };
class DetectorOutOfGrid : public Error { public: using Error::Error; };
class NoPeaksFound : public Error { public: using Error::Error; };
class DegenerateDistribution : public Error { public: using Error::Error; };
class EmptyRegion : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

/// Carries the dotted path of the offending configuration field.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace twinbarrier
