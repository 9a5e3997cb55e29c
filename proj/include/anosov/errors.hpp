#pragma once

#include <stdexcept>
#include <string>

namespace anosov {

// Bad inputs or parameters: malformed coefficient tables, out-of-range
// combinatorial requests, config schema violations. The CLI maps these to
// exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures discovered while computing: lost convergence, overflow guards,
// singular linear algebra. The CLI maps these to exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotHyperbolic : ValidationError {
  explicit NotHyperbolic(const std::string& msg) : ValidationError(msg) {}
};

struct NotUnimodular : ValidationError {
  explicit NotUnimodular(const std::string& msg) : ValidationError(msg) {}
};

struct NonOrthogonalEigenbasis : ValidationError {
  explicit NonOrthogonalEigenbasis(const std::string& msg) : ValidationError(msg) {}
};

struct TooLarge : ValidationError {
  explicit TooLarge(const std::string& msg) : ValidationError(msg) {}
};

struct BadNormalization : ValidationError {
  explicit BadNormalization(const std::string& msg) : ValidationError(msg) {}
};

struct InvalidCut : ValidationError {
  explicit InvalidCut(const std::string& msg) : ValidationError(msg) {}
};

struct ZeroStep : ValidationError {
  explicit ZeroStep(const std::string& msg) : ValidationError(msg) {}
};

struct ExponentOverflow : NumericError {
  explicit ExponentOverflow(const std::string& msg) : NumericError(msg) {}
};

struct SingularJacobian : NumericError {
  explicit SingularJacobian(const std::string& msg) : NumericError(msg) {}
};

struct NoConvergence : NumericError {
  explicit NoConvergence(const std::string& msg) : NumericError(msg) {}
};

struct RadiusExceeded : NumericError {
  explicit RadiusExceeded(const std::string& msg) : NumericError(msg) {}
};

struct ZeroDenominator : NumericError {
  explicit ZeroDenominator(const std::string& msg) : NumericError(msg) {}
};

}  // namespace anosov
