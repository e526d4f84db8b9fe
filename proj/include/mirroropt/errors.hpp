#pragma once

#include <stdexcept>
#include <string>

namespace mirroropt {

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedPair : std::runtime_error {
  explicit UnsupportedPair(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NotStochastic : std::runtime_error {
  explicit NotStochastic(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleStart : std::runtime_error {
  explicit InfeasibleStart(const std::string& what) : std::runtime_error(what) {}
};

struct MissingOptimum : std::runtime_error {
  explicit MissingOptimum(const std::string& what) : std::runtime_error(what) {}
};

struct BadLabels : std::runtime_error {
  explicit BadLabels(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroGradientAtNonOptimum : std::runtime_error {
  explicit ZeroGradientAtNonOptimum(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalDivergence : std::runtime_error {
  explicit NumericalDivergence(const std::string& what) : std::runtime_error(what) {}
};

struct UnboundedSet : std::runtime_error {
  explicit UnboundedSet(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveMetric : std::runtime_error {
  explicit NonPositiveMetric(const std::string& what) : std::runtime_error(what) {}
};

struct IncompleteSpec : std::runtime_error {
  explicit IncompleteSpec(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mirroropt
