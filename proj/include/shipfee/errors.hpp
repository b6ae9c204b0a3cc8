#pragma once

#include <stdexcept>
#include <string>

namespace shipfee {

// Invalid inputs: violated invariants, malformed configs, failed preconditions.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure did not reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// No truncation bound up to the hard cap meets the rejection threshold.
class CapacityInfeasibleError : public NumericalError {
 public:
  explicit CapacityInfeasibleError(const std::string& what) : NumericalError(what) {}
};

}  // namespace shipfee
