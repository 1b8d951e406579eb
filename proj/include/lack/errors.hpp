#pragma once

#include <stdexcept>
#include <string>

namespace lack {

// Argument outside the domain of an operation (negative time, probability
// outside [0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// E(D | D > t) requested where P(D > t) is numerically zero.
class ConditioningError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ComputationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested MOS floor cannot be met even without steganographic loss.
class QualityInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChunkingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Packet observed before it was sent.
class CausalityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lack
