#pragma once

#include <stdexcept>
#include <string>

namespace lcom {

/// Malformed text input (maps, scene files, CSV snapshots, config).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Bayesian update produced an all-zero posterior.
class ImpossibleEvidence : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lcom
