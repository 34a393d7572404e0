#pragma once

#include <stdexcept>
#include <string>

namespace ilab {

/// Shapes of two objects (MDP, policy, dataset, table) disagree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric content violates a documented invariant or precondition.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A dataset shows two different actions at one (t, s) where a deterministic
/// expert was required.
class StochasticExpertError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The exact OPT solver refused an instance larger than its search budget.
class GuardExceededError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON / CSV / config input.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ilab
