#pragma once

#include <stdexcept>
#include <string>

namespace aptail {

// Bad argument values (outside the documented domain).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured size cap would be exceeded; `cap` names it.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(const std::string& cap, const std::string& what)
      : std::runtime_error(what + " (cap: " + cap + ")"), cap_(cap) {}
  const std::string& cap() const noexcept { return cap_; }

 private:
  std::string cap_;
};

// An operation's stated precondition does not hold for the given input.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aptail
