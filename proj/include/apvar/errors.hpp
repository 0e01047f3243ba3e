#pragma once

#include <stdexcept>
#include <string>

namespace apv {

// Requested work exceeds a configured ceiling (sieve limit, memory budget,
// precision cap).  The message names the limit and, where possible, the
// mode that would still work.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// An input value violates an operation's precondition.
struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A consumer asked for more precision than its inputs carry.  `required_digits`
// is the minimum the caller must supply to retry.
struct PrecisionError : std::runtime_error {
  int required_digits;
  PrecisionError(const std::string& what, int required)
      : std::runtime_error(what), required_digits(required) {}
};

// Malformed persistent data.  `line` is 1-based, 0 if not line-addressable.
struct SchemaError : std::runtime_error {
  long line;
  SchemaError(const std::string& what, long line_no)
      : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

}  // namespace apv
