#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace parsimony_threshold {

// Invalid parameters or inputs. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An index or depth outside the materialized range.
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A request that would exceed a configured memory or enumeration cap.
// The CLI maps these to exit code 2.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CoverError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MinimalityError : public ValidationError {
 public:
  MinimalityError(const std::string& what, std::uint64_t removable)
      : ValidationError(what), removable_(removable) {}

  // A member whose removal leaves the set covering.
  std::uint64_t removable_vertex() const noexcept { return removable_; }

 private:
  std::uint64_t removable_;
};

}  // namespace parsimony_threshold
