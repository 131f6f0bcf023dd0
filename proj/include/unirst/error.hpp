#pragma once

#include <stdexcept>
#include <string>

namespace unirst {

// Bad or missing input data. The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parse failure carrying a location (element id, byte offset or
// JSON-pointer path) so diagnostics can point at the offending spot.
class ParseError : public InputError {
 public:
  ParseError(std::string location, const std::string& message)
      : InputError(location.empty() ? message : location + ": " + message),
        location_(std::move(location)) {}

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

// An internal invariant was violated (a bug, or a corrupt checkpoint).
// The CLI maps these to exit code 2.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace unirst
