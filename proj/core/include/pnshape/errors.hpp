#pragma once

#include <stdexcept>
#include <string>

namespace pnshape {

/// Bad argument to a public operation (wrong length, out-of-range index, unsupported order).
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A domain invariant does not hold (energy, label bijectivity, coincident points).
class InvariantViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed document or config file. `path()` names the offending field.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

  private:
    std::string path_;
};

/// Monte-Carlo budget too small for the requested estimate.
class InsufficientSamples : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace pnshape
