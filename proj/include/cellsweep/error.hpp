#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cellsweep {

// Domain error carrying a stable symbolic name (e.g. "BoundsError") next to
// the human-readable message. The CLI prints the name on stderr and exits 1;
// tests match on name() instead of message text.
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& message)
      : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
};

// Parse failure with a byte offset into the offending input.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, const std::string& reason)
      : Error("ParseError", "offset " + std::to_string(offset) + ": " + reason),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

} // namespace cellsweep
