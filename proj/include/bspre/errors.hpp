#pragma once

#include <stdexcept>
#include <string>

namespace bspre {

struct ArityMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidCodelet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what),
        line(line_no) {}
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyWindow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyActionSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownConcept : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadSlot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingChannel : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VersionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorruptSnapshot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bspre
