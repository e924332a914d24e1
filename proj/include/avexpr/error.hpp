#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace avexpr {

// Base for every error raised by the toolkit. `kind()` is a short stable tag
// used by the CLI when printing machine-parsable error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string_view kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  std::string_view kind() const noexcept { return kind_; }

 private:
  std::string_view kind_;
};

// Bad magic, unsupported version, unknown flag bits.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

// Header and payload disagree: truncation, trailing bytes, bad field values.
class CorruptionError : public Error {
 public:
  explicit CorruptionError(const std::string& what) : Error("corruption", what) {}
};

// A value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

// Numerical failure during optimization (non-finite loss).
class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& what) : Error("training", what) {}
};

}  // namespace avexpr
