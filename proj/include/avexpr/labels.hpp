#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "avexpr/error.hpp"

namespace avexpr {

inline constexpr int kNumClasses = 8;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Neutral", "Anger", "Disgust", "Fear", "Happiness", "Sadness", "Surprise", "Other"};

// One frame's expression annotation: a class code in [0, 8) or MISSING.
// The raw byte value doubles as the on-disk encoding (255 = MISSING).
class ExpressionLabel {
 public:
  static constexpr std::uint8_t kMissingCode = 255;

  constexpr ExpressionLabel() = default;  // MISSING

  constexpr explicit ExpressionLabel(int code) : code_(checked(code)) {}

  static constexpr ExpressionLabel missing() { return ExpressionLabel(); }

  static ExpressionLabel from_byte(std::uint8_t b) {
    if (b != kMissingCode && b >= kNumClasses) {
      throw CorruptionError("label byte " + std::to_string(b) + " outside {0..7, 255}");
    }
    ExpressionLabel l;
    l.code_ = b;
    return l;
  }

  constexpr bool is_missing() const noexcept { return code_ == kMissingCode; }
  constexpr std::uint8_t byte() const noexcept { return code_; }

  // Class index; throws on MISSING.
  int index() const {
    if (is_missing()) throw ValidationError("MISSING label has no class index");
    return code_;
  }

  std::string_view name() const { return is_missing() ? std::string_view("MISSING") : kClassNames[code_]; }

  friend constexpr bool operator==(ExpressionLabel, ExpressionLabel) = default;

 private:
  static constexpr std::uint8_t checked(int code) {
    if (code < 0 || code >= kNumClasses) throw ValidationError("expression code out of range");
    return static_cast<std::uint8_t>(code);
  }

  std::uint8_t code_ = kMissingCode;
};

inline constexpr ExpressionLabel kMissing{};

}  // namespace avexpr
