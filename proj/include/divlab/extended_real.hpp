// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace divlab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_pos_inf(double v) { return v == kInf; }

/// Result of comparing two extended-real quantities. A difference of two
/// infinite terms carries no information and is kept symbolic instead of
/// turning into NaN.
struct GapValue {
  enum class Kind { kFinite, kPlusInfinity, kMinusInfinity, kVacuous };

  Kind kind = Kind::kFinite;
  double value = 0.0;

  static GapValue finite(double v) { return {Kind::kFinite, v}; }
  static GapValue plus_infinity() { return {Kind::kPlusInfinity, kInf}; }
  static GapValue minus_infinity() { return {Kind::kMinusInfinity, -kInf}; }
  static GapValue vacuous() { return {Kind::kVacuous, 0.0}; }

  bool is_finite() const { return kind == Kind::kFinite; }
  bool is_vacuous() const { return kind == Kind::kVacuous; }

  /// Numeric view used for ranking; vacuous maps to NaN and must be filtered first.
  double numeric() const {
    switch (kind) {
      case Kind::kFinite: return value;
      case Kind::kPlusInfinity: return kInf;
      case Kind::kMinusInfinity: return -kInf;
      case Kind::kVacuous: return std::numeric_limits<double>::quiet_NaN();
    }
    return value;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::kFinite: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        return buf;
      }
      case Kind::kPlusInfinity: return "+inf";
      case Kind::kMinusInfinity: return "-inf";
      case Kind::kVacuous: return "vacuous";
    }
    return "?";
  }

  friend bool operator==(const GapValue& a, const GapValue& b) {
    return a.kind == b.kind && (a.kind != Kind::kFinite || a.value == b.value);
  }
};

/// a - b over [0, +inf]-valued terms (finite values may be any sign).
inline GapValue extended_difference(double a, double b) {
  const bool a_inf = is_pos_inf(a);
  const bool b_inf = is_pos_inf(b);
  if (a_inf && b_inf) return GapValue::vacuous();
  if (a_inf) return GapValue::plus_infinity();
  if (b_inf) return GapValue::minus_infinity();
  return GapValue::finite(a - b);
}

inline GapValue negate(GapValue g) {
  switch (g.kind) {
    case GapValue::Kind::kFinite: return GapValue::finite(-g.value);
    case GapValue::Kind::kPlusInfinity: return GapValue::minus_infinity();
    case GapValue::Kind::kMinusInfinity: return GapValue::plus_infinity();
    case GapValue::Kind::kVacuous: return g;
  }
  return g;
}

/// Two-sided score: -|g|, so that any deviation from zero reads as a violation.
inline GapValue two_sided(GapValue g) {
  switch (g.kind) {
    case GapValue::Kind::kFinite: return GapValue::finite(-std::abs(g.value));
    case GapValue::Kind::kPlusInfinity:
    case GapValue::Kind::kMinusInfinity: return GapValue::minus_infinity();
    case GapValue::Kind::kVacuous: return g;
  }
  return g;
}

}  // namespace divlab
