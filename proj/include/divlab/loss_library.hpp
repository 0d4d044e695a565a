// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Loss functions for shortfall risk, utility functions for optimized
// certainty equivalents, and their convex conjugates on [0, inf).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "divlab/error.hpp"
#include "divlab/extended_real.hpp"

namespace divlab {

/// Conjugate of a piecewise-linear convex function, stored as the max of the
/// affine maps y -> slope_k * y + intercept_k. Outside [lower, upper] the
/// conjugate is +inf (the function grows linearly there).
class ConjugateTable {
 public:
  ConjugateTable() = default;

  /// Knots (x_k, f(x_k)) with strictly increasing x_k; the slopes outside the
  /// knot range bound the conjugate's effective domain.
  ConjugateTable(std::vector<double> xs, std::vector<double> ys, double left_slope, double right_slope)
      : slopes_(std::move(xs)), lower_(left_slope), upper_(right_slope) {
    intercepts_.reserve(ys.size());
    for (double y : ys) intercepts_.push_back(-y);
  }

  double operator()(double y) const {
    constexpr double kEdge = 1e-12;
    if (y < lower_ - kEdge || y > upper_ + kEdge) return kInf;
    double best = -kInf;
    for (std::size_t k = 0; k < slopes_.size(); ++k) best = std::max(best, slopes_[k] * y + intercepts_[k]);
    return best;
  }

  const std::vector<double>& slopes() const { return slopes_; }
  const std::vector<double>& intercepts() const { return intercepts_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  std::vector<double> slopes_;
  std::vector<double> intercepts_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

/// Convex piecewise-linear function through tabulated knots, extended
/// linearly beyond the first and last knot.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys, double left_slope, double right_slope)
      : xs_(std::move(xs)), ys_(std::move(ys)), left_slope_(left_slope), right_slope_(right_slope) {
    if (xs_.size() != ys_.size() || xs_.size() < 2) {
      throw Error(ErrorCode::kInvalidFunction, "custom function needs at least two matching knots");
    }
    for (std::size_t i = 1; i < xs_.size(); ++i) {
      if (!(xs_[i] > xs_[i - 1])) throw Error(ErrorCode::kInvalidFunction, "knots must increase strictly");
    }
  }

  /// End slopes taken from the first and last segments.
  static PiecewiseLinear from_knots(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
      throw Error(ErrorCode::kInvalidFunction, "custom function needs at least two matching knots");
    }
    const std::size_t n = xs.size();
    const double left = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    const double right = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
    return PiecewiseLinear(std::move(xs), std::move(ys), left, right);
  }

  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front() + left_slope_ * (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + right_slope_ * (x - xs_.back());
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    const double t = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return ys_[j - 1] + t * (ys_[j] - ys_[j - 1]);
  }

  /// Right derivative.
  double derivative(double x) const {
    if (x < xs_.front()) return left_slope_;
    if (x >= xs_.back()) return right_slope_;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    return (ys_[j] - ys_[j - 1]) / (xs_[j] - xs_[j - 1]);
  }

  ConjugateTable conjugate() const { return ConjugateTable(xs_, ys_, left_slope_, right_slope_); }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  double left_slope() const { return left_slope_; }
  double right_slope() const { return right_slope_; }

 private:
  std::vector<double> xs_, ys_;
  double left_slope_ = 0.0, right_slope_ = 0.0;
};

/// Symmetric log-spaced grid on [-bound, bound] including 0.
inline std::vector<double> log_spaced_grid(double bound = 50.0, std::size_t per_side = 200,
                                           double smallest = 1e-4) {
  std::vector<double> pos;
  const double ratio = std::pow(bound / smallest, 1.0 / static_cast<double>(per_side - 1));
  double v = smallest;
  for (std::size_t i = 0; i < per_side; ++i, v *= ratio) pos.push_back(std::min(v, bound));
  std::vector<double> grid;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
  grid.push_back(0.0);
  grid.insert(grid.end(), pos.begin(), pos.end());
  return grid;
}

/// Tabulates an arbitrary convex function on the log-spaced grid.
inline PiecewiseLinear tabulate(const std::function<double(double)>& fn, double bound = 50.0,
                                std::size_t per_side = 200) {
  auto xs = log_spaced_grid(bound, per_side);
  std::vector<double> ys;
  ys.reserve(xs.size());
  for (double x : xs) ys.push_back(fn(x));
  return PiecewiseLinear::from_knots(std::move(xs), std::move(ys));
}

/// Uniform validation grid.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

namespace detail {

// Monotone and convex on the grid, up to relative slack.
inline void check_convex_nondecreasing(const std::function<double(double)>& fn,
                                       std::span<const double> grid, const char* what) {
  std::vector<double> v;
  v.reserve(grid.size());
  for (double x : grid) v.push_back(fn(x));
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double slack = 1e-12 * std::max(1.0, std::abs(v[i]));
    if (v[i] < v[i - 1] - slack) {
      throw Error(ErrorCode::kInvalidFunction, std::string(what) + " decreases near x=" + std::to_string(grid[i]));
    }
  }
  for (std::size_t i = 2; i < grid.size(); ++i) {
    const double s1 = (v[i - 1] - v[i - 2]) / (grid[i - 1] - grid[i - 2]);
    const double s2 = (v[i] - v[i - 1]) / (grid[i] - grid[i - 1]);
    if (s2 < s1 - 1e-9 * std::max(1.0, std::abs(s1))) {
      throw Error(ErrorCode::kInvalidFunction, std::string(what) + " not convex near x=" + std::to_string(grid[i - 1]));
    }
  }
}

}  // namespace detail

/// Nondecreasing convex loss with l(0) = 1 < l(x) for x > 0.
class LossFn {
 public:
  enum class Kind { kExponential, kPowerPlus, kCustom };

  /// l(x) = exp(eta x).
  static LossFn exponential(double eta) {
    if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidSpec, "exponential loss needs eta > 0");
    LossFn l;
    l.kind_ = Kind::kExponential;
    l.param_ = eta;
    return l;
  }

  /// l(x) = ((1 + x)_+)^p.
  static LossFn power_plus(double p) {
    if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidSpec, "power_plus loss needs p >= 1");
    LossFn l;
    l.kind_ = Kind::kPowerPlus;
    l.param_ = p;
    return l;
  }

  static LossFn custom(PiecewiseLinear table) {
    LossFn l;
    l.kind_ = Kind::kCustom;
    l.table_ = std::move(table);
    l.conj_ = l.table_.conjugate();
    l.validate();
    return l;
  }

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  const PiecewiseLinear& table() const { return table_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::kExponential: return std::exp(param_ * x);
      case Kind::kPowerPlus: return std::pow(std::max(1.0 + x, 0.0), param_);
      case Kind::kCustom: return table_(x);
    }
    return 0.0;
  }

  double derivative(double x) const {
    switch (kind_) {
      case Kind::kExponential: return param_ * std::exp(param_ * x);
      case Kind::kPowerPlus: {
        const double u = 1.0 + x;
        if (u <= 0.0) return 0.0;
        return param_ == 1.0 ? 1.0 : param_ * std::pow(u, param_ - 1.0);
      }
      case Kind::kCustom: return table_.derivative(x);
    }
    return 0.0;
  }

  /// l*(y) = sup_x (xy - l(x)) for y >= 0.
  double conjugate(double y) const {
    if (y < 0.0) throw Error(ErrorCode::kNegativeArgument, "conjugate evaluated at y < 0");
    switch (kind_) {
      case Kind::kExponential: {
        if (y == 0.0) return 0.0;
        const double u = y / param_;
        return u * std::log(u) - u;
      }
      case Kind::kPowerPlus: {
        const double p = param_;
        if (p == 1.0) return y <= 1.0 ? -y : kInf;
        return (p - 1.0) * std::pow(y / p, p / (p - 1.0)) - y;
      }
      case Kind::kCustom: return conj_(y);
    }
    return kInf;
  }

  /// Grid validation of the loss-function axioms; throws InvalidFunction.
  void validate() const {
    const auto grid = linear_grid(-5.0, 5.0, 201);
    detail::check_convex_nondecreasing([this](double x) { return (*this)(x); }, grid, "loss");
    if (std::abs((*this)(0.0) - 1.0) > 1e-12) throw Error(ErrorCode::kInvalidFunction, "loss needs l(0) = 1");
    for (double x : grid) {
      if (x > 0.0 && !((*this)(x) > 1.0)) {
        throw Error(ErrorCode::kInvalidFunction, "loss needs l(x) > 1 for x > 0");
      }
    }
  }

 private:
  Kind kind_ = Kind::kExponential;
  double param_ = 1.0;
  PiecewiseLinear table_;
  ConjugateTable conj_;
};

/// Nondecreasing convex utility with phi*(1) = sup_x (x - phi(x)) = 0.
class UtilityFn {
 public:
  enum class Kind { kExpShift, kIdentity, kHingePower, kCustom };

  /// phi(x) = exp(x - 1); phi*(y) = y log y.
  static UtilityFn exp_shift() { return UtilityFn(Kind::kExpShift, 0.0); }

  /// phi(x) = x; the certainty equivalent is the expectation.
  static UtilityFn identity() { return UtilityFn(Kind::kIdentity, 0.0); }

  /// phi(x) = (((1 + x)_+)^p - 1) / p, the power hinge tangent to the
  /// diagonal at 0; phi*(y) = y^q / q - y + 1/p with q = p / (p - 1).
  static UtilityFn hinge_power(double p) {
    if (!(p > 1.0)) throw Error(ErrorCode::kInvalidSpec, "hinge_power utility needs p > 1");
    return UtilityFn(Kind::kHingePower, p);
  }

  static UtilityFn custom(PiecewiseLinear table) {
    UtilityFn u(Kind::kCustom, 0.0);
    u.table_ = std::move(table);
    u.conj_ = u.table_.conjugate();
    u.validate();
    return u;
  }

  Kind kind() const { return kind_; }
  double param() const { return param_; }
  const PiecewiseLinear& table() const { return table_; }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::kExpShift: return std::exp(x - 1.0);
      case Kind::kIdentity: return x;
      case Kind::kHingePower: return (std::pow(std::max(1.0 + x, 0.0), param_) - 1.0) / param_;
      case Kind::kCustom: return table_(x);
    }
    return 0.0;
  }

  double derivative(double x) const {
    switch (kind_) {
      case Kind::kExpShift: return std::exp(x - 1.0);
      case Kind::kIdentity: return 1.0;
      case Kind::kHingePower: {
        const double u = 1.0 + x;
        return u <= 0.0 ? 0.0 : std::pow(u, param_ - 1.0);
      }
      case Kind::kCustom: return table_.derivative(x);
    }
    return 0.0;
  }

  /// phi*(y) for y >= 0; the value at 0 is the right limit (= -inf phi).
  double conjugate(double y) const {
    if (y < 0.0) throw Error(ErrorCode::kNegativeArgument, "conjugate evaluated at y < 0");
    switch (kind_) {
      case Kind::kExpShift: return y == 0.0 ? 0.0 : y * std::log(y);
      case Kind::kIdentity: return std::abs(y - 1.0) <= 1e-12 ? 0.0 : kInf;
      case Kind::kHingePower: {
        const double q = param_ / (param_ - 1.0);
        return std::pow(y, q) / q - y + 1.0 / param_;
      }
      case Kind::kCustom: return conj_(y);
    }
    return kInf;
  }

  /// A point where phi touches the diagonal (phi(x) = x, phi'(x) = 1).
  double tangency_point() const {
    switch (kind_) {
      case Kind::kExpShift: return 1.0;
      case Kind::kIdentity:
      case Kind::kHingePower: return 0.0;
      case Kind::kCustom: {
        double best_x = table_.xs().front(), best = -kInf;
        for (std::size_t k = 0; k < table_.xs().size(); ++k) {
          const double v = table_.xs()[k] - table_.ys()[k];
          if (v > best) best = v, best_x = table_.xs()[k];
        }
        return best_x;
      }
    }
    return 0.0;
  }

  void validate() const {
    const auto grid = linear_grid(-5.0, 5.0, 201);
    detail::check_convex_nondecreasing([this](double x) { return (*this)(x); }, grid, "utility");
    const double at_one = conjugate(1.0);
    if (!(std::abs(at_one) <= 1e-9)) {
      throw Error(ErrorCode::kInvalidFunction, "utility needs phi*(1) = 0, got " + std::to_string(at_one));
    }
  }

 private:
  UtilityFn(Kind k, double p) : kind_(k), param_(p) {}

  Kind kind_ = Kind::kIdentity;
  double param_ = 0.0;
  PiecewiseLinear table_;
  ConjugateTable conj_;
};

inline double conjugate_eval(const LossFn& l, double y) { return l.conjugate(y); }
inline double conjugate_eval(const UtilityFn& u, double y) { return u.conjugate(y); }

struct LogSubadditivityVerdict {
  bool passes = true;
  double worst_violation = 0.0;  // max of l(x+y) - l(x)l(y), scaled by max(1, l(x)l(y))
  double worst_x = 0.0, worst_y = 0.0;
};

/// Log-subadditivity l(x+y) <= l(x) l(y) over all grid pairs.
inline LogSubadditivityVerdict check_log_subadditive(const LossFn& l, std::span<const double> grid) {
  LogSubadditivityVerdict v;
  v.worst_violation = -kInf;
  for (double x : grid) {
    for (double y : grid) {
      const double prod = l(x) * l(y);
      const double d = (l(x + y) - prod) / std::max(1.0, prod);
      if (d > v.worst_violation) v.worst_violation = d, v.worst_x = x, v.worst_y = y;
    }
  }
  if (grid.empty()) v.worst_violation = 0.0;
  v.passes = v.worst_violation <= 1e-10;
  return v;
}

struct OceInequalityVerdict {
  enum class Direction { kBoth, kSuperadditive, kSubadditive, kNeither };

  double max_defect = -kInf;  // max of y phi*(x) + x phi*(y) - phi*(xy)
  double min_defect = kInf;
  std::size_t skipped_pairs = 0;  // pairs with infinite terms that cannot be compared
  Direction direction = Direction::kBoth;

  bool superadditive_compatible() const {
    return direction == Direction::kBoth || direction == Direction::kSuperadditive;
  }
  bool subadditive_compatible() const {
    return direction == Direction::kBoth || direction == Direction::kSubadditive;
  }
};

/// Sweeps y phi*(x) + x phi*(y) <= phi*(xy) (superadditive direction) and its
/// reverse over pairs from a grid in [0, inf).
inline OceInequalityVerdict check_oce_inequality(const UtilityFn& phi, std::span<const double> grid,
                                                 double tol = 1e-10) {
  OceInequalityVerdict v;
  for (double x : grid) {
    if (x < 0.0) throw Error(ErrorCode::kNegativeArgument, "OCE inequality grid must be nonnegative");
  }
  for (double x : grid) {
    for (double y : grid) {
      const double cx = phi.conjugate(x), cy = phi.conjugate(y), cxy = phi.conjugate(x * y);
      const double lhs = y * cx + x * cy;
      double d;
      if (is_pos_inf(cxy) && !std::isinf(lhs)) {
        d = -kInf;
      } else if (std::isinf(lhs) || std::isnan(lhs)) {
        if (is_pos_inf(cxy) || std::isnan(lhs)) {
          ++v.skipped_pairs;
          continue;
        }
        d = kInf;
      } else {
        d = (lhs - cxy) / std::max({1.0, std::abs(lhs), std::abs(cxy)});
      }
      v.max_defect = std::max(v.max_defect, d);
      v.min_defect = std::min(v.min_defect, d);
    }
  }
  const bool sup = v.max_defect <= tol;
  const bool sub = v.min_defect >= -tol;
  using D = OceInequalityVerdict::Direction;
  v.direction = sup && sub ? D::kBoth : sup ? D::kSuperadditive : sub ? D::kSubadditive : D::kNeither;
  return v;
}

}  // namespace divlab
