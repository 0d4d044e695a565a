// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Finite probability spaces: distributions over labeled atoms, real-valued
// laws, kernels, joint distributions on product spaces, partitions, and the
// operations that move between them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "divlab/error.hpp"

namespace divlab {

using Label = std::string;

namespace detail {

inline constexpr double kClampThreshold = 1e-15;
inline constexpr double kInputMassTolerance = 1e-9;

// Clamps tiny negatives, checks mass, renormalizes exactly.
inline std::vector<double> normalize_weights(std::vector<double> weights, bool require_unit_mass) {
  double total = 0.0;
  for (double& w : weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::kNegativeWeight, "non-finite weight");
    if (w < 0.0) {
      if (w < -kClampThreshold) {
        throw Error(ErrorCode::kNegativeWeight, "weight " + std::to_string(w) + " is negative");
      }
      w = 0.0;
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroTotalMass, "weights carry no mass");
  if (require_unit_mass && std::abs(total - 1.0) > kInputMassTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                "weights sum to " + std::to_string(total) + ", expected 1");
  }
  for (double& w : weights) w /= total;
  return weights;
}

inline void require_distinct(const std::vector<Label>& atoms) {
  std::unordered_set<Label> seen;
  for (const auto& a : atoms) {
    if (!seen.insert(a).second) throw Error(ErrorCode::kDuplicateAtom, "atom '" + a + "' repeated");
  }
}

}  // namespace detail

/// Probability measure on an ordered, finite set of opaque labels.
class FiniteDist {
 public:
  FiniteDist() = default;

  const std::vector<Label>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return atoms_.size(); }
  double weight(std::size_t i) const { return weights_[i]; }
  const Label& atom(std::size_t i) const { return atoms_[i]; }

  std::size_t index_of(const Label& label) const {
    auto it = std::find(atoms_.begin(), atoms_.end(), label);
    if (it == atoms_.end()) throw Error(ErrorCode::kUnmappedAtom, "no atom '" + label + "'");
    return static_cast<std::size_t>(it - atoms_.begin());
  }

  bool same_space(const FiniteDist& other) const { return atoms_ == other.atoms_; }

  friend bool operator==(const FiniteDist&, const FiniteDist&) = default;

 private:
  friend FiniteDist make_dist(std::vector<Label>, std::vector<double>);
  friend FiniteDist make_dist_from_masses(std::vector<Label>, std::vector<double>);

  std::vector<Label> atoms_;
  std::vector<double> weights_;
};

/// Validating constructor: lengths must match, weights must sum to 1 within
/// 1e-9 (renormalized afterwards), negatives down to -1e-15 are clamped.
inline FiniteDist make_dist(std::vector<Label> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(atoms.size()) + " atoms vs " +
                                                std::to_string(weights.size()) + " weights");
  }
  detail::require_distinct(atoms);
  FiniteDist d;
  d.weights_ = detail::normalize_weights(std::move(weights), true);
  d.atoms_ = std::move(atoms);
  return d;
}

/// Like make_dist, but accepts any positive total mass and rescales it to one.
inline FiniteDist make_dist_from_masses(std::vector<Label> atoms, std::vector<double> masses) {
  if (atoms.size() != masses.size()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(atoms.size()) + " atoms vs " +
                                                std::to_string(masses.size()) + " masses");
  }
  detail::require_distinct(atoms);
  FiniteDist d;
  d.weights_ = detail::normalize_weights(std::move(masses), false);
  d.atoms_ = std::move(atoms);
  return d;
}

/// Atom labels "0", "1", ..., "n-1".
inline std::vector<Label> index_labels(std::size_t n, const std::string& prefix = "") {
  std::vector<Label> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline FiniteDist uniform_dist(std::vector<Label> atoms) {
  const double w = 1.0 / static_cast<double>(atoms.size());
  std::vector<double> weights(atoms.size(), w);
  return make_dist_from_masses(std::move(atoms), std::move(weights));
}

/// Real-valued function on the atoms of some FiniteDist, stored atomwise.
struct RandomVariable {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

inline void require_compatible(const FiniteDist& mu, const RandomVariable& f) {
  if (mu.size() != f.size()) {
    throw Error(ErrorCode::kLengthMismatch, "random variable has " + std::to_string(f.size()) +
                                                " values for " + std::to_string(mu.size()) + " atoms");
  }
}

/// Finitely supported probability law on the real line. Support points are
/// sorted, distinct, and carry strictly positive weight.
class Law {
 public:
  Law() = default;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m += weights_[i] * values_[i];
    return m;
  }

  /// Law of X + c.
  Law shifted(double c) const {
    Law out = *this;
    for (double& v : out.values_) v += c;
    return out;
  }

  friend bool operator==(const Law&, const Law&) = default;

 private:
  friend Law make_law_from_masses(std::span<const double>, std::span<const double>);

  std::vector<double> values_;
  std::vector<double> weights_;
};

/// Builds a law from (value, mass) pairs: equal values merge, zero masses
/// drop, the total is rescaled to one.
inline Law make_law_from_masses(std::span<const double> values, std::span<const double> masses) {
  if (values.size() != masses.size()) {
    throw Error(ErrorCode::kLengthMismatch, "law values and masses differ in length");
  }
  std::map<double, double> acc;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double m = masses[i];
    if (!std::isfinite(values[i])) throw Error(ErrorCode::kInvalidSpec, "non-finite law value");
    if (m < 0.0) {
      if (m < -detail::kClampThreshold) throw Error(ErrorCode::kNegativeWeight, "negative law mass");
      m = 0.0;
    }
    if (m == 0.0) continue;
    acc[values[i]] += m;
    total += m;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroTotalMass, "law carries no mass");
  Law law;
  law.values_.reserve(acc.size());
  law.weights_.reserve(acc.size());
  for (const auto& [v, m] : acc) {
    law.values_.push_back(v);
    law.weights_.push_back(m / total);
  }
  return law;
}

/// Validating variant: masses must already sum to one within 1e-9.
inline Law make_law(std::span<const double> values, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (weights.size() == values.size() && total > 0.0 &&
      std::abs(total - 1.0) > detail::kInputMassTolerance) {
    throw Error(ErrorCode::kNotNormalized, "law weights sum to " + std::to_string(total));
  }
  return make_law_from_masses(values, weights);
}

inline Law point_mass(double v) {
  const double one = 1.0;
  return make_law_from_masses(std::span<const double>(&v, 1), std::span<const double>(&one, 1));
}

/// Law of f under mu, i.e. the pushforward mu o f^{-1} onto the real line.
inline Law law_of(const FiniteDist& mu, const RandomVariable& f) {
  require_compatible(mu, f);
  return make_law_from_masses(f.values, mu.weights());
}

/// Mixture sum_i t_i m_i.
inline Law mixture(std::span<const Law> laws, std::span<const double> coefficients) {
  if (laws.size() != coefficients.size()) {
    throw Error(ErrorCode::kLengthMismatch, "mixture coefficients");
  }
  std::vector<double> values, masses;
  for (std::size_t k = 0; k < laws.size(); ++k) {
    for (std::size_t i = 0; i < laws[k].size(); ++i) {
      values.push_back(laws[k].values()[i]);
      masses.push_back(coefficients[k] * laws[k].weights()[i]);
    }
  }
  return make_law_from_masses(values, masses);
}

/// mu o T^{-1}. Output atoms appear in order of first occurrence under T.
inline FiniteDist pushforward(const FiniteDist& mu, const std::function<Label(const Label&)>& map) {
  std::vector<Label> out_atoms;
  std::vector<double> out_weights;
  std::unordered_map<Label, std::size_t> slot;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    Label image = map(mu.atom(i));
    auto [it, inserted] = slot.try_emplace(image, out_atoms.size());
    if (inserted) {
      out_atoms.push_back(std::move(image));
      out_weights.push_back(0.0);
    }
    out_weights[it->second] += mu.weight(i);
  }
  return make_dist_from_masses(std::move(out_atoms), std::move(out_weights));
}

/// Same as above with the map given as a label table; every atom must be mapped.
inline FiniteDist pushforward(const FiniteDist& mu, const std::map<Label, Label>& table) {
  return pushforward(mu, [&](const Label& a) -> Label {
    auto it = table.find(a);
    if (it == table.end()) throw Error(ErrorCode::kUnmappedAtom, "no image for atom '" + a + "'");
    return it->second;
  });
}

/// Row-stochastic family {K_x} from a source atom list to a common target atom list.
class Kernel {
 public:
  Kernel() = default;
  Kernel(std::vector<Label> source, std::vector<Label> target, std::vector<std::vector<double>> rows)
      : source_(std::move(source)), target_(std::move(target)) {
    detail::require_distinct(source_);
    detail::require_distinct(target_);
    if (rows.size() != source_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "kernel needs one row per source atom");
    }
    rows_.reserve(rows.size());
    for (auto& row : rows) {
      if (row.size() != target_.size()) {
        throw Error(ErrorCode::kLengthMismatch, "kernel row length differs from target size");
      }
      rows_.push_back(detail::normalize_weights(std::move(row), true));
    }
  }

  const std::vector<Label>& source() const { return source_; }
  const std::vector<Label>& target() const { return target_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  const std::vector<double>& row(std::size_t i) const { return rows_[i]; }
  double operator()(std::size_t i, std::size_t j) const { return rows_[i][j]; }

  FiniteDist row_dist(std::size_t i) const { return make_dist_from_masses(target_, rows_[i]); }

  /// (Kf)(x) = sum_y K_x(y) f(y).
  RandomVariable apply(const RandomVariable& f) const {
    if (f.size() != target_.size()) throw Error(ErrorCode::kLengthMismatch, "Kf: size mismatch");
    RandomVariable out{std::vector<double>(source_.size(), 0.0)};
    for (std::size_t i = 0; i < source_.size(); ++i) {
      for (std::size_t j = 0; j < target_.size(); ++j) out.values[i] += rows_[i][j] * f.values[j];
    }
    return out;
  }

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  std::vector<Label> source_;
  std::vector<Label> target_;
  std::vector<std::vector<double>> rows_;
};

/// Kernel x -> delta_{T(x)} onto the distinct images of T (first-seen order).
inline Kernel deterministic_kernel(const std::vector<Label>& source,
                                   const std::function<Label(const Label&)>& map) {
  std::vector<Label> target;
  std::vector<std::size_t> image_index;
  std::unordered_map<Label, std::size_t> slot;
  for (const auto& x : source) {
    Label image = map(x);
    auto [it, inserted] = slot.try_emplace(image, target.size());
    if (inserted) target.push_back(std::move(image));
    image_index.push_back(it->second);
  }
  std::vector<std::vector<double>> rows(source.size(), std::vector<double>(target.size(), 0.0));
  for (std::size_t i = 0; i < source.size(); ++i) rows[i][image_index[i]] = 1.0;
  return Kernel(source, std::move(target), std::move(rows));
}

/// Probability measure on a product E x F, stored as a row-major weight grid.
class JointDist {
 public:
  JointDist() = default;
  JointDist(std::vector<Label> row_atoms, std::vector<Label> col_atoms, std::vector<double> weights)
      : rows_(std::move(row_atoms)), cols_(std::move(col_atoms)) {
    detail::require_distinct(rows_);
    detail::require_distinct(cols_);
    if (weights.size() != rows_.size() * cols_.size()) {
      throw Error(ErrorCode::kLengthMismatch, "joint weight grid has wrong size");
    }
    weights_ = detail::normalize_weights(std::move(weights), true);
  }

  static JointDist from_masses(std::vector<Label> row_atoms, std::vector<Label> col_atoms,
                               std::vector<double> masses) {
    auto w = detail::normalize_weights(std::move(masses), false);
    return JointDist(std::move(row_atoms), std::move(col_atoms), std::move(w));
  }

  const std::vector<Label>& row_atoms() const { return rows_; }
  const std::vector<Label>& col_atoms() const { return cols_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return cols_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return weights_[i * cols_.size() + j]; }

  bool same_grid(const JointDist& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  /// The joint as a FiniteDist on pair labels "(x,y)"; the row-major index is kept.
  FiniteDist flatten() const {
    std::vector<Label> atoms;
    atoms.reserve(weights_.size());
    for (const auto& x : rows_) {
      for (const auto& y : cols_) atoms.push_back("(" + x + "," + y + ")");
    }
    return make_dist_from_masses(std::move(atoms), weights_);
  }

  FiniteDist row_marginal() const {
    std::vector<double> m(rows_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      for (std::size_t j = 0; j < cols_.size(); ++j) m[i] += (*this)(i, j);
    }
    return make_dist_from_masses(rows_, std::move(m));
  }

  FiniteDist col_marginal() const {
    std::vector<double> m(cols_.size(), 0.0);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      for (std::size_t j = 0; j < cols_.size(); ++j) m[j] += (*this)(i, j);
    }
    return make_dist_from_masses(cols_, std::move(m));
  }

  friend bool operator==(const JointDist&, const JointDist&) = default;

 private:
  std::vector<Label> rows_;
  std::vector<Label> cols_;
  std::vector<double> weights_;
};

inline JointDist product(const FiniteDist& a, const FiniteDist& b) {
  std::vector<double> w;
  w.reserve(a.size() * b.size());
  for (double wa : a.weights()) {
    for (double wb : b.weights()) w.push_back(wa * wb);
  }
  return JointDist::from_masses(a.atoms(), b.atoms(), std::move(w));
}

/// mu(dx) K_x(dy) together with its second marginal muK.
inline std::pair<JointDist, FiniteDist> compose_kernel(const FiniteDist& mu, const Kernel& k) {
  if (mu.atoms() != k.source()) {
    throw Error(ErrorCode::kSpaceMismatch, "kernel source differs from the distribution's atoms");
  }
  const std::size_t nf = k.target().size();
  std::vector<double> joint(mu.size() * nf);
  std::vector<double> marginal(nf, 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nf; ++j) {
      joint[i * nf + j] = mu.weight(i) * k(i, j);
      marginal[j] += joint[i * nf + j];
    }
  }
  return {JointDist::from_masses(mu.atoms(), k.target(), std::move(joint)),
          make_dist_from_masses(k.target(), std::move(marginal))};
}

/// Mean measure muK only.
inline FiniteDist mean_measure(const FiniteDist& mu, const Kernel& k) {
  return compose_kernel(mu, k).second;
}

/// Splits a joint into its first marginal and the conditional kernel. Rows at
/// zero-marginal atoms are uniform on the target.
inline std::pair<FiniteDist, Kernel> disintegrate(const JointDist& joint) {
  const std::size_t nr = joint.n_rows(), nc = joint.n_cols();
  std::vector<double> marginal(nr, 0.0);
  std::vector<std::vector<double>> rows(nr, std::vector<double>(nc, 0.0));
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < nc; ++j) marginal[i] += joint(i, j);
    for (std::size_t j = 0; j < nc; ++j) {
      rows[i][j] = marginal[i] > 0.0 ? joint(i, j) / marginal[i] : 1.0 / static_cast<double>(nc);
    }
    double s = 0.0;
    for (double v : rows[i]) s += v;
    for (double& v : rows[i]) v /= s;
  }
  return {make_dist_from_masses(joint.row_atoms(), std::move(marginal)),
          Kernel(joint.row_atoms(), joint.col_atoms(), std::move(rows))};
}

/// dnu/dmu atomwise. Zero where both vanish; throws if nu charges a mu-null atom.
inline std::vector<double> radon_nikodym(const FiniteDist& nu, const FiniteDist& mu) {
  if (!nu.same_space(mu)) throw Error(ErrorCode::kSpaceMismatch, "densities need a common atom set");
  std::vector<double> d(mu.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > 0.0) {
      d[i] = nu.weight(i) / mu.weight(i);
    } else if (nu.weight(i) > 0.0) {
      throw Error(ErrorCode::kNotAbsolutelyContinuous, "nu charges atom '" + mu.atom(i) + "'");
    }
  }
  return d;
}

inline bool absolutely_continuous(std::span<const double> nu, std::span<const double> mu) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0 && nu[i] > 0.0) return false;
  }
  return true;
}

inline bool absolutely_continuous(const FiniteDist& nu, const FiniteDist& mu) {
  if (!nu.same_space(mu)) throw Error(ErrorCode::kSpaceMismatch, "absolute continuity: atom sets differ");
  return absolutely_continuous(nu.weights(), mu.weights());
}

/// Disjoint nonempty blocks of labels covering an atom set.
struct Partition {
  std::vector<std::vector<Label>> blocks;

  /// Block index of every atom of `atoms`; throws InvalidPartition otherwise.
  std::vector<std::size_t> assign(const std::vector<Label>& atoms) const {
    std::unordered_map<Label, std::size_t> block_of;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw Error(ErrorCode::kInvalidPartition, "empty block");
      for (const auto& a : blocks[b]) {
        if (!block_of.emplace(a, b).second) {
          throw Error(ErrorCode::kInvalidPartition, "atom '" + a + "' in two blocks");
        }
      }
    }
    if (block_of.size() != atoms.size()) {
      throw Error(ErrorCode::kInvalidPartition, "blocks do not match the atom set");
    }
    std::vector<std::size_t> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
      auto it = block_of.find(a);
      if (it == block_of.end()) throw Error(ErrorCode::kInvalidPartition, "atom '" + a + "' uncovered");
      out.push_back(it->second);
    }
    return out;
  }

  static Partition trivial(const std::vector<Label>& atoms) { return Partition{{atoms}}; }

  static Partition finest(const std::vector<Label>& atoms) {
    Partition p;
    for (const auto& a : atoms) p.blocks.push_back({a});
    return p;
  }
};

/// Conditional law of X on one positive-weight block.
struct BlockLaw {
  std::size_t block = 0;
  double weight = 0.0;
  Law law;
};

/// P(X in . | G) for the sigma-field generated by `part`. Null blocks are omitted.
inline std::vector<BlockLaw> condition(const FiniteDist& mu, const RandomVariable& x,
                                       const Partition& part) {
  require_compatible(mu, x);
  const auto block_of = part.assign(mu.atoms());
  std::vector<std::vector<double>> vals(part.blocks.size()), masses(part.blocks.size());
  std::vector<double> block_weight(part.blocks.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    vals[block_of[i]].push_back(x.values[i]);
    masses[block_of[i]].push_back(mu.weight(i));
    block_weight[block_of[i]] += mu.weight(i);
  }
  std::vector<BlockLaw> out;
  for (std::size_t b = 0; b < part.blocks.size(); ++b) {
    if (block_weight[b] <= 0.0) continue;
    out.push_back({b, block_weight[b], make_law_from_masses(vals[b], masses[b])});
  }
  return out;
}

/// Finite convex-order test: equal means (1e-10) and dominated call prices at
/// every strike in the union of supports.
inline bool check_convex_order(const Law& m1, const Law& m2) {
  if (std::abs(m1.mean() - m2.mean()) > 1e-10) return false;
  auto call = [](const Law& m, double strike) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weights()[i] * std::max(m.values()[i] - strike, 0.0);
    return s;
  };
  std::vector<double> strikes = m1.values();
  strikes.insert(strikes.end(), m2.values().begin(), m2.values().end());
  for (double a : strikes) {
    if (call(m1, a) > call(m2, a) + 1e-12) return false;
  }
  return true;
}

}  // namespace divlab
