#pragma once

// Finite-alphabet probability primitives. Symbols and hypotheses are 0-based
// inside the library; files and the CLI present them 1-based.

#include <cstddef>
#include <span>
#include <vector>

#include "mtdiff/rng.hpp"

namespace mtdiff {

using Symbol = std::size_t;

/// Strictly positive probability mass function over {0, ..., M-1}, M >= 2.
///
/// Construction renormalizes when the entries sum to 1 within 1e-9 and throws
/// ValidationError otherwise, or when any entry is not strictly positive.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double operator[](Symbol a) const { return probs_[a]; }
  std::span<const double> probs() const { return probs_; }

  /// Inverse-CDF draw; advances `rng` by exactly one uniform.
  Symbol sample(Rng& rng) const;

  friend bool operator==(const Pmf& a, const Pmf& b) { return a.probs_ == b.probs_; }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Histogram of an observed sequence.
struct EmpiricalType {
  std::vector<std::size_t> counts;
  std::size_t n = 0;

  std::vector<double> frequencies() const;
};

enum class StatMode { log_likelihood, indicator };

/// Per-observation statistic vector: log p_h(x) for each hypothesis, or the
/// one-hot indicator of x.
struct StatVector {
  std::vector<double> values;
  StatMode mode = StatMode::log_likelihood;
};

/// D(p || q) in nats. `p` may contain zeros (0 log 0 = 0); it is typically a
/// frequency vector or a status vector projected onto the simplex.
double kl_divergence(std::span<const double> p, const Pmf& q);
inline double kl_divergence(const Pmf& p, const Pmf& q) { return kl_divergence(p.probs(), q); }

EmpiricalType empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size);

StatVector log_likelihoods(Symbol x, std::span<const Pmf> hypotheses);
StatVector indicator_vector(Symbol x, std::size_t alphabet_size);

inline Symbol sample_symbol(const Pmf& p, Rng& rng) { return p.sample(rng); }

/// Clamps every entry to [1e-9, 1] and renormalizes. Gaussian status samples
/// go through this before any KL evaluation.
std::vector<double> clip_to_simplex(std::span<const double> v);

/// Precomputed statistic rows, one per symbol, so the diffusion engine can map
/// an observation to its d-vector with a table lookup.
class StatTable {
 public:
  static StatTable log_likelihood(std::span<const Pmf> hypotheses);
  static StatTable indicator(std::size_t alphabet_size);

  std::size_t alphabet_size() const { return alphabet_; }
  std::size_t dim() const { return dim_; }
  StatMode mode() const { return mode_; }
  std::span<const double> row(Symbol x) const { return {rows_.data() + x * dim_, dim_}; }

 private:
  StatTable(std::size_t alphabet, std::size_t dim, StatMode mode)
      : alphabet_(alphabet), dim_(dim), mode_(mode), rows_(alphabet * dim) {}

  std::size_t alphabet_;
  std::size_t dim_;
  StatMode mode_;
  std::vector<double> rows_;
};

}  // namespace mtdiff
