#include "mtdiff/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mtdiff/error.hpp"

namespace mtdiff {

namespace {

constexpr double kRenormalizeTolerance = 1e-9;
constexpr double kClipFloor = 1e-9;

void check_symbol(Symbol x, std::size_t alphabet_size) {
  if (x >= alphabet_size) {
    throw ValidationError("symbol " + std::to_string(x + 1) + " outside alphabet of size " +
                          std::to_string(alphabet_size));
  }
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.size() < 2) throw ValidationError("PMF needs an alphabet of at least 2 symbols");
  for (std::size_t a = 0; a < probs_.size(); ++a) {
    if (!(probs_[a] > 0.0) || !std::isfinite(probs_[a])) {
      throw ValidationError("PMF entry " + std::to_string(a + 1) + " = " + std::to_string(probs_[a]) +
                            " is not strictly positive");
    }
  }
  const double sum = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(sum - 1.0) > kRenormalizeTolerance) {
    throw ValidationError("PMF entries sum to " + std::to_string(sum) + ", not 1");
  }
  if (sum != 1.0) {
    for (double& p : probs_) p /= sum;
  }
  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

Symbol Pmf::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<Symbol>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
}

std::vector<double> EmpiricalType::frequencies() const {
  std::vector<double> f(counts.size(), 0.0);
  if (n == 0) return f;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    f[a] = static_cast<double>(counts[a]) / static_cast<double>(n);
  }
  return f;
}

double kl_divergence(std::span<const double> p, const Pmf& q) {
  if (p.size() != q.size()) {
    throw ValidationError("KL divergence between alphabets of size " + std::to_string(p.size()) +
                          " and " + std::to_string(q.size()));
  }
  double d = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] > 0.0) d += p[a] * std::log(p[a] / q[a]);
  }
  // Rounding can leave a tiny negative value when p == q.
  return std::max(d, 0.0);
}

EmpiricalType empirical_type(std::span<const Symbol> seq, std::size_t alphabet_size) {
  if (seq.empty()) throw ValidationError("empirical type of an empty sequence");
  EmpiricalType t{std::vector<std::size_t>(alphabet_size, 0), seq.size()};
  for (Symbol x : seq) {
    check_symbol(x, alphabet_size);
    ++t.counts[x];
  }
  return t;
}

StatVector log_likelihoods(Symbol x, std::span<const Pmf> hypotheses) {
  if (hypotheses.empty()) throw ValidationError("no hypotheses given");
  const std::size_t m = hypotheses.front().size();
  StatVector s{std::vector<double>(hypotheses.size()), StatMode::log_likelihood};
  check_symbol(x, m);
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    if (hypotheses[h].size() != m) throw ValidationError("hypotheses over different alphabets");
    s.values[h] = std::log(hypotheses[h][x]);
  }
  return s;
}

StatVector indicator_vector(Symbol x, std::size_t alphabet_size) {
  check_symbol(x, alphabet_size);
  StatVector s{std::vector<double>(alphabet_size, 0.0), StatMode::indicator};
  s.values[x] = 1.0;
  return s;
}

std::vector<double> clip_to_simplex(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x = std::clamp(x, kClipFloor, 1.0);
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& x : out) x /= sum;
  return out;
}

StatTable StatTable::log_likelihood(std::span<const Pmf> hypotheses) {
  if (hypotheses.empty()) throw ValidationError("no hypotheses given");
  const std::size_t m = hypotheses.front().size();
  StatTable t(m, hypotheses.size(), StatMode::log_likelihood);
  for (Symbol x = 0; x < m; ++x) {
    const StatVector s = log_likelihoods(x, hypotheses);
    std::copy(s.values.begin(), s.values.end(), t.rows_.begin() + static_cast<std::ptrdiff_t>(x * t.dim_));
  }
  return t;
}

StatTable StatTable::indicator(std::size_t alphabet_size) {
  StatTable t(alphabet_size, alphabet_size, StatMode::indicator);
  for (Symbol x = 0; x < alphabet_size; ++x) t.rows_[x * alphabet_size + x] = 1.0;
  return t;
}

}  // namespace mtdiff
