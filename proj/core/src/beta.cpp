#include <algorithm>
#include <cmath>
#include <vector>

#include "mtdiff/error.hpp"
#include "mtdiff/network.hpp"

namespace mtdiff {

namespace {

constexpr double kWeightCutoff = 1e-14;
constexpr double kPowerConvergence = 1e-14;
constexpr double kRefineTolerance = 1e-9;
constexpr double kDivergenceLimit = 1e-4;
constexpr double kFirstMu = 1e-2;
constexpr int kMinLevels = 3;
constexpr int kMaxLevels = 14;
constexpr std::size_t kMaxPowers = 60000;

// Smallest j with mu (1-mu)^(2j-2) < cutoff.
std::size_t truncation_length(double mu) {
  const double j = 1.0 + std::log(kWeightCutoff / mu) / (2.0 * std::log1p(-mu));
  return static_cast<std::size_t>(std::ceil(j));
}

// Row sums of squares of A^j, j = 1, 2, ..., generated on demand. Once A^j stops
// changing the remaining terms are constant and are summed in closed form.
class SquaredRowNorms {
 public:
  explicit SquaredRowNorms(const Eigen::MatrixXd& a) : a_(a), power_(a) { push(); }

  // Makes terms 1..j available (or stops at convergence); false if the cap was hit.
  bool extend_to(std::size_t j) {
    while (!converged_ && norms_.size() < j) {
      if (norms_.size() >= kMaxPowers) return false;
      Eigen::MatrixXd next = power_ * a_;
      converged_ = (next - power_).cwiseAbs().maxCoeff() < kPowerConvergence;
      power_ = std::move(next);
      push();
    }
    return true;
  }

  // mu * sum_{j=1}^{J} (1-mu)^(2j-2) c_j[k] for every agent k.
  Eigen::VectorXd series(double mu, std::size_t terms) const {
    const double rho = (1.0 - mu) * (1.0 - mu);
    const std::size_t explicit_terms = std::min(terms, norms_.size());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(a_.rows());
    double weight = mu;
    for (std::size_t j = 0; j < explicit_terms; ++j) {
      acc += weight * norms_[j];
      weight *= rho;
    }
    if (terms > explicit_terms) {
      // converged tail: weight currently equals mu rho^explicit_terms
      const double tail = weight * (1.0 - std::pow(rho, static_cast<double>(terms - explicit_terms))) / (1.0 - rho);
      acc += tail * norms_.back();
    }
    return acc;
  }

 private:
  void push() { norms_.push_back(power_.rowwise().squaredNorm()); }

  Eigen::MatrixXd a_;
  Eigen::MatrixXd power_;
  std::vector<Eigen::VectorXd> norms_;
  bool converged_ = false;
};

}  // namespace

BetaFactors beta_factor(const CombinationMatrix& a) {
  SquaredRowNorms norms(a.dense());

  double mu = kFirstMu;
  std::size_t terms = truncation_length(mu);
  norms.extend_to(terms);
  Eigen::VectorXd prev_value = norms.series(mu, terms);
  Eigen::VectorXd prev_extrapolated;
  Eigen::VectorXd extrapolated;
  double diff = 0.0;

  for (int level = 1; level < kMaxLevels; ++level) {
    const double next_mu = mu / 2.0;
    const std::size_t next_terms = truncation_length(next_mu);
    if (!norms.extend_to(next_terms) && level >= kMinLevels) break;
    const Eigen::VectorXd value = norms.series(next_mu, next_terms);
    // first-order Richardson step for a halved step-size
    Eigen::VectorXd candidate = 2.0 * value - prev_value;
    mu = next_mu;
    terms = next_terms;
    prev_value = value;
    prev_extrapolated = std::move(extrapolated);
    extrapolated = std::move(candidate);
    if (prev_extrapolated.size() == 0) continue;
    diff = (extrapolated - prev_extrapolated).cwiseAbs().maxCoeff();
    if (level + 1 >= kMinLevels && diff <= kRefineTolerance) break;
  }

  if (diff > kDivergenceLimit) {
    throw NumericalError("beta factor extrapolation did not converge (successive estimates differ by " +
                         std::to_string(diff) + ")");
  }
  BetaFactors out;
  out.beta.assign(extrapolated.data(), extrapolated.data() + extrapolated.size());
  out.mu_used = mu;
  out.truncation_j = terms;
  return out;
}

}  // namespace mtdiff
