#include "mtdiff/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtdiff/error.hpp"

namespace mtdiff {

namespace {

constexpr double kEigenClamp = 1e-12;
constexpr double kEigenNegativeTolerance = -1e-9;
constexpr std::size_t kMinMonteCarlo = 100;

void check_alphabet(const Pmf& p_true, const StatisticModel& model) {
  const std::size_t m = model.mode == Mode::informed ? model.hypotheses.front().size() : model.alphabet;
  if (p_true.size() != m) {
    throw ValidationError("true PMF has " + std::to_string(p_true.size()) + " symbols, model expects " +
                          std::to_string(m));
  }
}

// Rows of the statistic table as an M x R matrix: row a is d(a).
Eigen::MatrixXd statistic_rows(const StatisticModel& model) {
  const StatTable table = model.mode == Mode::informed ? StatTable::log_likelihood(model.hypotheses)
                                                       : StatTable::indicator(model.alphabet);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(table.alphabet_size()), static_cast<Eigen::Index>(table.dim()));
  for (Symbol a = 0; a < table.alphabet_size(); ++a) {
    const auto row = table.row(a);
    for (std::size_t r = 0; r < row.size(); ++r) {
      rows(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(r)) = row[r];
    }
  }
  return rows;
}

Eigen::VectorXd as_vector(const Pmf& p) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(p.size()));
  for (std::size_t a = 0; a < p.size(); ++a) v(static_cast<Eigen::Index>(a)) = p[a];
  return v;
}

// argmax with ties (relative 1e-12) broken uniformly. Gaussian samples from a
// rank-deficient covariance can carry rounding-level differences between
// components that are equal in exact arithmetic.
std::size_t tolerant_argmax(const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng) {
  const double best = x.maxCoeff();
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<std::size_t> ties;
  for (Eigen::Index h = 0; h < x.size(); ++h) {
    if (x(h) >= best - tol) ties.push_back(static_cast<std::size_t>(h));
  }
  return ties.size() == 1 ? ties.front() : ties[rng.index(ties.size())];
}

double factor_for(BoundKind which, double beta, std::optional<double> beta_override) {
  if (beta_override) return *beta_override;
  return which == BoundKind::upper ? 0.5 : beta;
}

StatusKind kind_for(BoundKind which, std::optional<double> beta_override) {
  return which == BoundKind::upper && !beta_override ? StatusKind::isolated : StatusKind::networked;
}

}  // namespace

StatisticModel StatisticModel::informed(std::vector<Pmf> hypotheses) {
  if (hypotheses.empty()) throw ValidationError("informed model needs hypotheses");
  for (const Pmf& p : hypotheses) {
    if (p.size() != hypotheses.front().size()) throw ValidationError("hypotheses over different alphabets");
  }
  return StatisticModel{Mode::informed, std::move(hypotheses), 0};
}

StatisticModel StatisticModel::indicators(std::size_t alphabet) {
  if (alphabet < 2) throw ValidationError("alphabet must have at least 2 symbols");
  return StatisticModel{Mode::partially_informed, {}, alphabet};
}

Eigen::MatrixXd lambda_matrix(const Pmf& p_true, const StatisticModel& model) {
  check_alphabet(p_true, model);
  const Eigen::MatrixXd rows = statistic_rows(model);
  const Eigen::VectorXd p = as_vector(p_true);
  const Eigen::VectorXd mean = rows.transpose() * p;
  const Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
  Eigen::MatrixXd lambda = centered.transpose() * p.asDiagonal() * centered;
  return 0.5 * (lambda + lambda.transpose());
}

Eigen::VectorXd mean_vector(const Pmf& p_true, const StatisticModel& model) {
  check_alphabet(p_true, model);
  return statistic_rows(model).transpose() * as_vector(p_true);
}

GaussianSummary steady_state_distribution(const Pmf& p_true, const StatisticModel& model, double mu,
                                          StatusKind kind, double beta) {
  if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("step-size mu must lie in (0, 1)");
  const double factor = kind == StatusKind::isolated ? 0.5 : beta;
  if (!(factor >= 0.0)) throw ValidationError("variance-reduction factor must be nonnegative");
  return GaussianSummary{mean_vector(p_true, model), mu * factor * lambda_matrix(p_true, model), kind, factor};
}

Eigen::MatrixXd sample_steady_state(const GaussianSummary& g, std::size_t count, Rng& rng) {
  const Eigen::Index r = g.mean.size();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.covariance);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the covariance failed");
  Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < kEigenNegativeTolerance) {
    throw NumericalError("covariance is not positive semi-definite (eigenvalue " +
                         std::to_string(values.minCoeff()) + ")");
  }
  for (Eigen::Index i = 0; i < r; ++i) values(i) = values(i) < kEigenClamp ? 0.0 : std::sqrt(values(i));
  const Eigen::MatrixXd transform = eig.eigenvectors() * values.asDiagonal();

  Eigen::MatrixXd samples(static_cast<Eigen::Index>(count), r);
  Eigen::VectorXd normal(r);
  for (std::size_t s = 0; s < count; ++s) {
    for (Eigen::Index i = 0; i < r; ++i) normal(i) = rng.normal();
    samples.row(static_cast<Eigen::Index>(s)) = (g.mean + transform * normal).transpose();
  }
  return samples;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double bound_error_ia(const IaBoundInput& in, BoundKind which, std::optional<double> beta_override,
                      std::size_t mc_count, Rng& rng) {
  if (mc_count < kMinMonteCarlo) throw ValidationError("bound estimation needs at least 100 Monte Carlo draws");
  if (in.true_hypothesis >= in.hypotheses.size()) throw ValidationError("true hypothesis index out of range");
  const StatisticModel model = StatisticModel::informed(in.hypotheses);
  const double factor = factor_for(which, in.beta, beta_override);
  const GaussianSummary g = steady_state_distribution(in.hypotheses[in.true_hypothesis], model, in.mu,
                                                      kind_for(which, beta_override), factor);
  const Eigen::MatrixXd samples = sample_steady_state(g, mc_count, rng);
  std::size_t errors = 0;
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    if (tolerant_argmax(samples.row(s).transpose(), rng) != in.true_hypothesis) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(mc_count);
}

PiaBoundResult bound_error_pia(const PiaBoundInput& in, BoundKind which, std::optional<double> beta_override,
                               double type1_target, std::size_t mc_count, Rng& rng) {
  if (mc_count < kMinMonteCarlo) throw ValidationError("bound estimation needs at least 100 Monte Carlo draws");
  if (!(type1_target > 0.0 && type1_target < 1.0)) throw ValidationError("type-I target must lie in (0, 1)");
  if (in.alternative.size() != in.null_pmf.size()) throw ValidationError("null and alternative alphabets differ");
  const StatisticModel model = StatisticModel::indicators(in.null_pmf.size());
  const double factor = factor_for(which, in.beta, beta_override);
  const StatusKind kind = kind_for(which, beta_override);

  auto statistics = [&](const Pmf& p_true) {
    const Eigen::MatrixXd samples =
        sample_steady_state(steady_state_distribution(p_true, model, in.mu, kind, factor), mc_count, rng);
    std::vector<double> d(mc_count);
    std::vector<double> row(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index s = 0; s < samples.rows(); ++s) {
      for (Eigen::Index m = 0; m < samples.cols(); ++m) row[static_cast<std::size_t>(m)] = samples(s, m);
      d[static_cast<std::size_t>(s)] = kl_divergence(clip_to_simplex(row), in.null_pmf);
    }
    return d;
  };

  PiaBoundResult out;
  out.gamma = empirical_quantile(statistics(in.null_pmf), 1.0 - type1_target);
  const std::vector<double> h1 = statistics(in.alternative);
  const auto misses = std::count_if(h1.begin(), h1.end(), [&](double d) { return d < out.gamma; });
  out.type2 = static_cast<double>(misses) / static_cast<double>(mc_count);
  return out;
}

}  // namespace mtdiff
