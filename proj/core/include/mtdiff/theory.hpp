#pragma once

// Steady-state Gaussian characterization of the agents' status under perfect
// clustering, and Monte Carlo estimators of the approximate error bounds it
// implies.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtdiff/diffusion.hpp"
#include "mtdiff/rng.hpp"
#include "mtdiff/simplex.hpp"

namespace mtdiff {

/// What the per-observation statistic is: log-likelihoods under `hypotheses`
/// (informed agents) or indicators over an alphabet (partially informed).
struct StatisticModel {
  Mode mode = Mode::informed;
  std::vector<Pmf> hypotheses;  // informed only
  std::size_t alphabet = 0;     // partially informed only

  static StatisticModel informed(std::vector<Pmf> hypotheses);
  static StatisticModel indicators(std::size_t alphabet);
  std::size_t dim() const { return mode == Mode::informed ? hypotheses.size() : alphabet; }
};

/// Covariance of the statistic vector d under p_true.
Eigen::MatrixXd lambda_matrix(const Pmf& p_true, const StatisticModel& model);

/// E d under p_true: sum_a p_true(a) log p_h(a), or p_true itself for indicators.
Eigen::VectorXd mean_vector(const Pmf& p_true, const StatisticModel& model);

enum class StatusKind {
  networked,  // w: covariance mu * beta_k(A) * Lambda
  isolated,   // z: covariance mu * Lambda / 2
};

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  StatusKind kind = StatusKind::networked;
  double factor = 0.5;  // beta_k(A) for networked, 1/2 for isolated
};

/// `beta` is only read for StatusKind::networked.
GaussianSummary steady_state_distribution(const Pmf& p_true, const StatisticModel& model, double mu,
                                          StatusKind kind, double beta = 0.5);

/// `count` draws (one per row) through an eigendecomposition of the
/// covariance, so rank-deficient covariances are fine. Eigenvalues below
/// 1e-12 are treated as 0; throws NumericalError below -1e-9.
Eigen::MatrixXd sample_steady_state(const GaussianSummary& g, std::size_t count, Rng& rng);

/// Type-7 empirical quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> values, double q);

enum class BoundKind {
  upper,  // isolated-agent Gaussian (factor 1/2)
  lower,  // networked Gaussian with beta_k(A) from the true combination matrix
};

struct IaBoundInput {
  std::vector<Pmf> hypotheses;
  std::size_t true_hypothesis = 0;
  double mu = 0.05;
  double beta = 0.5;  // beta_k(A), used by BoundKind::lower
};

/// Monte Carlo estimate of P(argmax_h w^(h) != h*) under the Gaussian model.
/// A beta override replaces the factor for either kind. Rejects mc_count < 100.
double bound_error_ia(const IaBoundInput& in, BoundKind which, std::optional<double> beta_override,
                      std::size_t mc_count, Rng& rng);

struct PiaBoundInput {
  Pmf null_pmf;
  Pmf alternative;
  double mu = 0.05;
  double beta = 0.5;
};

struct PiaBoundResult {
  double gamma = 0.0;
  double type2 = 0.0;
};

/// Calibrates gamma on Gaussian H0 samples to the requested type-I error, then
/// estimates the type-II error on Gaussian H1 samples. Samples are projected
/// onto the simplex (clip_to_simplex) before every KL evaluation.
PiaBoundResult bound_error_pia(const PiaBoundInput& in, BoundKind which, std::optional<double> beta_override,
                               double type1_target, std::size_t mc_count, Rng& rng);

}  // namespace mtdiff
