#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "mtdiff/error.hpp"
#include "mtdiff/theory.hpp"

using namespace mtdiff;

namespace {

constexpr double kThird = 1.0 / 3.0;
constexpr double kUniformVsShiftedMean = -1.37417181306293234;

Pmf uniform3() { return Pmf({kThird, kThird, kThird}); }

Pmf random_pmf(Rng& rng, std::size_t m) {
  std::vector<double> p(m);
  double total = 0.0;
  for (double& x : p) total += (x = 0.05 + rng.uniform());
  for (double& x : p) x /= total;
  return Pmf(p);
}

double entropy(const Pmf& p) {
  double h = 0.0;
  for (double x : p.probs()) h -= x * std::log(x);
  return h;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m).eigenvalues().minCoeff();
}

}  // namespace

TEST(LambdaMatrix, IndicatorUniform) {
  const auto l = lambda_matrix(uniform3(), StatisticModel::indicators(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(l(i, j), i == j ? 2.0 / 9.0 : -1.0 / 9.0, 1e-15);
  }
}

TEST(LambdaMatrix, IdenticalHypothesesGiveConstantMatrix) {
  const Pmf p({0.6, 0.3, 0.1});
  const auto l = lambda_matrix(uniform3(), StatisticModel::informed({p, p, p}));
  double mean = 0.0;
  double sq = 0.0;
  for (double x : p.probs()) {
    mean += std::log(x) / 3.0;
    sq += std::log(x) * std::log(x) / 3.0;
  }
  EXPECT_NEAR(l(0, 0), sq - mean * mean, 1e-12);
  EXPECT_NEAR((l.array() - l(0, 0)).abs().maxCoeff(), 0.0, 1e-12);
}

TEST(LambdaMatrix, DegenerateSourceIsNearlyZero) {
  const auto l = lambda_matrix(Pmf({0.999998, 1e-6, 1e-6}), StatisticModel::indicators(3));
  EXPECT_LT(l.cwiseAbs().maxCoeff(), 1e-5);
}

TEST(LambdaMatrix, AlphabetMismatchThrows) {
  EXPECT_THROW(lambda_matrix(uniform3(), StatisticModel::indicators(4)), ValidationError);
  EXPECT_THROW(lambda_matrix(uniform3(), StatisticModel::informed({Pmf({0.5, 0.5})})), ValidationError);
}

TEST(LambdaMatrix, SymmetricPsdAndIndicatorRowsSumToZero) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Pmf p = random_pmf(rng, 4);
    const auto li = lambda_matrix(p, StatisticModel::indicators(4));
    const auto la = lambda_matrix(p, StatisticModel::informed({random_pmf(rng, 4), random_pmf(rng, 4), p}));
    for (const auto* l : {&li, &la}) {
      EXPECT_NEAR((*l - l->transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
      EXPECT_GE(min_eigenvalue(*l), -1e-9);
    }
    EXPECT_LT(li.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(MeanVector, Examples) {
  const Pmf p({0.2, 0.5, 0.3});
  EXPECT_NEAR((mean_vector(p, StatisticModel::indicators(3)) - Eigen::Vector3d(0.2, 0.5, 0.3)).norm(), 0.0, 1e-15);
  const Pmf shifted({kThird - 0.25, kThird, kThird + 0.25});
  const auto m = mean_vector(uniform3(), StatisticModel::informed({uniform3(), shifted}));
  EXPECT_NEAR(m(0), -std::log(3.0), 1e-15);
  EXPECT_NEAR(m(1), kUniformVsShiftedMean, 1e-14);
}

TEST(MeanVector, MaximizedAtTrueHypothesis) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Pmf> hyps;
    for (int h = 0; h < 4; ++h) hyps.push_back(random_pmf(rng, 3));
    const auto model = StatisticModel::informed(hyps);
    const std::size_t truth = rng.index(4);
    const auto m = mean_vector(hyps[truth], model);
    EXPECT_NEAR(m(static_cast<Eigen::Index>(truth)), -entropy(hyps[truth]), 1e-12);
    for (std::size_t h = 0; h < 4; ++h) {
      if (h == truth) continue;
      EXPECT_LT(m(static_cast<Eigen::Index>(h)), m(static_cast<Eigen::Index>(truth)));
      EXPECT_NEAR(m(static_cast<Eigen::Index>(h)), -entropy(hyps[truth]) - kl_divergence(hyps[truth], hyps[h]), 1e-12);
    }
  }
}

TEST(SteadyState, Examples) {
  const auto model = StatisticModel::indicators(3);
  const auto w = steady_state_distribution(uniform3(), model, 0.05, StatusKind::networked, 0.5);
  EXPECT_NEAR(w.covariance(0, 0), 0.05 * 0.5 * 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(w.covariance(0, 0), 0.00555555555555555556, 1e-15);
  const auto z = steady_state_distribution(uniform3(), model, 0.05, StatusKind::isolated, 0.1);
  EXPECT_DOUBLE_EQ(z.factor, 0.5);
  EXPECT_EQ(z.covariance, w.covariance);
  const auto tiny = steady_state_distribution(uniform3(), model, 0.05, StatusKind::networked, 1.0 / 2e6);
  EXPECT_LT(tiny.covariance.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SteadyState, NetworkedIsBelowIsolatedInPsdOrder) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Pmf p = random_pmf(rng, 3);
    const auto model = StatisticModel::informed({p, random_pmf(rng, 3), random_pmf(rng, 3)});
    const double beta = 0.5 * rng.uniform();
    const auto w = steady_state_distribution(p, model, 0.05, StatusKind::networked, beta);
    const auto z = steady_state_distribution(p, model, 0.05, StatusKind::isolated);
    EXPECT_GE(min_eigenvalue(z.covariance - w.covariance), -1e-12);
  }
}

TEST(SampleSteadyState, ZeroCovarianceReturnsMean) {
  GaussianSummary g;
  g.mean = Eigen::Vector3d(0.1, 0.2, 0.7);
  g.covariance = Eigen::Matrix3d::Zero();
  Rng rng(1);
  const auto s = sample_steady_state(g, 50, rng);
  ASSERT_EQ(s.rows(), 50);
  for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_EQ(Eigen::VectorXd(s.row(i).transpose()), g.mean);
}

TEST(SampleSteadyState, IndicatorSamplesSumToOne) {
  Rng rng(5);
  const auto g = steady_state_distribution(Pmf({0.2, 0.5, 0.3}), StatisticModel::indicators(3), 0.05,
                                           StatusKind::isolated);
  const auto s = sample_steady_state(g, 1000, rng);
  EXPECT_LT((s.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
}

TEST(SampleSteadyState, SampleCovarianceMatches) {
  Rng rng(13);
  const Pmf p({0.6, 0.3, 0.1});
  const auto g = steady_state_distribution(p, StatisticModel::informed({p, Pmf({0.1, 0.1, 0.8}), Pmf({0.3, 0.4, 0.3})}), 0.05,
                                           StatusKind::networked, 0.2);
  const std::size_t n = 100000;
  const auto s = sample_steady_state(g, n, rng);
  const Eigen::MatrixXd centered = s.rowwise() - s.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(s.col(i).mean(), g.mean(i), 3.0 * std::sqrt(g.covariance(i, i) / n));
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double se = std::sqrt((g.covariance(i, i) * g.covariance(j, j) + g.covariance(i, j) * g.covariance(i, j)) / n);
      EXPECT_NEAR(cov(i, j), g.covariance(i, j), 3.0 * se);
    }
  }
}

TEST(SampleSteadyState, RejectsIndefiniteCovariance) {
  GaussianSummary g;
  g.mean = Eigen::Vector2d::Zero();
  g.covariance = Eigen::Matrix2d{{0.0, 1.0}, {1.0, 0.0}};
  Rng rng(1);
  EXPECT_THROW(sample_steady_state(g, 10, rng), NumericalError);
}

TEST(SampleSteadyState, DeterministicGivenRngState) {
  const auto g = steady_state_distribution(uniform3(), StatisticModel::indicators(3), 0.05, StatusKind::isolated);
  Rng a(77);
  Rng b(77);
  EXPECT_EQ(sample_steady_state(g, 20, a), sample_steady_state(g, 20, b));
}

TEST(EmpiricalQuantile, Type7) {
  EXPECT_DOUBLE_EQ(empirical_quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.9), 4.6);
  EXPECT_DOUBLE_EQ(empirical_quantile({5.0, 1.0, 3.0}, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(empirical_quantile({2.0, 1.0}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(empirical_quantile({2.0, 1.0}, 1.0), 2.0);
  EXPECT_THROW(empirical_quantile({}, 0.5), ValidationError);
}

TEST(BoundErrorIa, IdenticalHypothesesGiveUniformArgmax) {
  const IaBoundInput in{{uniform3(), uniform3(), uniform3(), uniform3()}, 2, 0.05, 0.1};
  Rng rng(3);
  EXPECT_NEAR(bound_error_ia(in, BoundKind::upper, std::nullopt, 5000, rng), 0.75, 0.02);
  EXPECT_NEAR(bound_error_ia(in, BoundKind::lower, std::nullopt, 5000, rng), 0.75, 0.02);
}

TEST(BoundErrorIa, SeparatedHypothesesGiveNoErrors) {
  const IaBoundInput in{{Pmf({0.9, 0.05, 0.05}), Pmf({0.05, 0.05, 0.9}), Pmf({0.05, 0.9, 0.05})}, 1, 0.001, 0.1};
  Rng rng(3);
  EXPECT_EQ(bound_error_ia(in, BoundKind::upper, std::nullopt, 2000, rng), 0.0);
}

TEST(BoundErrorIa, RejectsSmallMonteCarloCounts) {
  const IaBoundInput in{{uniform3(), Pmf({0.2, 0.3, 0.5})}, 0, 0.05, 0.1};
  Rng rng(3);
  EXPECT_THROW(bound_error_ia(in, BoundKind::upper, std::nullopt, 99, rng), ValidationError);
}

TEST(BoundErrorIa, LowerBoundBelowUpperBoundWithSharedSeeds) {
  Rng pick(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> probs = {kThird, kThird, kThird};
    const double a = 0.05 + 0.1 * pick.uniform();
    const IaBoundInput in{{uniform3(), Pmf({kThird - a, kThird, kThird + a}), Pmf({kThird + a, kThird, kThird - a})},
                          0, 0.05, 0.05 + 0.3 * pick.uniform()};
    Rng r1(100 + trial);
    Rng r2(100 + trial);
    const double upper = bound_error_ia(in, BoundKind::upper, std::nullopt, 4000, r1);
    const double lower = bound_error_ia(in, BoundKind::lower, std::nullopt, 4000, r2);
    EXPECT_LE(lower, upper + 1.96 * std::sqrt(upper * (1.0 - upper) / 4000.0));
  }
}

TEST(BoundErrorIa, OverrideReplacesFactor) {
  const IaBoundInput in{{uniform3(), Pmf({0.2, 0.3, 0.5})}, 0, 0.05, 0.1};
  Rng r1(9);
  Rng r2(9);
  EXPECT_EQ(bound_error_ia(in, BoundKind::upper, 0.1, 1000, r1),
            bound_error_ia(in, BoundKind::lower, std::nullopt, 1000, r2));
}

TEST(BoundErrorPia, AlternativeEqualToNull) {
  const PiaBoundInput in{uniform3(), uniform3(), 0.05, 0.2};
  Rng rng(4);
  const auto r = bound_error_pia(in, BoundKind::lower, std::nullopt, 0.1, 5000, rng);
  EXPECT_NEAR(r.type2, 0.9, 0.02);
  EXPECT_GT(r.gamma, 0.0);
}

TEST(BoundErrorPia, DistantAlternativeIsAlwaysDetected) {
  const PiaBoundInput in{uniform3(), Pmf({0.8, 0.1, 0.1}), 0.01, 0.2};
  Rng rng(4);
  EXPECT_EQ(bound_error_pia(in, BoundKind::upper, std::nullopt, 0.1, 2000, rng).type2, 0.0);
}

TEST(BoundErrorPia, GammaNonincreasingInTypeOneTarget) {
  const PiaBoundInput in{uniform3(), Pmf({0.4, 0.3, 0.3}), 0.05, 0.2};
  double previous = std::numeric_limits<double>::infinity();
  for (double target : {0.01, 0.05, 0.1, 0.2, 0.5}) {
    Rng rng(6);
    const double gamma = bound_error_pia(in, BoundKind::lower, std::nullopt, target, 1000, rng).gamma;
    EXPECT_LE(gamma, previous);
    previous = gamma;
  }
}

TEST(BoundErrorPia, RejectsBadInput) {
  const PiaBoundInput in{uniform3(), uniform3(), 0.05, 0.2};
  Rng rng(4);
  EXPECT_THROW(bound_error_pia(in, BoundKind::lower, std::nullopt, 0.1, 50, rng), ValidationError);
  EXPECT_THROW(bound_error_pia(in, BoundKind::lower, std::nullopt, 1.5, 500, rng), ValidationError);
}
