#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "pcda/pcda.hpp"

using namespace pcda;

namespace {

const double kLn2 = std::log(2.0);

double naive_ce(const std::vector<double>& z, std::size_t y) {
  double s = 0.0;
  for (double v : z) s += std::exp(v);
  return -std::log(std::exp(z[y]) / s);
}

std::vector<int> random_labels(Rng& rng, std::size_t n, std::size_t classes) {
  std::vector<int> y(n);
  for (int& v : y) v = static_cast<int>(rng.below(classes));
  return y;
}

}  // namespace

TEST(CrossEntropy, Table) {
  const std::vector<double> z0{0.0, 0.0};
  EXPECT_NEAR(cross_entropy(z0, 0), kLn2, 1e-12);
  const std::vector<double> z1{std::log(3.0), 0.0};
  EXPECT_NEAR(cross_entropy(z1, 0), std::log(4.0 / 3.0), 1e-12);
}

TEST(CrossEntropy, NonFiniteLogitIsNumericError) {
  const std::vector<double> z{0.0, std::numeric_limits<double>::quiet_NaN()};
  EXPECT_THROW(cross_entropy(z, 0), NumericError);
  const std::vector<double> inf{0.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(cross_entropy(inf, 0), NumericError);
}

TEST(CrossEntropy, StableFormMatchesNaive) {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    const auto c = oracle::random_size(rng, 2, 8);
    std::vector<double> z(c);
    for (double& v : z) v = rng.uniform(-30, 30);
    const auto y = static_cast<std::size_t>(rng.below(c));
    EXPECT_NEAR(cross_entropy(z, y), naive_ce(z, y), 1e-9);
  }
  const std::vector<double> big{1000.0, 0.0};
  EXPECT_NEAR(cross_entropy(big, 1), 1000.0, 1e-9);
}

TEST(CrossEntropy, GradientMatchesFiniteDifference) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = oracle::random_size(rng, 2, 8);
    std::vector<double> z(c);
    for (double& v : z) v = rng.uniform(-3, 3);
    const auto y = static_cast<std::size_t>(rng.below(c));
    std::vector<double> g(c);
    cross_entropy(z, y, g);
    const auto fd = oracle::central_difference(z, [&] { return cross_entropy(z, y); });
    EXPECT_LT(oracle::max_relative_error(g, fd), 1e-4);
  }
}

TEST(BinaryCrossEntropy, Table) {
  EXPECT_NEAR(binary_cross_entropy(0.5, 0), kLn2, 1e-12);
  EXPECT_NEAR(binary_cross_entropy(0.5, 1), kLn2, 1e-12);
  EXPECT_NEAR(binary_cross_entropy(1.0 - 1e-12, 1), 0.0, 1e-11);
  EXPECT_TRUE(std::isfinite(binary_cross_entropy(0.0, 1)));
  EXPECT_TRUE(std::isfinite(binary_cross_entropy(1.0, 0)));
}

TEST(BinaryCrossEntropy, MatchesDirectFormula) {
  Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const double p = rng.uniform(1e-6, 1.0 - 1e-6);
    const int d = static_cast<int>(rng.below(2));
    const double ref = -(d * std::log(p) + (1 - d) * std::log(1.0 - p));
    EXPECT_NEAR(binary_cross_entropy(p, d), ref, 1e-12);
  }
}

TEST(J1, LambdaZeroLeavesSourceCrossEntropyOnly) {
  Rng rng(4);
  const Matrix zs = oracle::random_matrix(rng, 5, 3);
  const auto ys = random_labels(rng, 5, 3);
  const Matrix dz = oracle::random_matrix(rng, 9, 1);
  LossConfig cfg;
  cfg.lambda = 0.0;
  const auto r = j1_loss(zs, ys, dz, 4, cfg);
  double ce = 0.0;
  for (std::size_t i = 0; i < 5; ++i) ce += naive_ce({zs(i, 0), zs(i, 1), zs(i, 2)}, ys[i]);
  EXPECT_NEAR(r.total, ce / 5.0, 1e-12);
}

TEST(J1, UniformDiscriminatorGivesTwoLambdaLn2) {
  Rng rng(5);
  const Matrix zs = oracle::random_matrix(rng, 4, 2);
  const auto ys = random_labels(rng, 4, 2);
  const Matrix dz(7, 1);  // logit 0 is probability 0.5
  for (double lambda : {0.3, 1.0}) {
    LossConfig cfg;
    cfg.lambda = lambda;
    const auto r = j1_loss(zs, ys, dz, 3, cfg);
    EXPECT_NEAR(r.total - r.cls_source, 2.0 * lambda * kLn2, 1e-12);
  }
}

TEST(J1, EmptySourceBatchIsError) {
  EXPECT_THROW(j1_loss(Matrix(0, 2), std::vector<int>{}, Matrix(3, 1), 3, LossConfig{}), ConfigError);
}

TEST(J1, GradientsMatchFiniteDifference) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ns = oracle::random_size(rng, 1, 6);
    const auto nt = oracle::random_size(rng, 1, 6);
    const auto c = oracle::random_size(rng, 2, 5);
    Matrix zs = oracle::random_matrix(rng, ns, c, -2, 2);
    const auto ys = random_labels(rng, ns, c);
    Matrix dz = oracle::random_matrix(rng, ns + nt, 1, -2, 2);
    LossConfig cfg;
    cfg.lambda = rng.uniform(0, 2);
    const auto r = j1_loss(zs, ys, dz, nt, cfg);
    auto total = [&] { return j1_loss(zs, ys, dz, nt, cfg).total; };
    auto domain = [&] { return j1_loss(zs, ys, dz, nt, cfg).domain; };
    EXPECT_LT(oracle::max_relative_error(r.grad_source_logits.data(),
                                         oracle::central_difference(zs.data(), total)),
              1e-4);
    EXPECT_LT(oracle::max_relative_error(r.grad_domain_logits.data(),
                                         oracle::central_difference(dz.data(), domain)),
              1e-4);
  }
}

TEST(J2, BetaOneWithoutNewSamplesReducesToJ1PlusTargetTerm) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t ns = 4;
    const std::size_t nt = 5;
    const Matrix zs = oracle::random_matrix(rng, ns, 3);
    const Matrix zt = oracle::random_matrix(rng, nt, 3);
    const auto ys = random_labels(rng, ns, 3);
    const auto yt = random_labels(rng, nt, 3);
    const Matrix dz = oracle::random_matrix(rng, ns + nt, 1);
    LossConfig cfg;
    cfg.beta = 1.0;
    const auto j1 = j1_loss(zs, ys, dz, nt, cfg);
    const auto j2 = j2_loss(zs, ys, zt, yt, std::vector<bool>(nt, false), dz, cfg);
    EXPECT_NEAR(j2.domain, j1.domain, 1e-12);
    EXPECT_NEAR(j2.total, j1.total + j2.cls_target, 1e-12);
  }
}

TEST(J2, NewSampleDomainLossIsWeightedByBeta) {
  // One source row and one new target row whose domain loss is 0.7.
  const double p = 1.0 - std::exp(-0.7);  // -ln(1 - p) = 0.7
  const double logit = std::log(p / (1.0 - p));
  const Matrix zs(1, 2);
  const std::vector<int> ys{0};
  const Matrix zt(1, 2);
  const std::vector<int> yt{0};
  const Matrix dz(2, 1, {0.0, logit});
  LossConfig cfg;
  cfg.lambda = 1.0;
  cfg.beta = 2.0;
  const auto r = j2_loss(zs, ys, zt, yt, {true}, dz, cfg);
  EXPECT_NEAR(r.domain - kLn2, 1.4, 1e-12);
}

TEST(J2, MixedBatchMatchesTermByTermRecomputation) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ns = oracle::random_size(rng, 1, 6);
    const auto nt = oracle::random_size(rng, 1, 6);
    const std::size_t c = 3;
    const Matrix zs = oracle::random_matrix(rng, ns, c, -2, 2);
    const Matrix zt = oracle::random_matrix(rng, nt, c, -2, 2);
    const auto ys = random_labels(rng, ns, c);
    auto yt = random_labels(rng, nt, c);
    if (nt > 1) yt[0] = kNoLabel;
    std::vector<bool> fresh(nt);
    for (std::size_t i = 0; i < nt; ++i) fresh[i] = rng.below(2) == 1;
    const Matrix dz = oracle::random_matrix(rng, ns + nt, 1, -2, 2);
    LossConfig cfg;
    cfg.lambda = rng.uniform(0, 1);
    cfg.beta = rng.uniform(1, 3);

    double src = 0.0;
    for (std::size_t i = 0; i < ns; ++i) src += naive_ce({zs(i, 0), zs(i, 1), zs(i, 2)}, ys[i]);
    src /= static_cast<double>(ns);
    double tgt = 0.0;
    std::size_t labelled = 0;
    for (std::size_t i = 0; i < nt; ++i) {
      if (yt[i] == kNoLabel) continue;
      tgt += naive_ce({zt(i, 0), zt(i, 1), zt(i, 2)}, yt[i]);
      ++labelled;
    }
    tgt = labelled ? tgt / static_cast<double>(labelled) : 0.0;
    double ds = 0.0;
    for (std::size_t i = 0; i < ns; ++i) ds += -std::log(1.0 / (1.0 + std::exp(-dz(i, 0))));
    double dt = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-dz(ns + i, 0)));
      dt += (fresh[i] ? cfg.beta : 1.0) * -std::log(1.0 - p);
    }
    const double expect = src + tgt + cfg.lambda * (ds / ns + dt / nt);
    const auto r = j2_loss(zs, ys, zt, yt, fresh, dz, cfg);
    EXPECT_NEAR(r.total, expect, 1e-12);
  }
}

TEST(J2, GradientsMatchFiniteDifference) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ns = oracle::random_size(rng, 1, 5);
    const auto nt = oracle::random_size(rng, 1, 5);
    const auto c = oracle::random_size(rng, 2, 4);
    Matrix zs = oracle::random_matrix(rng, ns, c, -2, 2);
    Matrix zt = oracle::random_matrix(rng, nt, c, -2, 2);
    const auto ys = random_labels(rng, ns, c);
    const auto yt = random_labels(rng, nt, c);
    std::vector<bool> fresh(nt);
    for (std::size_t i = 0; i < nt; ++i) fresh[i] = rng.below(2) == 1;
    Matrix dz = oracle::random_matrix(rng, ns + nt, 1, -2, 2);
    LossConfig cfg;
    cfg.beta = rng.uniform(1, 3);
    const auto r = j2_loss(zs, ys, zt, yt, fresh, dz, cfg);
    auto total = [&] { return j2_loss(zs, ys, zt, yt, fresh, dz, cfg).total; };
    auto domain = [&] { return j2_loss(zs, ys, zt, yt, fresh, dz, cfg).domain; };
    EXPECT_LT(oracle::max_relative_error(r.grad_target_logits.data(),
                                         oracle::central_difference(zt.data(), total)),
              1e-4);
    EXPECT_LT(oracle::max_relative_error(r.grad_source_logits.data(),
                                         oracle::central_difference(zs.data(), total)),
              1e-4);
    EXPECT_LT(oracle::max_relative_error(r.grad_domain_logits.data(),
                                         oracle::central_difference(dz.data(), domain)),
              1e-4);
  }
}

TEST(J2, NoPseudoLabelsZeroesTargetTermAndFlags) {
  const Matrix zs(2, 2);
  const std::vector<int> ys{0, 1};
  const Matrix zt(2, 2, {5.0, -5.0, 1.0, 2.0});
  const std::vector<int> yt{kNoLabel, kNoLabel};
  const auto r = j2_loss(zs, ys, zt, yt, {false, false}, Matrix(4, 1), LossConfig{});
  EXPECT_TRUE(r.missing_pseudo_labels);
  EXPECT_EQ(r.cls_target, 0.0);
  for (double g : r.grad_target_logits.data()) EXPECT_EQ(g, 0.0);
}

TEST(Ecl, Table) {
  LossConfig cfg;
  cfg.margin = 2.0;
  const std::vector<int> same{1, 1};
  const std::vector<int> diff{0, 1};
  EXPECT_EQ(ecl_loss(Matrix(2, 2, {0.3, 0.4, 0.3, 0.4}), same, cfg).value, 0.0);
  EXPECT_EQ(ecl_loss(Matrix(2, 2, {0.0, 0.0, 2.0, 0.0}), diff, cfg).value, 0.0);
  EXPECT_EQ(ecl_loss(Matrix(2, 2, {0.0, 0.0, 3.0, 4.0}), diff, cfg).value, 0.0);
  EXPECT_NEAR(ecl_loss(Matrix(2, 2, {0.0, 0.0, 0.6, 0.8}), diff, cfg).value, 1.0, 1e-12);
}

TEST(Ecl, FewerThanTwoRowsIsZero) {
  const LossConfig cfg;
  EXPECT_EQ(ecl_loss(Matrix(1, 3, {1.0, 2.0, 3.0}), std::vector<int>{0}, cfg).value, 0.0);
  EXPECT_EQ(ecl_loss(Matrix(0, 3), std::vector<int>{}, cfg).value, 0.0);
  EXPECT_EQ(ecl_loss(Matrix(2, 1, {0.0, 5.0}), std::vector<int>{0, kNoLabel}, cfg).value, 0.0);
}

TEST(Ecl, KinkAndCoincidentCrossPairHaveZeroGradient) {
  const LossConfig cfg;
  const std::vector<int> diff{0, 1};
  const auto kink = ecl_loss(Matrix(2, 1, {0.0, 2.0}), diff, cfg);
  for (double v : kink.grad.data()) EXPECT_EQ(v, 0.0);
  const auto coincident = ecl_loss(Matrix(2, 1, {1.0, 1.0}), diff, cfg);
  EXPECT_NEAR(coincident.value, 4.0, 1e-12);
  for (double v : coincident.grad.data()) EXPECT_EQ(v, 0.0);
}

TEST(Ecl, NonNegativeSymmetricAndPermutationInvariant) {
  Rng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = oracle::random_size(rng, 2, 8);
    const auto c = oracle::random_size(rng, 2, 4);
    const Matrix h = oracle::random_matrix(rng, n, c, -2, 2);
    const auto y = random_labels(rng, n, 3);
    const LossConfig cfg;
    const double v = ecl_loss(h, y, cfg).value;
    EXPECT_GE(v, 0.0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<int> yp(n);
    for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];
    EXPECT_NEAR(ecl_loss(gather_rows(h, perm), yp, cfg).value, v, 1e-12);
  }
}

TEST(Ecl, ZeroExactlyWhenSameCoincideAndCrossSeparated) {
  LossConfig cfg;
  cfg.margin = 2.0;
  const Matrix h(4, 2, {0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 3.0, 0.0});
  EXPECT_EQ(ecl_loss(h, std::vector<int>{0, 0, 1, 1}, cfg).value, 0.0);
  Matrix moved = h;
  moved(1, 1) = 1e-3;
  EXPECT_GT(ecl_loss(moved, std::vector<int>{0, 0, 1, 1}, cfg).value, 0.0);
}

TEST(Ecl, GradientMatchesFiniteDifference) {
  Rng rng(11);
  int checked = 0;
  while (checked < 100) {
    const auto n = oracle::random_size(rng, 2, 6);
    const auto c = oracle::random_size(rng, 1, 4);
    Matrix h = oracle::random_matrix(rng, n, c, -1.5, 1.5);
    const auto y = random_labels(rng, n, 2);
    LossConfig cfg;
    cfg.ecl_weight = rng.uniform(0.5, 2);
    bool near_kink = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double sq = 0.0;
        for (std::size_t k = 0; k < c; ++k) sq += (h(i, k) - h(j, k)) * (h(i, k) - h(j, k));
        const double d = std::sqrt(sq);
        near_kink |= y[i] != y[j] && (std::abs(d - cfg.margin) < 1e-2 || d < 1e-2);
      }
    }
    if (near_kink) continue;
    const auto r = ecl_loss(h, y, cfg);
    const auto fd = oracle::central_difference(h.data(), [&] { return ecl_loss(h, y, cfg).value; });
    EXPECT_LT(oracle::max_relative_error(r.grad.data(), fd), 1e-4);
    ++checked;
  }
}

TEST(LossConfig, ValidationRejectsOutOfRange) {
  LossConfig c;
  EXPECT_NO_THROW(c.validate());
  c.beta = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LossConfig{};
  c.margin = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LossConfig{};
  c.lambda = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = LossConfig{};
  c.ecl_weight = std::numeric_limits<double>::infinity();
  EXPECT_THROW(c.validate(), ConfigError);
}
