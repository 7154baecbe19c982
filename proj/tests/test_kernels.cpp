#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "sdyn/errors.hpp"
#include "sdyn/kernels.hpp"

using namespace sdyn;

namespace {

// Reference value straight from the formula.
double rq_reference(const std::vector<double>& x, const std::vector<double>& y, double alpha, double ell) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::pow(1.0 + s / (2.0 * alpha * ell * ell), -alpha);
}

}  // namespace

TEST(RqKernel, CoincidentPointsGiveOne) {
  const KernelConfig cfg;
  std::vector<double> x{0.3, -1.2, 4.0};
  EXPECT_EQ(rqk_eval(x, x, cfg), 1.0);
}

TEST(RqKernel, TwoLengthScalesApartGivesQuarter) {
  const KernelConfig cfg{2.0, 0.01};
  std::vector<double> x{0.02}, y{0.0};
  EXPECT_NEAR(rqk_eval(x, y, cfg), 0.25, 1e-15);
}

TEST(RqKernel, GradientExample) {
  const KernelConfig cfg{2.0, 0.01};
  std::vector<double> x{0.02}, y{0.0};
  const auto g = rqk_grad1(x, y, cfg);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_NEAR(g[0], -25.0, 1e-12);
  EXPECT_NEAR(rqk_grad2(x, y, cfg)[0], 25.0, 1e-12);
}

TEST(RqKernel, GradientVanishesAtCoincidence) {
  const KernelConfig cfg;
  std::vector<double> x{1.0, 2.0};
  for (double v : rqk_grad1(x, x, cfg)) EXPECT_EQ(v, 0.0);
}

TEST(RqKernel, MatchesFormulaAndIsSymmetric) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 0.02);
  for (int trial = 0; trial < 50; ++trial) {
    const KernelConfig cfg{0.5 + trial * 0.1, 0.01 + 0.002 * trial};
    std::vector<double> x(6), y(6);
    for (auto& v : x) v = n(rng);
    for (auto& v : y) v = n(rng);
    EXPECT_NEAR(rqk_eval(x, y, cfg), rq_reference(x, y, cfg.alpha, cfg.length_scale), 1e-14);
    EXPECT_EQ(rqk_eval(x, y, cfg), rqk_eval(y, x, cfg));
    const double k = rqk_eval(x, y, cfg);
    EXPECT_GT(k, 0.0);
    EXPECT_LE(k, 1.0);
  }
}

TEST(RqKernel, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.015);
  const KernelConfig cfg{2.0, 0.01};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5), y(5);
    for (auto& v : x) v = n(rng);
    for (auto& v : y) v = n(rng);
    const auto g1 = rqk_grad1(x, y, cfg);
    const auto g2 = rqk_grad2(x, y, cfg);
    const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * cfg.length_scale;
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto xp = x, xm = x, yp = y, ym = y;
      xp[i] += h;
      xm[i] -= h;
      yp[i] += h;
      ym[i] -= h;
      const double fd1 = (rqk_eval(xp, y, cfg) - rqk_eval(xm, y, cfg)) / (2 * h);
      const double fd2 = (rqk_eval(x, yp, cfg) - rqk_eval(x, ym, cfg)) / (2 * h);
      double scale = 0.0;
      for (double v : g1) scale = std::max(scale, std::abs(v));
      EXPECT_LE(std::abs(g1[i] - fd1), 1e-8 * scale);
      EXPECT_LE(std::abs(g2[i] - fd2), 1e-8 * scale);
      EXPECT_EQ(g2[i], -g1[i]);
    }
  }
}

TEST(RqKernel, GramMatrixIsPositiveSemidefinite) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 0.02);
  const KernelConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const int npts = 2 + trial % 7;
    std::vector<std::vector<double>> pts(npts, std::vector<double>(3));
    for (auto& p : pts)
      for (auto& v : p) v = n(rng);
    Eigen::MatrixXd gram(npts, npts);
    for (int i = 0; i < npts; ++i)
      for (int j = 0; j < npts; ++j) gram(i, j) = rqk_eval(pts[i], pts[j], cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(RqKernel, RejectsMismatchedDimensions) {
  const KernelConfig cfg;
  std::vector<double> x{1.0, 2.0}, y{1.0};
  EXPECT_THROW(rqk_eval(x, y, cfg), InvalidArgument);
  EXPECT_THROW(rqk_grad1(x, y, cfg), InvalidArgument);
  EXPECT_THROW(rqk_grad2(x, y, cfg), InvalidArgument);
}

TEST(RqKernel, RejectsNonPositiveHyperparameters) {
  EXPECT_THROW((KernelConfig{0.0, 0.01}.validate()), InvalidArgument);
  EXPECT_THROW((KernelConfig{2.0, -1.0}.validate()), InvalidArgument);
  EXPECT_NO_THROW(KernelConfig{}.validate());
}
