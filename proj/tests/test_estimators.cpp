#include <cmath>

#include "doctest.h"
#include "gpilab/estimators.hpp"
#include "gpilab/sigma_gen.hpp"

using namespace gpilab;
using est::Estimate;
using linalg::BlockPartition;
using linalg::SymMatrix;
using tw::TraceWishartParams;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

TraceWishartParams univariate(double two_alpha, double sigma2 = 1.0) {
  return TraceWishartParams(two_alpha, BlockPartition({1}),
                            SymMatrix(Eigen::MatrixXd::Constant(1, 1, sigma2)));
}

// Hand Isserlis oracles for squared centered Gaussians with covariance c.
double e_z2z2(const Eigen::MatrixXd& c) { return c(0, 0) * c(1, 1) + 2.0 * c(0, 1) * c(0, 1); }

double e_z2z2z2(const Eigen::MatrixXd& c) {
  return c(0, 0) * c(1, 1) * c(2, 2) +
         2.0 * (c(0, 0) * c(1, 2) * c(1, 2) + c(1, 1) * c(0, 2) * c(0, 2) +
                c(2, 2) * c(0, 1) * c(0, 1)) +
         8.0 * c(0, 1) * c(0, 2) * c(1, 2);
}

}  // namespace

TEST_CASE("moment_wick pinned and closed-form cases") {
  TraceWishartParams pair(1.0, BlockPartition({1, 1}), SymMatrix(mat2(1, 0.5, 0.5, 1)));
  CHECK(est::moment_wick(pair, {0, 0}).value == 1.0);

  CHECK(est::moment_wick(univariate(2.0), {2}).value == doctest::Approx(2.0).epsilon(1e-12));

  // order 1 with unit diagonal: squared Gaussians with covariance sigma/2
  const double v = est::moment_wick(pair, {1, 1}).value;
  CHECK(v == doctest::Approx(e_z2z2(0.5 * pair.sigma().mat())).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.375).epsilon(1e-12));

  // gamma closed form over orders, degrees and scales
  for (int two_alpha = 1; two_alpha <= 6; ++two_alpha) {
    for (double sigma2 : {1.0, 2.5}) {
      const double alpha = 0.5 * two_alpha;
      for (int n = 0; n <= 5; ++n) {
        const double expected =
            std::pow(sigma2, n) * std::exp(std::lgamma(alpha + n) - std::lgamma(alpha));
        const double got = est::moment_wick(univariate(two_alpha, sigma2), {n}).value;
        CHECK(got == doctest::Approx(expected).epsilon(1e-10));
      }
    }
  }

  // trivariate order-1 case against the hand formula
  const SymMatrix eq = cli::equicorrelated(3, 0.5);
  TraceWishartParams triple(1.0, BlockPartition({1, 1, 1}), eq);
  CHECK(est::moment_wick(triple, {1, 1, 1}).value ==
        doctest::Approx(e_z2z2z2(0.5 * eq.mat())).epsilon(1e-12));

  CHECK_THROWS_AS(est::moment_wick(univariate(1.5), {2}), std::invalid_argument);
  CHECK_THROWS_AS(est::moment_wick(univariate(1.0), {7}), std::invalid_argument);
  CHECK_THROWS_AS(est::moment_wick(pair, {4, 3}), std::invalid_argument);
  CHECK_THROWS_AS(est::moment_wick(pair, {-1, 1}), std::invalid_argument);
}

TEST_CASE("moment_wick handles block sizes above one") {
  const SymMatrix sigma = cli::generate_sigma(cli::SigmaKind::spd, 3, 31);
  TraceWishartParams params(2.0, BlockPartition({2, 1}), sigma);
  const double exact = est::moment_wick(params, {1, 1}).value;

  // cross-check against Monte Carlo
  const Estimate mc = est::expectation_product_mc(
      params, {est::power_integrand(1.0), est::power_integrand(1.0)}, 400000, 3);
  CHECK(std::abs(mc.value - exact) < 5.0 * mc.stderror);

  // and against the transform: E[X1 X2] = d2/dt1 dt2 L at 0
  const double h = 1e-4;
  const auto lap = [&](double t1, double t2) { return tw::laplace(params, {t1, t2}); };
  const double mixed =
      (lap(h, h) - lap(h, 0) - lap(0, h) + lap(0, 0)) / (h * h);
  CHECK(exact == doctest::Approx(mixed).epsilon(1e-3));
}

TEST_CASE("negative-moment quadrature pinned values") {
  // E X^(-1/2) for the unit-mean exponential-type case: Gamma(1/2) = sqrt(pi)
  const Estimate e = est::moment_neg_quadrature(univariate(2.0), {0.5});
  CHECK(e.value == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
  CHECK(e.stderror < 1e-10);
  CHECK(e.method == est::Method::quadrature);

  // independence: block-diagonal product factorizes
  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(2, 2);
  bd(0, 0) = 1.3;
  bd(1, 1) = 0.8;
  TraceWishartParams ind(3.0, BlockPartition({1, 1}), SymMatrix(bd));
  const double joint = est::moment_neg_quadrature(ind, {0.4, 0.9}).value;
  const double m1 = est::moment_neg_quadrature(tw::marginal(ind, {0}), {0.4}).value;
  const double m2 = est::moment_neg_quadrature(tw::marginal(ind, {1}), {0.9}).value;
  CHECK(joint == doctest::Approx(m1 * m2).epsilon(1e-8));

  // exponents near zero give the zeroth moment
  CHECK(est::moment_neg_quadrature(univariate(2.0), {1e-3}).value ==
        doctest::Approx(1.0).epsilon(1e-2));

  CHECK_THROWS_AS(est::moment_neg_quadrature(univariate(2.0), {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(
      est::moment_neg_quadrature(
          TraceWishartParams(1.0, BlockPartition({1, 1}), SymMatrix(Eigen::MatrixXd::Ones(2, 2))),
          {0.2, 0.2}),
      std::invalid_argument);
  const SymMatrix s4 = cli::generate_sigma(cli::SigmaKind::spd, 4, 2);
  CHECK_THROWS_AS(est::moment_neg_quadrature(TraceWishartParams(4.0, BlockPartition({1, 1, 1, 1}), s4),
                                             {0.1, 0.1, 0.1, 0.1}),
                  std::invalid_argument);
}

TEST_CASE("quadrature refinement is stable and agrees with Monte Carlo") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const SymMatrix sigma = cli::generate_sigma(cli::SigmaKind::spd, 2, seed + 10);
    TraceWishartParams params(seed % 2 ? 2.0 : 3.0, BlockPartition({1, 1}), sigma);
    const double alpha = params.alpha();
    const std::vector<double> q = {0.9 * alpha, 0.45 * alpha};
    const Estimate e = est::moment_neg_quadrature(params, q);
    CHECK(e.stderror < 1e-6 * std::abs(e.value));
  }

  const SymMatrix sigma = cli::generate_sigma(cli::SigmaKind::spd, 2, 77);
  TraceWishartParams params(2.0, BlockPartition({1, 1}), sigma);
  const Estimate exact = est::moment_neg_quadrature(params, {0.3, 0.4});
  auto inv_pow = [](double e) {
    return est::Integrand{[e](double x) { return std::pow(x, -e); }, std::nullopt};
  };
  const Estimate mc =
      est::expectation_product_mc(params, {inv_pow(0.3), inv_pow(0.4)}, 600000, 5);
  CHECK(std::abs(mc.value - exact.value) < 5.0 * mc.stderror);
}

TEST_CASE("expectation_product_mc basics") {
  TraceWishartParams pair(1.0, BlockPartition({1, 1}), SymMatrix(mat2(1, 0.5, 0.5, 1)));
  auto one = est::Integrand{[](double) { return 1.0; }, 1.0};
  const Estimate c = est::expectation_product_mc(pair, {one, one}, 10000, 1);
  CHECK(c.value == doctest::Approx(1.0));
  CHECK(c.stderror == doctest::Approx(0.0));

  // mean from the transform-derivative oracle
  TraceWishartParams uni = univariate(2.0);
  const Estimate m =
      est::expectation_product_mc(uni, {est::power_integrand(1.0)}, 200000, 2);
  const double h = 1e-6;
  const double mean_oracle = -std::log(tw::laplace(uni, {h})) / h;
  CHECK(std::abs(m.value - mean_oracle) < 5.0 * m.stderror);

  const Estimate again =
      est::expectation_product_mc(uni, {est::power_integrand(1.0)}, 200000, 2);
  CHECK(again.value == m.value);
  CHECK(again.stderror == m.stderror);

  CHECK_THROWS_AS(est::expectation_product_mc(uni, {est::power_integrand(1.0)}, 100, 2),
                  std::invalid_argument);
  auto bad = est::Integrand{[](double) { return std::numeric_limits<double>::infinity(); },
                            std::nullopt};
  CHECK_THROWS_AS(est::expectation_product_mc(uni, {bad}, 10000, 2), std::runtime_error);
}

TEST_CASE("zero draws are rejected under a degenerate block") {
  // one block has zero scale, so its trace is exactly zero on every draw
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2, 2);
  s(0, 0) = 1.0;
  TraceWishartParams degen(1.0, BlockPartition({1, 1}), SymMatrix(s));
  auto invroot = est::Integrand{[](double x) { return 1.0 / std::sqrt(x); }, std::nullopt};
  CHECK_THROWS_AS(
      est::expectation_product_mc(degen, {est::power_integrand(1.0), invroot}, 10000, 4),
      std::runtime_error);  // every draw rejected

  // with a finite limit the zero coordinate contributes through its limit
  const Estimate ok = est::expectation_product_mc(
      degen, {est::power_integrand(1.0), est::power_integrand(0.0)}, 10000, 4);
  CHECK(ok.n_rejected == 0);
  CHECK(ok.value > 0.0);

  // mixed: exponent zero on the degenerate block via x^0 limit 1
  const Estimate rej = est::expectation_product_mc(
      degen, {est::power_integrand(1.0), est::power_integrand(0.5)}, 10000, 4);
  CHECK(rej.n_rejected == 0);  // x^0.5 has limit 0 at 0, finite
  CHECK(rej.value == doctest::Approx(0.0));
}

TEST_CASE("gap_mc pinned behavior") {
  // independence: gap compatible with zero
  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(2, 2);
  bd(0, 0) = 1.0;
  bd(1, 1) = 1.0;
  TraceWishartParams ind(1.0, BlockPartition({1, 1}), SymMatrix(bd));
  const est::McGap g0 =
      est::gap_mc(ind, {est::power_integrand(1.0), est::power_integrand(1.0)}, 1, 100000, 9);
  CHECK(std::abs(g0.gap) <= 5.0 * g0.gap_stderr);

  // correlated pair, first moments: gap = 2 (rho/2)^2 by the hand oracle
  TraceWishartParams pair(1.0, BlockPartition({1, 1}), SymMatrix(mat2(1, 0.8, 0.8, 1)));
  const Eigen::MatrixXd c = 0.5 * pair.sigma().mat();
  const double expected_gap = e_z2z2(c) - c(0, 0) * c(1, 1);
  CHECK(expected_gap == doctest::Approx(0.32).epsilon(1e-12));
  const est::McGap g =
      est::gap_mc(pair, {est::power_integrand(1.0), est::power_integrand(1.0)}, 1, 1000000, 11);
  CHECK(std::abs(g.gap - expected_gap) <= 5.0 * g.gap_stderr);

  const est::McGap repeat =
      est::gap_mc(pair, {est::power_integrand(1.0), est::power_integrand(1.0)}, 1, 1000000, 11);
  CHECK(repeat.gap == g.gap);
  CHECK(repeat.gap_stderr == g.gap_stderr);
}
