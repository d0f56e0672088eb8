#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gpilab/harness.hpp"
#include "gpilab/sigma_gen.hpp"
#include "gpilab/trace_wishart.hpp"

using namespace gpilab;
using linalg::BlockPartition;
using linalg::SymMatrix;
using tw::TraceWishartParams;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

TraceWishartParams pair_rho(double rho, double two_alpha = 1.0) {
  return TraceWishartParams(two_alpha, BlockPartition({1, 1}), SymMatrix(mat2(1, rho, rho, 1)));
}

}  // namespace

TEST_CASE("parameter validation enforces the admissible order range") {
  const SymMatrix sigma(mat2(1, 0.5, 0.5, 1));
  const BlockPartition part({1, 1});
  CHECK_NOTHROW(TraceWishartParams(1.0, part, sigma));    // integer
  CHECK_NOTHROW(TraceWishartParams(1.5, part, sigma));    // > p - 1 = 1
  CHECK_THROWS_AS(TraceWishartParams(0.5, part, sigma), std::invalid_argument);
  CHECK_THROWS_AS(TraceWishartParams(-1.0, part, sigma), std::invalid_argument);

  // integer order below p - 1 is fine
  const SymMatrix big = cli::generate_sigma(cli::SigmaKind::spd, 4, 7);
  CHECK_NOTHROW(TraceWishartParams(2.0, BlockPartition({2, 2}), big));
  // non-integer order below p - 1 is not
  CHECK_THROWS_AS(TraceWishartParams(2.5, BlockPartition({2, 2}), big), std::invalid_argument);

  CHECK_THROWS_AS(TraceWishartParams(1.0, BlockPartition({1, 1, 1}), sigma),
                  std::invalid_argument);
  CHECK_THROWS_AS(TraceWishartParams(1.0, part, SymMatrix(mat2(1, 2, 2, 1))),
                  linalg::NotPositiveSemidefinite);
}

TEST_CASE("laplace pinned values") {
  TraceWishartParams uni(2.0, BlockPartition({1}), SymMatrix(Eigen::MatrixXd::Identity(1, 1)));
  CHECK(tw::laplace(uni, {0.0}) == 1.0);
  CHECK(tw::laplace(uni, {1.0}) == doctest::Approx(0.5).epsilon(1e-14));

  TraceWishartParams pair = pair_rho(0.5);
  CHECK(tw::laplace(pair, {1.0, 1.0}) ==
        doctest::Approx(1.0 / std::sqrt(3.75)).epsilon(1e-13));
  CHECK_THROWS_AS(tw::laplace(pair, {-0.1, 1.0}), std::invalid_argument);

  for (double t1 : {0.1, 1.0, 5.0}) {
    for (double t2 : {0.1, 1.0, 5.0}) {
      const double v = tw::laplace(pair, {t1, t2});
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("marginal embeds the transform") {
  TraceWishartParams pair = pair_rho(0.5);
  const TraceWishartParams full = tw::marginal(pair, {0, 1});
  CHECK(full.fingerprint() == pair.fingerprint());

  const TraceWishartParams first = tw::marginal(pair, {0});
  CHECK(tw::laplace(first, {1.0}) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));

  CHECK_THROWS_AS(tw::marginal(pair, {}), std::invalid_argument);

  // embedding identity on random parameter sets and subsets
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int d = 3;
    const SymMatrix sigma = cli::generate_sigma(
        seed % 2 ? cli::SigmaKind::spd : cli::SigmaKind::spd_nonneg, 4, seed);
    TraceWishartParams params(seed % 3 == 0 ? 2.0 : 3.5, BlockPartition({1, 2, 1}), sigma);
    const std::vector<std::vector<int>> subsets = {{0}, {2}, {0, 1}, {1, 2}, {0, 2}, {0, 1, 2}};
    for (const auto& j : subsets) {
      const TraceWishartParams marg = tw::marginal(params, j);
      std::vector<double> t_sub(j.size());
      for (std::size_t k = 0; k < j.size(); ++k) t_sub[k] = 0.3 + 0.4 * static_cast<double>(k);
      std::vector<double> t_full(d, 0.0);
      for (std::size_t k = 0; k < j.size(); ++k) t_full[j[k]] = t_sub[k];
      CHECK(tw::laplace(marg, t_sub) ==
            doctest::Approx(tw::laplace(params, t_full)).epsilon(1e-13));
    }
  }
}

TEST_CASE("block_diagonalize zeroes exactly the cross blocks") {
  TraceWishartParams pair = pair_rho(0.5);
  const TraceWishartParams star = tw::block_diagonalize(pair, 1);
  CHECK((star.sigma().mat() - Eigen::MatrixXd::Identity(2, 2)).norm() == doctest::Approx(0.0));
  // idempotent on block-diagonal input
  const TraceWishartParams star2 = tw::block_diagonalize(star, 1);
  CHECK(star2.fingerprint() == star.fingerprint());

  // three blocks, split after the second: the (0,1) cross block survives
  const SymMatrix sigma = cli::generate_sigma(cli::SigmaKind::spd, 4, 3);
  TraceWishartParams params(3.5, BlockPartition({1, 2, 1}), sigma);
  const TraceWishartParams d2 = tw::block_diagonalize(params, 2);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(d2.sigma()(i, j) == sigma(i, j));  // leading 3x3 untouched
    }
    CHECK(d2.sigma()(i, 3) == 0.0);
    CHECK(d2.sigma()(3, i) == 0.0);
  }
  CHECK(d2.sigma()(3, 3) == sigma(3, 3));

  CHECK_THROWS_AS(tw::block_diagonalize(pair, 2), std::invalid_argument);
}

TEST_CASE("transform factorizes exactly across independent blocks") {
  Eigen::MatrixXd bd = Eigen::MatrixXd::Zero(3, 3);
  bd.topLeftCorner(2, 2) = mat2(1.5, 0.4, 0.4, 1.0);
  bd(2, 2) = 2.0;
  TraceWishartParams params(1.0, BlockPartition({2, 1}), SymMatrix(bd));
  const TraceWishartParams left = tw::marginal(params, {0});
  const TraceWishartParams right = tw::marginal(params, {1});
  for (double t1 : {0.2, 1.0, 3.0}) {
    for (double t2 : {0.5, 2.0}) {
      CHECK(tw::laplace(params, {t1, t2}) ==
            doctest::Approx(tw::laplace(left, {t1}) * tw::laplace(right, {t2})).epsilon(1e-13));
    }
  }
}

TEST_CASE("block-diagonal comparison dominates on grids") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const SymMatrix sigma = cli::generate_sigma(cli::SigmaKind::spd, 3, seed + 50);
    TraceWishartParams params(seed % 2 ? 1.0 : 2.5, BlockPartition({1, 1, 1}), sigma);
    for (int d1 : {1, 2}) {
      const TraceWishartParams star = tw::block_diagonalize(params, d1);
      for (const auto& t : harness::default_t_grid(3, 30)) {
        CHECK(tw::laplace(params, t) >= tw::laplace(star, t) - 1e-12);
      }
    }
  }
}

TEST_CASE("sampler selection and bit-for-bit reproducibility") {
  TraceWishartParams gauss_path = pair_rho(0.5, 1.0);  // 2a = 1 <= p-1 = 1
  const tw::SampleMatrix s1 = tw::sample(gauss_path, 2000, 42);
  CHECK(s1.sampler == tw::SamplerTag::gaussian_sum);

  TraceWishartParams bartlett_path = pair_rho(0.5, 3.0);  // 2a = 3 > 1
  const tw::SampleMatrix s2 = tw::sample(bartlett_path, 2000, 42);
  CHECK(s2.sampler == tw::SamplerTag::bartlett);

  const tw::SampleMatrix r1 = tw::sample(gauss_path, 2000, 42);
  CHECK((r1.values - s1.values).cwiseAbs().maxCoeff() == 0.0);

  // worker count must not change anything
  const tw::SampleMatrix w1 = tw::sample(bartlett_path, 5000, 7, 1);
  const tw::SampleMatrix w3 = tw::sample(bartlett_path, 5000, 7, 3);
  CHECK((w1.values - w3.values).cwiseAbs().maxCoeff() == 0.0);

  CHECK(s1.values.minCoeff() >= 0.0);
  CHECK(s2.values.minCoeff() >= 0.0);
  CHECK_THROWS_AS(tw::sample(gauss_path, 0, 1), std::invalid_argument);
}

TEST_CASE("unit-mean exponential-type case matches the transform derivative") {
  TraceWishartParams uni(2.0, BlockPartition({1}), SymMatrix(Eigen::MatrixXd::Identity(1, 1)));
  // oracle: mean = -d/dt laplace at 0 by central finite differences
  const double h = 1e-5;
  const double mean_oracle = -(tw::laplace(uni, {h}) - tw::laplace(uni, {0.0})) / h -
                             0.0;  // forward difference, bias O(h)
  const tw::SampleMatrix s = tw::sample(uni, 1000000, 11);
  const double mean = s.values.col(0).mean();
  CHECK(std::abs(mean - 1.0) < 4e-3);
  CHECK(std::abs(mean_oracle - 1.0) < 1e-4);
}

TEST_CASE("block means match the transform derivative oracle on both paths") {
  const SymMatrix sigma = cli::generate_sigma(cli::SigmaKind::spd, 4, 99);
  const BlockPartition part({2, 2});
  for (double two_alpha : {2.0, 4.5}) {  // gaussian-sum (2 <= 3), bartlett (4.5 > 3)
    TraceWishartParams params(two_alpha, part, sigma);
    const tw::SampleMatrix s = tw::sample(params, 400000, 5);
    for (int i = 0; i < 2; ++i) {
      // d/dt_i at 0 via the exact transform
      const double h = 1e-6;
      std::vector<double> t(2, 0.0);
      t[i] = h;
      const double mean_oracle = -std::log(tw::laplace(params, t)) / h;
      const double mean = s.values.col(i).mean();
      const double sd = std::sqrt((s.values.col(i).array() - mean).square().mean());
      const double se = sd / std::sqrt(static_cast<double>(s.n));
      CHECK(std::abs(mean - mean_oracle) < 5.0 * se + 1e-3);
      // closed form: half the order times the block trace
      const double block_trace = sigma.mat().block(part.offset(i), part.offset(i),
                                                   part.size(i), part.size(i)).trace();
      CHECK(mean_oracle == doctest::Approx(0.5 * two_alpha * block_trace).epsilon(1e-4));
    }
  }
}

TEST_CASE("empirical transform agrees with the exact one on a grid") {
  for (double two_alpha : {1.0, 3.0}) {
    TraceWishartParams params = pair_rho(0.6, two_alpha);
    const tw::SampleMatrix s = tw::sample(params, 1000000, 17);
    int idx = 0;
    for (const auto& t : harness::default_t_grid(2, 20, 2.0)) {
      // keep the comparison to a spread of 20 interior points
      if (++idx > 20) break;
      double mean = 0.0, m2 = 0.0;
      for (int i = 0; i < s.n; ++i) {
        const double v = std::exp(-t[0] * s.values(i, 0) - t[1] * s.values(i, 1));
        const double delta = v - mean;
        mean += delta / (i + 1);
        m2 += delta * (v - mean);
      }
      const double se = std::sqrt(m2 / (s.n - 1) / s.n);
      CHECK(std::abs(mean - tw::laplace(params, t)) < 5.0 * se + 1e-12);
    }
  }
}

TEST_CASE("singular scale is accepted and sampled") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  TraceWishartParams params(1.5, BlockPartition({1, 1}), SymMatrix(ones));
  const tw::SampleMatrix s = tw::sample(params, 20000, 3);
  CHECK(s.values.minCoeff() >= 0.0);
  // comonotone blocks: X_1 = X_2 almost surely under the rank-1 scale
  CHECK((s.values.col(0) - s.values.col(1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(tw::laplace(params, {1.0, 1.0}) ==
        doctest::Approx(std::pow(3.0, -0.75)).epsilon(1e-13));  // det(I + D 11^T) = 3
}

TEST_CASE("csv serialization carries full precision") {
  TraceWishartParams params = pair_rho(0.3, 1.0);
  const tw::SampleMatrix s = tw::sample(params, 3, 1);
  std::ostringstream os;
  s.write_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "x1,x2");
  for (int i = 0; i < 3; ++i) {
    std::string cell;
    for (int j = 0; j < 2; ++j) {
      std::getline(is, cell, j == 1 ? '\n' : ',');
      CHECK(std::stod(cell) == s.values(i, j));
    }
  }
}
