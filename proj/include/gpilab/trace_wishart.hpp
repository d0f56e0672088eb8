#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpilab/linalg.hpp"

namespace gpilab::tw {

// Parameters of the distribution of block traces of a Wishart matrix with
// order two_alpha and scale sigma/2: the Laplace transform at t >= 0 is
// det(I + diag(t_0 I_{p_0}, ...) sigma)^(-two_alpha/2).
class TraceWishartParams {
 public:
  TraceWishartParams(double two_alpha, linalg::BlockPartition partition, linalg::SymMatrix sigma);

  double two_alpha() const { return two_alpha_; }
  double alpha() const { return 0.5 * two_alpha_; }
  const linalg::BlockPartition& partition() const { return partition_; }
  const linalg::SymMatrix& sigma() const { return sigma_; }
  const linalg::SpsdFactor& sigma_factor() const { return factor_; }
  int dims() const { return partition_.blocks(); }
  int total_dim() const { return partition_.total(); }
  bool integer_order() const;

  // Stable hash of (two_alpha, partition, sigma), hex-encoded.
  std::string fingerprint() const;

 private:
  double two_alpha_;
  linalg::BlockPartition partition_;
  linalg::SymMatrix sigma_;
  linalg::SpsdFactor factor_;
};

// E exp(-t.X); equals 1 at t = 0 and lies in (0, 1].
double laplace(const TraceWishartParams& params, const std::vector<double>& t);

// Distribution of the subvector indexed by `blocks` (0-based, increasing).
TraceWishartParams marginal(const TraceWishartParams& params, const std::vector<int>& blocks);

// Same order and partition with the cross-covariance between the first d1
// blocks and the rest zeroed out.
TraceWishartParams block_diagonalize(const TraceWishartParams& params, int d1);

enum class SamplerTag { bartlett, gaussian_sum };

const char* to_string(SamplerTag tag);

struct SampleMatrix {
  int n = 0;
  int d = 0;
  Eigen::MatrixXd values;  // n x d, nonnegative
  std::uint64_t seed = 0;
  SamplerTag sampler = SamplerTag::bartlett;

  // Header x1,...,xd then one row per draw, full round-trip precision.
  void write_csv(std::ostream& os) const;
};

// n independent draws. Bartlett decomposition when two_alpha > p - 1,
// otherwise the sum of two_alpha Gaussian outer products (two_alpha then
// integer by parameter validation). Draw i depends only on (seed, i), so the
// output is identical for every worker count; workers = 0 picks a default.
SampleMatrix sample(const TraceWishartParams& params, long n, std::uint64_t seed, int workers = 0);

}  // namespace gpilab::tw
