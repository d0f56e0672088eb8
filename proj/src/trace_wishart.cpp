#include "gpilab/trace_wishart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <ostream>
#include <thread>

#include "gpilab/rng.hpp"

namespace gpilab::tw {

namespace {

bool is_positive_integer(double x) { return x >= 1.0 && x == std::floor(x); }

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

TraceWishartParams::TraceWishartParams(double two_alpha, linalg::BlockPartition partition,
                                       linalg::SymMatrix sigma)
    : two_alpha_(two_alpha),
      partition_(std::move(partition)),
      sigma_(std::move(sigma)),
      factor_(linalg::factor_spsd(sigma_)) {
  if (partition_.total() != sigma_.dim())
    throw std::invalid_argument("TraceWishartParams: partition total must equal sigma dimension");
  const int p = sigma_.dim();
  if (!(is_positive_integer(two_alpha_) || two_alpha_ > p - 1))
    throw std::invalid_argument(
        "TraceWishartParams: two_alpha must be a positive integer or exceed p - 1");
}

bool TraceWishartParams::integer_order() const { return is_positive_integer(two_alpha_); }

std::string TraceWishartParams::fingerprint() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv1a(h, &two_alpha_, sizeof(two_alpha_));
  for (int s : partition_.sizes()) h = fnv1a(h, &s, sizeof(s));
  const Eigen::MatrixXd& m = sigma_.mat();
  h = fnv1a(h, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double laplace(const TraceWishartParams& params, const std::vector<double>& t) {
  for (double ti : t) {
    if (ti < 0.0) throw std::invalid_argument("laplace: t components must be >= 0");
  }
  return std::exp(-params.alpha() * linalg::logdet_i_plus_ds(t, params.partition(), params.sigma()));
}

TraceWishartParams marginal(const TraceWishartParams& params, const std::vector<int>& blocks) {
  auto [sub, part] = linalg::principal_submatrix(params.sigma(), params.partition(), blocks);
  return TraceWishartParams(params.two_alpha(), std::move(part), std::move(sub));
}

TraceWishartParams block_diagonalize(const TraceWishartParams& params, int d1) {
  const int d = params.dims();
  if (d1 < 1 || d1 > d - 1)
    throw std::invalid_argument("block_diagonalize: split must satisfy 1 <= d1 <= d-1");
  const int q1 = params.partition().offset(d1);
  Eigen::MatrixXd m = params.sigma().mat();
  const int q2 = params.total_dim() - q1;
  m.block(0, q1, q1, q2).setZero();
  m.block(q1, 0, q2, q1).setZero();
  return TraceWishartParams(params.two_alpha(), params.partition(), linalg::SymMatrix(m));
}

const char* to_string(SamplerTag tag) {
  return tag == SamplerTag::bartlett ? "bartlett" : "gaussian-sum";
}

void SampleMatrix::write_csv(std::ostream& os) const {
  for (int j = 0; j < d; ++j) os << (j ? ",x" : "x") << (j + 1);
  os << '\n';
  char buf[32];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", values(i, j));
      if (j) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

namespace {

struct SamplerPlan {
  Eigen::MatrixXd l_half;  // factor of sigma/2, p x r
  int rank = 0;
  double two_alpha = 0.0;
  bool bartlett = false;
  std::vector<int> row_block;  // block owning each row of l_half
  int d = 0;
};

SamplerPlan make_plan(const TraceWishartParams& params) {
  SamplerPlan plan;
  plan.l_half = params.sigma_factor().L / std::sqrt(2.0);
  plan.rank = params.sigma_factor().rank;
  plan.two_alpha = params.two_alpha();
  plan.bartlett = params.two_alpha() > params.total_dim() - 1;
  plan.d = params.dims();
  plan.row_block.resize(params.total_dim());
  for (int b = 0; b < params.dims(); ++b)
    for (int r = 0; r < params.partition().size(b); ++r)
      plan.row_block[params.partition().offset(b) + r] = b;
  return plan;
}

// One draw of the block-trace vector. Variate slot s of draw i reads stream
// (seed, i, s), so draws are order- and worker-independent.
void draw_one(const SamplerPlan& plan, std::uint64_t seed, std::uint64_t i, double* out) {
  const int r = plan.rank;
  const int p = static_cast<int>(plan.l_half.rows());
  std::fill(out, out + plan.d, 0.0);
  if (r == 0) return;
  if (plan.bartlett) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(r, r);
    int slot = 0;
    for (int j = 0; j < r; ++j) {
      a(j, j) = std::sqrt(rng::Stream::keyed(seed, i, slot++).next_chisq(plan.two_alpha - j));
    }
    for (int row = 1; row < r; ++row)
      for (int col = 0; col < row; ++col)
        a(row, col) = rng::Stream::keyed(seed, i, slot++).next_normal();
    const Eigen::MatrixXd m = plan.l_half * a;
    for (int row = 0; row < p; ++row) out[plan.row_block[row]] += m.row(row).squaredNorm();
  } else {
    const int m_terms = static_cast<int>(std::llround(plan.two_alpha));
    Eigen::VectorXd z(r);
    int slot = 0;
    for (int k = 0; k < m_terms; ++k) {
      for (int j = 0; j < r; ++j) z(j) = rng::Stream::keyed(seed, i, slot++).next_normal();
      const Eigen::VectorXd y = plan.l_half * z;
      for (int row = 0; row < p; ++row) out[plan.row_block[row]] += y(row) * y(row);
    }
  }
}

}  // namespace

SampleMatrix sample(const TraceWishartParams& params, long n, std::uint64_t seed, int workers) {
  if (n < 1) throw std::invalid_argument("sample: draw count must be >= 1");
  const SamplerPlan plan = make_plan(params);
  SampleMatrix out;
  out.n = static_cast<int>(n);
  out.d = params.dims();
  out.seed = seed;
  out.sampler = plan.bartlett ? SamplerTag::bartlett : SamplerTag::gaussian_sum;
  out.values.resize(n, out.d);

  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = static_cast<int>(std::max(1u, std::min(hw, 8u)));
  }
  if (workers == 1 || n < 1024) {
    std::vector<double> row(out.d);
    for (long i = 0; i < n; ++i) {
      draw_one(plan, seed, static_cast<std::uint64_t>(i), row.data());
      for (int j = 0; j < out.d; ++j) out.values(i, j) = row[j];
    }
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const long chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      std::vector<double> row(out.d);
      for (long i = lo; i < hi; ++i) {
        draw_one(plan, seed, static_cast<std::uint64_t>(i), row.data());
        for (int j = 0; j < out.d; ++j) out.values(i, j) = row[j];
      }
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace gpilab::tw
