#include "gpilab/estimators.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gpilab/quadrature.hpp"

namespace gpilab::est {

const char* to_string(Method m) {
  switch (m) {
    case Method::exact_wick: return "exact-wick";
    case Method::exact_laplace: return "exact-laplace";
    case Method::quadrature: return "quadrature";
    case Method::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

Estimate exact_estimate(double value, Method method, long n) {
  Estimate e;
  e.value = value;
  e.method = method;
  e.n = n;
  return e;
}

namespace {

// Sum over perfect pairings of the labels, weighted by the Gaussian
// covariance delta(k, k') * C(row, row'). Branches with zero covariance are
// skipped, which prunes almost all cross-term pairings.
class PairingSum {
 public:
  PairingSum(const std::vector<int>& ks, const std::vector<int>& rows, const Eigen::MatrixXd& c)
      : ks_(ks), rows_(rows), c_(c), used_(ks.size(), false) {}

  double run() { return recurse(static_cast<int>(ks_.size())); }

 private:
  double recurse(int remaining) {
    if (remaining == 0) return 1.0;
    int u = 0;
    while (used_[u]) ++u;
    used_[u] = true;
    double total = 0.0;
    for (std::size_t v = u + 1; v < ks_.size(); ++v) {
      if (used_[v] || ks_[u] != ks_[v]) continue;
      const double cov = c_(rows_[u], rows_[v]);
      if (cov == 0.0) continue;
      used_[v] = true;
      total += cov * recurse(remaining - 2);
      used_[v] = false;
    }
    used_[u] = false;
    return total;
  }

  const std::vector<int>& ks_;
  const std::vector<int>& rows_;
  const Eigen::MatrixXd& c_;
  std::vector<bool> used_;
};

}  // namespace

Estimate moment_wick(const tw::TraceWishartParams& params, const std::vector<int>& powers) {
  const int d = params.dims();
  if (static_cast<int>(powers.size()) != d)
    throw std::invalid_argument("moment_wick: one power per coordinate required");
  if (!params.integer_order())
    throw std::invalid_argument("moment_wick: requires an integer order two_alpha");
  long total_degree = 0;
  for (int p : powers) {
    if (p < 0) throw std::invalid_argument("moment_wick: powers must be >= 0");
    total_degree += p;
  }
  if (total_degree == 0) return exact_estimate(1.0, Method::exact_wick, 0);
  if (2 * total_degree > 12)
    throw std::invalid_argument("moment_wick: total degree capped at 6 (pairing enumeration)");

  const int m = static_cast<int>(std::llround(params.two_alpha()));
  const Eigen::MatrixXd c = params.sigma().mat() / 2.0;
  const auto& part = params.partition();

  // One slot per factor of the expanded product; slot s ranges over the
  // Gaussian coordinates (k, row) of its block.
  std::vector<int> slot_block;
  for (int i = 0; i < d; ++i) slot_block.insert(slot_block.end(), powers[i], i);
  const int n_slots = static_cast<int>(slot_block.size());

  std::vector<int> choice(n_slots, 0);
  std::vector<int> n_choices(n_slots);
  for (int s = 0; s < n_slots; ++s) n_choices[s] = m * part.size(slot_block[s]);

  std::vector<int> ks(2 * n_slots), rows(2 * n_slots);
  double total = 0.0;
  for (;;) {
    for (int s = 0; s < n_slots; ++s) {
      const int b = slot_block[s];
      const int k = choice[s] / part.size(b);
      const int row = part.offset(b) + choice[s] % part.size(b);
      ks[2 * s] = ks[2 * s + 1] = k;
      rows[2 * s] = rows[2 * s + 1] = row;
    }
    total += PairingSum(ks, rows, c).run();

    int s = 0;
    while (s < n_slots && ++choice[s] == n_choices[s]) choice[s++] = 0;
    if (s == n_slots) break;
  }
  return exact_estimate(total, Method::exact_wick, total_degree);
}

namespace {

double neg_moment_tensor(const tw::TraceWishartParams& params, const std::vector<double>& q,
                         int nodes) {
  const int d = params.dims();
  const double alpha = params.alpha();
  std::vector<quad::QuadRule> rules(d);
  for (int i = 0; i < d; ++i) {
    const double beta = alpha * params.partition().size(i) - q[i] - 1.0;
    rules[i] = quad::gauss_jacobi_01(nodes, q[i] - 1.0, beta);
  }
  std::vector<int> idx(d, 0);
  std::vector<double> t(d), log_one_minus_u(d);
  double sum = 0.0;
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      const double u = rules[i].nodes(idx[i]);
      t[i] = u / (1.0 - u);
      log_one_minus_u[i] = std::log1p(-u);
      w *= rules[i].weights(idx[i]);
    }
    double shift = 0.0;
    for (int i = 0; i < d; ++i) shift += params.partition().size(i) * log_one_minus_u[i];
    const double logdet = linalg::logdet_i_plus_ds(t, params.partition(), params.sigma());
    sum += w * std::exp(-alpha * (logdet + shift));

    int i = 0;
    while (i < d && ++idx[i] == nodes) idx[i++] = 0;
    if (i == d) break;
  }
  double prefactor = 1.0;
  for (int i = 0; i < d; ++i) prefactor /= std::tgamma(q[i]);
  return prefactor * sum;
}

}  // namespace

Estimate moment_neg_quadrature(const tw::TraceWishartParams& params, const std::vector<double>& q,
                               int base_nodes) {
  const int d = params.dims();
  if (static_cast<int>(q.size()) != d)
    throw std::invalid_argument("moment_neg_quadrature: one exponent per coordinate required");
  if (d > 3) throw std::invalid_argument("moment_neg_quadrature: tensor quadrature capped at d <= 3");
  if (params.sigma_factor().singular())
    throw std::invalid_argument("moment_neg_quadrature: sigma must be nonsingular");
  const double alpha = params.alpha();
  for (double qi : q) {
    if (!(qi > 0.0 && qi < alpha))
      throw std::invalid_argument("moment_neg_quadrature: exponents must lie in (0, alpha)");
  }
  if (base_nodes < 2) throw std::invalid_argument("moment_neg_quadrature: too few nodes");

  const double coarse = neg_moment_tensor(params, q, base_nodes);
  const double fine = neg_moment_tensor(params, q, 2 * base_nodes);
  Estimate e;
  e.value = fine;
  e.stderror = std::abs(fine - coarse);
  e.method = Method::quadrature;
  e.n = 2 * base_nodes;
  return e;
}

Integrand make_integrand(const cmb::CmFunction& f) {
  return Integrand{[f](double x) { return f(x); }, f.limit_at_zero()};
}

Integrand make_integrand(const cmb::BernsteinFn& f) {
  // Bernstein functions are defined (and continuous) at 0.
  return Integrand{[f](double x) { return f(x); }, f(0.0)};
}

Integrand power_integrand(double exponent) {
  if (exponent < 0.0) throw std::invalid_argument("power_integrand: exponent must be >= 0");
  if (exponent == 0.0) return Integrand{[](double) { return 1.0; }, 1.0};
  return Integrand{[exponent](double x) { return std::pow(x, exponent); }, 0.0};
}

Estimate expectation_product_mc(const tw::TraceWishartParams& params,
                                const std::vector<Integrand>& fs, long n, std::uint64_t seed) {
  const int d = params.dims();
  if (static_cast<int>(fs.size()) != d)
    throw std::invalid_argument("expectation_product_mc: one factor per coordinate required");
  if (n < 10000)
    throw std::invalid_argument("expectation_product_mc: at least 10^4 draws required");

  const tw::SampleMatrix batch = tw::sample(params, n, seed);

  long rejected = 0;
  long count = 0;
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double prod = 1.0;
    bool reject = false;
    for (int j = 0; j < d; ++j) {
      const double x = batch.values(i, j);
      double val;
      if (x == 0.0) {
        if (fs[j].limit_at_zero) {
          val = *fs[j].limit_at_zero;
        } else {
          reject = true;
          break;
        }
      } else {
        val = fs[j].f(x);
      }
      if (!std::isfinite(val))
        throw std::runtime_error("expectation_product_mc: non-finite factor value");
      prod *= val;
    }
    if (reject) {
      ++rejected;
      continue;
    }
    ++count;
    const double delta = prod - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (prod - mean);
  }
  if (count < 2) throw std::runtime_error("expectation_product_mc: all draws rejected");

  Estimate e;
  e.value = mean;
  e.stderror = std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  e.method = Method::monte_carlo;
  e.n = count;
  e.seed = seed;
  e.n_rejected = rejected;
  return e;
}

McGap gap_mc(const tw::TraceWishartParams& params, const std::vector<Integrand>& fs, int d1,
             long n, std::uint64_t seed) {
  const int d = params.dims();
  if (d1 < 1 || d1 > d - 1) throw std::invalid_argument("gap_mc: split must satisfy 1 <= d1 <= d-1");
  if (static_cast<int>(fs.size()) != d)
    throw std::invalid_argument("gap_mc: one factor per coordinate required");

  std::vector<int> left(d1), right(d - d1);
  std::iota(left.begin(), left.end(), 0);
  std::iota(right.begin(), right.end(), d1);

  McGap out;
  out.lhs = expectation_product_mc(params, fs, n, seed);
  const Estimate el = expectation_product_mc(tw::marginal(params, left),
                                             {fs.begin(), fs.begin() + d1}, n, seed + 1);
  const Estimate er = expectation_product_mc(tw::marginal(params, right),
                                             {fs.begin() + d1, fs.end()}, n, seed + 2);
  out.rhs.value = el.value * er.value;
  out.rhs.stderror = std::sqrt(er.value * er.value * el.stderror * el.stderror +
                               el.value * el.value * er.stderror * er.stderror);
  out.rhs.method = Method::monte_carlo;
  out.rhs.n = n;
  out.rhs.seed = seed + 1;
  out.rhs.n_rejected = el.n_rejected + er.n_rejected;
  out.gap = out.lhs.value - out.rhs.value;
  out.gap_stderr = std::sqrt(out.lhs.stderror * out.lhs.stderror +
                             out.rhs.stderror * out.rhs.stderror);
  return out;
}

}  // namespace gpilab::est
