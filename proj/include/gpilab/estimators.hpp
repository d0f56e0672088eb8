#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpilab/cm_bernstein.hpp"
#include "gpilab/trace_wishart.hpp"

namespace gpilab::est {

enum class Method { exact_wick, exact_laplace, quadrature, monte_carlo };

const char* to_string(Method m);

struct Estimate {
  double value = 0.0;
  // Sample standard error for Monte Carlo, refinement proxy for quadrature,
  // 0 for exact methods.
  double stderror = 0.0;
  Method method = Method::exact_wick;
  long n = 0;  // draws or node count per axis; monomial degree for Wick
  std::uint64_t seed = 0;
  long n_rejected = 0;  // Monte Carlo draws dropped by the zero-coordinate policy
};

Estimate exact_estimate(double value, Method method = Method::exact_wick, long n = 0);

// Exact E[prod_i X_i^{powers_i}] by expanding the block traces into Gaussian
// coordinates and summing covariance products over perfect pairings.
// Requires integer order 2*alpha and total degree N with 2N <= 12.
Estimate moment_wick(const tw::TraceWishartParams& params, const std::vector<int>& powers);

// Exact-up-to-quadrature E[prod_i X_i^{-q_i}] for q_i in (0, alpha), d <= 3,
// nonsingular sigma: the Laplace-representation integral is mapped to the
// unit cube by u = t/(1+t) and integrated by tensor Gauss-Jacobi rules whose
// weights absorb the endpoint exponents, leaving a smooth integrand. The
// reported stderror is |refined - base| from doubling the node count.
Estimate moment_neg_quadrature(const tw::TraceWishartParams& params, const std::vector<double>& q,
                               int base_nodes = 64);

// Pointwise-evaluable factor for Monte Carlo products. A draw with a zero
// coordinate uses limit_at_zero when present and is otherwise rejected and
// counted.
struct Integrand {
  std::function<double(double)> f;
  std::optional<double> limit_at_zero;
};

Integrand make_integrand(const cmb::CmFunction& f);
Integrand make_integrand(const cmb::BernsteinFn& f);
Integrand power_integrand(double exponent);  // x^e with e >= 0

Estimate expectation_product_mc(const tw::TraceWishartParams& params,
                                const std::vector<Integrand>& fs, long n, std::uint64_t seed);

struct McGap {
  Estimate lhs;
  Estimate rhs;
  double gap = 0.0;
  double gap_stderr = 0.0;
};

// Split estimator: LHS from one batch of joint draws, RHS as the product of
// two marginal estimates from fresh batches (seed+1, seed+2), with the
// standard error propagated across the three independent batches.
McGap gap_mc(const tw::TraceWishartParams& params, const std::vector<Integrand>& fs, int d1,
             long n, std::uint64_t seed);

}  // namespace gpilab::est
