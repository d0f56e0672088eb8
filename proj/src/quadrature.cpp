#include "gpilab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace gpilab::quad {

namespace {

double log_beta(double x, double y) { return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y); }

}  // namespace

QuadRule gauss_jacobi_01(int n, double exp_at_zero, double exp_at_one) {
  if (n < 1) throw std::invalid_argument("gauss_jacobi_01: need at least one node");
  if (!(exp_at_zero > -1.0) || !(exp_at_one > -1.0))
    throw std::invalid_argument("gauss_jacobi_01: weight exponents must exceed -1");

  // Recurrence coefficients for the weight (1-x)^a (1+x)^b on [-1, 1];
  // u = (x+1)/2 maps x = 1 to u = 1, so a controls the u = 1 endpoint.
  const double a = exp_at_one;
  const double b = exp_at_zero;

  Eigen::VectorXd diag(n), offdiag(n > 1 ? n - 1 : 0);
  diag(0) = (b - a) / (a + b + 2.0);
  for (int k = 1; k < n; ++k) {
    const double nab = 2.0 * k + a + b;
    diag(k) = (b * b - a * a) / (nab * (nab + 2.0));
  }
  if (n > 1) {
    offdiag(0) = std::sqrt(4.0 * (1.0 + a) * (1.0 + b) /
                           ((a + b + 2.0) * (a + b + 2.0) * (a + b + 3.0)));
    for (int k = 2; k < n; ++k) {
      const double nab = 2.0 * k + a + b;
      offdiag(k - 1) = std::sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b) /
                                 (nab * nab * (nab + 1.0) * (nab - 1.0)));
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, offdiag);

  // Zeroth moment of the mapped weight on (0,1): Beta(b+1, a+1).
  const double mu0 = std::exp(log_beta(b + 1.0, a + 1.0));

  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes(k) = 0.5 * (es.eigenvalues()(k) + 1.0);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights(k) = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace gpilab::quad
