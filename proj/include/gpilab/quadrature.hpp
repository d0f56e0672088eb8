#pragma once

#include <Eigen/Dense>

namespace gpilab::quad {

struct QuadRule {
  Eigen::VectorXd nodes;    // in (0, 1)
  Eigen::VectorXd weights;  // > 0
};

// n-point rule for integrals over (0,1) against the weight
// u^exp_at_zero (1-u)^exp_at_one, both exponents > -1. Nodes and weights come
// from the Golub-Welsch eigendecomposition of the Jacobi recurrence, so the
// rule integrates polynomials of degree <= 2n-1 against the weight exactly.
QuadRule gauss_jacobi_01(int n, double exp_at_zero, double exp_at_one);

}  // namespace gpilab::quad
