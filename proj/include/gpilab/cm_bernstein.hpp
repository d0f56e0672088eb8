#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "gpilab/linalg.hpp"

namespace gpilab::cmb {

struct NegPower {
  double q;  // t -> t^q, q <= 0
};

struct StretchedExp {
  double r;  // t -> exp(-t^r), r in [0, 1]
};

struct TraceExp {
  linalg::SymMatrix a;         // SPSD
  Eigen::VectorXd eigenvalues; // clamped >= 0; t -> sum_j exp(-t lambda_j)
};

// Catalog of completely monotone functions; construction enforces the
// parameter ranges, so every instance is completely monotone.
class CmFunction {
 public:
  static CmFunction neg_power(double q);
  static CmFunction stretched_exp(double r);
  static CmFunction trace_exp(const linalg::SymMatrix& a);

  double operator()(double t) const;
  // Limit as t -> 0+, when finite.
  std::optional<double> limit_at_zero() const;

  const std::variant<NegPower, StretchedExp, TraceExp>& spec() const { return v_; }

 private:
  explicit CmFunction(std::variant<NegPower, StretchedExp, TraceExp> v) : v_(std::move(v)) {}
  std::variant<NegPower, StretchedExp, TraceExp> v_;
};

double eval_cm(const CmFunction& f, double t);

struct BernsteinAtom {
  double t;  // > 0
  double w;  // > 0
};

struct Triplet {
  double a = 0.0;
  double b = 0.0;
  std::vector<BernsteinAtom> atoms;
};

struct ClosedPower {
  double q;  // lambda -> lambda^q, q in [0, 1]
};

// Bernstein functions: a + b*lambda + sum_j w_j (1 - exp(-lambda t_j)), or
// the fractional power lambda^q.
class BernsteinFn {
 public:
  static BernsteinFn triplet(double a, double b, std::vector<BernsteinAtom> atoms);
  static BernsteinFn closed_power(double q);

  double operator()(double lambda) const;
  // Linear coefficient of the representation (0 for the power family).
  double linear_part() const;

  const std::variant<Triplet, ClosedPower>& spec() const { return v_; }

 private:
  explicit BernsteinFn(std::variant<Triplet, ClosedPower> v) : v_(std::move(v)) {}
  std::variant<Triplet, ClosedPower> v_;
};

double eval_bernstein(const BernsteinFn& f, double lambda);

struct ScreenViolation {
  int order = 0;
  int start = 0;       // grid index of the left end of the window
  double value = 0.0;  // signed divided difference that failed
  double tolerance = 0.0;
};

struct ScreenReport {
  bool pass = true;
  std::optional<ScreenViolation> first_violation;
};

// 64 geometrically spaced points on [1e-2, 1e2].
std::vector<double> default_grid();

enum class SignRule {
  completely_monotone,  // order n must carry sign (-1)^n
  bernstein             // order 0 nonnegative, order n >= 1 carries (-1)^(n-1)
};

// Divided-difference sign screen on an arbitrary evaluator. A window fails
// only when its signed divided difference is below both the relative
// tolerance and a propagated roundoff bound, so cancellation noise in flat
// regions does not raise false alarms. Necessary-condition screen, not a
// proof.
ScreenReport screen_divided_differences(const std::function<double(double)>& f,
                                        const std::vector<double>& grid, int max_order,
                                        SignRule rule, double rel_tol = 1e-7);

ScreenReport check_complete_monotone(const CmFunction& f, const std::vector<double>& grid,
                                     int max_order);

ScreenReport check_bernstein(const BernsteinFn& f, const std::vector<double>& grid, int max_order);

}  // namespace gpilab::cmb
