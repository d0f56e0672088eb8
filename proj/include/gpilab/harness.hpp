#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gpilab/cm_bernstein.hpp"
#include "gpilab/estimators.hpp"
#include "gpilab/trace_wishart.hpp"

namespace gpilab::harness {

enum class InequalityId {
  lt_order,
  thm1,
  cor1a,
  cor1b,
  cor1c,
  thm2,
  cor2,
  conjecture1,
  weak_gpi13,
  weak_gpi14
};

const char* to_string(InequalityId id);
InequalityId inequality_from_string(const std::string& s);

enum class Verdict { holds, violated, inconclusive };

const char* to_string(Verdict v);

// holds when gap >= -max(3 sigma, tol_exact); violated below
// -max(5 sigma, tol_exact); inconclusive in between.
Verdict classify(double gap, double gap_stderr, double tol_exact = 1e-9);

struct GapReport {
  InequalityId inequality_id = InequalityId::lt_order;
  est::Estimate lhs;
  est::Estimate rhs;
  double gap = 0.0;
  double gap_stderr = 0.0;
  Verdict verdict = Verdict::holds;
  std::string params_fingerprint;
  int d1 = 0;  // 0 when the check has no split
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

GapReport make_report(InequalityId id, const est::Estimate& lhs, const est::Estimate& rhs,
                      double gap, double gap_stderr, const std::string& fingerprint, int d1,
                      std::uint64_t seed);

enum class MethodChoice { auto_select, mc, quadrature, wick };

const char* to_string(MethodChoice m);
MethodChoice method_from_string(const std::string& s);

// 100 Halton points in (0, upper]^d plus three points on each axis.
std::vector<std::vector<double>> default_t_grid(int d, int n_points = 100, double upper = 10.0);

// Transform-order screen: gap is the minimum of laplace(pa, t) - laplace(pb, t)
// over the grid; `holds` certifies the order on the grid only.
GapReport check_lt_order(const tw::TraceWishartParams& pa, const tw::TraceWishartParams& pb,
                         const std::vector<std::vector<double>>& t_grid);

// Product-vs-split-product comparison for completely monotone factors.
// Quadrature route when every factor is a negative power, the dimension is
// within the tensor cap and sigma is nonsingular; Monte Carlo otherwise.
GapReport check_thm1(const tw::TraceWishartParams& params, const std::vector<cmb::CmFunction>& phis,
                     int d1, MethodChoice method, long n, std::uint64_t seed);

// Matrix-exponential trace version. Also evaluates the two algebraically
// equal forms of the right-hand side (product of traces vs trace of the
// Kronecker product of the mean factors) and reports their discrepancy.
struct Cor1cDetails {
  double rhs_product_of_traces = 0.0;
  double rhs_kronecker_form = 0.0;
  double identity_gap = 0.0;
};

GapReport check_cor1c(const tw::TraceWishartParams& params,
                      const std::vector<linalg::SymMatrix>& as, int d1, long n_draws,
                      std::uint64_t seed, Cor1cDetails* details = nullptr);

// Bivariate comparison for Bernstein factors with no linear part; also
// screens the 2x2 exponential building block at a few exact grid points.
GapReport check_thm2(const tw::TraceWishartParams& pair, const cmb::BernsteinFn& f,
                     const cmb::BernsteinFn& g, long n, std::uint64_t seed);

// Fractional-power special case; exact pairing path when both exponents are
// 0 or 1 and the order is integer.
GapReport check_cor2(const tw::TraceWishartParams& pair, double q1, double q2, long n,
                     std::uint64_t seed);

// Split product inequality with nonnegative real exponents. The verdict may
// legitimately come out `violated`; this checker only reports.
GapReport check_conjecture1(const tw::TraceWishartParams& params, const std::vector<double>& exps,
                            int d1, MethodChoice method, long n, std::uint64_t seed);

enum class WeakGpiVariant { eq13, eq14 };

// Full-product comparison: RHS is the product of all d univariate moments.
// eq14 requires all exponents equal to one integer.
GapReport check_weak_gpi(const tw::TraceWishartParams& params, const std::vector<double>& exps,
                         WeakGpiVariant variant, MethodChoice method, long n, std::uint64_t seed);

struct SearchSpace {
  InequalityId target = InequalityId::conjecture1;
  std::vector<int> partition;
  std::vector<double> two_alpha_choices;
  std::vector<std::vector<double>> exponent_sets;
  std::string generator_kind = "spd";  // sigma family fed to the generator
  std::vector<int> d1_choices;
  MethodChoice method = MethodChoice::auto_select;
  long n_draws = 100000;
};

struct HuntResult {
  GapReport best;
  linalg::SymMatrix sigma_best;
  double two_alpha_best = 0.0;
  std::vector<double> exponents_best;
  long evaluations = 0;
};

// Random search over the space followed by coordinate-wise perturbation
// descent on the best covariance (20 rounds of step halving). Deterministic
// for a given seed; keeps the most negative gap found.
HuntResult hunt_counterexample(const SearchSpace& space, long budget, std::uint64_t seed);

}  // namespace gpilab::harness
