#include "gpilab/cm_bernstein.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gpilab::cmb {

CmFunction CmFunction::neg_power(double q) {
  if (!(q <= 0.0)) throw std::invalid_argument("neg_power: exponent must be <= 0");
  return CmFunction(NegPower{q});
}

CmFunction CmFunction::stretched_exp(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("stretched_exp: exponent must be in [0, 1]");
  return CmFunction(StretchedExp{r});
}

CmFunction CmFunction::trace_exp(const linalg::SymMatrix& a) {
  const linalg::SpsdFactor f = linalg::factor_spsd(a);  // rejects non-SPSD input
  return CmFunction(TraceExp{a, f.eigenvalues});
}

double CmFunction::operator()(double t) const {
  if (!(t > 0.0)) throw std::invalid_argument("eval_cm: argument must be > 0");
  if (const auto* np = std::get_if<NegPower>(&v_)) return std::pow(t, np->q);
  if (const auto* se = std::get_if<StretchedExp>(&v_)) return std::exp(-std::pow(t, se->r));
  const auto& te = std::get<TraceExp>(v_);
  return (-t * te.eigenvalues.array()).exp().sum();
}

std::optional<double> CmFunction::limit_at_zero() const {
  if (const auto* np = std::get_if<NegPower>(&v_)) {
    if (np->q == 0.0) return 1.0;
    return std::nullopt;
  }
  if (const auto* se = std::get_if<StretchedExp>(&v_)) {
    return se->r == 0.0 ? std::exp(-1.0) : 1.0;
  }
  return static_cast<double>(std::get<TraceExp>(v_).a.dim());
}

double eval_cm(const CmFunction& f, double t) { return f(t); }

BernsteinFn BernsteinFn::triplet(double a, double b, std::vector<BernsteinAtom> atoms) {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("triplet: a and b must be >= 0");
  for (const auto& atom : atoms) {
    if (!(atom.t > 0.0 && atom.w > 0.0))
      throw std::invalid_argument("triplet: atoms need positive location and weight");
  }
  return BernsteinFn(Triplet{a, b, std::move(atoms)});
}

BernsteinFn BernsteinFn::closed_power(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("closed_power: exponent must be in [0, 1]");
  return BernsteinFn(ClosedPower{q});
}

double BernsteinFn::operator()(double lambda) const {
  if (lambda < 0.0) throw std::invalid_argument("eval_bernstein: argument must be >= 0");
  if (const auto* tr = std::get_if<Triplet>(&v_)) {
    double s = tr->a + tr->b * lambda;
    for (const auto& atom : tr->atoms) s += atom.w * (1.0 - std::exp(-lambda * atom.t));
    return s;
  }
  const double q = std::get<ClosedPower>(v_).q;
  if (q == 0.0) return 1.0;
  return std::pow(lambda, q);
}

double BernsteinFn::linear_part() const {
  if (const auto* tr = std::get_if<Triplet>(&v_)) return tr->b;
  return 0.0;
}

double eval_bernstein(const BernsteinFn& f, double lambda) { return f(lambda); }

std::vector<double> default_grid() {
  const int n = 64;
  std::vector<double> g(n);
  const double lo = std::log(1e-2), hi = std::log(1e2);
  for (int i = 0; i < n; ++i) g[i] = std::exp(lo + (hi - lo) * i / (n - 1));
  return g;
}

ScreenReport screen_divided_differences(const std::function<double(double)>& f,
                                        const std::vector<double>& grid, int max_order,
                                        SignRule rule, double rel_tol) {
  const int npts = static_cast<int>(grid.size());
  if (max_order < 0 || max_order > 8) throw std::invalid_argument("screen: max_order must be in [0, 8]");
  const int top = rule == SignRule::bernstein ? max_order + 1 : max_order;
  if (npts < top + 1) throw std::invalid_argument("screen: grid too short for requested order");
  for (int i = 0; i + 1 < npts; ++i) {
    if (!(grid[i + 1] > grid[i])) throw std::invalid_argument("screen: grid must be strictly increasing");
  }
  if (!(grid.front() > 0.0)) throw std::invalid_argument("screen: grid must be positive");

  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double noise_mult = 8.0;

  std::vector<double> v(npts), noise(npts);
  for (int i = 0; i < npts; ++i) {
    v[i] = f(grid[i]);
    noise[i] = eps * std::abs(v[i]);
  }

  ScreenReport report;
  auto expected_sign = [rule](int order) {
    if (rule == SignRule::completely_monotone) return order % 2 == 0 ? 1.0 : -1.0;
    return order == 0 ? 1.0 : (order % 2 == 1 ? 1.0 : -1.0);
  };
  auto check_level = [&](int order, int count) {
    const double sign = expected_sign(order);
    for (int i = 0; i < count; ++i) {
      const double signed_value = sign * v[i];
      const double tol = rel_tol * (1.0 + std::abs(v[i])) + noise_mult * noise[i];
      if (signed_value < -tol) {
        report.pass = false;
        report.first_violation = ScreenViolation{order, i, signed_value, tol};
        return false;
      }
    }
    return true;
  };

  if (!check_level(0, npts)) return report;
  for (int order = 1; order <= top; ++order) {
    const int count = npts - order;
    for (int i = 0; i < count; ++i) {
      const double h = grid[i + order] - grid[i];
      const double num = v[i + 1] - v[i];
      const double num_noise = noise[i + 1] + noise[i] + eps * (std::abs(v[i + 1]) + std::abs(v[i]));
      v[i] = num / h;
      noise[i] = num_noise / h + eps * std::abs(v[i]);
    }
    if (!check_level(order, count)) return report;
  }
  return report;
}

ScreenReport check_complete_monotone(const CmFunction& f, const std::vector<double>& grid,
                                     int max_order) {
  return screen_divided_differences([&f](double t) { return f(t); }, grid, max_order,
                                    SignRule::completely_monotone);
}

ScreenReport check_bernstein(const BernsteinFn& f, const std::vector<double>& grid, int max_order) {
  return screen_divided_differences([&f](double t) { return f(t); }, grid, max_order,
                                    SignRule::bernstein);
}

}  // namespace gpilab::cmb
