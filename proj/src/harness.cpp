#include "gpilab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "gpilab/rng.hpp"
#include "gpilab/sigma_gen.hpp"

namespace gpilab::harness {

const char* to_string(InequalityId id) {
  switch (id) {
    case InequalityId::lt_order: return "lt_order";
    case InequalityId::thm1: return "thm1";
    case InequalityId::cor1a: return "cor1a";
    case InequalityId::cor1b: return "cor1b";
    case InequalityId::cor1c: return "cor1c";
    case InequalityId::thm2: return "thm2";
    case InequalityId::cor2: return "cor2";
    case InequalityId::conjecture1: return "conjecture1";
    case InequalityId::weak_gpi13: return "weak_gpi13";
    case InequalityId::weak_gpi14: return "weak_gpi14";
  }
  return "unknown";
}

InequalityId inequality_from_string(const std::string& s) {
  for (InequalityId id :
       {InequalityId::lt_order, InequalityId::thm1, InequalityId::cor1a, InequalityId::cor1b,
        InequalityId::cor1c, InequalityId::thm2, InequalityId::cor2, InequalityId::conjecture1,
        InequalityId::weak_gpi13, InequalityId::weak_gpi14}) {
    if (s == to_string(id)) return id;
  }
  throw std::invalid_argument("unknown inequality id: " + s);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Verdict classify(double gap, double gap_stderr, double tol_exact) {
  if (gap >= -std::max(3.0 * gap_stderr, tol_exact)) return Verdict::holds;
  if (gap < -std::max(5.0 * gap_stderr, tol_exact)) return Verdict::violated;
  return Verdict::inconclusive;
}

namespace {

nlohmann::json estimate_json(const est::Estimate& e) {
  return nlohmann::json{{"value", e.value},       {"stderr", e.stderror},
                        {"method", est::to_string(e.method)}, {"n", e.n},
                        {"seed", e.seed},         {"n_rejected", e.n_rejected}};
}

}  // namespace

nlohmann::json GapReport::to_json() const {
  return nlohmann::json{{"inequality_id", to_string(inequality_id)},
                        {"lhs", estimate_json(lhs)},
                        {"rhs", estimate_json(rhs)},
                        {"gap", gap},
                        {"gap_stderr", gap_stderr},
                        {"verdict", to_string(verdict)},
                        {"params_fingerprint", params_fingerprint},
                        {"d1", d1},
                        {"seed", seed}};
}

std::string GapReport::csv_header() {
  return "inequality_id,lhs,rhs,gap,gap_stderr,verdict,d1,seed,params_fingerprint";
}

std::string GapReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%s,%d,%llu,%s",
                to_string(inequality_id), lhs.value, rhs.value, gap, gap_stderr,
                to_string(verdict), d1, static_cast<unsigned long long>(seed),
                params_fingerprint.c_str());
  return buf;
}

GapReport make_report(InequalityId id, const est::Estimate& lhs, const est::Estimate& rhs,
                      double gap, double gap_stderr, const std::string& fingerprint, int d1,
                      std::uint64_t seed) {
  GapReport r;
  r.inequality_id = id;
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = gap;
  r.gap_stderr = gap_stderr;
  r.verdict = classify(gap, gap_stderr);
  r.params_fingerprint = fingerprint;
  r.d1 = d1;
  r.seed = seed;
  return r;
}

const char* to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::auto_select: return "auto";
    case MethodChoice::mc: return "mc";
    case MethodChoice::quadrature: return "quadrature";
    case MethodChoice::wick: return "wick";
  }
  return "unknown";
}

MethodChoice method_from_string(const std::string& s) {
  if (s == "auto") return MethodChoice::auto_select;
  if (s == "mc") return MethodChoice::mc;
  if (s == "quadrature") return MethodChoice::quadrature;
  if (s == "wick") return MethodChoice::wick;
  throw std::invalid_argument("unknown method: " + s);
}

namespace {

double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19};

}  // namespace

std::vector<std::vector<double>> default_t_grid(int d, int n_points, double upper) {
  if (d < 1 || d > 8) throw std::invalid_argument("default_t_grid: dimension must be in [1, 8]");
  std::vector<std::vector<double>> grid;
  grid.reserve(n_points + 3 * d);
  for (int i = 1; i <= n_points; ++i) {
    std::vector<double> t(d);
    for (int j = 0; j < d; ++j) t[j] = upper * halton(i, kHaltonBases[j]);
    grid.push_back(std::move(t));
  }
  for (int j = 0; j < d; ++j) {
    for (double tau : {upper / 100.0, upper / 10.0, upper}) {
      std::vector<double> t(d, 0.0);
      t[j] = tau;
      grid.push_back(std::move(t));
    }
  }
  return grid;
}

GapReport check_lt_order(const tw::TraceWishartParams& pa, const tw::TraceWishartParams& pb,
                         const std::vector<std::vector<double>>& t_grid) {
  if (pa.dims() != pb.dims())
    throw std::invalid_argument("check_lt_order: dimension mismatch between the two parameter sets");
  if (t_grid.empty()) throw std::invalid_argument("check_lt_order: empty grid");
  double min_gap = std::numeric_limits<double>::infinity();
  double la_at_min = 1.0, lb_at_min = 1.0;
  for (const auto& t : t_grid) {
    const double la = tw::laplace(pa, t);
    const double lb = tw::laplace(pb, t);
    if (la - lb < min_gap) {
      min_gap = la - lb;
      la_at_min = la;
      lb_at_min = lb;
    }
  }
  return make_report(InequalityId::lt_order,
                     est::exact_estimate(la_at_min, est::Method::exact_laplace),
                     est::exact_estimate(lb_at_min, est::Method::exact_laplace), min_gap, 0.0,
                     pa.fingerprint(), 0, 0);
}

namespace {

// E[prod X_i^(-qq_i)] for qq_i >= 0: exponent-zero coordinates drop out by
// marginalization; the empty product is exactly 1.
est::Estimate neg_moment_estimate(const tw::TraceWishartParams& params,
                                  const std::vector<double>& qq) {
  std::vector<int> active;
  std::vector<double> q_active;
  for (int i = 0; i < static_cast<int>(qq.size()); ++i) {
    if (qq[i] > 0.0) {
      active.push_back(i);
      q_active.push_back(qq[i]);
    }
  }
  if (active.empty()) return est::exact_estimate(1.0, est::Method::quadrature, 0);
  if (static_cast<int>(active.size()) == params.dims())
    return est::moment_neg_quadrature(params, q_active);
  return est::moment_neg_quadrature(tw::marginal(params, active), q_active);
}

std::vector<int> index_range(int lo, int hi) {
  std::vector<int> v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

}  // namespace

GapReport check_thm1(const tw::TraceWishartParams& params, const std::vector<cmb::CmFunction>& phis,
                     int d1, MethodChoice method, long n, std::uint64_t seed) {
  const int d = params.dims();
  if (static_cast<int>(phis.size()) != d)
    throw std::invalid_argument("check_thm1: one factor per coordinate required");
  if (d1 < 1 || d1 > d - 1)
    throw std::invalid_argument("check_thm1: split must satisfy 1 <= d1 <= d-1");

  const double alpha = params.alpha();
  bool all_neg_power = true;
  int n_active = 0;
  std::vector<double> qq(d, 0.0);
  for (int i = 0; i < d; ++i) {
    if (const auto* np = std::get_if<cmb::NegPower>(&phis[i].spec())) {
      if (!(np->q > -alpha))
        throw std::invalid_argument("check_thm1: negative-power exponent must exceed -alpha");
      qq[i] = -np->q;
      if (qq[i] > 0.0) ++n_active;
    } else {
      all_neg_power = false;
    }
  }
  const bool quadrature_ok =
      all_neg_power && n_active <= 3 && !params.sigma_factor().singular();

  MethodChoice resolved = method;
  if (method == MethodChoice::auto_select)
    resolved = quadrature_ok ? MethodChoice::quadrature : MethodChoice::mc;
  if (resolved == MethodChoice::wick)
    throw std::invalid_argument("check_thm1: pairing enumeration does not apply to these factors");
  if (resolved == MethodChoice::quadrature && !quadrature_ok)
    throw std::invalid_argument("check_thm1: quadrature infeasible for these inputs");

  if (resolved == MethodChoice::quadrature) {
    const est::Estimate lhs = neg_moment_estimate(params, qq);
    const tw::TraceWishartParams left = tw::marginal(params, index_range(0, d1));
    const tw::TraceWishartParams right = tw::marginal(params, index_range(d1, d));
    const est::Estimate el = neg_moment_estimate(left, {qq.begin(), qq.begin() + d1});
    const est::Estimate er = neg_moment_estimate(right, {qq.begin() + d1, qq.end()});
    est::Estimate rhs;
    rhs.value = el.value * er.value;
    rhs.stderror = std::abs(er.value) * el.stderror + std::abs(el.value) * er.stderror;
    rhs.method = est::Method::quadrature;
    rhs.n = std::max(el.n, er.n);
    const double gap = lhs.value - rhs.value;
    const double gap_stderr = lhs.stderror + rhs.stderror;
    return make_report(InequalityId::thm1, lhs, rhs, gap, gap_stderr, params.fingerprint(), d1,
                       seed);
  }

  std::vector<est::Integrand> fs;
  fs.reserve(d);
  for (const auto& phi : phis) fs.push_back(est::make_integrand(phi));
  const est::McGap g = est::gap_mc(params, fs, d1, n, seed);
  return make_report(InequalityId::thm1, g.lhs, g.rhs, g.gap, g.gap_stderr, params.fingerprint(),
                     d1, seed);
}

namespace {

struct TraceExpFactor {
  Eigen::MatrixXd v;
  Eigen::VectorXd lambda;

  double trace_at(double x) const { return (-x * lambda.array()).exp().sum(); }
  Eigen::MatrixXd matrix_at(double x) const {
    return v * (-x * lambda.array()).exp().matrix().asDiagonal() * v.transpose();
  }
};

}  // namespace

GapReport check_cor1c(const tw::TraceWishartParams& params,
                      const std::vector<linalg::SymMatrix>& as, int d1, long n_draws,
                      std::uint64_t seed, Cor1cDetails* details) {
  const int d = params.dims();
  if (static_cast<int>(as.size()) != d)
    throw std::invalid_argument("check_cor1c: one matrix per coordinate required");
  if (d1 < 1 || d1 > d - 1)
    throw std::invalid_argument("check_cor1c: split must satisfy 1 <= d1 <= d-1");
  const int nn = as[0].dim();
  std::vector<TraceExpFactor> factors(d);
  for (int i = 0; i < d; ++i) {
    if (as[i].dim() != nn) throw std::invalid_argument("check_cor1c: matrices must share one size");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(as[i].mat());
    if (es.eigenvalues()(0) < -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
      throw linalg::NotPositiveSemidefinite(es.eigenvalues()(0));
    factors[i].v = es.eigenvectors();
    factors[i].lambda = es.eigenvalues().cwiseMax(0.0);
  }

  const auto finish = [&](const est::Estimate& lhs, const est::Estimate& rhs, double rhs_kron,
                          double gap, double gap_stderr) {
    const double identity_gap = std::abs(rhs.value - rhs_kron);
    if (details) {
      details->rhs_product_of_traces = rhs.value;
      details->rhs_kronecker_form = rhs_kron;
      details->identity_gap = identity_gap;
    }
    if (identity_gap > 1e-10 * (1.0 + std::abs(rhs.value)))
      throw std::logic_error("check_cor1c: trace/Kronecker forms of the bound disagree");
    return make_report(InequalityId::cor1c, lhs, rhs, gap, gap_stderr, params.fingerprint(), d1,
                       seed);
  };

  if (nn == 1) {
    std::vector<double> t(d);
    for (int i = 0; i < d; ++i) t[i] = as[i](0, 0);
    const double lv = tw::laplace(params, t);
    const tw::TraceWishartParams left = tw::marginal(params, index_range(0, d1));
    const tw::TraceWishartParams right = tw::marginal(params, index_range(d1, d));
    const double ll = tw::laplace(left, {t.begin(), t.begin() + d1});
    const double lr = tw::laplace(right, {t.begin() + d1, t.end()});
    const double rhs_kron =
        linalg::kron(Eigen::MatrixXd::Constant(1, 1, ll), Eigen::MatrixXd::Constant(1, 1, lr))
            .trace();
    return finish(est::exact_estimate(lv, est::Method::exact_laplace),
                  est::exact_estimate(ll * lr, est::Method::exact_laplace), rhs_kron, lv - ll * lr,
                  0.0);
  }

  double kron_rows = 1.0;
  for (int i = 0; i < std::max(d1, d - d1); ++i) kron_rows *= nn;
  if (kron_rows > 4096.0)
    throw std::invalid_argument("check_cor1c: Kronecker factor too large to accumulate");

  const auto run_side = [&](const tw::TraceWishartParams& side_params, int lo, int hi,
                            std::uint64_t side_seed, Eigen::MatrixXd& mean_matrix) {
    const tw::SampleMatrix batch = tw::sample(side_params, n_draws, side_seed);
    long count = 0;
    double mean = 0.0, m2 = 0.0;
    for (long r = 0; r < n_draws; ++r) {
      double prod = 1.0;
      Eigen::MatrixXd kr = Eigen::MatrixXd::Identity(1, 1);
      for (int i = lo; i < hi; ++i) {
        const double x = batch.values(r, i - lo);
        prod *= factors[i].trace_at(x);
        kr = linalg::kron(kr, factors[i].matrix_at(x));
      }
      mean_matrix = (mean_matrix * static_cast<double>(r) + kr) / static_cast<double>(r + 1);
      ++count;
      const double delta = prod - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (prod - mean);
    }
    est::Estimate e;
    e.value = mean;
    e.stderror = std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
    e.method = est::Method::monte_carlo;
    e.n = count;
    e.seed = side_seed;
    return e;
  };

  // LHS over joint draws.
  std::vector<est::Integrand> fs;
  fs.reserve(d);
  for (int i = 0; i < d; ++i) {
    const TraceExpFactor& fac = factors[i];
    fs.push_back(est::Integrand{[fac](double x) { return fac.trace_at(x); },
                                static_cast<double>(nn)});
  }
  const est::Estimate lhs = est::expectation_product_mc(params, fs, n_draws, seed);

  int left_dim = 1, right_dim = 1;
  for (int i = 0; i < d1; ++i) left_dim *= nn;
  for (int i = d1; i < d; ++i) right_dim *= nn;
  Eigen::MatrixXd ml = Eigen::MatrixXd::Zero(left_dim, left_dim);
  Eigen::MatrixXd mr = Eigen::MatrixXd::Zero(right_dim, right_dim);
  const est::Estimate el =
      run_side(tw::marginal(params, index_range(0, d1)), 0, d1, seed + 1, ml);
  const est::Estimate er =
      run_side(tw::marginal(params, index_range(d1, d)), d1, d, seed + 2, mr);

  est::Estimate rhs;
  rhs.value = el.value * er.value;
  rhs.stderror = std::sqrt(er.value * er.value * el.stderror * el.stderror +
                           el.value * el.value * er.stderror * er.stderror);
  rhs.method = est::Method::monte_carlo;
  rhs.n = n_draws;
  rhs.seed = seed + 1;
  const double rhs_kron = linalg::kron(ml, mr).trace();
  const double gap = lhs.value - rhs.value;
  const double gap_stderr =
      std::sqrt(lhs.stderror * lhs.stderror + rhs.stderror * rhs.stderror);
  return finish(lhs, rhs, rhs_kron, gap, gap_stderr);
}

namespace {

// Exact transform-order preconditions shared by the bivariate checkers.
void assert_pair_preconditions(const tw::TraceWishartParams& pair,
                               const tw::TraceWishartParams& star) {
  const GapReport order = check_lt_order(pair, star, default_t_grid(2, 40));
  if (order.verdict != Verdict::holds)
    throw std::logic_error("bivariate check: transform-order precondition failed on the grid");

  const tw::TraceWishartParams m1 = tw::marginal(pair, {0});
  const tw::TraceWishartParams m2 = tw::marginal(pair, {1});
  const double pts[5][2] = {{0.5, 0.5}, {1.0, 1.0}, {2.0, 0.5}, {0.5, 2.0}, {5.0, 5.0}};
  for (const auto& st : pts) {
    const double s = st[0], t = st[1];
    const double joint = 1.0 - tw::laplace(pair, {s, 0.0}) - tw::laplace(pair, {0.0, t}) +
                         tw::laplace(pair, {s, t});
    const double split = (1.0 - tw::laplace(m1, {s})) * (1.0 - tw::laplace(m2, {t}));
    if (joint < split - 1e-12)
      throw std::logic_error("bivariate check: exponential building block not dominant");
  }
}

}  // namespace

GapReport check_thm2(const tw::TraceWishartParams& pair, const cmb::BernsteinFn& f,
                     const cmb::BernsteinFn& g, long n, std::uint64_t seed) {
  if (pair.dims() != 2) throw std::invalid_argument("check_thm2: requires a bivariate distribution");
  if (f.linear_part() != 0.0 || g.linear_part() != 0.0)
    throw std::invalid_argument("check_thm2: factors must have zero linear part");

  const tw::TraceWishartParams star = tw::block_diagonalize(pair, 1);
  assert_pair_preconditions(pair, star);

  const est::Estimate lhs = est::expectation_product_mc(
      pair, {est::make_integrand(f), est::make_integrand(g)}, n, seed);
  const est::Estimate ef =
      est::expectation_product_mc(tw::marginal(star, {0}), {est::make_integrand(f)}, n, seed + 1);
  const est::Estimate eg =
      est::expectation_product_mc(tw::marginal(star, {1}), {est::make_integrand(g)}, n, seed + 2);
  est::Estimate rhs;
  rhs.value = ef.value * eg.value;
  rhs.stderror = std::sqrt(eg.value * eg.value * ef.stderror * ef.stderror +
                           ef.value * ef.value * eg.stderror * eg.stderror);
  rhs.method = est::Method::monte_carlo;
  rhs.n = n;
  rhs.seed = seed + 1;
  const double gap = lhs.value - rhs.value;
  const double gap_stderr =
      std::sqrt(lhs.stderror * lhs.stderror + rhs.stderror * rhs.stderror);
  GapReport r = make_report(InequalityId::thm2, lhs, rhs, gap, gap_stderr, pair.fingerprint(), 1,
                            seed);
  return r;
}

GapReport check_cor2(const tw::TraceWishartParams& pair, double q1, double q2, long n,
                     std::uint64_t seed) {
  if (pair.dims() != 2) throw std::invalid_argument("check_cor2: requires a bivariate distribution");
  if (!(q1 >= 0.0 && q1 <= 1.0 && q2 >= 0.0 && q2 <= 1.0))
    throw std::invalid_argument("check_cor2: exponents must lie in [0, 1]");

  const auto is01 = [](double q) { return q == 0.0 || q == 1.0; };
  if (pair.integer_order() && is01(q1) && is01(q2)) {
    const std::vector<int> exps = {static_cast<int>(q1), static_cast<int>(q2)};
    const est::Estimate lhs = est::moment_wick(pair, exps);
    const est::Estimate e1 = est::moment_wick(tw::marginal(pair, {0}), {exps[0]});
    const est::Estimate e2 = est::moment_wick(tw::marginal(pair, {1}), {exps[1]});
    est::Estimate rhs = est::exact_estimate(e1.value * e2.value, est::Method::exact_wick,
                                            exps[0] + exps[1]);
    return make_report(InequalityId::cor2, lhs, rhs, lhs.value - rhs.value, 0.0,
                       pair.fingerprint(), 1, seed);
  }

  const cmb::BernsteinFn f = cmb::BernsteinFn::closed_power(q1);
  const cmb::BernsteinFn g = cmb::BernsteinFn::closed_power(q2);
  const tw::TraceWishartParams star = tw::block_diagonalize(pair, 1);
  assert_pair_preconditions(pair, star);

  const est::Estimate lhs = est::expectation_product_mc(
      pair, {est::make_integrand(f), est::make_integrand(g)}, n, seed);
  // Margins of the original pair (identical in law to the star margins).
  const est::Estimate ef =
      est::expectation_product_mc(tw::marginal(pair, {0}), {est::make_integrand(f)}, n, seed + 1);
  const est::Estimate eg =
      est::expectation_product_mc(tw::marginal(pair, {1}), {est::make_integrand(g)}, n, seed + 2);
  est::Estimate rhs;
  rhs.value = ef.value * eg.value;
  rhs.stderror = std::sqrt(eg.value * eg.value * ef.stderror * ef.stderror +
                           ef.value * ef.value * eg.stderror * eg.stderror);
  rhs.method = est::Method::monte_carlo;
  rhs.n = n;
  rhs.seed = seed + 1;

  // Same bound from a joint batch of the diagonalized pair; the two routes
  // must agree within Monte Carlo noise.
  {
    const tw::SampleMatrix batch = tw::sample(star, n, seed + 3);
    double mf = 0.0, mg = 0.0, m2f = 0.0, m2g = 0.0;
    for (long i = 0; i < n; ++i) {
      const double vf = f(batch.values(i, 0));
      const double vg = g(batch.values(i, 1));
      const double df = vf - mf;
      mf += df / static_cast<double>(i + 1);
      m2f += df * (vf - mf);
      const double dg = vg - mg;
      mg += dg / static_cast<double>(i + 1);
      m2g += dg * (vg - mg);
    }
    const double sef = std::sqrt(m2f / static_cast<double>(n - 1) / static_cast<double>(n));
    const double seg = std::sqrt(m2g / static_cast<double>(n - 1) / static_cast<double>(n));
    const double rhs_star = mf * mg;
    const double se_star = std::sqrt(mg * mg * sef * sef + mf * mf * seg * seg);
    const double diff = std::abs(rhs.value - rhs_star);
    const double band =
        5.0 * std::sqrt(rhs.stderror * rhs.stderror + se_star * se_star) + 1e-12;
    if (diff > band)
      throw std::logic_error("check_cor2: original-margin and diagonalized-pair bounds disagree");
  }

  const double gap = lhs.value - rhs.value;
  const double gap_stderr =
      std::sqrt(lhs.stderror * lhs.stderror + rhs.stderror * rhs.stderror);
  return make_report(InequalityId::cor2, lhs, rhs, gap, gap_stderr, pair.fingerprint(), 1, seed);
}

namespace {

bool integer_vector(const std::vector<double>& v, std::vector<int>* out) {
  out->clear();
  for (double x : v) {
    if (x < 0.0 || x != std::floor(x) || x > 6.0) return false;
    out->push_back(static_cast<int>(x));
  }
  return true;
}

}  // namespace

GapReport check_conjecture1(const tw::TraceWishartParams& params, const std::vector<double>& exps,
                            int d1, MethodChoice method, long n, std::uint64_t seed) {
  const int d = params.dims();
  if (static_cast<int>(exps.size()) != d)
    throw std::invalid_argument("check_conjecture1: one exponent per coordinate required");
  for (double e : exps) {
    if (e < 0.0) throw std::invalid_argument("check_conjecture1: exponents must be >= 0");
  }
  if (d1 < 1 || d1 > d - 1)
    throw std::invalid_argument("check_conjecture1: split must satisfy 1 <= d1 <= d-1");

  std::vector<int> iexps;
  long total = 0;
  const bool ints = integer_vector(exps, &iexps);
  if (ints) total = std::accumulate(iexps.begin(), iexps.end(), 0L);
  const bool wick_ok = params.integer_order() && ints && 2 * total <= 12;

  MethodChoice resolved = method;
  if (method == MethodChoice::auto_select) resolved = wick_ok ? MethodChoice::wick : MethodChoice::mc;
  if (resolved == MethodChoice::quadrature)
    throw std::invalid_argument("check_conjecture1: quadrature covers negative exponents only");
  if (resolved == MethodChoice::wick && !wick_ok)
    throw std::invalid_argument("check_conjecture1: pairing enumeration infeasible for these inputs");

  if (resolved == MethodChoice::wick) {
    const est::Estimate lhs = est::moment_wick(params, iexps);
    const est::Estimate el =
        est::moment_wick(tw::marginal(params, index_range(0, d1)), {iexps.begin(), iexps.begin() + d1});
    const est::Estimate er =
        est::moment_wick(tw::marginal(params, index_range(d1, d)), {iexps.begin() + d1, iexps.end()});
    const est::Estimate rhs =
        est::exact_estimate(el.value * er.value, est::Method::exact_wick, total);
    return make_report(InequalityId::conjecture1, lhs, rhs, lhs.value - rhs.value, 0.0,
                       params.fingerprint(), d1, seed);
  }

  std::vector<est::Integrand> fs;
  fs.reserve(d);
  for (double e : exps) fs.push_back(est::power_integrand(e));
  const est::McGap g = est::gap_mc(params, fs, d1, n, seed);
  return make_report(InequalityId::conjecture1, g.lhs, g.rhs, g.gap, g.gap_stderr,
                     params.fingerprint(), d1, seed);
}

GapReport check_weak_gpi(const tw::TraceWishartParams& params, const std::vector<double>& exps,
                         WeakGpiVariant variant, MethodChoice method, long n, std::uint64_t seed) {
  const int d = params.dims();
  if (static_cast<int>(exps.size()) != d)
    throw std::invalid_argument("check_weak_gpi: one exponent per coordinate required");
  for (double e : exps) {
    if (e < 0.0) throw std::invalid_argument("check_weak_gpi: exponents must be >= 0");
  }
  if (variant == WeakGpiVariant::eq14) {
    for (double e : exps) {
      if (e != exps[0] || e != std::floor(e))
        throw std::invalid_argument("check_weak_gpi: eq14 needs one shared integer exponent");
    }
  }
  const InequalityId id =
      variant == WeakGpiVariant::eq13 ? InequalityId::weak_gpi13 : InequalityId::weak_gpi14;

  std::vector<int> iexps;
  long total = 0;
  const bool ints = integer_vector(exps, &iexps);
  if (ints) total = std::accumulate(iexps.begin(), iexps.end(), 0L);
  const bool wick_ok = params.integer_order() && ints && 2 * total <= 12;

  MethodChoice resolved = method;
  if (method == MethodChoice::auto_select) resolved = wick_ok ? MethodChoice::wick : MethodChoice::mc;
  if (resolved == MethodChoice::quadrature)
    throw std::invalid_argument("check_weak_gpi: quadrature covers negative exponents only");
  if (resolved == MethodChoice::wick && !wick_ok)
    throw std::invalid_argument("check_weak_gpi: pairing enumeration infeasible for these inputs");

  if (resolved == MethodChoice::wick) {
    const est::Estimate lhs = est::moment_wick(params, iexps);
    double rhs_value = 1.0;
    for (int i = 0; i < d; ++i)
      rhs_value *= est::moment_wick(tw::marginal(params, {i}), {iexps[i]}).value;
    const est::Estimate rhs = est::exact_estimate(rhs_value, est::Method::exact_wick, total);
    return make_report(id, lhs, rhs, lhs.value - rhs_value, 0.0, params.fingerprint(), 0, seed);
  }

  std::vector<est::Integrand> fs;
  fs.reserve(d);
  for (double e : exps) fs.push_back(est::power_integrand(e));
  const est::Estimate lhs = est::expectation_product_mc(params, fs, n, seed);
  double rhs_value = 1.0;
  std::vector<est::Estimate> parts(d);
  for (int i = 0; i < d; ++i) {
    parts[i] = est::expectation_product_mc(tw::marginal(params, {i}), {fs[i]}, n,
                                           seed + 1 + static_cast<std::uint64_t>(i));
    rhs_value *= parts[i].value;
  }
  double var = 0.0;
  for (int i = 0; i < d; ++i) {
    double others = 1.0;
    for (int j = 0; j < d; ++j)
      if (j != i) others *= parts[j].value;
    var += others * others * parts[i].stderror * parts[i].stderror;
  }
  est::Estimate rhs;
  rhs.value = rhs_value;
  rhs.stderror = std::sqrt(var);
  rhs.method = est::Method::monte_carlo;
  rhs.n = n;
  rhs.seed = seed + 1;
  const double gap = lhs.value - rhs.value;
  const double gap_stderr =
      std::sqrt(lhs.stderror * lhs.stderror + rhs.stderror * rhs.stderror);
  return make_report(id, lhs, rhs, gap, gap_stderr, params.fingerprint(), 0, seed);
}

namespace {

bool in_family(cli::SigmaKind kind, const linalg::SymMatrix& sigma) {
  switch (kind) {
    case cli::SigmaKind::spd:
    case cli::SigmaKind::singular:
      return true;
    case cli::SigmaKind::spd_nonneg:
      return sigma.mat().minCoeff() >= 0.0;
    case cli::SigmaKind::signature_nonneg: {
      const int p = sigma.dim();
      for (std::uint64_t bits = 0; bits < (1ULL << (p - 1)); ++bits) {
        bool ok = true;
        for (int i = 0; ok && i < p; ++i) {
          const double si = i == 0 ? 1.0 : ((bits >> (i - 1)) & 1 ? -1.0 : 1.0);
          for (int j = i; ok && j < p; ++j) {
            const double sj = j == 0 ? 1.0 : ((bits >> (j - 1)) & 1 ? -1.0 : 1.0);
            if (si * sigma(i, j) * sj < 0.0) ok = false;
          }
        }
        if (ok) return true;
      }
      return false;
    }
  }
  return false;
}

}  // namespace

HuntResult hunt_counterexample(const SearchSpace& space, long budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("hunt_counterexample: budget must be >= 1");
  if (space.partition.empty() || space.two_alpha_choices.empty() || space.exponent_sets.empty())
    throw std::invalid_argument("hunt_counterexample: empty search space");
  if (space.target != InequalityId::conjecture1 && space.target != InequalityId::weak_gpi13 &&
      space.target != InequalityId::weak_gpi14)
    throw std::invalid_argument("hunt_counterexample: unsupported target inequality");
  const linalg::BlockPartition part(space.partition);
  const int d = part.blocks();
  std::vector<int> d1_choices = space.d1_choices;
  if (d1_choices.empty()) d1_choices = index_range(1, d);
  const cli::SigmaKind kind = cli::sigma_kind_from_string(space.generator_kind);

  long evaluations = 0;
  const auto evaluate = [&](const linalg::SymMatrix& sigma, double two_alpha,
                            const std::vector<double>& exps, int d1,
                            std::uint64_t eval_seed) -> GapReport {
    const tw::TraceWishartParams params(two_alpha, part, sigma);
    ++evaluations;
    if (space.target == InequalityId::conjecture1)
      return check_conjecture1(params, exps, d1, space.method, space.n_draws, eval_seed);
    const WeakGpiVariant variant = space.target == InequalityId::weak_gpi13
                                       ? WeakGpiVariant::eq13
                                       : WeakGpiVariant::eq14;
    return check_weak_gpi(params, exps, variant, space.method, space.n_draws, eval_seed);
  };

  HuntResult best;
  bool have_best = false;
  linalg::SymMatrix best_sigma;
  double best_two_alpha = 0.0;
  std::vector<double> best_exps;
  int best_d1 = 1;

  for (long e = 0; e < budget; ++e) {
    rng::Stream pick = rng::Stream::keyed(seed, static_cast<std::uint64_t>(e), 1);
    const std::uint64_t sigma_seed = rng::derive_key(seed, static_cast<std::uint64_t>(e) + 1);
    const linalg::SymMatrix sigma = cli::generate_sigma(kind, part.total(), sigma_seed);
    const double two_alpha =
        space.two_alpha_choices[pick.next_u64() % space.two_alpha_choices.size()];
    const std::vector<double>& exps =
        space.exponent_sets[pick.next_u64() % space.exponent_sets.size()];
    const int d1 = d1_choices[pick.next_u64() % d1_choices.size()];
    const GapReport rep = evaluate(sigma, two_alpha, exps, d1, rng::derive_key(seed, e));
    if (!have_best || rep.gap < best.best.gap) {
      have_best = true;
      best.best = rep;
      best_sigma = sigma;
      best_two_alpha = two_alpha;
      best_exps = exps;
      best_d1 = d1;
    }
  }

  // Coordinate-wise perturbation descent with step halving on the best
  // covariance; candidates outside the family or the SPSD cone are skipped.
  const int p = part.total();
  double step = 0.25 * best_sigma.mat().cwiseAbs().maxCoeff() + 0.05;
  std::uint64_t descent_counter = 0;
  for (int round = 0; round < 20; ++round, step *= 0.5) {
    for (int i = 0; i < p; ++i) {
      for (int j = i; j < p; ++j) {
        for (double sgn : {1.0, -1.0}) {
          Eigen::MatrixXd m = best_sigma.mat();
          m(i, j) += sgn * step;
          if (i != j) m(j, i) += sgn * step;
          const linalg::SymMatrix candidate(m);
          if (!in_family(kind, candidate)) continue;
          GapReport rep;
          try {
            rep = evaluate(candidate, best_two_alpha, best_exps, best_d1,
                           rng::derive_key(rng::derive_key(seed, 0xDE5CE57ULL), ++descent_counter));
          } catch (const linalg::NotPositiveSemidefinite&) {
            continue;
          }
          if (rep.gap < best.best.gap) {
            best.best = rep;
            best_sigma = candidate;
          }
        }
      }
    }
  }

  best.sigma_best = best_sigma;
  best.two_alpha_best = best_two_alpha;
  best.exponents_best = best_exps;
  best.evaluations = evaluations;
  return best;
}

}  // namespace gpilab::harness
