#include "gpilab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "gpilab/rng.hpp"

namespace gpilab::cli {

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) throw ConfigError("matrix must be a nonempty array of rows");
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
      throw ConfigError("matrix rows must be square");
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

linalg::SymMatrix sigma_from_json(const nlohmann::json& spec) {
  if (spec.contains("matrix")) return linalg::SymMatrix(matrix_from_json(spec.at("matrix")));
  if (!spec.contains("generator")) throw ConfigError("sigma needs a matrix or a generator");
  const std::string kind = spec.at("generator").get<std::string>();
  const int p = spec.at("p").get<int>();
  if (kind == "equicorr") return equicorrelated(p, spec.at("rho").get<double>());
  return generate_sigma(sigma_kind_from_string(kind), p, spec.value("seed", 0ULL));
}

cmb::CmFunction cm_from_json(const nlohmann::json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "neg_power") return cmb::CmFunction::neg_power(spec.at("q").get<double>());
  if (type == "stretched_exp") return cmb::CmFunction::stretched_exp(spec.at("r").get<double>());
  if (type == "trace_exp")
    return cmb::CmFunction::trace_exp(linalg::SymMatrix(matrix_from_json(spec.at("a"))));
  throw ConfigError("unknown completely monotone function type: " + type);
}

cmb::BernsteinFn bernstein_from_json(const nlohmann::json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "closed_power") return cmb::BernsteinFn::closed_power(spec.at("q").get<double>());
  if (type == "triplet") {
    std::vector<cmb::BernsteinAtom> atoms;
    for (const auto& atom : spec.value("atoms", nlohmann::json::array()))
      atoms.push_back({atom.at(0).get<double>(), atom.at(1).get<double>()});
    return cmb::BernsteinFn::triplet(spec.value("a", 0.0), spec.value("b", 0.0), std::move(atoms));
  }
  throw ConfigError("unknown Bernstein function type: " + type);
}

std::uint64_t fnv1a_string(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

tw::TraceWishartParams params_from_json(const nlohmann::json& dist) {
  try {
    const double two_alpha = dist.at("two_alpha").get<double>();
    const std::vector<int> sizes = dist.at("partition").get<std::vector<int>>();
    return tw::TraceWishartParams(two_alpha, linalg::BlockPartition(sizes),
                                  sigma_from_json(dist.at("sigma")));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid distribution: ") + e.what());
  }
}

int exit_code_for(const std::vector<harness::GapReport>& reports) {
  bool any_violated = false, any_inconclusive = false;
  for (const auto& r : reports) {
    if (r.verdict == harness::Verdict::violated) any_violated = true;
    if (r.verdict == harness::Verdict::inconclusive) any_inconclusive = true;
  }
  if (any_violated) return 1;
  if (any_inconclusive) return 3;
  return 0;
}

std::string config_fingerprint(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a_string(config.dump())));
  return buf;
}

namespace {

harness::GapReport dispatch_check(const nlohmann::json& config) {
  const std::string id_str = config.at("inequality").get<std::string>();
  const harness::InequalityId id = harness::inequality_from_string(id_str);
  const tw::TraceWishartParams params = params_from_json(config.at("distribution"));
  const int d = params.dims();
  const int d1 = config.value("d1", 1);
  const harness::MethodChoice method =
      harness::method_from_string(config.value("method", std::string("auto")));
  const long n = config.value("n_draws", 1000000L);
  const std::uint64_t seed = config.value("seed", 0ULL);

  switch (id) {
    case harness::InequalityId::lt_order: {
      std::vector<std::vector<double>> grid;
      if (config.contains("t_grid")) {
        for (const auto& t : config.at("t_grid")) grid.push_back(t.get<std::vector<double>>());
      } else {
        grid = harness::default_t_grid(d);
      }
      return harness::check_lt_order(params, tw::block_diagonalize(params, d1), grid);
    }
    case harness::InequalityId::thm1:
    case harness::InequalityId::cor1a:
    case harness::InequalityId::cor1b: {
      std::vector<cmb::CmFunction> phis;
      for (const auto& spec : config.at("phis")) phis.push_back(cm_from_json(spec));
      for (const auto& phi : phis) {
        if (id == harness::InequalityId::cor1a &&
            !std::holds_alternative<cmb::NegPower>(phi.spec()))
          throw ConfigError("cor1a takes negative-power factors only");
        if (id == harness::InequalityId::cor1b &&
            !std::holds_alternative<cmb::StretchedExp>(phi.spec()))
          throw ConfigError("cor1b takes stretched-exponential factors only");
      }
      harness::GapReport r = harness::check_thm1(params, phis, d1, method, n, seed);
      r.inequality_id = id;
      return r;
    }
    case harness::InequalityId::cor1c: {
      std::vector<linalg::SymMatrix> as;
      for (const auto& a : config.at("a_matrices"))
        as.push_back(linalg::SymMatrix(matrix_from_json(a)));
      return harness::check_cor1c(params, as, d1, n, seed);
    }
    case harness::InequalityId::thm2:
      return harness::check_thm2(params, bernstein_from_json(config.at("f")),
                                 bernstein_from_json(config.at("g")), n, seed);
    case harness::InequalityId::cor2:
      return harness::check_cor2(params, config.at("q1").get<double>(),
                                 config.at("q2").get<double>(), n, seed);
    case harness::InequalityId::conjecture1:
      return harness::check_conjecture1(params, config.at("exponents").get<std::vector<double>>(),
                                        d1, method, n, seed);
    case harness::InequalityId::weak_gpi13:
      return harness::check_weak_gpi(params, config.at("exponents").get<std::vector<double>>(),
                                     harness::WeakGpiVariant::eq13, method, n, seed);
    case harness::InequalityId::weak_gpi14: {
      const double m = config.at("m").get<double>();
      return harness::check_weak_gpi(params, std::vector<double>(d, m),
                                     harness::WeakGpiVariant::eq14, method, n, seed);
    }
  }
  throw ConfigError("unhandled inequality id: " + id_str);
}

}  // namespace

RunOutput run_check(const nlohmann::json& config) {
  RunOutput out;
  try {
    out.reports.push_back(dispatch_check(config));
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  out.exit_code = exit_code_for(out.reports);
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& r : out.reports) reports.push_back(r.to_json());
  out.body = nlohmann::json{{"config_fingerprint", config_fingerprint(config)},
                            {"reports", reports}};
  std::ostringstream csv;
  csv << harness::GapReport::csv_header() << '\n';
  for (const auto& r : out.reports) csv << r.csv_row() << '\n';
  out.csv = csv.str();
  return out;
}

RunOutput run_sweep(const nlohmann::json& config, const std::string& axis,
                    const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  static const std::vector<std::string> kAxes = {"rho", "two_alpha", "q1", "q2", "m", "d1"};
  if (std::find(kAxes.begin(), kAxes.end(), axis) == kAxes.end())
    throw ConfigError("sweep: unknown axis " + axis);

  const std::uint64_t base_seed = config.value("seed", 0ULL);
  RunOutput out;
  nlohmann::json instances = nlohmann::json::array();
  std::ostringstream csv;
  csv << "axis_value,lhs,rhs,gap,gap_stderr,verdict\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    nlohmann::json instance = config;
    const double v = values[i];
    if (axis == "rho") {
      if (!instance.at("distribution").at("sigma").contains("generator") ||
          instance["distribution"]["sigma"]["generator"] != "equicorr")
        throw ConfigError("sweep over rho needs the equicorr sigma generator");
      instance["distribution"]["sigma"]["rho"] = v;
    } else if (axis == "two_alpha") {
      instance["distribution"]["two_alpha"] = v;
    } else if (axis == "d1") {
      instance["d1"] = static_cast<int>(v);
    } else if (axis == "m") {
      instance["m"] = v;
    } else {
      instance[axis] = v;
    }
    instance["seed"] = rng::derive_key(base_seed, i);
    RunOutput single = run_check(instance);
    const harness::GapReport& r = single.reports.front();
    out.reports.push_back(r);
    nlohmann::json entry = r.to_json();
    entry["axis_value"] = v;
    instances.push_back(entry);
    char row[192];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", v, r.lhs.value,
                  r.rhs.value, r.gap, r.gap_stderr, harness::to_string(r.verdict));
    csv << row;
  }
  out.exit_code = exit_code_for(out.reports);
  out.body = nlohmann::json{{"config_fingerprint", config_fingerprint(config)},
                            {"axis", axis},
                            {"reports", instances}};
  out.csv = csv.str();
  return out;
}

nlohmann::json run_hunt(const nlohmann::json& config) {
  try {
    const nlohmann::json& space_json = config.at("space");
    harness::SearchSpace space;
    space.target = harness::inequality_from_string(
        config.value("inequality", std::string("conjecture1")));
    space.partition = space_json.at("partition").get<std::vector<int>>();
    space.two_alpha_choices = space_json.at("two_alpha").get<std::vector<double>>();
    for (const auto& exps : space_json.at("exponent_sets"))
      space.exponent_sets.push_back(exps.get<std::vector<double>>());
    space.generator_kind = space_json.value("generator", std::string("spd"));
    if (space_json.contains("d1")) space.d1_choices = space_json.at("d1").get<std::vector<int>>();
    space.method = harness::method_from_string(space_json.value("method", std::string("auto")));
    space.n_draws = space_json.value("n_draws", 100000L);
    const long budget = config.at("budget").get<long>();
    const std::uint64_t seed = config.value("seed", 0ULL);

    const harness::HuntResult result = harness::hunt_counterexample(space, budget, seed);
    nlohmann::json sigma_rows = nlohmann::json::array();
    for (int i = 0; i < result.sigma_best.dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < result.sigma_best.dim(); ++j) row.push_back(result.sigma_best(i, j));
      sigma_rows.push_back(row);
    }
    return nlohmann::json{{"config_fingerprint", config_fingerprint(config)},
                          {"best", result.best.to_json()},
                          {"sigma_best", sigma_rows},
                          {"two_alpha", result.two_alpha_best},
                          {"exponents", result.exponents_best},
                          {"evaluations", result.evaluations}};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid hunt config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid hunt config: ") + e.what());
  }
}

tw::SampleMatrix run_sample(const nlohmann::json& config) {
  try {
    const tw::TraceWishartParams params = params_from_json(config.at("distribution"));
    const long n = config.value("n_draws", 1000L);
    const std::uint64_t seed = config.value("seed", 0ULL);
    const int workers = config.value("workers", 0);
    return tw::sample(params, n, seed, workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid sample config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid sample config: ") + e.what());
  }
}

nlohmann::json run_laplace(const nlohmann::json& config) {
  try {
    const tw::TraceWishartParams params = params_from_json(config.at("distribution"));
    const std::vector<double> t = config.at("t").get<std::vector<double>>();
    return nlohmann::json{{"t", t},
                          {"laplace", tw::laplace(params, t)},
                          {"params_fingerprint", params.fingerprint()}};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid laplace config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid laplace config: ") + e.what());
  }
}

}  // namespace gpilab::cli
