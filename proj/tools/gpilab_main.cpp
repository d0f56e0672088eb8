// Command line front end: config-driven inequality checks, parameter sweeps,
// covariance-space counterexample hunts, sampling and transform evaluation.
//
// Exit codes: 0 every verdict holds, 1 a verdict is violated, 2 bad config or
// runtime error, 3 at least one inconclusive verdict and none violated.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpilab/experiment.hpp"

namespace {

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gpilab::cli::ConfigError("cannot open config file: " + path);
  nlohmann::json config;
  in >> config;
  return config;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Path to the JSON config")->required();
  cmd->add_option("--out", opts.out_path, "Output path (stdout when omitted)");
  cmd->add_option("--format", opts.format, "Report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", opts.seed, "Override the config seed")
      ->each([&opts](const std::string&) { opts.seed_given = true; });
}

nlohmann::json prepare(const CommonOpts& opts) {
  nlohmann::json config = load_config(opts.config_path);
  if (opts.seed_given) config["seed"] = opts.seed;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gpilab: numerical checks for product inequalities of Wishart block traces"};
  app.require_subcommand(1);

  CommonOpts check_opts, sweep_opts, hunt_opts, sample_opts, laplace_opts;
  std::string axis;
  std::string values_csv;

  CLI::App* check = app.add_subcommand("check", "Run one configured inequality check");
  add_common(check, check_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "Run a check across a list of axis values");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis, "Config field to sweep (rho, two_alpha, q1, q2, m, d1)")
      ->required();
  sweep->add_option("--values", values_csv, "Comma-separated axis values")->required();

  CLI::App* hunt = app.add_subcommand("hunt", "Search the covariance space for negative gaps");
  add_common(hunt, hunt_opts);

  CLI::App* sample = app.add_subcommand("sample", "Draw from the configured distribution (CSV)");
  add_common(sample, sample_opts);

  CLI::App* laplace = app.add_subcommand("laplace", "Evaluate the transform at the config point t");
  add_common(laplace, laplace_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      const gpilab::cli::RunOutput out = gpilab::cli::run_check(prepare(check_opts));
      write_text(check_opts.out_path,
                 check_opts.format == "csv" ? out.csv : out.body.dump(2) + "\n");
      return out.exit_code;
    }
    if (sweep->parsed()) {
      const gpilab::cli::RunOutput out =
          gpilab::cli::run_sweep(prepare(sweep_opts), axis, parse_values(values_csv));
      write_text(sweep_opts.out_path,
                 sweep_opts.format == "csv" ? out.csv : out.body.dump(2) + "\n");
      return out.exit_code;
    }
    if (hunt->parsed()) {
      const nlohmann::json result = gpilab::cli::run_hunt(prepare(hunt_opts));
      write_text(hunt_opts.out_path, result.dump(2) + "\n");
      const double gap = result.at("best").at("gap").get<double>();
      return gap < -1e-9 ? 1 : 0;
    }
    if (sample->parsed()) {
      const gpilab::tw::SampleMatrix m = gpilab::cli::run_sample(prepare(sample_opts));
      std::ostringstream csv;
      m.write_csv(csv);
      write_text(sample_opts.out_path, csv.str());
      return 0;
    }
    if (laplace->parsed()) {
      const nlohmann::json result = gpilab::cli::run_laplace(prepare(laplace_opts));
      write_text(laplace_opts.out_path, result.dump(2) + "\n");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
