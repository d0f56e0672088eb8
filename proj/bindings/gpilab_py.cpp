#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gpilab/experiment.hpp"

namespace py = pybind11;

namespace {

nlohmann::json json_from_string(const std::string& s) { return nlohmann::json::parse(s); }

gpilab::tw::TraceWishartParams make_params(double two_alpha, const std::vector<int>& partition,
                                           const Eigen::MatrixXd& sigma) {
  return gpilab::tw::TraceWishartParams(two_alpha, gpilab::linalg::BlockPartition(partition),
                                        gpilab::linalg::SymMatrix(sigma));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trace-Wishart product-inequality laboratory (C++ core)";

  py::class_<gpilab::tw::TraceWishartParams>(m, "TraceWishartParams")
      .def(py::init(&make_params), py::arg("two_alpha"), py::arg("partition"), py::arg("sigma"))
      .def_property_readonly("two_alpha", &gpilab::tw::TraceWishartParams::two_alpha)
      .def_property_readonly("dims", &gpilab::tw::TraceWishartParams::dims)
      .def_property_readonly("fingerprint", &gpilab::tw::TraceWishartParams::fingerprint)
      .def_property_readonly(
          "sigma", [](const gpilab::tw::TraceWishartParams& p) { return p.sigma().mat(); })
      .def("marginal",
           [](const gpilab::tw::TraceWishartParams& p, const std::vector<int>& blocks) {
             return gpilab::tw::marginal(p, blocks);
           })
      .def("block_diagonalize", [](const gpilab::tw::TraceWishartParams& p, int d1) {
        return gpilab::tw::block_diagonalize(p, d1);
      });

  m.def(
      "laplace",
      [](const gpilab::tw::TraceWishartParams& p, const std::vector<double>& t) {
        return gpilab::tw::laplace(p, t);
      },
      py::arg("params"), py::arg("t"));

  m.def(
      "sample",
      [](const gpilab::tw::TraceWishartParams& p, long n, std::uint64_t seed, int workers) {
        const gpilab::tw::SampleMatrix s = gpilab::tw::sample(p, n, seed, workers);
        return py::make_tuple(s.values, gpilab::tw::to_string(s.sampler));
      },
      py::arg("params"), py::arg("n"), py::arg("seed"), py::arg("workers") = 0);

  m.def(
      "moment_wick",
      [](const gpilab::tw::TraceWishartParams& p, const std::vector<int>& powers) {
        return gpilab::est::moment_wick(p, powers).value;
      },
      py::arg("params"), py::arg("powers"));

  m.def(
      "moment_neg_quadrature",
      [](const gpilab::tw::TraceWishartParams& p, const std::vector<double>& q) {
        const gpilab::est::Estimate e = gpilab::est::moment_neg_quadrature(p, q);
        return py::make_tuple(e.value, e.stderror);
      },
      py::arg("params"), py::arg("q"));

  m.def(
      "fischer_gap",
      [](const Eigen::MatrixXd& sigma, const std::vector<int>& partition, int d1) {
        return gpilab::linalg::fischer_gap(gpilab::linalg::SymMatrix(sigma),
                                           gpilab::linalg::BlockPartition(partition), d1);
      },
      py::arg("sigma"), py::arg("partition"), py::arg("d1"));

  m.def("kron", &gpilab::linalg::kron, py::arg("a"), py::arg("b"));
  m.def(
      "kron_sum",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return gpilab::linalg::kron_sum(a, b);
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "matexp_sym",
      [](const Eigen::MatrixXd& a) {
        return gpilab::linalg::matexp_sym(gpilab::linalg::SymMatrix(a)).mat();
      },
      py::arg("a"));

  m.def(
      "generate_sigma",
      [](const std::string& kind, int p, std::uint64_t seed, py::object rho) {
        if (kind == "equicorr") return gpilab::cli::equicorrelated(p, rho.cast<double>()).mat();
        return gpilab::cli::generate_sigma(gpilab::cli::sigma_kind_from_string(kind), p, seed)
            .mat();
      },
      py::arg("kind"), py::arg("p"), py::arg("seed") = 0, py::arg("rho") = py::none());

  // Config-driven entry points; JSON strings in, JSON strings out.
  m.def("run_check_json", [](const std::string& config) {
    const gpilab::cli::RunOutput out = gpilab::cli::run_check(json_from_string(config));
    nlohmann::json body = out.body;
    body["exit_code"] = out.exit_code;
    return body.dump();
  });
  m.def("run_sweep_json",
        [](const std::string& config, const std::string& axis, const std::vector<double>& values) {
          const gpilab::cli::RunOutput out =
              gpilab::cli::run_sweep(json_from_string(config), axis, values);
          nlohmann::json body = out.body;
          body["exit_code"] = out.exit_code;
          body["csv"] = out.csv;
          return body.dump();
        });
  m.def("run_hunt_json", [](const std::string& config) {
    return gpilab::cli::run_hunt(json_from_string(config)).dump();
  });

  py::register_exception<gpilab::cli::ConfigError>(m, "ConfigError");
  py::register_exception<gpilab::linalg::NotPositiveSemidefinite>(m, "NotPositiveSemidefinite");
}
