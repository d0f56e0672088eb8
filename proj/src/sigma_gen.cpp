#include "gpilab/sigma_gen.hpp"

#include <cmath>
#include <stdexcept>

#include "gpilab/rng.hpp"

namespace gpilab::cli {

const char* to_string(SigmaKind k) {
  switch (k) {
    case SigmaKind::spd: return "spd";
    case SigmaKind::spd_nonneg: return "spd-nonneg";
    case SigmaKind::signature_nonneg: return "signature-nonneg";
    case SigmaKind::singular: return "singular";
  }
  return "unknown";
}

SigmaKind sigma_kind_from_string(const std::string& s) {
  if (s == "spd") return SigmaKind::spd;
  if (s == "spd-nonneg") return SigmaKind::spd_nonneg;
  if (s == "signature-nonneg") return SigmaKind::signature_nonneg;
  if (s == "singular") return SigmaKind::singular;
  throw std::invalid_argument("unknown sigma generator kind: " + s);
}

linalg::SymMatrix generate_sigma(SigmaKind kind, int p, std::uint64_t seed,
                                 Eigen::VectorXd* signature_out) {
  if (p < 1) throw std::invalid_argument("generate_sigma: dimension must be >= 1");
  rng::Stream st = rng::Stream::keyed(seed, 0, 0);
  if (signature_out) *signature_out = Eigen::VectorXd::Ones(p);

  const int cols = kind == SigmaKind::singular ? (p + 1) / 2 : p;
  Eigen::MatrixXd g(p, cols);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = st.next_normal();

  switch (kind) {
    case SigmaKind::spd: {
      Eigen::MatrixXd m = g * g.transpose();
      m.diagonal().array() += 0.1;
      return linalg::SymMatrix(m);
    }
    case SigmaKind::spd_nonneg: {
      const Eigen::MatrixXd h = g.cwiseAbs();
      Eigen::MatrixXd m = h * h.transpose();
      m.diagonal().array() += 0.1;
      return linalg::SymMatrix(m);
    }
    case SigmaKind::signature_nonneg: {
      const Eigen::MatrixXd h = g.cwiseAbs();
      Eigen::MatrixXd m = h * h.transpose();
      m.diagonal().array() += 0.1;
      Eigen::VectorXd s(p);
      for (int i = 0; i < p; ++i) s(i) = st.next_u64() & 1 ? 1.0 : -1.0;
      if (signature_out) *signature_out = s;
      return linalg::SymMatrix(s.asDiagonal() * m * s.asDiagonal());
    }
    case SigmaKind::singular:
      return linalg::SymMatrix(g * g.transpose());
  }
  throw std::logic_error("generate_sigma: unreachable");
}

linalg::SymMatrix equicorrelated(int p, double rho) {
  if (p < 1) throw std::invalid_argument("equicorrelated: dimension must be >= 1");
  if (p > 1 && (rho < -1.0 / (p - 1) || rho > 1.0))
    throw std::invalid_argument("equicorrelated: rho out of the positive semidefinite range");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(p, p, rho);
  m.diagonal().setConstant(1.0);
  return linalg::SymMatrix(m);
}

}  // namespace gpilab::cli
