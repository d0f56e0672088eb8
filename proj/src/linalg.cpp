#include "gpilab/linalg.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gpilab::linalg {

NotPositiveSemidefinite::NotPositiveSemidefinite(double min_eigenvalue)
    : std::runtime_error("matrix is not positive semidefinite (min eigenvalue " +
                         std::to_string(min_eigenvalue) + ")"),
      min_eigenvalue_(min_eigenvalue) {}

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: input must be square");
  m_ = 0.5 * (m + m.transpose());
}

BlockPartition::BlockPartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw std::invalid_argument("BlockPartition: needs at least one block");
  offsets_.reserve(sizes_.size());
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("BlockPartition: block sizes must be positive");
    offsets_.push_back(total_);
    total_ += s;
  }
}

int BlockPartition::block_of(int r) const {
  for (int b = 0; b < blocks(); ++b) {
    if (r < offsets_[b] + sizes_[b]) return b;
  }
  throw std::out_of_range("BlockPartition: row out of range");
}

double SpsdFactor::det() const {
  if (singular()) return 0.0;
  return std::exp(*logdet);
}

SpsdFactor factor_spsd(const SymMatrix& m, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("factor_spsd: tol must be positive");
  const int n = m.dim();
  SpsdFactor f;
  f.dim = n;
  if (n == 0) {
    f.L.resize(0, 0);
    f.logdet = 0.0;
    f.eigenvalues.resize(0);
    return f;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
  Eigen::VectorXd lam = es.eigenvalues();  // ascending
  const double scale = lam.cwiseAbs().maxCoeff();
  const double cut = tol * scale;
  if (lam(0) < -cut) throw NotPositiveSemidefinite(lam(0));

  std::vector<int> kept;
  for (int i = 0; i < n; ++i) {
    if (lam(i) > cut && lam(i) > 0.0) {
      kept.push_back(i);
    } else {
      lam(i) = 0.0;
    }
  }
  f.rank = static_cast<int>(kept.size());
  f.eigenvalues = lam;
  f.L.resize(n, f.rank);
  double logdet = 0.0;
  for (int k = 0; k < f.rank; ++k) {
    const int i = kept[k];
    f.L.col(k) = es.eigenvectors().col(i) * std::sqrt(lam(i));
    logdet += std::log(lam(i));
  }
  if (f.rank == n) f.logdet = logdet;
  return f;
}

double logdet_i_plus_ds(const std::vector<double>& t, const BlockPartition& partition,
                        const SymMatrix& sigma) {
  if (static_cast<int>(t.size()) != partition.blocks())
    throw std::invalid_argument("logdet_i_plus_ds: one t per block required");
  if (partition.total() != sigma.dim())
    throw std::invalid_argument("logdet_i_plus_ds: partition and matrix dimensions differ");
  const int p = sigma.dim();
  Eigen::VectorXd sqrt_d(p);
  for (int b = 0; b < partition.blocks(); ++b) {
    if (t[b] < 0.0) throw std::invalid_argument("logdet_i_plus_ds: t components must be >= 0");
    sqrt_d.segment(partition.offset(b), partition.size(b)).setConstant(std::sqrt(t[b]));
  }
  Eigen::MatrixXd m = sqrt_d.asDiagonal() * sigma.mat() * sqrt_d.asDiagonal();
  m.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  // Eigenvalues of I + sqrt(D) sigma sqrt(D) are >= 1, so LLT can only fail
  // on pathological roundoff; the eigendecomposition settles it.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().array().max(1.0).log().sum();
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXd kron_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("kron_sum: inputs must be square");
  return kron(a, Eigen::MatrixXd::Identity(b.rows(), b.cols())) +
         kron(Eigen::MatrixXd::Identity(a.rows(), a.cols()), b);
}

Eigen::MatrixXd kron_sum(const std::vector<Eigen::MatrixXd>& terms) {
  if (terms.empty()) throw std::invalid_argument("kron_sum: needs at least one term");
  Eigen::MatrixXd acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = kron_sum(acc, terms[i]);
  return acc;
}

SymMatrix matexp_sym(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat());
  const Eigen::MatrixXd v = es.eigenvectors();
  return SymMatrix(v * es.eigenvalues().array().exp().matrix().asDiagonal() * v.transpose());
}

std::pair<SymMatrix, BlockPartition> principal_submatrix(const SymMatrix& sigma,
                                                         const BlockPartition& partition,
                                                         const std::vector<int>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("principal_submatrix: block set must be nonempty");
  if (partition.total() != sigma.dim())
    throw std::invalid_argument("principal_submatrix: partition and matrix dimensions differ");
  std::vector<int> sizes;
  std::vector<int> rows;
  int prev = -1;
  for (int b : blocks) {
    if (b < 0 || b >= partition.blocks())
      throw std::out_of_range("principal_submatrix: block index out of range");
    if (b <= prev) throw std::invalid_argument("principal_submatrix: blocks must be strictly increasing");
    prev = b;
    sizes.push_back(partition.size(b));
    for (int r = 0; r < partition.size(b); ++r) rows.push_back(partition.offset(b) + r);
  }
  const int q = static_cast<int>(rows.size());
  Eigen::MatrixXd sub(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) sub(i, j) = sigma(rows[i], rows[j]);
  return {SymMatrix(sub), BlockPartition(sizes)};
}

double fischer_gap(const SymMatrix& sigma, const BlockPartition& partition, int d1) {
  const int d = partition.blocks();
  if (d1 < 1 || d1 > d - 1) throw std::invalid_argument("fischer_gap: split must satisfy 1 <= d1 <= d-1");
  std::vector<int> left(d1), right(d - d1);
  std::iota(left.begin(), left.end(), 0);
  std::iota(right.begin(), right.end(), d1);
  const SpsdFactor full = factor_spsd(sigma);
  const SpsdFactor f11 = factor_spsd(principal_submatrix(sigma, partition, left).first);
  const SpsdFactor f22 = factor_spsd(principal_submatrix(sigma, partition, right).first);
  if (!full.singular() && !f11.singular() && !f22.singular()) {
    return *f11.logdet + *f22.logdet - *full.logdet;
  }
  return f11.det() * f22.det() - full.det();
}

}  // namespace gpilab::linalg
