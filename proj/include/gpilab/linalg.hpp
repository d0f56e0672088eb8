#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gpilab::linalg {

class NotPositiveSemidefinite : public std::runtime_error {
 public:
  explicit NotPositiveSemidefinite(double min_eigenvalue);
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Square symmetric matrix; construction symmetrizes, so entries(i,j) ==
// entries(j,i) exactly afterwards.
class SymMatrix {
 public:
  SymMatrix() : m_(0, 0) {}
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix identity(int n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }
  static SymMatrix zero(int n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& mat() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

// Ordered partition of {0, ..., total-1} into contiguous blocks.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<int> sizes);

  const std::vector<int>& sizes() const { return sizes_; }
  int blocks() const { return static_cast<int>(sizes_.size()); }
  int total() const { return total_; }
  int size(int b) const { return sizes_.at(b); }
  int offset(int b) const { return offsets_.at(b); }
  // Index of the block that owns row r.
  int block_of(int r) const;

  bool operator==(const BlockPartition& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// Eigenvalue-clamped factorization of a symmetric positive semidefinite
// matrix: M = L L^T with L of size dim x rank. Eigenvalues below
// tol * max|eigenvalue| count as zero; logdet is empty when rank < dim.
struct SpsdFactor {
  int dim = 0;
  int rank = 0;
  Eigen::MatrixXd L;
  std::optional<double> logdet;
  Eigen::VectorXd eigenvalues;  // clamped, ascending

  bool singular() const { return !logdet.has_value(); }
  // Product of the clamped eigenvalues (0 when singular).
  double det() const;
};

// Throws NotPositiveSemidefinite when an eigenvalue falls below
// -tol * max|eigenvalue|.
SpsdFactor factor_spsd(const SymMatrix& m, double tol = 1e-10);

// log det(I + D sigma) with D = diag(t_0 I_{p_0}, ..., t_{d-1} I_{p_{d-1}}),
// evaluated on the congruent form I + sqrt(D) sigma sqrt(D). Always >= 0.
double logdet_i_plus_ds(const std::vector<double>& t, const BlockPartition& partition,
                        const SymMatrix& sigma);

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// A (+) B = A x I + I x B for square A, B.
Eigen::MatrixXd kron_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
// Left-to-right fold of the binary Kronecker sum; requires at least one term.
Eigen::MatrixXd kron_sum(const std::vector<Eigen::MatrixXd>& terms);

// exp(A) = V diag(e^lambda) V^T from the symmetric eigendecomposition.
SymMatrix matexp_sym(const SymMatrix& a);

// Rows and columns of the blocks listed in `blocks` (0-based, strictly
// increasing, nonempty), with the induced partition.
std::pair<SymMatrix, BlockPartition> principal_submatrix(const SymMatrix& sigma,
                                                         const BlockPartition& partition,
                                                         const std::vector<int>& blocks);

// Gap of the determinant bound across the split after d1 blocks:
// in log-determinant form for nonsingular sigma, determinant form otherwise.
// Nonnegative up to roundoff for every SPSD sigma.
double fischer_gap(const SymMatrix& sigma, const BlockPartition& partition, int d1);

}  // namespace gpilab::linalg
