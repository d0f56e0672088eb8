#pragma once

#include <cstdint>
#include <string>

#include "gpilab/linalg.hpp"

namespace gpilab::cli {

enum class SigmaKind { spd, spd_nonneg, signature_nonneg, singular };

const char* to_string(SigmaKind k);
SigmaKind sigma_kind_from_string(const std::string& s);

// Seed-deterministic covariance families:
//   spd              G G^T + 0.1 I, standard normal G
//   spd-nonneg       |G| |G|^T + 0.1 I (entrywise nonnegative)
//   signature-nonneg S (|G| |G|^T + 0.1 I) S for a random +-1 diagonal S
//   singular         rank-ceil(p/2) Gram matrix G G^T
// `signature_out`, when given, receives the diagonal of S (identity for the
// other kinds).
linalg::SymMatrix generate_sigma(SigmaKind kind, int p, std::uint64_t seed,
                                 Eigen::VectorXd* signature_out = nullptr);

// Unit-diagonal matrix with constant off-diagonal correlation rho.
linalg::SymMatrix equicorrelated(int p, double rho);

}  // namespace gpilab::cli
