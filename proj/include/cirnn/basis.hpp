// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cirnn/tensor.hpp"

namespace cirnn {

enum class BasisKind { polynomial };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& name);

/// Family of context basis functions g_1..g_m.
///
/// For the polynomial family the functions are all monomials of total degree
/// 1..degree in n_z variables, with no constant term, so
/// m = C(n_z + degree, degree) - 1. Ordering is graded lexicographic: by
/// total degree, then lexicographically descending in the exponent tuple.
/// For n_z = 2, degree = 2 this is [z1, z2, z1^2, z1 z2, z2^2].
struct BasisSpec {
  BasisKind kind = BasisKind::polynomial;
  std::size_t degree = 0;
  std::size_t n_z = 0;
  std::size_t m = 0;
  /// exponents[k][j] is the power of z_j in g_k.
  std::vector<std::vector<unsigned>> exponents;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Throws ConfigError for degree 0 or n_z 0.
BasisSpec build_spec(BasisKind kind, std::size_t degree, std::size_t n_z);

/// G(z), length spec.m. Throws ShapeError unless z.size() == spec.n_z.
Vector eval(const BasisSpec& spec, std::span<const double> z);
void eval_into(const BasisSpec& spec, std::span<const double> z, std::span<double> out);

/// Human-readable monomial, e.g. "z1*z3" or "z2^2".
std::string monomial_name(const BasisSpec& spec, std::size_t k);

}  // namespace cirnn
