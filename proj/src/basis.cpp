// SPDX-License-Identifier: Apache-2.0
#include "cirnn/basis.hpp"

#include "cirnn/error.hpp"

namespace cirnn {
namespace {

// All exponent tuples with the given total, lexicographically descending.
void tuples_of_total(std::size_t vars, unsigned total, std::vector<unsigned>& prefix,
                     std::vector<std::vector<unsigned>>& out) {
  if (prefix.size() + 1 == vars) {
    prefix.push_back(total);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (unsigned e = total + 1; e-- > 0;) {
    prefix.push_back(e);
    tuples_of_total(vars, total - e, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::polynomial: return "polynomial";
  }
  return "unknown";
}

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "polynomial" || name == "poly") return BasisKind::polynomial;
  throw ConfigError("unknown basis kind '" + name + "' (allowed: polynomial)");
}

BasisSpec build_spec(BasisKind kind, std::size_t degree, std::size_t n_z) {
  if (degree == 0) {
    throw ConfigError("basis degree must be >= 1; degree 0 gives context-independent weights "
                      "(use the plain GRU instead)");
  }
  if (n_z == 0) throw ConfigError("basis needs at least one context variable");

  BasisSpec spec;
  spec.kind = kind;
  spec.degree = degree;
  spec.n_z = n_z;
  std::vector<unsigned> prefix;
  for (unsigned total = 1; total <= degree; ++total) {
    tuples_of_total(n_z, total, prefix, spec.exponents);
  }
  spec.m = spec.exponents.size();
  return spec;
}

void eval_into(const BasisSpec& spec, std::span<const double> z, std::span<double> out) {
  if (z.size() != spec.n_z) {
    throw ShapeError("basis eval: context has length " + std::to_string(z.size()) + ", spec expects " +
                     std::to_string(spec.n_z));
  }
  if (out.size() != spec.m) throw ShapeError("basis eval: output buffer has wrong length");
  for (std::size_t k = 0; k < spec.m; ++k) {
    double value = 1.0;
    const auto& powers = spec.exponents[k];
    for (std::size_t j = 0; j < spec.n_z; ++j) {
      for (unsigned p = 0; p < powers[j]; ++p) value *= z[j];
    }
    out[k] = value;
  }
}

Vector eval(const BasisSpec& spec, std::span<const double> z) {
  Vector out(spec.m);
  eval_into(spec, z, out.span());
  return out;
}

std::string monomial_name(const BasisSpec& spec, std::size_t k) {
  std::string name;
  const auto& powers = spec.exponents.at(k);
  for (std::size_t j = 0; j < powers.size(); ++j) {
    if (powers[j] == 0) continue;
    if (!name.empty()) name += "*";
    name += "z" + std::to_string(j + 1);
    if (powers[j] > 1) name += "^" + std::to_string(powers[j]);
  }
  return name;
}

}  // namespace cirnn
