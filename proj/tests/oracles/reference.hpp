// SPDX-License-Identifier: Apache-2.0
// Deliberately plain re-implementations used as oracles by the unit tests.
// Nothing here calls into the library's numeric code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "cirnn/cells.hpp"

namespace ref {

using Grid = std::vector<std::vector<double>>;

inline Grid matmul(const Grid& a, const Grid& b) {
  Grid c(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j)
      for (std::size_t k = 0; k < b.size(); ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline std::vector<double> kron(const std::vector<double>& x, const std::vector<double>& g) {
  std::vector<double> out;
  for (double xi : x)
    for (double gj : g) out.push_back(xi * gj);
  return out;
}

// Exponent tuples of total degree 1..degree, ordered by degree and then
// descending lexicographically.
inline std::vector<std::vector<unsigned>> monomials(std::size_t n_z, unsigned degree) {
  std::vector<std::vector<unsigned>> all;
  std::vector<unsigned> e(n_z, 0);
  while (true) {
    unsigned total = 0;
    for (unsigned v : e) total += v;
    if (total >= 1 && total <= degree) all.push_back(e);
    std::size_t i = 0;
    while (i < n_z && e[i] == degree) e[i++] = 0;
    if (i == n_z) break;
    ++e[i];
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    unsigned da = 0, db = 0;
    for (unsigned v : a) da += v;
    for (unsigned v : b) db += v;
    if (da != db) return da < db;
    return a > b;
  });
  return all;
}

inline std::vector<double> basis(const std::vector<double>& z, unsigned degree) {
  std::vector<double> g;
  for (const auto& e : monomials(z.size(), degree)) {
    double v = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j)
      for (unsigned p = 0; p < e[j]; ++p) v *= z[j];
    g.push_back(v);
  }
  return g;
}

// Forward-mode dual number: value and derivative along one parameter.
struct Dual {
  double v = 0.0;
  double d = 0.0;
  Dual() = default;
  Dual(double value, double deriv = 0.0) : v(value), d(deriv) {}
};
inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual sigm(Dual a) {
  const double s = 1.0 / (1.0 + std::exp(-a.v));
  return {s, s * (1.0 - s) * a.d};
}
inline Dual tanh_(Dual a) {
  const double t = std::tanh(a.v);
  return {t, (1.0 - t * t) * a.d};
}
inline double sigm(double a) {
  if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}
inline double tanh_(double a) { return std::tanh(a); }

// Parameters as nested rows. For a CiRNN the input matrices are A (n_h x
// n_x*m) and m > 0; for a GRU they are W and m == 0.
template <typename S>
struct Net {
  std::vector<std::vector<S>> in_s, in_h, in_r, Us, Uh, Ur, V;
  std::vector<S> b;
  std::size_t m = 0;
};

template <typename S>
std::vector<std::vector<S>> rows_of(const cirnn::Matrix& a) {
  std::vector<std::vector<S>> out(a.rows(), std::vector<S>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i][j] = S(a(i, j));
  return out;
}

template <typename S, typename P>
Net<S> net_of(const P& p) {
  Net<S> n;
  auto groups = cirnn::param_groups(p);
  auto mat = [&](std::size_t gi) {
    std::vector<std::vector<S>> out(groups[gi].rows, std::vector<S>(groups[gi].cols));
    for (std::size_t i = 0; i < groups[gi].rows; ++i)
      for (std::size_t j = 0; j < groups[gi].cols; ++j) out[i][j] = S(groups[gi].values[i * groups[gi].cols + j]);
    return out;
  };
  n.in_s = mat(0);
  n.in_h = mat(1);
  n.in_r = mat(2);
  n.Us = mat(3);
  n.Uh = mat(4);
  n.Ur = mat(5);
  n.V = mat(6);
  for (double v : groups[7].values) n.b.push_back(S(v));
  if constexpr (std::is_same_v<P, cirnn::CiRnnParams>) n.m = p.basis.m;
  return n;
}

// Sets the derivative seed on one scalar of group gi (param_groups order).
inline void seed(Net<Dual>& n, std::size_t gi, std::size_t idx) {
  std::vector<std::vector<Dual>>* mats[] = {&n.in_s, &n.in_h, &n.in_r, &n.Us, &n.Uh, &n.Ur, &n.V};
  if (gi < 7) {
    auto& m = *mats[gi];
    const std::size_t cols = m[0].size();
    m[idx / cols][idx % cols].d = 1.0;
  } else {
    n.b[idx].d = 1.0;
  }
}

// Input weights at one step. For a CiRNN this materializes w_ki = A_ki . G(z)
// entry by entry; for a GRU it is W itself.
template <typename S>
std::vector<std::vector<S>> input_weights(const std::vector<std::vector<S>>& a, std::size_t m,
                                          const std::vector<double>& g) {
  if (m == 0) return a;
  const std::size_t n_x = a[0].size() / m;
  std::vector<std::vector<S>> w(a.size(), std::vector<S>(n_x, S(0.0)));
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < n_x; ++i)
      for (std::size_t j = 0; j < m; ++j) w[k][i] = w[k][i] + a[k][i * m + j] * S(g[j]);
  return w;
}

template <typename S>
struct Run {
  std::vector<std::vector<S>> h;      // per step
  std::vector<std::vector<S>> y_hat;  // per step
};

// GRU recurrence written out with scalar loops. zs may be empty for a GRU;
// degree is the polynomial basis degree used for a CiRNN.
template <typename S>
Run<S> forward(const Net<S>& n, const Grid& xs, const Grid& zs, unsigned degree) {
  const std::size_t n_h = n.Us.size();
  std::vector<S> h(n_h, S(0.0));
  Run<S> run;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const std::vector<double> g = n.m ? basis(zs[t], degree) : std::vector<double>{};
    const auto ws = input_weights(n.in_s, n.m, g);
    const auto wh = input_weights(n.in_h, n.m, g);
    const auto wr = input_weights(n.in_r, n.m, g);
    std::vector<S> s(n_h), r(n_h), next(n_h);
    for (std::size_t k = 0; k < n_h; ++k) {
      // Input and recurrent sums are formed separately, then added.
      S xs_s(0.0), xs_r(0.0), hs_s(0.0), hs_r(0.0);
      for (std::size_t i = 0; i < xs[t].size(); ++i) {
        xs_s = xs_s + ws[k][i] * S(xs[t][i]);
        xs_r = xs_r + wr[k][i] * S(xs[t][i]);
      }
      for (std::size_t l = 0; l < n_h; ++l) {
        hs_s = hs_s + n.Us[k][l] * h[l];
        hs_r = hs_r + n.Ur[k][l] * h[l];
      }
      s[k] = sigm(xs_s + hs_s);
      r[k] = sigm(xs_r + hs_r);
    }
    for (std::size_t k = 0; k < n_h; ++k) {
      S xs_h(0.0), hs_h(0.0);
      for (std::size_t i = 0; i < xs[t].size(); ++i) xs_h = xs_h + wh[k][i] * S(xs[t][i]);
      for (std::size_t l = 0; l < n_h; ++l) hs_h = hs_h + n.Uh[k][l] * (r[l] * h[l]);
      const S cand = tanh_(xs_h + hs_h);
      next[k] = s[k] * h[k] + (S(1.0) - s[k]) * cand;
    }
    h = next;
    std::vector<S> y(n.V.size());
    for (std::size_t o = 0; o < n.V.size(); ++o) {
      S acc(0.0);
      for (std::size_t l = 0; l < n_h; ++l) acc = acc + n.V[o][l] * h[l];
      y[o] = acc + n.b[o];
    }
    run.h.push_back(h);
    run.y_hat.push_back(y);
  }
  return run;
}

inline Grid grid_of(const cirnn::Matrix& m) { return rows_of<double>(m); }

// Gradient of the final-step loss (all_steps = false) or of the per-step sum
// by forward sensitivity: one dual-number pass per parameter.
template <typename P>
std::vector<std::vector<double>> sensitivity_gradient(const P& p, const cirnn::Matrix& xs, const cirnn::Matrix& zs,
                                                      const std::vector<std::vector<double>>& ys, bool all_steps,
                                                      unsigned degree = 2) {
  const Net<Dual> base = net_of<Dual>(p);
  const auto groups = cirnn::param_groups(p);
  const Grid x = grid_of(xs);
  const Grid z = zs.rows() ? grid_of(zs) : Grid{};
  std::vector<std::vector<double>> grad;
  for (std::size_t gi = 0; gi < cirnn::kParamGroups; ++gi) {
    std::vector<double> g(groups[gi].values.size());
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      Net<Dual> n = base;
      seed(n, gi, idx);
      const Run<Dual> run = forward(n, x, z, degree);
      double d = 0.0;
      for (std::size_t t = all_steps ? 0 : run.y_hat.size() - 1; t < run.y_hat.size(); ++t) {
        const auto& target = all_steps ? ys[t] : ys[0];
        for (std::size_t o = 0; o < target.size(); ++o) d += (run.y_hat[t][o].v - target[o]) * run.y_hat[t][o].d;
      }
      g[idx] = d;
    }
    grad.push_back(std::move(g));
  }
  return grad;
}

}  // namespace ref
