#pragma once

// Reference implementations used only by tests. None of these call into the
// library's numerical code.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "veritas/random.hpp"
#include "veritas/rbm.hpp"
#include "veritas/reliability_net.hpp"

namespace oracle {

using veritas::Bit;
using veritas::StatementRbmView;

inline long double sigmoid(long double x) { return 1.0L / (1.0L + std::exp(-x)); }

// Unnormalised joint exp(-E(v, h)) = exp(a·v + h (b + w·v)).
inline long double joint_weight(const StatementRbmView& view, std::size_t v_bits, int h) {
  long double e = h * static_cast<long double>(view.b);
  for (std::size_t i = 0; i < view.size(); ++i) {
    if ((v_bits >> i) & 1U) e += view.a[i] + h * static_cast<long double>(view.w[i]);
  }
  return std::exp(e);
}

inline std::size_t claims_as_bits(const StatementRbmView& view) {
  std::size_t bits = 0;
  for (std::size_t i = 0; i < view.size(); ++i) bits |= static_cast<std::size_t>(view.claims[i]) << i;
  return bits;
}

/// log P(v) by summing the joint over all 2^(n+1) (v, h) states.
inline double brute_force_log_likelihood(const StatementRbmView& view) {
  long double z = 0.0L;
  for (std::size_t v = 0; v < (std::size_t{1} << view.size()); ++v) {
    z += joint_weight(view, v, 0) + joint_weight(view, v, 1);
  }
  const std::size_t obs = claims_as_bits(view);
  return static_cast<double>(std::log((joint_weight(view, obs, 0) + joint_weight(view, obs, 1)) / z));
}

/// Factorised partition function Π(1 + e^a_i) + e^b Π(1 + e^(a_i + w_i)).
inline long double closed_form_partition(const StatementRbmView& view) {
  long double off = 1.0L;
  long double on = std::exp(static_cast<long double>(view.b));
  for (std::size_t i = 0; i < view.size(); ++i) {
    off *= 1.0L + std::exp(static_cast<long double>(view.a[i]));
    on *= 1.0L + std::exp(static_cast<long double>(view.a[i]) + view.w[i]);
  }
  return off + on;
}

/// Central difference of f at x along every coordinate.
inline std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                              std::vector<double> x, double rel_step = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    const double keep = x[j];
    x[j] = keep + h;
    const double up = f(x);
    x[j] = keep - h;
    const double down = f(x);
    x[j] = keep;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

/// max_j |a_j - b_j| / max(1, max_j |b_j|).
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double num = 0.0;
  double den = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num = std::max(num, std::abs(a[j] - b[j]));
    den = std::max(den, std::abs(b[j]));
  }
  return num / den;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ab += a[j] * b[j];
    aa += a[j] * a[j];
    bb += b[j] * b[j];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

/// Flattens (a, w, b) of a view or gradient.
inline std::vector<double> pack(std::span<const double> a, std::span<const double> w, double b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), w.begin(), w.end());
  out.push_back(b);
  return out;
}

inline StatementRbmView unpack(std::span<const double> theta, std::vector<Bit> claims) {
  const std::size_t n = claims.size();
  StatementRbmView v;
  v.a.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(n));
  v.w.assign(theta.begin() + static_cast<std::ptrdiff_t>(n), theta.begin() + static_cast<std::ptrdiff_t>(2 * n));
  v.b = theta[2 * n];
  v.claims = std::move(claims);
  return v;
}

/// View with n claims and parameters uniform in [-range, range].
inline StatementRbmView random_view(veritas::Rng& rng, std::size_t n, double range = 2.0) {
  StatementRbmView v;
  for (std::size_t i = 0; i < n; ++i) {
    v.a.push_back(range * (2.0 * rng.uniform() - 1.0));
    v.w.push_back(range * (2.0 * rng.uniform() - 1.0));
    v.claims.push_back(rng.bernoulli(0.5) ? 1 : 0);
  }
  v.b = range * (2.0 * rng.uniform() - 1.0);
  return v;
}

/// Straightforward forward pass written against the documented flat layout:
/// per layer, row-major weights (rows = outputs) then the bias.
inline std::vector<double> reference_forward(const veritas::NetworkSpec& spec, std::span<const double> psi,
                                             std::span<const double> x) {
  std::vector<std::size_t> widths{spec.input_dim};
  for (auto h : spec.hidden_layers) widths.push_back(h);
  widths.push_back(3);
  std::vector<double> act(x.begin(), x.end());
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    std::vector<double> next(out);
    for (std::size_t r = 0; r < out; ++r) {
      double s = psi[off + in * out + r];
      for (std::size_t c = 0; c < in; ++c) s += psi[off + r * in + c] * act[c];
      const bool last = l + 2 == widths.size();
      if (!last) s = spec.activation == veritas::Activation::tanh ? std::tanh(s) : std::max(0.0, s);
      next[r] = s;
    }
    off += in * out + out;
    act = std::move(next);
  }
  return act;
}

}  // namespace oracle
