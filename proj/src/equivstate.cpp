#include "phaseest/equivstate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace phaseest {

BigInt CountTable::sum() const {
  BigInt s = 0;
  for (const auto& v : counts) s += v;
  return s;
}

CountTable uniform_table(uint32_t n_k) {
  if (n_k < 1) throw std::invalid_argument("uniform_table: N_K must be >= 1");
  CountTable t;
  t.counts.assign(n_k + 1, BigInt(1));
  t.window = n_k;
  t.copies = 1;
  return t;
}

CountTable binomial_table(uint32_t m) {
  CountTable t;
  t.counts.resize(m + 1);
  t.counts[0] = 1;
  for (uint32_t n = 1; n <= m; ++n)
    t.counts[n] = t.counts[n - 1] * (m - n + 1) / n;
  t.window = 0;
  t.copies = m;
  return t;
}

CountTable convolve_uniform(const CountTable& f, uint32_t n_k) {
  if (f.counts.empty()) throw std::invalid_argument("convolve_uniform: empty table");
  // g(n) = S(n) - S(n - n_k - 1) with S the prefix sum of f.
  size_t out_len = f.counts.size() + n_k;
  std::vector<BigInt> prefix(f.counts.size());
  BigInt acc = 0;
  for (size_t i = 0; i < f.counts.size(); ++i) {
    acc += f.counts[i];
    prefix[i] = acc;
  }
  CountTable g;
  g.counts.resize(out_len);
  for (size_t n = 0; n < out_len; ++n) {
    const BigInt& hi = n < prefix.size() ? prefix[n] : prefix.back();
    if (n >= n_k + 1) {
      size_t lo_idx = n - n_k - 1;
      g.counts[n] = hi - (lo_idx < prefix.size() ? prefix[lo_idx] : prefix.back());
    } else {
      g.counts[n] = hi;
    }
  }
  g.window = n_k;
  g.copies = f.copies + 1;
  return g;
}

CountTable copies_table(uint32_t n_k, uint32_t m) {
  if (m < 1) throw std::invalid_argument("copies_table: M must be >= 1");
  CountTable t = uniform_table(n_k);
  for (uint32_t i = 1; i < m; ++i) t = convolve_uniform(t, n_k);
  t.copies = m;
  return t;
}

CountTable hybrid_table(uint32_t n_k, uint32_t m) {
  if (n_k < 1) throw std::invalid_argument("hybrid_table: N_K must be >= 1");
  CountTable t = convolve_uniform(binomial_table(m), n_k);
  t.window = n_k;
  t.copies = m;
  return t;
}

TwoModeState state_from_table(const CountTable& f) {
  BigInt total = f.sum();
  if (total <= 0) throw std::invalid_argument("state_from_table: empty distribution");
  double denom = total.convert_to<double>();
  TwoModeState s;
  s.amps.resize(f.counts.size());
  for (size_t n = 0; n < f.counts.size(); ++n)
    s.amps[n] = std::sqrt(f.counts[n].convert_to<double>() / denom);
  return s;
}

TwoModeState copies_state(uint32_t n_k, uint32_t m) {
  return state_from_table(copies_table(n_k, m));
}

TwoModeState hybrid_state(uint32_t n_k, uint32_t m) {
  return state_from_table(hybrid_table(n_k, m));
}

TwoModeState uniform_state(uint32_t n_k) {
  return state_from_table(uniform_table(n_k));
}

double canonical_mu(const TwoModeState& s) {
  double mu = 0.0;
  for (size_t n = 0; n + 1 < s.amps.size(); ++n) mu += s.amps[n] * s.amps[n + 1];
  return mu;
}

double collett_variance(const TwoModeState& s) { return 2.0 * (1.0 - canonical_mu(s)); }

double collett_variance_differences(const TwoModeState& s) {
  double v = 0.0;
  double prev = 0.0;  // psi_{-1}
  for (double a : s.amps) {
    double d = a - prev;
    v += d * d;
    prev = a;
  }
  v += prev * prev;  // psi_{N+1} = 0
  return v;
}

double holevo_from_mu(double mu) {
  if (mu == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (mu * mu) - 1.0;
}

double holevo_variance(const TwoModeState& s) { return holevo_from_mu(canonical_mu(s)); }

Moments number_moments(const TwoModeState& s) {
  Moments m;
  for (size_t n = 0; n < s.amps.size(); ++n) {
    double p = s.amps[n] * s.amps[n];
    m.mean += n * p;
    m.second += static_cast<double>(n) * n * p;
  }
  m.variance = m.second - m.mean * m.mean;
  return m;
}

ExactMoments exact_moments(const CountTable& f) {
  BigInt s0 = 0, s1 = 0, s2 = 0;
  for (size_t n = 0; n < f.counts.size(); ++n) {
    s0 += f.counts[n];
    s1 += BigInt(n) * f.counts[n];
    s2 += BigInt(n) * BigInt(n) * f.counts[n];
  }
  ExactMoments m;
  m.mean = BigRational(s1, s0);
  m.second = BigRational(s2, s0);
  m.variance = m.second - m.mean * m.mean;
  return m;
}

double heisenberg_limit_stddev(uint64_t n) {
  if (n < 1) throw std::invalid_argument("heisenberg_limit_stddev: N must be >= 1");
  return std::tan(3.141592653589793238462643383279502884 / (static_cast<double>(n) + 2.0));
}

double repetition_bound(uint64_t n_k, uint64_t m) {
  if (n_k < 1 || m < 1) throw std::invalid_argument("repetition_bound: arguments must be >= 1");
  return 3.0 / (static_cast<double>(m) * static_cast<double>(n_k) *
                (static_cast<double>(n_k) + 2.0));
}

double hybrid_bound_kappa() {
  // kappa = 2 / (sqrt(3) (sqrt(1 - 2 e^-2) - e^-1)^2), the constant of the
  // shelf-state lower bound; evaluates to about 4.886.
  double d = std::sqrt(1.0 - 2.0 * std::exp(-2.0)) - std::exp(-1.0);
  return 2.0 / (std::sqrt(3.0) * d * d);
}

double hybrid_bound(uint64_t n_k, uint64_t m) {
  if (n_k < 1 || m < 1) throw std::invalid_argument("hybrid_bound: arguments must be >= 1");
  return 1.0 / (hybrid_bound_kappa() * (static_cast<double>(n_k) + 1.0) *
                std::sqrt(static_cast<double>(m)));
}

double extrapolate_two_copy_constant(const std::vector<uint32_t>& nk_ladder) {
  if (nk_ladder.size() < 3)
    throw std::invalid_argument("extrapolate_two_copy_constant: need at least 3 ladder points");
  for (size_t i = 0; i + 1 < nk_ladder.size(); ++i)
    if (nk_ladder[i + 1] != 2 * nk_ladder[i])
      throw std::invalid_argument("extrapolate_two_copy_constant: ladder must double");

  std::vector<double> g(nk_ladder.size());
  for (size_t i = 0; i < nk_ladder.size(); ++i) {
    TwoModeState s = copies_state(nk_ladder[i], 2);
    double n = 2.0 * nk_ladder[i];
    g[i] = n * n * collett_variance(s) - 2.0 * std::log(n);
  }
  // Two Richardson stages in 1/N; the residual log(N)/N term shrinks by a
  // factor ln 2 / ln N per stage, comfortably inside the needed accuracy.
  for (int stage = 1; stage <= 2; ++stage) {
    double f = std::ldexp(1.0, stage);  // 2^stage
    for (size_t i = 0; i + 1 < g.size(); ++i) g[i] = (f * g[i + 1] - g[i]) / (f - 1.0);
    g.pop_back();
  }
  return g.back();
}

}  // namespace phaseest
