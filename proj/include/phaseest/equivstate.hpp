#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

namespace phaseest {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Occupation counts f(0..N) of an equivalent two-mode state, kept as exact
// integers so that sums like (N_K+1)^M never overflow or round.
struct CountTable {
  std::vector<BigInt> counts;
  uint32_t window = 0;  // N_K of the uniform window used in construction
  uint32_t copies = 0;  // M

  int total_n() const { return static_cast<int>(counts.size()) - 1; }
  BigInt sum() const;
};

// f_1: the flat table of an equally weighted superposition over 0..N_K.
CountTable uniform_table(uint32_t n_k);

// Binomial table f(n) = C(m, n), the M-singles convolution result.
CountTable binomial_table(uint32_t m);

// Discrete convolution with the uniform window of width n_k + 1:
// g(n) = sum_{k=0}^{n_k} f(n - k).
CountTable convolve_uniform(const CountTable& f, uint32_t n_k);

// f_M for M copies of the uniform state (repeated convolution).
CountTable copies_table(uint32_t n_k, uint32_t m);

// Counts for the hybrid sequence: one uniform window on top of m singles,
// f(n) = sum_{k=0}^{n_k} C(m, n-k).
CountTable hybrid_table(uint32_t n_k, uint32_t m);

// Real nonnegative amplitudes psi_0..psi_N with sum psi_n^2 = 1.
struct TwoModeState {
  std::vector<double> amps;
  int total_n() const { return static_cast<int>(amps.size()) - 1; }
};

TwoModeState state_from_table(const CountTable& f);
TwoModeState copies_state(uint32_t n_k, uint32_t m);   // psi_n^2 = f_M(n)/(N_K+1)^M
TwoModeState hybrid_state(uint32_t n_k, uint32_t m);   // psi_n^2 = f(n)/(2^M (N_K+1))
TwoModeState uniform_state(uint32_t n_k);

// Canonical-measurement sharpness mu = sum_n psi_n psi_{n+1}.
double canonical_mu(const TwoModeState& s);
// V_C = 2 (1 - mu).
double collett_variance(const TwoModeState& s);
// Same quantity via sum_n (psi_n - psi_{n+1})^2 with psi_{-1} = psi_{N+1} = 0;
// kept as an independent route for cross-checks.
double collett_variance_differences(const TwoModeState& s);
// V_H = mu^{-2} - 1; +infinity when mu = 0.
double holevo_variance(const TwoModeState& s);
double holevo_from_mu(double mu);

struct Moments {
  double mean = 0.0;
  double second = 0.0;
  double variance = 0.0;
};
Moments number_moments(const TwoModeState& s);

struct ExactMoments {
  BigRational mean;
  BigRational second;
  BigRational variance;
};
ExactMoments exact_moments(const CountTable& f);

// Reference limits.
double heisenberg_limit_stddev(uint64_t n);           // tan(pi / (N + 2))
double repetition_bound(uint64_t n_k, uint64_t m);    // 3 / (M N_K (N_K + 2))
double hybrid_bound(uint64_t n_k, uint64_t m);        // 1 / (kappa (N_K+1) sqrt(M))
double hybrid_bound_kappa();                          // ~4.886

// Richardson limit of N^2 V_C - 2 ln N for two-copy states over a geometric
// ladder of N_K (ratio 2, ascending). Converges to the constant term of the
// large-N expansion of the two-copy canonical variance.
double extrapolate_two_copy_constant(const std::vector<uint32_t>& nk_ladder);

}  // namespace phaseest
