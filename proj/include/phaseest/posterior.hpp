#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace phaseest {

inline constexpr double kTwoPi = 6.283185307179586476925286766559005768;
inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Reduce an angle to [0, 2*pi).
double wrap_angle(double phi);

// Controllable reference-arm phase. `informative` is false when the
// posterior carried no preference and the value is just a default; scheme
// runners substitute their own fallback phase in that case.
struct FeedbackPhase {
  double value = 0.0;
  bool informative = true;
};

// Unnormalized likelihood of the phase given a detection record, stored as
// Fourier coefficients:
//
//   L(phi) = sum_j c_j exp(i j 2^level phi),   c_{-j} = conj(c_j)
//
// Only j >= 0 is stored. c_0 stays real and equals the probability of the
// branch under the flat prior. Coefficients beyond max_order are dropped by
// updates and rescales; runs that need lossless coefficients simply
// construct with a larger max_order.
class PhaseLikelihood {
 public:
  // Flat prior: c_0 = 1, everything else zero. max_order >= 1.
  static PhaseLikelihood flat(int max_order, int level);

  int level() const { return level_; }
  int max_order() const { return max_order_; }
  // Highest harmonic that may be nonzero in the current representation.
  int top_harmonic() const { return static_cast<int>(c_.size()) - 1; }

  // c_j for any signed j; conjugated for j < 0, zero beyond the stored top.
  std::complex<double> coeff(int j) const;

  double branch_weight() const { return c_[0].real(); }
  double mu_weight() const { return std::abs(coeff(1)); }
  double sharpness() const;       // |c_1| / c_0, requires c_0 > 0
  double phase_estimate() const;  // -arg(c_1) mod 2pi, level 0, |c_1| > 0

  // L(phi) via the two-sided sum; imaginary part is rounding noise.
  std::complex<double> evaluate(double phi) const;

  // Divide everything by c_0 (used by long scheme runs to avoid underflow;
  // all downstream quantities are scale invariant).
  PhaseLikelihood normalized() const;

  friend PhaseLikelihood bayes_update(const PhaseLikelihood&, int, FeedbackPhase,
                                      uint32_t);
  friend PhaseLikelihood rescale_level(const PhaseLikelihood&);
  friend PhaseLikelihood truncated(const PhaseLikelihood&, int);

 private:
  PhaseLikelihood(int level, int max_order, std::vector<std::complex<double>> c)
      : level_(level), max_order_(max_order), c_(std::move(c)) {}

  int level_;
  int max_order_;
  std::vector<std::complex<double>> c_;  // c_[j] for j = 0..top_harmonic()
};

PhaseLikelihood flat_likelihood(int max_order, int level);

// P(u | phi) = (1/2) [1 + (-1)^u cos(nu (phi - Phi))] for a nu-photon NOON
// detection (or nu passes of a single photon) with reference phase Phi.
double noon_outcome_prob(int u, double phi, uint32_t nu, FeedbackPhase Phi);

// Multiply the likelihood by the outcome factor for result u. The update in
// coefficient space is
//
//   c'_j = (1/2) c_j + ((-1)^u / 4) [c_{j-s} e^{-i psi} + c_{j+s} e^{i psi}]
//
// with harmonic shift s (1 at the native level, nu for level-0 updates of
// arbitrary size) and physical phase psi = nu * Phi. At level k > 0 only
// nu = 2^k is meaningful. Throws if the shift exceeds max_order.
PhaseLikelihood bayes_update(const PhaseLikelihood& L, int u, FeedbackPhase Phi,
                             uint32_t nu);

// Child coefficient c'_j of bayes_update without building the whole child.
std::complex<double> bayes_update_coeff(const PhaseLikelihood& L, int j, int u,
                                        double phi_feedback, uint32_t nu);

// Move from level k to level k-1: c'_{2j} = c_j, odd harmonics zero.
// Harmonics pushed past max_order are dropped.
PhaseLikelihood rescale_level(const PhaseLikelihood& L);

// Copy with a different truncation order. Scheme runners use this to apply
// per-level coefficient windows: harmonics a schedule can no longer couple
// back to harmonic 1 are dropped without changing the final estimate.
PhaseLikelihood truncated(const PhaseLikelihood& L, int max_order);

double sharpness(const PhaseLikelihood& L);
double branch_weight(const PhaseLikelihood& L);
double mu_weight(const PhaseLikelihood& L);
double phase_estimate(const PhaseLikelihood& L);

// Feedback for the first detection at the current level, right after a
// rescale: Phi = -arg(c_2) / 2^(level+1), where c_2 is the harmonic
// inherited from the coarser level. arg is taken in (-2pi, 0] so the result
// is nonnegative. Flagged (value 0) when c_2 = 0.
FeedbackPhase optimal_feedback(const PhaseLikelihood& L);

// Feedback maximizing the expected sharpness after the next detection:
//
//   Phi* = argmax_Phi sum_u |c'_target(u, Phi)|
//
// for an update with harmonic shift `shift`. Uses the closed form when the
// target coefficient is zero (two-term objective), otherwise a dense scan
// over the half period plus golden-section refinement; the returned phase is
// within 1e-10 rad of the global maximizer. Flagged when the objective does
// not depend on Phi.
FeedbackPhase maximize_expected_sharpness(const PhaseLikelihood& L,
                                          uint32_t shift, int target_harmonic);

// Feedback that makes the two outcome probabilities equal:
// Re[c_nu e^{i nu Phi}] = 0, i.e. Phi = (-arg c_nu + pi/2) / nu. Flagged
// when c_nu = 0 (every phase qualifies).
FeedbackPhase equal_probability_feedback(const PhaseLikelihood& L, uint32_t nu);

}  // namespace phaseest
