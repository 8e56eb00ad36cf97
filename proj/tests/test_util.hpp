#pragma once

#include "phaseest/posterior.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace testutil {

// One physical detection: result u with a nu-fold phase factor at reference
// phase phi_fb.
struct Detection {
  int u;
  uint32_t nu;
  double phi_fb;
};

// Fourier coefficient <e^{-i j phi}> of the unnormalized likelihood
// prod_m P(u_m | phi) / (2 pi), by uniform-grid quadrature. The trapezoid
// rule on a uniform grid is exact for trigonometric polynomials of degree
// below the grid size, so `points` just has to exceed the total harmonic
// reach plus |j|.
inline std::complex<double> quadrature_coeff(const std::vector<Detection>& seq, int j,
                                             int points = 2048) {
  std::complex<double> acc(0.0, 0.0);
  for (int i = 0; i < points; ++i) {
    double phi = phaseest::kTwoPi * i / points;
    double L = 1.0;
    for (const auto& d : seq)
      L *= phaseest::noon_outcome_prob(d.u, phi, d.nu, {d.phi_fb, true});
    acc += L * std::complex<double>(std::cos(j * phi), -std::sin(j * phi));
  }
  return acc / static_cast<double>(points);
}

// QPEA feedback phase for detection l (1-based) of an M = 1 run with maximum
// size 2^K and Phi_1 = 0: the binary expansion
// Phi_l = 2 pi * 0.0...0 u_{l-1} u_{l-2} ... u_1 with K + 1 - l leading zeros.
inline double qpea_binary_phase(const std::vector<uint8_t>& outcomes, uint32_t k_max,
                                uint32_t l) {
  double phi = 0.0;
  for (uint32_t j = 1; j < l; ++j)
    phi += outcomes[j - 1] * std::ldexp(phaseest::kTwoPi, -static_cast<int>(k_max + 1 - (j - 1)));
  return phaseest::wrap_angle(phi);
}

inline double angdiff(double a, double b) {
  double d = std::fmod(a - b, phaseest::kTwoPi);
  if (d > phaseest::kPi) d -= phaseest::kTwoPi;
  if (d < -phaseest::kPi) d += phaseest::kTwoPi;
  return d;
}

}  // namespace testutil
