#include "phaseest/posterior.hpp"

#include "doctest.h"
#include "test_util.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>

using namespace phaseest;
using testutil::Detection;
using testutil::quadrature_coeff;

namespace {

PhaseLikelihood apply(const std::vector<Detection>& seq, int max_order) {
  PhaseLikelihood L = flat_likelihood(max_order, 0);
  for (const auto& d : seq) L = bayes_update(L, d.u, {d.phi_fb, true}, d.nu);
  return L;
}

}  // namespace

TEST_CASE("flat likelihood") {
  PhaseLikelihood L = flat_likelihood(4, 3);
  CHECK(L.level() == 3);
  CHECK(L.branch_weight() == 1.0);
  for (int j = 1; j <= 4; ++j) CHECK(std::abs(L.coeff(j)) == 0.0);
  CHECK(L.sharpness() == 0.0);
  CHECK_THROWS_AS(L.phase_estimate(), std::exception);
  CHECK_THROWS_AS(flat_likelihood(0, 0), std::invalid_argument);
}

TEST_CASE("noon outcome probabilities") {
  CHECK(noon_outcome_prob(0, 1.3, 5, {1.3, true}) == doctest::Approx(1.0));
  CHECK(noon_outcome_prob(1, 1.3, 5, {1.3, true}) == doctest::Approx(0.0));
  CHECK(noon_outcome_prob(0, kPi / 4, 2, {0.0, true}) == doctest::Approx(0.5));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int i = 0; i < 50; ++i) {
    double phi = ang(gen), fb = ang(gen);
    uint32_t nu = 1 + gen() % 16;
    double p0 = noon_outcome_prob(0, phi, nu, {fb, true});
    double p1 = noon_outcome_prob(1, phi, nu, {fb, true});
    CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p0 >= 0.0);
    CHECK(p1 >= 0.0);
  }
}

TEST_CASE("bayes update against quadrature from flat prior") {
  PhaseLikelihood L = bayes_update(flat_likelihood(4, 0), 0, {0.0, true}, 1);
  CHECK(L.branch_weight() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(L.coeff(1).real() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(std::abs(L.coeff(1).imag()) < 1e-15);
  // The same values from direct quadrature of (1/2)(1 + cos phi) / (2 pi).
  std::vector<Detection> seq{{0, 1, 0.0}};
  CHECK(std::abs(quadrature_coeff(seq, 0) - std::complex<double>(0.5, 0.0)) < 1e-12);
  CHECK(std::abs(quadrature_coeff(seq, 1) - std::complex<double>(0.25, 0.0)) < 1e-12);
}

TEST_CASE("branch weights of the two children sum to the parent") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  PhaseLikelihood L = flat_likelihood(24, 0);
  for (int step = 0; step < 40; ++step) {
    uint32_t nu = 1 + gen() % 5;
    FeedbackPhase fb{ang(gen), true};
    PhaseLikelihood c0 = bayes_update(L, 0, fb, nu);
    PhaseLikelihood c1 = bayes_update(L, 1, fb, nu);
    CHECK(c0.branch_weight() + c1.branch_weight() ==
          doctest::Approx(L.branch_weight()).epsilon(1e-12));
    L = (gen() & 1) ? c0 : c1;
  }
}

TEST_CASE("update rejects shifts beyond the stored window") {
  PhaseLikelihood L = flat_likelihood(4, 0);
  CHECK_THROWS_AS(bayes_update(L, 0, {0.0, true}, 5), std::invalid_argument);
  PhaseLikelihood L2 = flat_likelihood(4, 2);
  CHECK_THROWS_AS(bayes_update(L2, 0, {0.0, true}, 2), std::invalid_argument);  // nu != 2^level
}

TEST_CASE("M=1 run reproduces the closed-form branch weights") {
  const uint32_t K = 5;
  std::mt19937_64 gen(3);
  PhaseLikelihood L = flat_likelihood(2, static_cast<int>(K));
  for (int k = static_cast<int>(K); k >= 0; --k) {
    if (k < static_cast<int>(K)) L = rescale_level(L);
    FeedbackPhase fb = optimal_feedback(L);
    int u = static_cast<int>(gen() & 1);
    L = bayes_update(L, u, fb, 1u << k);
    // p_0^{(k)} = 2^{k - K - 1} on every branch.
    CHECK(L.branch_weight() == doctest::Approx(std::ldexp(1.0, k - static_cast<int>(K) - 1))
                                   .epsilon(1e-13));
  }
  CHECK(L.sharpness() == doctest::Approx(1.0 - std::ldexp(1.0, -(static_cast<int>(K) + 1)))
                             .epsilon(1e-12));
}

TEST_CASE("rescale moves harmonics out by two") {
  PhaseLikelihood L = flat_likelihood(8, 3);
  L = bayes_update(L, 0, {0.3, true}, 8);  // creates c_1 at level 3
  std::complex<double> z = L.coeff(1);
  PhaseLikelihood R = rescale_level(L);
  CHECK(R.level() == 2);
  CHECK(R.coeff(2) == z);
  CHECK(std::abs(R.coeff(1)) == 0.0);
  CHECK(std::abs(R.coeff(3)) == 0.0);

  PhaseLikelihood F = rescale_level(flat_likelihood(4, 1));
  CHECK(F.branch_weight() == 1.0);
  CHECK(F.top_harmonic() == 0);

  PhaseLikelihood RR = rescale_level(R);
  CHECK(RR.coeff(4) == z);
  PhaseLikelihood ground = rescale_level(RR);  // level 0
  CHECK(ground.coeff(8) == z);
  CHECK_THROWS_AS(rescale_level(ground), std::logic_error);
}

TEST_CASE("mu weight sums over a hand-rolled M=1 enumeration") {
  // Sum over all branches of |c_1| after the K..0 sequence equals
  // 1 - 2^{-(K+1)}; the M=2 engine-level analogue lives in the scheme tests.
  const int K = 2;
  double mu = 0.0, weight = 0.0;
  std::function<void(const PhaseLikelihood&, int)> walk = [&](const PhaseLikelihood& L, int k) {
    if (k < 0) {
      mu += L.mu_weight();
      weight += L.branch_weight();
      return;
    }
    PhaseLikelihood cur = k == K ? L : rescale_level(L);
    FeedbackPhase fb = optimal_feedback(cur);
    for (int u = 0; u < 2; ++u) walk(bayes_update(cur, u, fb, 1u << k), k - 1);
  };
  walk(flat_likelihood(2, K), K);
  CHECK(mu == doctest::Approx(1.0 - std::ldexp(1.0, -(K + 1))).epsilon(1e-13));
  CHECK(weight == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("phase estimate") {
  for (double theta : {0.0, 0.3, 2.5, 5.9}) {
    // L = (1/2)(1 + cos(phi - theta)) peaks at theta.
    PhaseLikelihood L = bayes_update(flat_likelihood(2, 0), 0, {theta, true}, 1);
    CHECK(std::abs(testutil::angdiff(L.phase_estimate(), theta)) < 1e-13);
    std::vector<Detection> seq{{0, 1, theta}};
    std::complex<double> c1 = quadrature_coeff(seq, 1);
    CHECK(std::abs(testutil::angdiff(wrap_angle(-std::arg(c1)), theta)) < 1e-10);
    // Mirrored feedback mirrors the estimate.
    PhaseLikelihood M = bayes_update(flat_likelihood(2, 0), 0, {kTwoPi - theta, true}, 1);
    CHECK(std::abs(testutil::angdiff(M.phase_estimate(), kTwoPi - theta)) < 1e-13);
  }
}

TEST_CASE("optimal feedback conventions") {
  // c_1 at the coarser level real and positive -> Phi = 0.
  PhaseLikelihood L = bayes_update(flat_likelihood(2, 1), 0, {0.0, true}, 2);
  CHECK(L.coeff(1).real() > 0.0);
  PhaseLikelihood R = rescale_level(L);
  FeedbackPhase fb = optimal_feedback(R);
  CHECK(fb.informative);
  CHECK(fb.value == doctest::Approx(0.0));

  // Flagged on a flat likelihood (no inherited harmonic).
  CHECK_FALSE(optimal_feedback(flat_likelihood(2, 4)).informative);

  // Nonnegative and below the level period for random posteriors.
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int i = 0; i < 30; ++i) {
    PhaseLikelihood X = flat_likelihood(4, 2);
    X = bayes_update(X, static_cast<int>(gen() & 1), {ang(gen), true}, 4);
    PhaseLikelihood Y = rescale_level(X);
    FeedbackPhase f = optimal_feedback(Y);
    CHECK(f.value >= 0.0);
    CHECK(f.value <= kTwoPi / std::ldexp(1.0, Y.level() + 1) + 1e-12);
  }
}

TEST_CASE("sharpness maximization agrees with the first-detection closed form") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int i = 0; i < 25; ++i) {
    PhaseLikelihood X = flat_likelihood(4, 3);
    X = bayes_update(X, static_cast<int>(gen() & 1), {ang(gen), true}, 8);
    PhaseLikelihood Y = rescale_level(X);  // c_1 = 0, c_2 inherited
    FeedbackPhase closed = optimal_feedback(Y);
    FeedbackPhase scanned = maximize_expected_sharpness(Y, 1, 1);
    CHECK(std::abs(testutil::angdiff(closed.value, scanned.value)) < 1e-10);
  }
}

TEST_CASE("two-copy second detection: quarter-period step, result-independent gain") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int trial = 0; trial < 20; ++trial) {
    // Random two-copy posterior entering a level: c_1 = 0, c_2 and c_4 set.
    PhaseLikelihood X = flat_likelihood(4, 3);
    X = bayes_update(X, static_cast<int>(gen() & 1), {ang(gen), true}, 8);
    X = bayes_update(X, static_cast<int>(gen() & 1), {ang(gen), true}, 8);
    PhaseLikelihood L = rescale_level(X);
    const int k = L.level();
    const uint32_t nu = 1u << k;
    double c0 = L.branch_weight();
    double c2 = std::abs(L.coeff(2));

    FeedbackPhase f1 = optimal_feedback(L);
    int u1 = static_cast<int>(gen() & 1);
    PhaseLikelihood A = bayes_update(L, u1, f1, nu);
    FeedbackPhase f2 = maximize_expected_sharpness(A, 1, 1);

    double step = std::ldexp(1.0, k) * (f2.value - f1.value);
    double frac = std::fmod(std::fmod(step, kPi) + kPi, kPi);
    CHECK(frac == doctest::Approx(kPi / 2).epsilon(1e-8));

    double expect = std::sqrt(2.0) / 8.0 * std::hypot(c0, c2);
    for (int u2 = 0; u2 < 2; ++u2) {
      PhaseLikelihood B = bayes_update(A, u2, f2, nu);
      CHECK(std::abs(B.coeff(1)) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("sharpness maximization flags a flat objective") {
  CHECK_FALSE(maximize_expected_sharpness(flat_likelihood(4, 0), 1, 1).informative);
}

TEST_CASE("equal probability feedback") {
  // c_1 real positive, nu = 1 -> Phi = pi/2.
  PhaseLikelihood L = bayes_update(flat_likelihood(4, 0), 0, {0.0, true}, 1);
  FeedbackPhase fb = equal_probability_feedback(L, 1);
  CHECK(fb.informative);
  CHECK(fb.value == doctest::Approx(kPi / 2).epsilon(1e-12));

  // Children carry exactly half the weight each.
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  PhaseLikelihood X = flat_likelihood(16, 0);
  for (int i = 0; i < 6; ++i)
    X = bayes_update(X, static_cast<int>(gen() & 1), {ang(gen), true}, 1 + gen() % 3);
  for (uint32_t nu : {1u, 2u, 3u}) {
    FeedbackPhase f = equal_probability_feedback(X, nu);
    REQUIRE(f.informative);
    PhaseLikelihood c0 = bayes_update(X, 0, f, nu);
    PhaseLikelihood c1 = bayes_update(X, 1, f, nu);
    CHECK(c0.branch_weight() ==
          doctest::Approx(0.5 * X.branch_weight()).epsilon(1e-12));
    CHECK(c1.branch_weight() ==
          doctest::Approx(0.5 * X.branch_weight()).epsilon(1e-12));
  }

  // c_nu = 0 -> flagged.
  CHECK_FALSE(equal_probability_feedback(flat_likelihood(8, 0), 2).informative);
}

TEST_CASE("hermiticity and nonnegativity on a reconstruction grid") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  PhaseLikelihood L = flat_likelihood(20, 0);
  for (int i = 0; i < 10; ++i)
    L = bayes_update(L, static_cast<int>(gen() & 1), {ang(gen), true}, 1 + gen() % 2);
  for (int i = 0; i < 1024; ++i) {
    std::complex<double> v = L.evaluate(kTwoPi * i / 1024);
    CHECK(std::abs(v.imag()) < 1e-12);
    CHECK(v.real() >= -1e-12);
  }
}

TEST_CASE("coefficients match direct quadrature of the likelihood product") {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<Detection> seq;
    PhaseLikelihood L = flat_likelihood(64, 0);
    uint32_t total = 0;
    while (true) {
      uint32_t nu = 1 + gen() % 7;
      if (total + nu > 64) break;
      Detection d{static_cast<int>(gen() & 1), nu, ang(gen)};
      seq.push_back(d);
      L = bayes_update(L, d.u, {d.phi_fb, true}, d.nu);
      total += nu;
    }
    for (int j = 0; j <= static_cast<int>(total); j += 1 + static_cast<int>(gen() % 5)) {
      std::complex<double> want = quadrature_coeff(seq, j);
      CHECK(std::abs(L.coeff(j) - want) < 1e-9);
    }
  }
}

TEST_CASE("covariance: shifting feedback and phase together rotates the posterior") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> ang(0.0, kTwoPi);
  const double delta = 1.234567;
  std::vector<Detection> seq;
  for (int i = 0; i < 8; ++i) seq.push_back({static_cast<int>(gen() & 1), 1 + gen() % 3, ang(gen)});

  PhaseLikelihood A = flat_likelihood(32, 0);
  PhaseLikelihood B = flat_likelihood(32, 0);
  for (const auto& d : seq) {
    A = bayes_update(A, d.u, {d.phi_fb, true}, d.nu);
    B = bayes_update(B, d.u, {wrap_angle(d.phi_fb + delta), true}, d.nu);
  }
  CHECK(B.branch_weight() == doctest::Approx(A.branch_weight()).epsilon(1e-12));
  for (int j = 0; j <= A.top_harmonic(); ++j)
    CHECK(std::abs(B.coeff(j)) == doctest::Approx(std::abs(A.coeff(j))).epsilon(1e-10));
  CHECK(std::abs(testutil::angdiff(B.phase_estimate(), A.phase_estimate() + delta)) < 1e-9);
}

TEST_CASE("truncation at the 2M window is lossless for the final estimate") {
  // Two copies, K = 3: run the same outcome path with the working window
  // (2M = 4) and a doubled window (8); the final c_1 must agree exactly.
  const int K = 3;
  std::mt19937_64 gen(43);
  std::vector<int> bits;
  for (int i = 0; i < 2 * (K + 1); ++i) bits.push_back(static_cast<int>(gen() & 1));

  auto run = [&](int window) {
    PhaseLikelihood L = flat_likelihood(window, K);
    size_t b = 0;
    for (int k = K; k >= 0; --k) {
      if (k < K) L = rescale_level(L);
      for (int m = 0; m < 2; ++m) {
        FeedbackPhase fb = m == 0 ? optimal_feedback(L) : maximize_expected_sharpness(L, 1, 1);
        L = bayes_update(L, bits[b++], fb, 1u << k);
      }
    }
    return L.coeff(1);
  };
  std::complex<double> narrow = run(4), wide = run(8);
  CHECK(std::abs(narrow - wide) < 1e-15);
}
