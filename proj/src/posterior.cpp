#include "phaseest/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phaseest {

namespace {

using cplx = std::complex<double>;

// arg in (-2pi, 0].
double arg_nonpositive(cplx z) {
  double a = std::arg(z);
  return a > 0.0 ? a - kTwoPi : a;
}

}  // namespace

double wrap_angle(double phi) {
  double x = std::fmod(phi, kTwoPi);
  if (x < 0.0) x += kTwoPi;
  if (x >= kTwoPi) x -= kTwoPi;
  return x;
}

PhaseLikelihood PhaseLikelihood::flat(int max_order, int level) {
  if (max_order < 1) throw std::invalid_argument("flat_likelihood: max_order must be >= 1");
  if (level < 0) throw std::invalid_argument("flat_likelihood: level must be >= 0");
  return PhaseLikelihood(level, max_order, {cplx(1.0, 0.0)});
}

PhaseLikelihood flat_likelihood(int max_order, int level) {
  return PhaseLikelihood::flat(max_order, level);
}

cplx PhaseLikelihood::coeff(int j) const {
  int a = j < 0 ? -j : j;
  if (a >= static_cast<int>(c_.size())) return cplx(0.0, 0.0);
  return j < 0 ? std::conj(c_[a]) : c_[a];
}

double PhaseLikelihood::sharpness() const {
  double c0 = c_[0].real();
  if (!(c0 > 0.0)) throw std::domain_error("sharpness: branch weight is zero");
  return mu_weight() / c0;
}

double PhaseLikelihood::phase_estimate() const {
  if (level_ != 0) throw std::logic_error("phase_estimate: likelihood not at level 0");
  cplx c1 = coeff(1);
  if (std::abs(c1) == 0.0) throw std::domain_error("phase_estimate: c_1 is zero");
  return wrap_angle(-std::arg(c1));
}

cplx PhaseLikelihood::evaluate(double phi) const {
  double x = std::ldexp(phi, level_);  // 2^level * phi
  cplx acc = c_[0];
  for (int j = 1; j <= top_harmonic(); ++j) {
    cplx e(std::cos(j * x), std::sin(j * x));
    acc += c_[j] * e + std::conj(c_[j] * e);
  }
  return acc;
}

PhaseLikelihood PhaseLikelihood::normalized() const {
  double c0 = c_[0].real();
  if (!(c0 > 0.0)) throw std::domain_error("normalized: branch weight is zero");
  PhaseLikelihood out(*this);
  for (auto& z : out.c_) z /= c0;
  out.c_[0] = cplx(1.0, 0.0);
  return out;
}

double noon_outcome_prob(int u, double phi, uint32_t nu, FeedbackPhase Phi) {
  if (nu < 1) throw std::invalid_argument("noon_outcome_prob: nu must be >= 1");
  double sign = (u & 1) ? -1.0 : 1.0;
  return 0.5 * (1.0 + sign * std::cos(nu * (phi - Phi.value)));
}

PhaseLikelihood bayes_update(const PhaseLikelihood& L, int u, FeedbackPhase Phi,
                             uint32_t nu) {
  uint32_t shift;
  if (L.level_ == 0) {
    shift = nu;
  } else {
    if (nu != (1u << L.level_))
      throw std::invalid_argument("bayes_update: nu must equal 2^level above level 0");
    shift = 1;
  }
  if (shift == 0 || static_cast<int>(shift) > L.max_order_)
    throw std::invalid_argument("bayes_update: harmonic shift exceeds max_order");

  double psi = static_cast<double>(nu) * Phi.value;
  double er = std::cos(psi), ei = std::sin(psi);  // e^{i psi}
  double sign = (u & 1) ? -0.25 : 0.25;

  int s = static_cast<int>(shift);
  int old_top = L.top_harmonic();
  int new_top = std::min(old_top + s, L.max_order_);
  std::vector<cplx> out(static_cast<size_t>(new_top) + 1);

  auto at = [&](int j) -> cplx {
    int a = j < 0 ? -j : j;
    if (a > old_top) return cplx(0.0, 0.0);
    return j < 0 ? std::conj(L.c_[a]) : L.c_[a];
  };

  for (int j = 0; j <= new_top; ++j) {
    // c_{j-s} e^{-i psi}: for j < s this is conj(c_{s-j} e^{i psi}), which
    // keeps c'_0 exactly real.
    cplx lo;
    if (j >= s) {
      cplx z = at(j - s);
      lo = cplx(z.real() * er + z.imag() * ei, z.imag() * er - z.real() * ei);
    } else {
      cplx z = at(s - j);
      lo = cplx(z.real() * er - z.imag() * ei, -(z.real() * ei + z.imag() * er));
    }
    cplx hiz = at(j + s);
    cplx hi(hiz.real() * er - hiz.imag() * ei, hiz.real() * ei + hiz.imag() * er);
    cplx base = at(j);
    out[static_cast<size_t>(j)] =
        cplx(0.5 * base.real() + sign * (lo.real() + hi.real()),
             0.5 * base.imag() + sign * (lo.imag() + hi.imag()));
  }
  return PhaseLikelihood(L.level_, L.max_order_, std::move(out));
}

cplx bayes_update_coeff(const PhaseLikelihood& L, int j, int u,
                        double phi_feedback, uint32_t nu) {
  int s = L.level() == 0 ? static_cast<int>(nu) : 1;
  double psi = static_cast<double>(nu) * phi_feedback;
  cplx e(std::cos(psi), std::sin(psi));
  double sign = (u & 1) ? -0.25 : 0.25;
  cplx lo = (j >= s) ? L.coeff(j - s) * std::conj(e)
                     : std::conj(L.coeff(s - j) * e);
  return 0.5 * L.coeff(j) + sign * (lo + L.coeff(j + s) * e);
}

PhaseLikelihood rescale_level(const PhaseLikelihood& L) {
  if (L.level_ < 1) throw std::logic_error("rescale_level: already at level 0");
  int new_top = std::min(2 * L.top_harmonic(), L.max_order_);
  std::vector<cplx> out(static_cast<size_t>(new_top) + 1, cplx(0.0, 0.0));
  for (int j = 0; 2 * j <= new_top; ++j) out[static_cast<size_t>(2 * j)] = L.c_[j];
  return PhaseLikelihood(L.level_ - 1, L.max_order_, std::move(out));
}

PhaseLikelihood truncated(const PhaseLikelihood& L, int max_order) {
  if (max_order < 1) throw std::invalid_argument("truncated: max_order must be >= 1");
  std::vector<cplx> out(L.c_.begin(),
                        L.c_.begin() + std::min<size_t>(L.c_.size(), max_order + 1));
  return PhaseLikelihood(L.level_, max_order, std::move(out));
}

double sharpness(const PhaseLikelihood& L) { return L.sharpness(); }
double branch_weight(const PhaseLikelihood& L) { return L.branch_weight(); }
double mu_weight(const PhaseLikelihood& L) { return L.mu_weight(); }
double phase_estimate(const PhaseLikelihood& L) { return L.phase_estimate(); }

FeedbackPhase optimal_feedback(const PhaseLikelihood& L) {
  cplx c2 = L.coeff(2);
  if (c2.real() == 0.0 && c2.imag() == 0.0) return {0.0, false};
  double phi = -arg_nonpositive(c2) / std::ldexp(1.0, L.level() + 1);
  return {wrap_angle(phi), true};
}

FeedbackPhase maximize_expected_sharpness(const PhaseLikelihood& L,
                                          uint32_t shift, int target_harmonic) {
  if (shift == 0) throw std::invalid_argument("maximize_expected_sharpness: shift must be >= 1");
  int s = static_cast<int>(shift);
  int t = target_harmonic;
  // Physical multiplier: psi = (2^level * shift) * Phi.
  double mult = std::ldexp(static_cast<double>(shift), L.level());

  cplx A = 0.5 * L.coeff(t);
  cplx p = 0.25 * L.coeff(t - s);
  cplx q = 0.25 * L.coeff(t + s);
  bool pz = (p.real() == 0.0 && p.imag() == 0.0);
  bool qz = (q.real() == 0.0 && q.imag() == 0.0);

  if (pz && qz) return {0.0, false};  // objective is 2|A| for every Phi

  if (A.real() == 0.0 && A.imag() == 0.0) {
    // Two-term objective |p e^{-i psi} + q e^{i psi}|: constant when one
    // term vanishes, otherwise maximal where the terms align.
    if (pz || qz) return {0.0, false};
    double psi = 0.5 * (std::arg(p) - std::arg(q));
    psi = std::fmod(psi, kPi);
    if (psi < 0.0) psi += kPi;
    return {wrap_angle(psi / mult), true};
  }

  // General case. With w = e^{i theta}, theta = 2 psi,
  //   h(psi)^2 / 2 = |A|^2 + |p|^2 + |q|^2 + 2 Re(z1 conj(w)) + |g(theta)|,
  //   z1 = p conj(q),  g = A^2 - 2pq - p^2 conj(w) - q^2 w,
  // where h = |A + B| + |A - B| is the expected-sharpness objective, with
  // period 2pi in theta. Scan, then pin each local maximum by bisecting the
  // analytic derivative so flat peaks are still located to full precision.
  const double C0 = std::norm(A) + std::norm(p) + std::norm(q);
  const cplx z1 = p * std::conj(q);
  const cplx z2 = A * A - 2.0 * p * q;
  const cplx p2 = p * p, q2 = q * q;
  const double z1r = z1.real(), z1i = z1.imag();
  const double z2r = z2.real(), z2i = z2.imag();
  const double p2r = p2.real(), p2i = p2.imag();
  const double q2r = q2.real(), q2i = q2.imag();

  auto h2w = [&](double wr, double wi) {
    double gr = z2r - (p2r * wr + p2i * wi) - (q2r * wr - q2i * wi);
    double gi = z2i - (p2i * wr - p2r * wi) - (q2r * wi + q2i * wr);
    return C0 + 2.0 * (z1r * wr + z1i * wi) + std::sqrt(gr * gr + gi * gi);
  };
  auto h2 = [&](double theta) { return h2w(std::cos(theta), std::sin(theta)); };
  auto dh2 = [&](double theta) {
    double wr = std::cos(theta), wi = std::sin(theta);
    double gr = z2r - (p2r * wr + p2i * wi) - (q2r * wr - q2i * wi);
    double gi = z2i - (p2i * wr - p2r * wi) - (q2r * wi + q2i * wr);
    // g' = i (p^2 conj(w) - q^2 w)
    double ur = (p2r * wr + p2i * wi) - (q2r * wr - q2i * wi);
    double ui = (p2i * wr - p2r * wi) - (q2r * wi + q2i * wr);
    double gpr = -ui, gpi = ur;
    double ag = std::sqrt(gr * gr + gi * gi);
    double dabs = ag > 0.0 ? (gr * gpr + gi * gpi) / ag : 0.0;
    return 2.0 * (z1i * wr - z1r * wi) + dabs;
  };

  constexpr int kScan = 128;
  constexpr double kStep = kTwoPi / kScan;
  double vals[kScan];
  {
    // March e^{i theta} around the circle by rotation; drift over 128 steps
    // is far below the bracket resolution.
    const double rr = std::cos(kStep), ri = std::sin(kStep);
    double wr = 1.0, wi = 0.0;
    for (int i = 0; i < kScan; ++i) {
      vals[i] = h2w(wr, wi);
      double nr = wr * rr - wi * ri;
      wi = wr * ri + wi * rr;
      wr = nr;
    }
  }

  double best_theta = 0.0, best_val = -1.0;
  for (int i = 0; i < kScan; ++i) {
    double vm = vals[(i + kScan - 1) % kScan], vp = vals[(i + 1) % kScan];
    if (vals[i] < vm || vals[i] < vp) continue;
    double a = (i - 1) * kStep, b = (i + 1) * kStep;
    double xm, fm;
    if (dh2(a) > 0.0 && dh2(b) < 0.0) {
      for (int it = 0; it < 60 && b - a > 1e-14; ++it) {
        double mid = 0.5 * (a + b);
        (dh2(mid) > 0.0 ? a : b) = mid;
      }
      xm = 0.5 * (a + b);
      fm = h2(xm);
    } else {
      // Degenerate bracket (flat stretch or kink); golden-section fallback.
      constexpr double kGolden = 0.6180339887498949;
      double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
      double f1 = h2(x1), f2 = h2(x2);
      while (b - a > 1e-13) {
        if (f1 < f2) {
          a = x1; x1 = x2; f1 = f2;
          x2 = a + kGolden * (b - a); f2 = h2(x2);
        } else {
          b = x2; x2 = x1; f2 = f1;
          x1 = b - kGolden * (b - a); f1 = h2(x1);
        }
      }
      xm = 0.5 * (a + b);
      fm = h2(xm);
    }
    if (fm > best_val) { best_val = fm; best_theta = xm; }
  }
  double psi = std::fmod(0.5 * best_theta, kPi);
  if (psi < 0.0) psi += kPi;
  return {wrap_angle(psi / mult), true};
}

FeedbackPhase equal_probability_feedback(const PhaseLikelihood& L, uint32_t nu) {
  if (L.level() != 0) throw std::logic_error("equal_probability_feedback: level must be 0");
  if (static_cast<int>(nu) > L.max_order())
    throw std::invalid_argument("equal_probability_feedback: nu exceeds max_order");
  cplx cn = L.coeff(static_cast<int>(nu));
  if (cn.real() == 0.0 && cn.imag() == 0.0) return {0.0, false};
  double period = kTwoPi / nu;
  double phi = std::fmod((-std::arg(cn) + 0.5 * kPi) / nu, period);
  if (phi < 0.0) phi += period;
  return {phi, true};
}

}  // namespace phaseest
