#include "phaseest/montecarlo.hpp"

#include "phaseest/equivstate.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <thread>

namespace phaseest {

namespace {

using cplx = std::complex<double>;

unsigned effective_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

struct BatchSums {
  double sharp = 0.0;
  cplx phasor{0.0, 0.0};
  uint64_t count = 0;
};

// Delete-a-batch jackknife standard error of a mean assembled from batch
// sums, mapped through |.| for the complex (empirical) estimator.
double jackknife_stderr_real(const std::vector<BatchSums>& b, uint64_t n) {
  size_t nb = b.size();
  double total = 0.0;
  for (const auto& s : b) total += s.sharp;
  std::vector<double> loo(nb);
  double mean = 0.0;
  for (size_t i = 0; i < nb; ++i) {
    loo[i] = (total - b[i].sharp) / static_cast<double>(n - b[i].count);
    mean += loo[i];
  }
  mean /= static_cast<double>(nb);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
}

double jackknife_stderr_abs(const std::vector<BatchSums>& b, uint64_t n) {
  size_t nb = b.size();
  cplx total{0.0, 0.0};
  for (const auto& s : b) total += s.phasor;
  std::vector<double> loo(nb);
  double mean = 0.0;
  for (size_t i = 0; i < nb; ++i) {
    loo[i] = std::abs((total - b[i].phasor) / static_cast<double>(n - b[i].count));
    mean += loo[i];
  }
  mean /= static_cast<double>(nb);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
}

double propagate_to_vh(double mu, double stderr_mu) {
  if (!(mu > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * stderr_mu / (mu * mu * mu);
}

void fill_report_from_batches(VarianceReport& rep, const std::vector<BatchSums>& batches,
                              uint64_t samples) {
  double sharp_total = 0.0;
  cplx phasor_total{0.0, 0.0};
  for (const auto& b : batches) {
    sharp_total += b.sharp;
    phasor_total += b.phasor;
  }
  rep.mu_sharpness = sharp_total / static_cast<double>(samples);
  rep.mu_empirical = std::abs(phasor_total) / static_cast<double>(samples);
  rep.vh_sharpness = holevo_from_mu(rep.mu_sharpness);
  rep.vh_empirical = holevo_from_mu(rep.mu_empirical);
  rep.stderr_vh = propagate_to_vh(rep.mu_sharpness, jackknife_stderr_real(batches, samples));
  rep.stderr_vh_empirical =
      propagate_to_vh(rep.mu_empirical, jackknife_stderr_abs(batches, samples));
}

// Runs batches [first, last) striped across workers; batch `b` covers trials
// [b*samples/B, (b+1)*samples/B). `per_trial` must only touch its batch.
template <typename PerBatch>
void run_batches_parallel(uint64_t samples, unsigned threads, const PerBatch& per_batch) {
  unsigned t = std::min<unsigned>(effective_threads(threads), kMonteCarloBatches);
  auto batch_range = [samples](uint32_t b) {
    uint64_t lo = samples * b / kMonteCarloBatches;
    uint64_t hi = samples * (b + 1) / kMonteCarloBatches;
    return std::pair<uint64_t, uint64_t>(lo, hi);
  };
  if (t <= 1) {
    for (uint32_t b = 0; b < kMonteCarloBatches; ++b) {
      auto [lo, hi] = batch_range(b);
      per_batch(b, lo, hi);
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (unsigned w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      for (uint32_t b = w; b < kMonteCarloBatches; b += t) {
        auto [lo, hi] = batch_range(b);
        per_batch(b, lo, hi);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

nlohmann::json VarianceReport::to_json() const {
  nlohmann::json j;
  j["scheme"] = scheme.to_json();
  j["N"] = resources;
  j["samples"] = samples;
  j["seed"] = seed;
  j["partitions"] = partitions;
  j["mu_sharpness"] = mu_sharpness;
  j["vh_sharpness"] = vh_sharpness;
  j["mu_empirical"] = std::isnan(mu_empirical) ? nlohmann::json() : nlohmann::json(mu_empirical);
  j["vh_empirical"] = std::isnan(vh_empirical) ? nlohmann::json() : nlohmann::json(vh_empirical);
  j["stderr_vh"] = stderr_vh;
  j["stderr_vh_empirical"] =
      std::isnan(stderr_vh_empirical) ? nlohmann::json() : nlohmann::json(stderr_vh_empirical);
  j["method"] = method;
  return j;
}

VarianceReport enumerate_exact(const SchemeSpec& spec) {
  spec.validate();
  if (!spec.fixed_sequence())
    throw std::invalid_argument("enumerate_exact: scheme must have a fixed sequence");
  uint64_t detections = spec.detection_count();
  if (detections > kEnumerateMaxDetections)
    throw std::invalid_argument("enumerate_exact: too many detections (2^" +
                                std::to_string(detections) + " branches)");

  double mu = 0.0;
  double total_weight = 0.0;
  uint64_t branches = 0;
  for_each_branch(spec, [&](const BranchView& b) {
    mu += b.posterior.mu_weight();
    total_weight += b.posterior.branch_weight();
    ++branches;
  });
  if (std::abs(total_weight - 1.0) > 1e-12)
    throw std::logic_error("enumerate_exact: branch weights do not sum to 1");

  VarianceReport rep;
  rep.scheme = spec;
  rep.resources = spec.nominal_resources();
  rep.samples = branches;
  rep.seed = 0;
  rep.partitions = 0;
  rep.mu_sharpness = mu;
  rep.vh_sharpness = holevo_from_mu(mu);
  rep.mu_empirical = std::numeric_limits<double>::quiet_NaN();
  rep.vh_empirical = std::numeric_limits<double>::quiet_NaN();
  rep.stderr_vh = 0.0;
  rep.stderr_vh_empirical = std::numeric_limits<double>::quiet_NaN();
  rep.method = "enumerate";
  return rep;
}

VarianceReport estimate_montecarlo(const SchemeSpec& spec, uint64_t samples,
                                   uint64_t seed, unsigned threads) {
  spec.validate();
  if (samples < 2) throw std::invalid_argument("estimate_montecarlo: need at least 2 samples");

  std::vector<BatchSums> batches(kMonteCarloBatches);
  run_batches_parallel(samples, threads, [&](uint32_t b, uint64_t lo, uint64_t hi) {
    BatchSums acc;
    for (uint64_t i = lo; i < hi; ++i) {
      TrialRng rng(seed, i);
      double phi_true = rng.next_angle();
      double phi1 = rng.next_angle();
      double aleph = wrap_angle(phi_true - phi1);
      TrialStats stats = run_trial_stats(spec, aleph, rng);
      acc.sharp += stats.sharpness;
      double err = stats.relative_estimate - aleph;
      acc.phasor += cplx(std::cos(err), std::sin(err));
      ++acc.count;
    }
    batches[b] = acc;
  });

  VarianceReport rep;
  rep.scheme = spec;
  rep.resources = spec.nominal_resources();
  rep.samples = samples;
  rep.seed = seed;
  rep.partitions = kMonteCarloBatches;
  rep.method = "montecarlo";
  fill_report_from_batches(rep, batches, samples);
  return rep;
}

std::vector<VarianceReport> estimate_montecarlo_curve(const SchemeSpec& spec,
                                                      uint64_t samples, uint64_t seed,
                                                      unsigned threads, uint64_t stride) {
  spec.validate();
  const auto* adaptive = spec.get_if<AdaptiveSizeSpec>();
  if (!adaptive)
    throw std::invalid_argument("estimate_montecarlo_curve: only size-adaptive runs have curves");
  if (samples < 2) throw std::invalid_argument("estimate_montecarlo_curve: need at least 2 samples");
  if (stride < 1) stride = 1;
  uint64_t budget = adaptive->budget;
  if (budget == 0) throw std::invalid_argument("estimate_montecarlo_curve: empty budget");

  // Per (batch, resource count) sums; estimates for skipped counts carry the
  // last realized point of the trial.
  struct CurveBatch {
    std::vector<double> sharp;
    std::vector<cplx> phasor;
  };
  std::vector<CurveBatch> curve(kMonteCarloBatches);
  for (auto& cb : curve) {
    cb.sharp.assign(budget + 1, 0.0);
    cb.phasor.assign(budget + 1, cplx(0.0, 0.0));
  }
  std::vector<BatchSums> counts(kMonteCarloBatches);

  struct PointSink : CurveSink {
    std::vector<TrialRecord::Intermediate> points;
    void point(uint64_t n, double est, double sharp) override {
      points.push_back({n, est, sharp});
    }
  };

  run_batches_parallel(samples, threads, [&](uint32_t b, uint64_t lo, uint64_t hi) {
    CurveBatch& cb = curve[b];
    PointSink sink;
    for (uint64_t i = lo; i < hi; ++i) {
      sink.points.clear();
      TrialRng rng(seed, i);
      double phi_true = rng.next_angle();
      double phi1 = rng.next_angle();
      double aleph = wrap_angle(phi_true - phi1);
      run_trial_stats(spec, aleph, rng, &sink);
      size_t p = 0;
      double est = 0.0, sharp = 0.0;
      for (uint64_t n = 1; n <= budget; ++n) {
        while (p < sink.points.size() && sink.points[p].resources <= n) {
          est = sink.points[p].estimate;
          sharp = sink.points[p].sharpness;
          ++p;
        }
        double err = est - aleph;
        cb.sharp[n] += sharp;
        cb.phasor[n] += cplx(std::cos(err), std::sin(err));
      }
      ++counts[b].count;
    }
  });

  std::vector<VarianceReport> out;
  for (uint64_t n = stride; n <= budget; n += stride) {
    uint64_t nn = std::min(n, budget);
    std::vector<BatchSums> batches(kMonteCarloBatches);
    for (uint32_t b = 0; b < kMonteCarloBatches; ++b) {
      batches[b].sharp = curve[b].sharp[nn];
      batches[b].phasor = curve[b].phasor[nn];
      batches[b].count = counts[b].count;
    }
    VarianceReport rep;
    rep.scheme = spec;
    rep.resources = nn;
    rep.samples = samples;
    rep.seed = seed;
    rep.partitions = kMonteCarloBatches;
    rep.method = "montecarlo";
    fill_report_from_batches(rep, batches, samples);
    out.push_back(std::move(rep));
  }
  if (out.empty() || out.back().resources != budget) {
    // Always include the final budget point.
    std::vector<BatchSums> batches(kMonteCarloBatches);
    for (uint32_t b = 0; b < kMonteCarloBatches; ++b) {
      batches[b].sharp = curve[b].sharp[budget];
      batches[b].phasor = curve[b].phasor[budget];
      batches[b].count = counts[b].count;
    }
    VarianceReport rep;
    rep.scheme = spec;
    rep.resources = budget;
    rep.samples = samples;
    rep.seed = seed;
    rep.partitions = kMonteCarloBatches;
    rep.method = "montecarlo";
    fill_report_from_batches(rep, batches, samples);
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<SweepEntry> sweep(const std::vector<SchemeSpec>& specs, uint64_t samples,
                              uint64_t seed, unsigned threads) {
  if (specs.empty()) throw std::invalid_argument("sweep: empty spec list");
  std::vector<SweepEntry> out(specs.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    try {
      out[i].report = estimate_montecarlo(specs[i], samples, derive_seed(seed, i), threads);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  }
  return out;
}

TailSensitivity tail_sensitivity_check(const SchemeSpec& spec, uint64_t samples,
                                       uint64_t seed, unsigned threads, uint64_t factor,
                                       double threshold) {
  if (factor < 2) throw std::invalid_argument("tail_sensitivity_check: factor must be >= 2");
  TailSensitivity t;
  t.base = estimate_montecarlo(spec, samples, seed, threads);
  t.rerun = estimate_montecarlo(spec, samples * factor, derive_seed(seed, 0x7461696cull), threads);
  t.relative_shift =
      std::abs(t.rerun.vh_sharpness - t.base.vh_sharpness) / t.rerun.vh_sharpness;
  t.flagged = t.relative_shift > threshold;
  return t;
}

}  // namespace phaseest
