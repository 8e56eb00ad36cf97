#pragma once

#include "phaseest/schemes.hpp"

#include <optional>
#include <string>
#include <vector>

namespace phaseest {

// Aggregated variance estimate for one scheme. Two estimators are always
// carried: the sharpness average (mean of per-trial |<e^{i phi}>|, the
// primary one) and the empirical one (modulus of the mean error phasor
// over trials). stderr_vh comes from a delete-a-batch jackknife on the
// sharpness mean, propagated through V_H = mu^-2 - 1.
struct VarianceReport {
  SchemeSpec scheme;
  uint64_t resources = 0;
  uint64_t samples = 0;
  uint64_t seed = 0;
  uint32_t partitions = 0;
  double mu_sharpness = 0.0;
  double vh_sharpness = 0.0;
  double mu_empirical = 0.0;
  double vh_empirical = 0.0;
  double stderr_vh = 0.0;
  double stderr_vh_empirical = 0.0;
  std::string method;  // "enumerate" or "montecarlo"

  double vh_times_n2() const {
    return vh_sharpness * static_cast<double>(resources) * static_cast<double>(resources);
  }
  nlohmann::json to_json() const;
};

// Number of batches every Monte Carlo run is partitioned into. Batch sums
// are accumulated in index order, so results are identical for any thread
// count; the same batches feed the jackknife.
inline constexpr uint32_t kMonteCarloBatches = 32;

// Largest detection count enumerate_exact accepts (2^26 branches).
inline constexpr uint64_t kEnumerateMaxDetections = 26;

// Exact variance by walking every outcome branch of a fixed-sequence scheme:
// mu = sum over branches of |c_1| of the unnormalized final likelihood.
// Verifies that the branch weights sum to 1. The empirical-estimator fields
// are NaN (there are no sampled trials).
VarianceReport enumerate_exact(const SchemeSpec& spec);

// Monte Carlo over `samples` trials with phi_true and Phi_1 drawn uniformly
// and independently per trial from counter-based streams keyed by
// (seed, trial index). threads affects speed only, never values; 0 means
// one thread per hardware core.
VarianceReport estimate_montecarlo(const SchemeSpec& spec, uint64_t samples,
                                   uint64_t seed, unsigned threads = 1);

// Size-adaptive runs produce estimates at every intermediate resource count
// (skipped counts carry the last realized estimate); this aggregates them
// into one report per resource count n = stride, 2*stride, ..., budget.
std::vector<VarianceReport> estimate_montecarlo_curve(const SchemeSpec& spec,
                                                      uint64_t samples, uint64_t seed,
                                                      unsigned threads = 1,
                                                      uint64_t stride = 1);

struct SweepEntry {
  std::optional<VarianceReport> report;
  std::string error;  // empty on success
};

// Runs every spec with an independent seed derived from (seed, index);
// a failing spec yields an error entry without disturbing the others.
std::vector<SweepEntry> sweep(const std::vector<SchemeSpec>& specs, uint64_t samples,
                              uint64_t seed, unsigned threads = 1);

// Reruns at `factor` times the samples and flags the report when V_H shifts
// by more than `threshold` (relative to the rerun): low-probability tails
// of nonadaptive runs are easy to undersample.
struct TailSensitivity {
  VarianceReport base;
  VarianceReport rerun;
  double relative_shift = 0.0;
  bool flagged = false;
};
TailSensitivity tail_sensitivity_check(const SchemeSpec& spec, uint64_t samples,
                                       uint64_t seed, unsigned threads = 1,
                                       uint64_t factor = 4, double threshold = 0.10);

}  // namespace phaseest
