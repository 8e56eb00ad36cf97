#pragma once

#include "phaseest/posterior.hpp"
#include "phaseest/rng.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace phaseest {

// Generalized quantum phase estimation: M detections at each NOON size
// 2^K, 2^(K-1), ..., 1, adaptive feedback throughout.
struct GeneralizedQpeaSpec {
  uint32_t k_max = 0;  // K
  uint32_t copies = 1; // M
};

// Same engine with K held fixed while M grows (repetition scaling study).
struct FixedKSpec {
  uint32_t k_max = 0;
  uint32_t copies = 1;
};

// Repetition schedule M(K, k) for nonadaptive runs. Either an affine rule
// base + slope * (K - k) or explicit per-level values ordered k = K..0.
struct Schedule {
  uint32_t base = 2;
  uint32_t slope = 3;
  std::vector<uint32_t> values;

  uint32_t at(uint32_t k_max, uint32_t k) const;
  std::string label() const;
};

// Nonadaptive measurements: the feedback phases are a fixed grid, never a
// function of the outcomes. Repetition m of the 2^k-size measurement uses
// 2^k Phi = m pi / M(K,k), spreading the grid over a half period.
struct NonadaptiveSpec {
  uint32_t k_max = 0;
  Schedule schedule;
};

enum class HybridIncrement { kPiOverM, kPiOverTwo };

// QPEA pass (M = 1 adaptive engine) followed by `singles` single-photon
// detections whose feedback phase advances by a fixed increment.
struct HybridSpec {
  uint32_t k_max = 0;
  uint32_t singles = 0;
  HybridIncrement increment = HybridIncrement::kPiOverTwo;
};

enum class SizeObjective {
  kVhN2,             // minimize expected V_H (N')^2, sharpness-maximizing feedback
  kEntropyC,         // minimize [<S> + C] / ln N', equal-probability feedback
  kEntropyEqualProb, // minimize <S> + 2 ln N', equal-probability feedback
};

// NOON size chosen per detection to minimize the expected objective after
// the next detection, within a fixed total resource budget.
struct AdaptiveSizeSpec {
  uint64_t budget = 0;
  SizeObjective objective = SizeObjective::kEntropyC;
  double entropy_offset = kDefaultEntropyOffset;  // the C of [<S> + C] / ln N'
  uint32_t warmup_singles = 10;

  static constexpr double kDefaultEntropyOffset =
      -1.8378770664093454835606594728112353;  // -ln(2 pi)
};

class SchemeSpec {
 public:
  using Variant = std::variant<GeneralizedQpeaSpec, FixedKSpec, NonadaptiveSpec,
                               HybridSpec, AdaptiveSizeSpec>;

  SchemeSpec() : v_(GeneralizedQpeaSpec{}) {}
  SchemeSpec(Variant v) : v_(std::move(v)) { validate(); }

  const Variant& variant() const { return v_; }
  template <typename T> const T* get_if() const { return std::get_if<T>(&v_); }

  void validate() const;            // throws std::invalid_argument
  bool fixed_sequence() const;      // false only for adaptive size
  uint64_t nominal_resources() const;
  uint64_t detection_count() const; // throws for adaptive size
  std::string name() const;
  std::string k_label() const;      // "" when K does not apply
  std::string m_label() const;      // M, schedule rule, or objective

  nlohmann::json to_json() const;
  static SchemeSpec from_json(const nlohmann::json& j);

 private:
  Variant v_;
};

// One simulated run. Feedback phases and the estimate are absolute; the
// internal evolution only ever depends on relative_phase = phi_true - phi1.
struct TrialRecord {
  double phi_true = 0.0;
  double phi1 = 0.0;
  double relative_phase = 0.0;
  std::vector<uint8_t> outcomes;
  std::vector<double> feedback;  // one absolute phase per detection
  uint64_t resources = 0;
  double estimate = 0.0;
  double final_sharpness = 0.0;

  // Realized (resources, estimate, sharpness) points of a size-adaptive
  // run; estimates for skipped resource counts carry the last entry.
  struct Intermediate {
    uint64_t resources;
    double estimate;
    double sharpness;
  };
  std::vector<Intermediate> intermediates;

  std::string csv_row() const;
  static const char* csv_header();
};

// Yields a bit with the physical NOON outcome probabilities.
using OutcomeSource = std::function<int(double phi_true, double feedback, uint32_t nu)>;

int noon_outcome_sampler(double phi_true, double feedback, uint32_t nu, TrialRng& rng);

TrialRecord run_trial(const SchemeSpec& spec, double phi_true, double phi1,
                      const OutcomeSource& source);
TrialRecord run_trial(const SchemeSpec& spec, double phi_true, double phi1,
                      TrialRng& rng);

TrialRecord run_generalized_qpea(const GeneralizedQpeaSpec&, double phi_true,
                                 double phi1, const OutcomeSource&);
TrialRecord run_fixed_k(const FixedKSpec&, double phi_true, double phi1,
                        const OutcomeSource&);
TrialRecord run_nonadaptive(const NonadaptiveSpec&, double phi_true, double phi1,
                            const OutcomeSource&);
TrialRecord run_hybrid(const HybridSpec&, double phi_true, double phi1,
                       const OutcomeSource&);
TrialRecord run_adaptive_size(const AdaptiveSizeSpec&, double phi_true, double phi1,
                              const OutcomeSource&);

// Fast path for Monte Carlo: runs in the relative frame (phi1 = 0,
// aleph = phi_true - phi1) and skips record building.
struct TrialStats {
  double relative_estimate = 0.0;  // estimate minus phi1, in [0, 2pi)
  double sharpness = 0.0;
  uint64_t resources = 0;
};

struct CurveSink {
  virtual ~CurveSink() = default;
  virtual void point(uint64_t resources, double relative_estimate,
                     double sharpness) = 0;
};

TrialStats run_trial_stats(const SchemeSpec& spec, double aleph, TrialRng& rng,
                           CurveSink* sink = nullptr);

// Depth-first traversal of the full outcome tree of a fixed-sequence scheme
// with phi1 = 0, carrying the unnormalized likelihood. The visitor sees each
// leaf once.
struct BranchView {
  const std::vector<uint8_t>& outcomes;
  const std::vector<double>& feedback;   // relative-frame phases
  const PhaseLikelihood& posterior;      // final, unnormalized, level 0
};
void for_each_branch(const SchemeSpec& spec,
                     const std::function<void(const BranchView&)>& visit);

}  // namespace phaseest
