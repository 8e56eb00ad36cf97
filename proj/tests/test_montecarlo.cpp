#include "phaseest/montecarlo.hpp"

#include "doctest.h"

#include <cmath>

using namespace phaseest;

namespace {

SchemeSpec gqpea(uint32_t k, uint32_t m) { return SchemeSpec(GeneralizedQpeaSpec{k, m}); }

}  // namespace

TEST_CASE("exact enumeration reproduces the closed-form single-copy variance") {
  for (uint32_t k = 1; k <= 6; ++k) {
    VarianceReport rep = enumerate_exact(gqpea(k, 1));
    double n = static_cast<double>(rep.resources);
    CHECK(rep.resources == (2ull << k) - 1);
    CHECK(rep.samples == (1ull << (k + 1)));
    CHECK(std::abs(rep.vh_sharpness - (2.0 / n + 1.0 / (n * n))) < 1e-12);
    CHECK(rep.stderr_vh == 0.0);
    CHECK(rep.method == "enumerate");
  }
}

TEST_CASE("exact enumeration reproduces the two-copy variance") {
  for (uint32_t k = 1; k <= 3; ++k) {
    VarianceReport rep = enumerate_exact(gqpea(k, 2));
    double n = static_cast<double>(rep.resources);
    CHECK(std::abs(rep.vh_sharpness - 2.0 / n) < 1e-12);
  }
}

TEST_CASE("enumeration guard") {
  CHECK_THROWS_AS(enumerate_exact(gqpea(26, 1)), std::invalid_argument);  // 27 detections
  CHECK_THROWS_AS(enumerate_exact(SchemeSpec(AdaptiveSizeSpec{
                      30, SizeObjective::kEntropyC,
                      AdaptiveSizeSpec::kDefaultEntropyOffset, 5})),
                  std::invalid_argument);
}

TEST_CASE("Monte Carlo is deterministic in (seed, samples) and thread count") {
  SchemeSpec spec = gqpea(3, 2);
  VarianceReport a = estimate_montecarlo(spec, 2048, 99, 1);
  VarianceReport b = estimate_montecarlo(spec, 2048, 99, 1);
  VarianceReport c = estimate_montecarlo(spec, 2048, 99, 4);
  CHECK(a.mu_sharpness == b.mu_sharpness);
  CHECK(a.mu_empirical == b.mu_empirical);
  CHECK(a.stderr_vh == b.stderr_vh);
  CHECK(a.mu_sharpness == c.mu_sharpness);
  CHECK(a.mu_empirical == c.mu_empirical);
  CHECK(a.partitions == kMonteCarloBatches);

  VarianceReport d = estimate_montecarlo(spec, 2048, 100, 1);
  CHECK(a.mu_sharpness != d.mu_sharpness);
}

TEST_CASE("Monte Carlo agrees with enumeration") {
  // One copy: the per-trial sharpness is the same on every branch, so the
  // Monte Carlo mean reproduces the exact value with zero spread.
  VarianceReport exact1 = enumerate_exact(gqpea(4, 1));
  VarianceReport mc1 = estimate_montecarlo(gqpea(4, 1), 1 << 12, 7, 0);
  CHECK(std::abs(mc1.vh_sharpness - exact1.vh_sharpness) < 1e-12);
  CHECK(mc1.stderr_vh < 1e-12);

  // Three copies: genuinely random sharpness; agree within 5 sigma.
  VarianceReport exact3 = enumerate_exact(gqpea(3, 3));
  VarianceReport mc3 = estimate_montecarlo(gqpea(3, 3), 1 << 14, 7, 0);
  CHECK(mc3.stderr_vh > 0.0);
  CHECK(std::abs(mc3.vh_sharpness - exact3.vh_sharpness) < 5.0 * mc3.stderr_vh);
}

TEST_CASE("the two estimators agree within their combined error") {
  VarianceReport rep = estimate_montecarlo(gqpea(4, 2), 1 << 14, 21, 0);
  double combined = std::hypot(rep.stderr_vh, rep.stderr_vh_empirical);
  CHECK(std::abs(rep.vh_sharpness - rep.vh_empirical) < 5.0 * combined);
}

TEST_CASE("sweep derives seeds, isolates failures, and is reproducible") {
  std::vector<SchemeSpec> specs = {gqpea(2, 1), gqpea(3, 1), gqpea(2, 2)};
  auto entries = sweep(specs, 512, 5, 1);
  REQUIRE(entries.size() == 3);
  for (const auto& e : entries) {
    REQUIRE(e.report.has_value());
    CHECK(e.error.empty());
  }
  CHECK(entries[0].report->seed != entries[1].report->seed);

  auto again = sweep(specs, 512, 5, 1);
  for (size_t i = 0; i < entries.size(); ++i)
    CHECK(entries[i].report->mu_sharpness == again[i].report->mu_sharpness);

  // A failing spec must not disturb the others. Degenerate budget-zero runs
  // produce mu = 0 (infinite variance) rather than an error.
  SchemeSpec empty(AdaptiveSizeSpec{0, SizeObjective::kEntropyC,
                                    AdaptiveSizeSpec::kDefaultEntropyOffset, 0});
  auto mixed = sweep({gqpea(2, 1), empty}, 256, 5, 1);
  REQUIRE(mixed[0].report.has_value());
  REQUIRE(mixed[1].report.has_value());
  CHECK(mixed[1].report->mu_sharpness == 0.0);
  CHECK(std::isinf(mixed[1].report->vh_sharpness));
}

TEST_CASE("tail sensitivity check compares against a larger rerun") {
  SchemeSpec spec(NonadaptiveSpec{2, Schedule{3, 0, {}}});  // constant-M schedule
  TailSensitivity t = tail_sensitivity_check(spec, 1 << 10, 3, 0);
  CHECK(t.base.samples == (1ull << 10));
  CHECK(t.rerun.samples == (1ull << 12));
  CHECK(t.relative_shift >= 0.0);
  CHECK(t.flagged == (t.relative_shift > 0.10));
}

TEST_CASE("size-adaptive curve ends at the plain estimate") {
  SchemeSpec spec(AdaptiveSizeSpec{60, SizeObjective::kEntropyC,
                                   AdaptiveSizeSpec::kDefaultEntropyOffset, 6});
  auto curve = estimate_montecarlo_curve(spec, 128, 13, 1, 10);
  REQUIRE_FALSE(curve.empty());
  CHECK(curve.back().resources == 60);
  for (size_t i = 1; i < curve.size(); ++i)
    CHECK(curve[i - 1].resources < curve[i].resources);

  VarianceReport plain = estimate_montecarlo(spec, 128, 13, 1);
  CHECK(curve.back().mu_sharpness == doctest::Approx(plain.mu_sharpness).epsilon(1e-15));

  CHECK_THROWS_AS(estimate_montecarlo_curve(gqpea(2, 1), 128, 13, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("report JSON carries the full reproduction triple") {
  VarianceReport rep = estimate_montecarlo(gqpea(2, 1), 256, 17, 1);
  nlohmann::json j = rep.to_json();
  CHECK(j["scheme"]["variant"] == "generalized_qpea");
  CHECK(j["samples"] == 256);
  CHECK(j["seed"] == 17);
  CHECK(j["partitions"] == kMonteCarloBatches);
  CHECK(j["method"] == "montecarlo");
  CHECK(j.contains("mu_sharpness"));
  CHECK(j.contains("vh_empirical"));
}
