#pragma once

#include "phaseest/montecarlo.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace phaseest {

inline constexpr int kCsvSchemaVersion = 1;

// One JSON document drives every command; unknown fields are rejected and
// whatever the config leaves implicit is materialized into the emitted rows,
// so any row can be recomputed from its own (scheme, seed, samples) triple.
struct ExperimentConfig {
  std::string command;  // simulate | enumerate | canonical | sweep | table

  std::vector<SchemeSpec> schemes;
  uint64_t samples = 0;  // 0: per-scheme default (2^20 nonadaptive, else 2^16)
  uint64_t seed = 1;
  std::string out;       // empty: stdout
  unsigned threads = 1;

  struct ReferenceCurves {
    bool heisenberg = false;
    bool sql = false;
    bool repetition_bound = false;
  } reference;

  bool curve = false;        // simulate: per-N rows for size-adaptive schemes
  uint64_t curve_stride = 1;

  struct CanonicalEntry {
    std::string kind;  // copies | hybrid | uniform
    uint32_t n_k = 1;
    uint32_t m = 1;
  };
  std::vector<CanonicalEntry> states;
  bool amplitudes = false;  // canonical: per-n (n, f(n), psi_n^2) rows

  std::string in;  // table: CSV produced by simulate/sweep

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
  void validate() const;

  uint64_t samples_for(const SchemeSpec& spec) const;
};

// Executes the configured command and returns the full output document
// (CSV for simulate/enumerate/canonical/sweep, plain text for table).
// Deterministic: rerunning the same config yields byte-identical output.
std::string run_command(const ExperimentConfig& config);

std::string cmd_simulate(const ExperimentConfig& config);
std::string cmd_enumerate(const ExperimentConfig& config);
std::string cmd_canonical(const ExperimentConfig& config);
std::string cmd_sweep(const ExperimentConfig& config);
std::string cmd_table(const ExperimentConfig& config);

// Minimal RFC-4180 reader used by cmd_table (and tests).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace phaseest
