#include "phaseest/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace phaseest {

namespace {

using json = nlohmann::json;

constexpr double kRenormFloor = 1e-60;

void require_fields(const json& j, std::initializer_list<const char*> required,
                    std::initializer_list<const char*> optional) {
  for (const char* f : required)
    if (!j.contains(f)) throw std::invalid_argument(std::string("scheme: missing field '") + f + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto in = [&](std::initializer_list<const char*> set) {
      for (const char* f : set)
        if (it.key() == f) return true;
      return false;
    };
    if (!in(required) && !in(optional))
      throw std::invalid_argument("scheme: unknown field '" + it.key() + "'");
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

uint32_t Schedule::at(uint32_t k_max, uint32_t k) const {
  if (!values.empty()) {
    if (k > k_max || values.size() != k_max + 1)
      throw std::invalid_argument("schedule: values must cover k = K..0");
    return values[k_max - k];
  }
  return base + slope * (k_max - k);
}

std::string Schedule::label() const {
  if (!values.empty()) {
    std::string s = "values[";
    for (size_t i = 0; i < values.size(); ++i)
      s += (i ? " " : "") + std::to_string(values[i]);
    return s + "]";
  }
  return std::to_string(base) + "+" + std::to_string(slope) + "*(K-k)";
}

void SchemeSpec::validate() const {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedQpeaSpec> || std::is_same_v<T, FixedKSpec>) {
          if (s.copies < 1) throw std::invalid_argument("scheme: M must be >= 1");
          if (s.k_max > 30) throw std::invalid_argument("scheme: K too large");
        } else if constexpr (std::is_same_v<T, NonadaptiveSpec>) {
          if (s.k_max > 30) throw std::invalid_argument("scheme: K too large");
          if (!s.schedule.values.empty() && s.schedule.values.size() != s.k_max + 1)
            throw std::invalid_argument("scheme: schedule values must cover k = K..0");
          for (uint32_t k = 0; k <= s.k_max; ++k)
            if (s.schedule.at(s.k_max, k) < 1)
              throw std::invalid_argument("scheme: schedule entries must be positive");
        } else if constexpr (std::is_same_v<T, HybridSpec>) {
          if (s.k_max > 30) throw std::invalid_argument("scheme: K too large");
        } else if constexpr (std::is_same_v<T, AdaptiveSizeSpec>) {
          if (s.budget < s.warmup_singles)
            throw std::invalid_argument("scheme: budget must cover the warmup");
        }
      },
      v_);
}

bool SchemeSpec::fixed_sequence() const {
  return !std::holds_alternative<AdaptiveSizeSpec>(v_);
}

uint64_t SchemeSpec::nominal_resources() const {
  return std::visit(
      [](const auto& s) -> uint64_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedQpeaSpec> || std::is_same_v<T, FixedKSpec>) {
          return static_cast<uint64_t>(s.copies) * ((2ull << s.k_max) - 1);
        } else if constexpr (std::is_same_v<T, NonadaptiveSpec>) {
          uint64_t n = 0;
          for (uint32_t k = 0; k <= s.k_max; ++k)
            n += static_cast<uint64_t>(s.schedule.at(s.k_max, k)) << k;
          return n;
        } else if constexpr (std::is_same_v<T, HybridSpec>) {
          return ((2ull << s.k_max) - 1) + s.singles;
        } else {
          return s.budget;
        }
      },
      v_);
}

uint64_t SchemeSpec::detection_count() const {
  return std::visit(
      [](const auto& s) -> uint64_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedQpeaSpec> || std::is_same_v<T, FixedKSpec>) {
          return static_cast<uint64_t>(s.copies) * (s.k_max + 1);
        } else if constexpr (std::is_same_v<T, NonadaptiveSpec>) {
          uint64_t n = 0;
          for (uint32_t k = 0; k <= s.k_max; ++k) n += s.schedule.at(s.k_max, k);
          return n;
        } else if constexpr (std::is_same_v<T, HybridSpec>) {
          return s.k_max + 1 + s.singles;
        } else {
          throw std::logic_error("detection_count: not defined for size-adaptive runs");
        }
      },
      v_);
}

std::string SchemeSpec::name() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedQpeaSpec>) return "generalized_qpea";
        else if constexpr (std::is_same_v<T, FixedKSpec>) return "fixed_k";
        else if constexpr (std::is_same_v<T, NonadaptiveSpec>) return "nonadaptive";
        else if constexpr (std::is_same_v<T, HybridSpec>) return "hybrid";
        else return "adaptive_size";
      },
      v_);
}

std::string SchemeSpec::k_label() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, AdaptiveSizeSpec>) return "";
        else return std::to_string(s.k_max);
      },
      v_);
}

std::string SchemeSpec::m_label() const {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedQpeaSpec> || std::is_same_v<T, FixedKSpec>)
          return std::to_string(s.copies);
        else if constexpr (std::is_same_v<T, NonadaptiveSpec>)
          return s.schedule.label();
        else if constexpr (std::is_same_v<T, HybridSpec>)
          return std::to_string(s.singles);
        else {
          switch (s.objective) {
            case SizeObjective::kVhN2: return "vh_n2";
            case SizeObjective::kEntropyC: return "entropy_c";
            default: return "entropy_equalprob";
          }
        }
      },
      v_);
}

json SchemeSpec::to_json() const {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GeneralizedQpeaSpec>) {
          j = {{"variant", "generalized_qpea"}, {"K", s.k_max}, {"M", s.copies}};
        } else if constexpr (std::is_same_v<T, FixedKSpec>) {
          j = {{"variant", "fixed_k"}, {"K", s.k_max}, {"M", s.copies}};
        } else if constexpr (std::is_same_v<T, NonadaptiveSpec>) {
          j = {{"variant", "nonadaptive"}, {"K", s.k_max}};
          if (!s.schedule.values.empty())
            j["schedule"] = {{"values", s.schedule.values}};
          else
            j["schedule"] = {{"base", s.schedule.base}, {"slope", s.schedule.slope}};
          j["grid"] = "half_period";
        } else if constexpr (std::is_same_v<T, HybridSpec>) {
          j = {{"variant", "hybrid"},
               {"K", s.k_max},
               {"M", s.singles},
               {"increment",
                s.increment == HybridIncrement::kPiOverM ? "pi_over_m" : "pi_over_2"}};
        } else {
          const char* obj = s.objective == SizeObjective::kVhN2 ? "vh_n2"
                            : s.objective == SizeObjective::kEntropyC ? "entropy_c"
                                                                      : "entropy_equalprob";
          j = {{"variant", "adaptive_size"},
               {"budget", s.budget},
               {"objective", obj},
               {"C", s.entropy_offset},
               {"warmup", s.warmup_singles}};
        }
      },
      v_);
  return j;
}

SchemeSpec SchemeSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("variant"))
    throw std::invalid_argument("scheme: expected an object with a 'variant' field");
  std::string variant = j.at("variant").get<std::string>();
  if (variant == "generalized_qpea" || variant == "fixed_k") {
    require_fields(j, {"variant", "K", "M"}, {});
    uint32_t k = j.at("K").get<uint32_t>(), m = j.at("M").get<uint32_t>();
    if (variant == "fixed_k") return SchemeSpec(FixedKSpec{k, m});
    return SchemeSpec(GeneralizedQpeaSpec{k, m});
  }
  if (variant == "nonadaptive") {
    require_fields(j, {"variant", "K", "schedule"}, {"grid"});
    NonadaptiveSpec s;
    s.k_max = j.at("K").get<uint32_t>();
    const json& sch = j.at("schedule");
    if (sch.contains("values")) {
      require_fields(sch, {"values"}, {});
      s.schedule.values = sch.at("values").get<std::vector<uint32_t>>();
    } else {
      require_fields(sch, {"base", "slope"}, {});
      s.schedule.base = sch.at("base").get<uint32_t>();
      s.schedule.slope = sch.at("slope").get<uint32_t>();
    }
    if (j.contains("grid") && j.at("grid").get<std::string>() != "half_period")
      throw std::invalid_argument("scheme: unknown grid policy");
    return SchemeSpec(std::move(s));
  }
  if (variant == "hybrid") {
    require_fields(j, {"variant", "K", "M"}, {"increment"});
    HybridSpec s;
    s.k_max = j.at("K").get<uint32_t>();
    s.singles = j.at("M").get<uint32_t>();
    if (j.contains("increment")) {
      std::string inc = j.at("increment").get<std::string>();
      if (inc == "pi_over_m") s.increment = HybridIncrement::kPiOverM;
      else if (inc == "pi_over_2") s.increment = HybridIncrement::kPiOverTwo;
      else throw std::invalid_argument("scheme: unknown increment '" + inc + "'");
    }
    return SchemeSpec(s);
  }
  if (variant == "adaptive_size") {
    require_fields(j, {"variant", "budget", "objective"}, {"C", "warmup"});
    AdaptiveSizeSpec s;
    s.budget = j.at("budget").get<uint64_t>();
    std::string obj = j.at("objective").get<std::string>();
    if (obj == "vh_n2") s.objective = SizeObjective::kVhN2;
    else if (obj == "entropy_c") s.objective = SizeObjective::kEntropyC;
    else if (obj == "entropy_equalprob") s.objective = SizeObjective::kEntropyEqualProb;
    else throw std::invalid_argument("scheme: unknown objective '" + obj + "'");
    if (j.contains("C")) s.entropy_offset = j.at("C").get<double>();
    if (j.contains("warmup")) s.warmup_singles = j.at("warmup").get<uint32_t>();
    return SchemeSpec(s);
  }
  throw std::invalid_argument("scheme: unknown variant '" + variant + "'");
}

std::string TrialRecord::csv_row() const {
  std::string bits(outcomes.size(), '0');
  for (size_t i = 0; i < outcomes.size(); ++i) bits[i] = outcomes[i] ? '1' : '0';
  std::string row = format_double(phi_true) + "," + format_double(phi1) + "," +
                    format_double(relative_phase) + "," + bits + "," +
                    std::to_string(resources) + "," + format_double(estimate) + "," +
                    format_double(final_sharpness);
  return row;
}

const char* TrialRecord::csv_header() {
  return "phi_true,phi1,relative_phase,outcomes,resources,estimate,final_sharpness";
}

int noon_outcome_sampler(double phi_true, double feedback, uint32_t nu, TrialRng& rng) {
  double p0 = noon_outcome_prob(0, phi_true, nu, FeedbackPhase{feedback, true});
  return rng.next_unit() < p0 ? 0 : 1;
}

namespace {

// ---------------------------------------------------------------------------
// Fixed-sequence plans.
//
// A plan is one row per NOON size; running it means, for each row, `reps`
// detections at size nu = 2^level. `window` is the coefficient order kept
// while at that level: at entry to level k, the final level-0 harmonic 1 can
// only be influenced by harmonics j with
//
//   j * 2^k  <=  1 + sum_{k' <= k} reps_{k'} * 2^{k'}
//
// (every remaining detection shifts the level-0 harmonic index by at most
// its photon number). For constant-M sequences this reduces to the 2M
// window; rerunning with a larger window leaves the final c_1 unchanged.
// ---------------------------------------------------------------------------

struct PlanRow {
  enum Kind { kAdaptive, kGrid, kIncrement };
  int level = 0;
  uint32_t nu = 1;
  uint32_t reps = 1;
  int window = 2;
  Kind kind = kAdaptive;
  double increment = 0.0;  // kIncrement only
};

std::vector<PlanRow> window_from_capacity(std::vector<PlanRow> rows) {
  // Capacity below each level, accumulated from the bottom of the plan.
  uint64_t capacity = 0;
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    capacity += static_cast<uint64_t>(it->reps) * it->nu;
    it->window = static_cast<int>((1 + capacity) >> it->level);
  }
  // Rows sharing a level share the widest window among them.
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].level == rows[i - 1].level)
      rows[i - 1].window = rows[i].window = std::max(rows[i].window, rows[i - 1].window);
  return rows;
}

std::vector<PlanRow> build_plan(const SchemeSpec& spec) {
  std::vector<PlanRow> rows;
  if (const auto* g = spec.get_if<GeneralizedQpeaSpec>(); g) {
    for (int k = static_cast<int>(g->k_max); k >= 0; --k)
      rows.push_back({k, 1u << k, g->copies, static_cast<int>(2 * g->copies),
                      PlanRow::kAdaptive, 0.0});
    return rows;
  }
  if (const auto* f = spec.get_if<FixedKSpec>(); f) {
    for (int k = static_cast<int>(f->k_max); k >= 0; --k)
      rows.push_back({k, 1u << k, f->copies, static_cast<int>(2 * f->copies),
                      PlanRow::kAdaptive, 0.0});
    return rows;
  }
  if (const auto* n = spec.get_if<NonadaptiveSpec>(); n) {
    for (int k = static_cast<int>(n->k_max); k >= 0; --k)
      rows.push_back({k, 1u << k, n->schedule.at(n->k_max, static_cast<uint32_t>(k)), 2,
                      PlanRow::kGrid, 0.0});
    return window_from_capacity(std::move(rows));
  }
  if (const auto* h = spec.get_if<HybridSpec>(); h) {
    for (int k = static_cast<int>(h->k_max); k >= 0; --k)
      rows.push_back({k, 1u << k, 1, 2, PlanRow::kAdaptive, 0.0});
    if (h->singles > 0)
      rows.push_back({0, 1, h->singles, 2, PlanRow::kIncrement,
                      h->increment == HybridIncrement::kPiOverM ? kPi / h->singles
                                                                : 0.5 * kPi});
    return window_from_capacity(std::move(rows));
  }
  throw std::logic_error("build_plan: scheme has no fixed sequence");
}

// Grid fallback: repetition m of an M-fold level-k block sits at
// 2^k Theta = m pi / M.
double grid_phase(const PlanRow& row, uint32_t rep) {
  return wrap_angle(rep * kPi / (static_cast<double>(row.reps) * row.nu));
}

double row_feedback(const PlanRow& row, uint32_t rep, const PhaseLikelihood& L,
                    double prev_theta) {
  switch (row.kind) {
    case PlanRow::kGrid:
      return grid_phase(row, rep);
    case PlanRow::kIncrement:
      return wrap_angle(prev_theta + row.increment);
    case PlanRow::kAdaptive:
    default: {
      FeedbackPhase fb = rep == 0 ? optimal_feedback(L)
                                  : maximize_expected_sharpness(L, 1, 1);
      return fb.informative ? fb.value : grid_phase(row, rep);
    }
  }
}

// Descend one level and apply the new row's window. The cap is raised before
// the rescale so the doubling itself never discards harmonics.
PhaseLikelihood enter_row(PhaseLikelihood L, const PlanRow& row) {
  while (L.level() > row.level) {
    L = truncated(std::move(L), std::max(2 * L.top_harmonic(), 1));
    L = rescale_level(L);
  }
  return truncated(std::move(L), row.window);
}

struct PlanOutcome {
  double relative_estimate = 0.0;
  double sharpness = 0.0;
  uint64_t resources = 0;
};

// Runs a plan in the relative frame. `sample` is called as
// sample(theta, nu, L) and must return the detection result.
template <typename Sampler>
PlanOutcome run_plan(const std::vector<PlanRow>& plan, const Sampler& sample,
                     std::vector<uint8_t>* outcomes, std::vector<double>* feedback) {
  PhaseLikelihood L = flat_likelihood(plan.front().window, plan.front().level);
  double prev_theta = 0.0;
  uint64_t used = 0;
  for (const PlanRow& row : plan) {
    if (L.level() > row.level || L.max_order() != row.window) L = enter_row(std::move(L), row);
    for (uint32_t rep = 0; rep < row.reps; ++rep) {
      double theta = row_feedback(row, rep, L, prev_theta);
      int u = sample(theta, row.nu, L);
      L = bayes_update(L, u, FeedbackPhase{theta, true}, row.nu);
      if (L.branch_weight() < kRenormFloor) L = L.normalized();
      prev_theta = theta;
      used += row.nu;
      if (outcomes) outcomes->push_back(static_cast<uint8_t>(u));
      if (feedback) feedback->push_back(theta);
    }
  }
  PlanOutcome out;
  out.resources = used;
  double c0 = L.branch_weight();
  double c1 = L.mu_weight();
  out.sharpness = c0 > 0.0 ? c1 / c0 : 0.0;
  out.relative_estimate = c1 > 0.0 ? L.phase_estimate() : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Size-adaptive engine (level 0 throughout, arbitrary NOON sizes).
// ---------------------------------------------------------------------------

struct SizeCandidates {
  uint32_t list[40];
  int count = 0;
};

// Sizes 1, 1 + ceil(N/100), ... up to min(ceil(N/3), remaining budget); at
// most 34 are searched regardless of the budget.
SizeCandidates size_candidates(uint64_t used, uint64_t remaining) {
  SizeCandidates c;
  uint64_t step = std::max<uint64_t>(1, (used + 99) / 100);
  uint64_t top = std::min(remaining, std::max<uint64_t>(1, (used + 2) / 3));
  for (uint64_t nu = 1; nu <= top && c.count < 34; nu += step)
    c.list[c.count++] = static_cast<uint32_t>(nu);
  return c;
}

double expected_objective(const AdaptiveSizeSpec& spec, const PhaseLikelihood& L,
                          uint32_t nu, double theta, uint64_t n_next) {
  constexpr double kLn2Pi = 1.8378770664093454835606594728112353;
  double c0 = L.branch_weight();
  double acc = 0.0;
  for (int u = 0; u < 2; ++u) {
    double w0 = bayes_update_coeff(L, 0, u, theta, nu).real();
    if (!(w0 > 0.0)) continue;
    double pu = w0 / c0;
    double mu = std::min(std::abs(bayes_update_coeff(L, 1, u, theta, nu)) / w0, 1.0);
    if (spec.objective == SizeObjective::kVhN2) {
      if (mu == 0.0) return std::numeric_limits<double>::infinity();
      acc += pu * (1.0 / (mu * mu) - 1.0);
    } else {
      double vc = std::max(2.0 * (1.0 - mu), 1e-300);
      acc += pu * 0.5 * (1.0 + kLn2Pi + std::log(vc));
    }
  }
  double n = static_cast<double>(std::max<uint64_t>(n_next, 2));
  switch (spec.objective) {
    case SizeObjective::kVhN2:
      return acc * static_cast<double>(n_next) * static_cast<double>(n_next);
    case SizeObjective::kEntropyC:
      return (acc + spec.entropy_offset) / std::log(n);
    default:
      return acc + 2.0 * std::log(n);
  }
}

template <typename Sampler>
PlanOutcome run_adaptive(const AdaptiveSizeSpec& spec, const Sampler& sample,
                         std::vector<uint8_t>* outcomes, std::vector<double>* feedback,
                         std::vector<TrialRecord::Intermediate>* intermediates,
                         CurveSink* sink) {
  int max_order = static_cast<int>(std::max<uint64_t>(spec.budget, 1));
  PhaseLikelihood L = flat_likelihood(max_order, 0);
  uint64_t used = 0;

  auto detect = [&](uint32_t nu, double theta) {
    int u = sample(theta, nu, L);
    L = bayes_update(L, u, FeedbackPhase{theta, true}, nu);
    if (L.branch_weight() < kRenormFloor) L = L.normalized();
    used += nu;
    if (outcomes) outcomes->push_back(static_cast<uint8_t>(u));
    if (feedback) feedback->push_back(theta);
    double c0 = L.branch_weight();
    double c1 = L.mu_weight();
    double sharp = c0 > 0.0 ? c1 / c0 : 0.0;
    double est = c1 > 0.0 ? L.phase_estimate() : 0.0;
    if (intermediates) intermediates->push_back({used, est, sharp});
    if (sink) sink->point(used, est, sharp);
  };

  // Warmup singles on a quarter-turn grid, no posterior feedback.
  for (uint32_t m = 0; m < spec.warmup_singles && used < spec.budget; ++m)
    detect(1, wrap_angle(m * 0.5 * kPi));

  while (used < spec.budget) {
    SizeCandidates cands = size_candidates(used, spec.budget - used);
    uint32_t best_nu = cands.list[0];
    double best_theta = 0.0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cands.count; ++i) {
      uint32_t nu = cands.list[i];
      FeedbackPhase fb = spec.objective == SizeObjective::kVhN2
                             ? maximize_expected_sharpness(L, nu, 1)
                             : equal_probability_feedback(L, nu);
      double val = expected_objective(spec, L, nu, fb.value, used + nu);
      if (val < best_val) {
        best_val = val;
        best_nu = nu;
        best_theta = fb.value;
      }
    }
    detect(best_nu, best_theta);
  }

  PlanOutcome out;
  out.resources = used;
  double c0 = L.branch_weight();
  double c1 = L.mu_weight();
  out.sharpness = c0 > 0.0 ? c1 / c0 : 0.0;
  out.relative_estimate = c1 > 0.0 ? L.phase_estimate() : 0.0;
  return out;
}

template <typename Sampler>
PlanOutcome run_any(const SchemeSpec& spec, const Sampler& sample,
                    std::vector<uint8_t>* outcomes, std::vector<double>* feedback,
                    std::vector<TrialRecord::Intermediate>* intermediates,
                    CurveSink* sink) {
  if (const auto* a = spec.get_if<AdaptiveSizeSpec>(); a)
    return run_adaptive(*a, sample, outcomes, feedback, intermediates, sink);
  return run_plan(build_plan(spec), sample, outcomes, feedback);
}

TrialRecord make_record(const SchemeSpec& spec, double phi_true, double phi1,
                        const std::function<int(double, uint32_t)>& sample_rel) {
  spec.validate();
  TrialRecord rec;
  rec.phi_true = wrap_angle(phi_true);
  rec.phi1 = wrap_angle(phi1);
  rec.relative_phase = wrap_angle(phi_true - phi1);
  auto sample = [&](double theta, uint32_t nu, const PhaseLikelihood&) {
    return sample_rel(theta, nu);
  };
  PlanOutcome out = run_any(spec, sample, &rec.outcomes, &rec.feedback,
                            &rec.intermediates, nullptr);
  rec.resources = out.resources;
  rec.final_sharpness = out.sharpness;
  rec.estimate = wrap_angle(out.relative_estimate + rec.phi1);
  for (double& th : rec.feedback) th = wrap_angle(th + rec.phi1);
  for (auto& p : rec.intermediates) p.estimate = wrap_angle(p.estimate + rec.phi1);
  return rec;
}

}  // namespace

TrialRecord run_trial(const SchemeSpec& spec, double phi_true, double phi1,
                      const OutcomeSource& source) {
  double aleph = wrap_angle(phi_true - phi1);
  double p1 = wrap_angle(phi1);
  // The source sees absolute phases; internally only the difference matters.
  return make_record(spec, phi_true, phi1, [&](double theta, uint32_t nu) {
    return source(aleph + p1, wrap_angle(theta + p1), nu);
  });
}

TrialRecord run_trial(const SchemeSpec& spec, double phi_true, double phi1,
                      TrialRng& rng) {
  double aleph = wrap_angle(phi_true - phi1);
  return make_record(spec, phi_true, phi1, [&](double theta, uint32_t nu) {
    return noon_outcome_sampler(aleph, theta, nu, rng);
  });
}

TrialRecord run_generalized_qpea(const GeneralizedQpeaSpec& s, double phi_true,
                                 double phi1, const OutcomeSource& source) {
  return run_trial(SchemeSpec(s), phi_true, phi1, source);
}
TrialRecord run_fixed_k(const FixedKSpec& s, double phi_true, double phi1,
                        const OutcomeSource& source) {
  return run_trial(SchemeSpec(s), phi_true, phi1, source);
}
TrialRecord run_nonadaptive(const NonadaptiveSpec& s, double phi_true, double phi1,
                            const OutcomeSource& source) {
  return run_trial(SchemeSpec(s), phi_true, phi1, source);
}
TrialRecord run_hybrid(const HybridSpec& s, double phi_true, double phi1,
                       const OutcomeSource& source) {
  return run_trial(SchemeSpec(s), phi_true, phi1, source);
}
TrialRecord run_adaptive_size(const AdaptiveSizeSpec& s, double phi_true, double phi1,
                              const OutcomeSource& source) {
  return run_trial(SchemeSpec(s), phi_true, phi1, source);
}

TrialStats run_trial_stats(const SchemeSpec& spec, double aleph, TrialRng& rng,
                           CurveSink* sink) {
  auto sample = [&](double theta, uint32_t nu, const PhaseLikelihood&) {
    return noon_outcome_sampler(aleph, theta, nu, rng);
  };
  PlanOutcome out = run_any(spec, sample, nullptr, nullptr, nullptr, sink);
  return {out.relative_estimate, out.sharpness, out.resources};
}

void for_each_branch(const SchemeSpec& spec,
                     const std::function<void(const BranchView&)>& visit) {
  spec.validate();
  if (!spec.fixed_sequence())
    throw std::invalid_argument("for_each_branch: scheme has no fixed outcome tree");
  std::vector<PlanRow> plan = build_plan(spec);
  std::vector<uint8_t> outcomes;
  std::vector<double> feedback;

  struct Frame {
    size_t row;
    uint32_t rep;
    double prev_theta;
  };
  std::function<void(const PhaseLikelihood&, Frame)> descend =
      [&](const PhaseLikelihood& L, Frame f) {
        if (f.row == plan.size()) {
          visit(BranchView{outcomes, feedback, L});
          return;
        }
        const PlanRow& row = plan[f.row];
        PhaseLikelihood cur =
            (f.rep == 0 && (L.level() > row.level || L.max_order() != row.window))
                ? enter_row(L, row)
                : L;
        double theta = row_feedback(row, f.rep, cur, f.prev_theta);
        Frame next{f.row, f.rep + 1, theta};
        if (next.rep == row.reps) {
          next.row = f.row + 1;
          next.rep = 0;
        }
        for (int u = 0; u < 2; ++u) {
          outcomes.push_back(static_cast<uint8_t>(u));
          feedback.push_back(theta);
          descend(bayes_update(cur, u, FeedbackPhase{theta, true}, row.nu), next);
          outcomes.pop_back();
          feedback.pop_back();
        }
      };
  descend(flat_likelihood(plan.front().window, plan.front().level), {0, 0, 0.0});
}

}  // namespace phaseest
