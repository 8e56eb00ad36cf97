#include "phaseest/experiment.hpp"

#include "phaseest/equivstate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace phaseest {

namespace {

using json = nlohmann::json;

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += "\"\"";
    q += c;
  }
  return q + "\"";
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* f : allowed)
      if (it.key() == f) { ok = true; break; }
    if (!ok) throw std::invalid_argument("config: unknown field '" + it.key() + "'");
  }
}

// Reference V_H values appended as extra columns when toggled on.
double heisenberg_vh(uint64_t n) {
  double s = heisenberg_limit_stddev(n);
  return s * s;
}

struct SchemeRefs {
  bool has_bound = false;
  double bound = 0.0;
};

SchemeRefs lower_bound_for(const SchemeSpec& spec) {
  SchemeRefs r;
  if (const auto* g = spec.get_if<GeneralizedQpeaSpec>(); g) {
    r.has_bound = true;
    r.bound = repetition_bound((2ull << g->k_max) - 1, g->copies);
  } else if (const auto* f = spec.get_if<FixedKSpec>(); f) {
    r.has_bound = true;
    r.bound = repetition_bound((2ull << f->k_max) - 1, f->copies);
  } else if (const auto* h = spec.get_if<HybridSpec>(); h) {
    if (h->singles > 0) {
      r.has_bound = true;
      r.bound = hybrid_bound((2ull << h->k_max) - 1, h->singles);
    }
  }
  return r;
}

std::string report_row(const ExperimentConfig& cfg, const VarianceReport& rep,
                       const std::string& status) {
  const SchemeSpec& s = rep.scheme;
  std::ostringstream os;
  os << kCsvSchemaVersion << ',' << s.name() << ',' << s.k_label() << ','
     << csv_quote(s.m_label()) << ',' << rep.resources << ',' << rep.samples << ','
     << rep.seed << ',' << fmt(rep.mu_sharpness) << ',' << fmt(rep.vh_sharpness) << ','
     << fmt(rep.vh_empirical) << ',' << fmt(rep.stderr_vh) << ','
     << fmt(rep.vh_times_n2());
  if (cfg.reference.heisenberg) os << ',' << fmt(heisenberg_vh(rep.resources));
  if (cfg.reference.sql) os << ',' << fmt(1.0 / static_cast<double>(rep.resources));
  if (cfg.reference.repetition_bound) {
    SchemeRefs r = lower_bound_for(s);
    os << ',' << (r.has_bound ? fmt(r.bound) : "");
  }
  if (!status.empty()) os << ',' << csv_quote(status);
  return os.str();
}

std::string report_header(const ExperimentConfig& cfg, bool with_status) {
  std::string h =
      "version,scheme,K,M,N,samples,seed,mu_sharpness,vh_sharpness,vh_empirical,"
      "stderr_vh,vh_times_n2";
  if (cfg.reference.heisenberg) h += ",heisenberg_vh";
  if (cfg.reference.sql) h += ",sql_vh";
  if (cfg.reference.repetition_bound) h += ",lower_bound_vh";
  if (with_status) h += ",status";
  return h;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  reject_unknown(j, {"command", "scheme", "schemes", "samples", "seed", "out", "threads",
                     "reference", "curve", "curve_stride", "states", "amplitudes", "in"});
  ExperimentConfig c;
  if (!j.contains("command")) throw std::invalid_argument("config: missing 'command'");
  c.command = j.at("command").get<std::string>();

  if (j.contains("scheme")) c.schemes.push_back(SchemeSpec::from_json(j.at("scheme")));
  if (j.contains("schemes"))
    for (const auto& js : j.at("schemes")) c.schemes.push_back(SchemeSpec::from_json(js));

  if (j.contains("samples")) c.samples = j.at("samples").get<uint64_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
  if (j.contains("curve")) c.curve = j.at("curve").get<bool>();
  if (j.contains("curve_stride")) c.curve_stride = j.at("curve_stride").get<uint64_t>();
  if (j.contains("amplitudes")) c.amplitudes = j.at("amplitudes").get<bool>();
  if (j.contains("in")) c.in = j.at("in").get<std::string>();

  if (j.contains("reference")) {
    const json& r = j.at("reference");
    reject_unknown(r, {"heisenberg", "sql", "repetition_bound"});
    if (r.contains("heisenberg")) c.reference.heisenberg = r.at("heisenberg").get<bool>();
    if (r.contains("sql")) c.reference.sql = r.at("sql").get<bool>();
    if (r.contains("repetition_bound"))
      c.reference.repetition_bound = r.at("repetition_bound").get<bool>();
  }

  if (j.contains("states")) {
    for (const auto& js : j.at("states")) {
      reject_unknown(js, {"kind", "n_k", "m"});
      CanonicalEntry e;
      e.kind = js.at("kind").get<std::string>();
      if (e.kind != "copies" && e.kind != "hybrid" && e.kind != "uniform")
        throw std::invalid_argument("config: unknown state kind '" + e.kind + "'");
      e.n_k = js.at("n_k").get<uint32_t>();
      e.m = e.kind == "uniform" ? 1 : js.at("m").get<uint32_t>();
      c.states.push_back(e);
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["command"] = command;
  if (!schemes.empty()) {
    j["schemes"] = json::array();
    for (const auto& s : schemes) j["schemes"].push_back(s.to_json());
  }
  j["samples"] = samples;
  j["seed"] = seed;
  j["out"] = out;
  j["threads"] = threads;
  j["reference"] = {{"heisenberg", reference.heisenberg},
                    {"sql", reference.sql},
                    {"repetition_bound", reference.repetition_bound}};
  j["curve"] = curve;
  j["curve_stride"] = curve_stride;
  if (!states.empty()) {
    j["states"] = json::array();
    for (const auto& e : states)
      j["states"].push_back({{"kind", e.kind}, {"n_k", e.n_k}, {"m", e.m}});
  }
  j["amplitudes"] = amplitudes;
  if (!in.empty()) j["in"] = in;
  return j;
}

void ExperimentConfig::validate() const {
  static const char* known[] = {"simulate", "enumerate", "canonical", "sweep", "table"};
  if (std::find(std::begin(known), std::end(known), command) == std::end(known))
    throw std::invalid_argument("config: unknown command '" + command + "'");
  if ((command == "simulate" || command == "enumerate" || command == "sweep") &&
      schemes.empty())
    throw std::invalid_argument("config: command '" + command + "' needs schemes");
  if (command == "canonical" && states.empty())
    throw std::invalid_argument("config: command 'canonical' needs states");
  if (command == "table" && in.empty())
    throw std::invalid_argument("config: command 'table' needs an input CSV path");
  for (const auto& s : schemes) s.validate();
}

uint64_t ExperimentConfig::samples_for(const SchemeSpec& spec) const {
  if (samples != 0) return samples;
  // Nonadaptive runs are tail sensitive and get the larger default.
  return spec.get_if<NonadaptiveSpec>() ? (1ull << 20) : (1ull << 16);
}

std::string cmd_simulate(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << report_header(cfg, false) << '\n';
  for (const auto& spec : cfg.schemes) {
    uint64_t n_samples = cfg.samples_for(spec);
    if (cfg.curve && spec.get_if<AdaptiveSizeSpec>()) {
      for (const auto& rep :
           estimate_montecarlo_curve(spec, n_samples, cfg.seed, cfg.threads, cfg.curve_stride))
        os << report_row(cfg, rep, "") << '\n';
    } else {
      os << report_row(cfg, estimate_montecarlo(spec, n_samples, cfg.seed, cfg.threads), "")
         << '\n';
    }
  }
  return os.str();
}

std::string cmd_enumerate(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "version,scheme,K,M,N,branches,mu,vh,vh_times_n2\n";
  for (const auto& spec : cfg.schemes) {
    VarianceReport rep = enumerate_exact(spec);
    os << kCsvSchemaVersion << ',' << spec.name() << ',' << spec.k_label() << ','
       << csv_quote(spec.m_label()) << ',' << rep.resources << ',' << rep.samples << ','
       << fmt(rep.mu_sharpness) << ',' << fmt(rep.vh_sharpness) << ','
       << fmt(rep.vh_times_n2()) << '\n';
  }
  return os.str();
}

std::string cmd_canonical(const ExperimentConfig& cfg) {
  std::ostringstream os;
  auto table_for = [](const ExperimentConfig::CanonicalEntry& e) {
    if (e.kind == "copies") return copies_table(e.n_k, e.m);
    if (e.kind == "hybrid") return hybrid_table(e.n_k, e.m);
    return uniform_table(e.n_k);
  };
  if (cfg.amplitudes) {
    os << "version,kind,n_k,m,n,f,psi_sq\n";
    for (const auto& e : cfg.states) {
      CountTable t = table_for(e);
      TwoModeState s = state_from_table(t);
      for (size_t n = 0; n < s.amps.size(); ++n)
        os << kCsvSchemaVersion << ',' << e.kind << ',' << e.n_k << ',' << e.m << ',' << n
           << ',' << t.counts[n].str() << ',' << fmt(s.amps[n] * s.amps[n]) << '\n';
    }
    return os.str();
  }
  os << "version,kind,n_k,m,n,mu,vc,vh,vh_times_n2,mean_n,var_n";
  if (cfg.reference.heisenberg) os << ",heisenberg_vh";
  if (cfg.reference.sql) os << ",sql_vh";
  if (cfg.reference.repetition_bound) os << ",lower_bound_vh";
  os << '\n';
  for (const auto& e : cfg.states) {
    TwoModeState s = state_from_table(table_for(e));
    double mu = canonical_mu(s);
    double vh = holevo_from_mu(mu);
    uint64_t n = s.total_n();
    Moments mom = number_moments(s);
    os << kCsvSchemaVersion << ',' << e.kind << ',' << e.n_k << ',' << e.m << ',' << n << ','
       << fmt(mu) << ',' << fmt(collett_variance(s)) << ',' << fmt(vh) << ','
       << fmt(vh * static_cast<double>(n) * static_cast<double>(n)) << ',' << fmt(mom.mean)
       << ',' << fmt(mom.variance);
    if (cfg.reference.heisenberg) os << ',' << fmt(heisenberg_vh(n));
    if (cfg.reference.sql) os << ',' << fmt(1.0 / static_cast<double>(n));
    if (cfg.reference.repetition_bound) {
      if (e.kind == "copies") os << ',' << fmt(repetition_bound(e.n_k, e.m));
      else if (e.kind == "hybrid") os << ',' << fmt(hybrid_bound(e.n_k, e.m));
      else os << ',' << fmt(repetition_bound(e.n_k, 1));
    }
    os << '\n';
  }
  return os.str();
}

std::string cmd_sweep(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << report_header(cfg, true) << '\n';
  std::vector<SweepEntry> entries;
  {
    std::vector<SchemeSpec> specs = cfg.schemes;
    // sweep() derives one seed per index; per-scheme sample defaults still apply.
    for (size_t i = 0; i < specs.size(); ++i) {
      SweepEntry e;
      try {
        e.report = estimate_montecarlo(specs[i], cfg.samples_for(specs[i]),
                                       derive_seed(cfg.seed, i), cfg.threads);
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
      entries.push_back(std::move(e));
    }
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].report) {
      os << report_row(cfg, *entries[i].report, "ok") << '\n';
    } else {
      VarianceReport empty;
      empty.scheme = cfg.schemes[i];
      empty.resources = 0;
      empty.samples = 0;
      empty.seed = derive_seed(cfg.seed, i);
      empty.mu_sharpness = empty.vh_sharpness = empty.mu_empirical = empty.vh_empirical =
          empty.stderr_vh = std::numeric_limits<double>::quiet_NaN();
      os << report_row(cfg, empty, "error: " + entries[i].error) << '\n';
    }
  }
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') { field += '"'; ++i; }
        else quoted = false;
      } else field += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

struct FitGroup {
  std::vector<double> log_n;
  std::vector<double> log_vh;
};

// Table I scaling classes, as exponents of N.
std::string claimed_exponent(const std::string& scheme, const std::string& m_label) {
  if (scheme == "generalized_qpea") {
    long m = std::strtol(m_label.c_str(), nullptr, 10);
    if (m <= 2) return "-1";
    if (m == 3) return "-1.5";
    return "-2";
  }
  if (scheme == "fixed_k") return "-1";
  if (scheme == "nonadaptive") {
    if (m_label.find("+0*") != std::string::npos) return "-2 (ln N factor)";
    return "-2";
  }
  if (scheme == "hybrid") return "-1.5";
  if (scheme == "adaptive_size") return "-2";
  return "?";
}

}  // namespace

std::string cmd_table(const ExperimentConfig& cfg) {
  std::ifstream in(cfg.in);
  if (!in) throw std::runtime_error("table: cannot open '" + cfg.in + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto rows = parse_csv(buf.str());
  if (rows.size() < 2) throw std::runtime_error("table: no data rows");

  const auto& header = rows.front();
  auto col = [&](const std::string& name) -> int {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  };
  int c_scheme = col("scheme"), c_m = col("M"), c_n = col("N"), c_vh = col("vh_sharpness");
  if (c_vh < 0) c_vh = col("vh");
  if (c_scheme < 0 || c_m < 0 || c_n < 0 || c_vh < 0)
    throw std::runtime_error("table: input is missing scheme/M/N/vh columns");

  std::map<std::pair<std::string, std::string>, FitGroup> groups;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() <= static_cast<size_t>(std::max({c_scheme, c_m, c_n, c_vh}))) continue;
    double n = std::atof(row[c_n].c_str());
    double vh = std::atof(row[c_vh].c_str());
    if (!(n > 0.0) || !(vh > 0.0) || !std::isfinite(vh)) continue;
    groups[{row[c_scheme], row[c_m]}].log_n.push_back(std::log(n));
    groups[{row[c_scheme], row[c_m]}].log_vh.push_back(std::log(vh));
  }

  std::ostringstream os;
  os << "scheme               M                    points  fitted_slope  claimed\n";
  for (const auto& [key, g] : groups) {
    // Count distinct N values; refuse to fit on fewer than 4.
    std::vector<double> xs = g.log_n;
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    char line[160];
    if (xs.size() < 4) {
      std::snprintf(line, sizeof line, "%-20s %-20s %6zu  %12s  %s\n", key.first.c_str(),
                    key.second.c_str(), g.log_n.size(), "(<4 N values)",
                    claimed_exponent(key.first, key.second).c_str());
      os << line;
      continue;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t n = g.log_n.size();
    for (size_t i = 0; i < n; ++i) {
      sx += g.log_n[i];
      sy += g.log_vh[i];
      sxx += g.log_n[i] * g.log_n[i];
      sxy += g.log_n[i] * g.log_vh[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    std::snprintf(line, sizeof line, "%-20s %-20s %6zu  %12.4f  %s\n", key.first.c_str(),
                  key.second.c_str(), n, slope,
                  claimed_exponent(key.first, key.second).c_str());
    os << line;
  }
  return os.str();
}

std::string run_command(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.command == "simulate") return cmd_simulate(cfg);
  if (cfg.command == "enumerate") return cmd_enumerate(cfg);
  if (cfg.command == "canonical") return cmd_canonical(cfg);
  if (cfg.command == "sweep") return cmd_sweep(cfg);
  return cmd_table(cfg);
}

}  // namespace phaseest
