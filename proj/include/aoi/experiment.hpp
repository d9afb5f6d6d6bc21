#pragma once
// Config-driven experiment runner.  Parses a JSON experiment description,
// dispatches to the analysis / simulation / optimization layers, and writes
// CSV data files with a '#' metadata preamble (config echo + seed) so every
// artifact is reproducible from its own header.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aoi/analysis.hpp"
#include "aoi/model.hpp"
#include "aoi/optimize.hpp"
#include "aoi/simulate.hpp"

namespace aoi {

// Configuration problem tied to a specific field, reported as "path: message"
// (e.g. "sweep.count: must be >= 2").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& msg)
      : std::runtime_error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

enum class Mode { evaluate, simulate, validate, sweep, optimize, pareto };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::evaluate: return "evaluate";
    case Mode::simulate: return "simulate";
    case Mode::validate: return "validate";
    case Mode::sweep: return "sweep";
    case Mode::optimize: return "optimize";
    case Mode::pareto: return "pareto";
  }
  return "evaluate";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::evaluate, Mode::simulate, Mode::validate, Mode::sweep,
                 Mode::optimize, Mode::pareto})
    if (s == mode_name(m)) return m;
  throw ConfigError("mode", "unknown mode '" + s +
                                "' (expected evaluate, simulate, validate, "
                                "sweep, optimize, or pareto)");
}

struct SweepSpec {
  std::string parameter;  // lambda | T_o | alpha | B0 | k | p_c | C_avg | mean_P
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

struct ValidateSpec {
  int n_sets = 20;
  // A row passes when |closed_form - simulated| <= max(tolerance * |closed_form|,
  // 3 * ci_half_width).
  double tolerance = 0.01;
};

// Named override applied on top of the base config (RFC 7386 merge patch);
// each variant produces its own output file "<stem>_<label><ext>".
struct VariantSpec {
  std::string label;
  nlohmann::json patch;
};

struct ExperimentConfig {
  Mode mode = Mode::evaluate;
  SystemParams params;
  double gamma_k = 0.1;       // compute-time shape
  double mean_compute = 0.5;  // E[P] used by evaluate / simulate
  CouplingModel coupling;
  SimConfig sim;
  SearchSpec search;
  SweepSpec sweep;
  std::vector<std::pair<double, double>> weights;  // pareto mode
  ValidateSpec validate;
  std::vector<VariantSpec> variants;
  std::string out = "results.csv";
};

struct ExperimentResult {
  int exit_code = 0;  // 0 success, 2 validation failures
  std::string report;
  std::vector<std::string> files;
};

namespace expdetail {

using nlohmann::json;

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
}

inline void allow_keys(const json& j, const std::string& prefix,
                       std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(join_path(prefix, it.key()), "unknown field");
  }
}

inline double get_num(const json& j, const std::string& prefix, const char* key,
                      double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join_path(prefix, key), "expected a number");
  return v.get<double>();
}

inline std::int64_t get_int(const json& j, const std::string& prefix,
                            const char* key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer())
    throw ConfigError(join_path(prefix, key), "expected an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t get_u64(const json& j, const std::string& prefix,
                             const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ConfigError(join_path(prefix, key), "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::string get_str(const json& j, const std::string& prefix,
                           const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join_path(prefix, key), "expected a string");
  return v.get<std::string>();
}

inline std::optional<double> get_opt_num(const json& j, const std::string& prefix,
                                         const char* key,
                                         std::optional<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number())
    throw ConfigError(join_path(prefix, key), "expected a number or null");
  return v.get<double>();
}

// splitmix64-style finalizer; decorrelates derived seeds per purpose.
inline std::uint64_t mix64(std::uint64_t x, std::uint64_t stream) {
  x += 0x9E3779B97F4A7C15ull * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double canon(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double unif(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * canon(g);
}

}  // namespace expdetail

// One random operating point spanning the supported domain: feasible under
// the power budget, deadline within the OFF window, and transmission slow
// enough (mu >= 0.05) that simulations exercise contention.
struct DrawnSet {
  SystemParams params;
  double mean_compute = 0.0;
  double gamma_k = 0.0;
  CouplingModel coupling;
};

inline DrawnSet draw_feasible_set(std::mt19937_64& g) {
  using expdetail::unif;
  for (;;) {
    SystemParams p;
    p.lambda = unif(g, 0.2, 2.0);
    p.T_o = unif(g, 0.5, 6.0);
    p.tau = unif(g, 0.0, 1.0) * p.T_o;
    p.p_c = unif(g, 2.0, 12.0);
    p.C_avg = unif(g, 0.8, 1.5);
    CouplingModel cm{unif(g, 1.0, 10.0), unif(g, 0.0, 2.0)};
    const double k = std::exp(unif(g, std::log(0.005), std::log(1.0)));
    const Feasibility f = max_feasible_mean_compute(p);
    if (f.infeasible()) continue;
    const double hi = f.unbounded() ? 3.0 : std::min(f.max_mean_P, 3.0);
    if (!(hi > 0.02)) continue;
    const double mp = 0.02 + unif(g, 0.0, 1.0) * (hi - 0.02);
    if (transmission_rate(cm, mp) < 0.05) continue;
    if (p.T_o + 1.0 / p.lambda + mp > 15.0) continue;  // keep cycles short
    return {p, mp, k, cm};
  }
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using namespace expdetail;
  require_object(j, "config");
  allow_keys(j, "", {"mode", "params", "compute", "coupling", "sim", "search",
                     "sweep", "weights", "validate", "variants", "out"});
  ExperimentConfig c;
  c.mode = parse_mode(get_str(j, "", "mode", "evaluate"));

  if (j.contains("params")) {
    const json& b = j.at("params");
    require_object(b, "params");
    allow_keys(b, "params",
               {"lambda", "T_o", "tau", "p_c", "C_avg", "omega1", "omega2"});
    c.params.lambda = get_num(b, "params", "lambda", c.params.lambda);
    c.params.T_o = get_num(b, "params", "T_o", c.params.T_o);
    c.params.tau = get_num(b, "params", "tau", c.params.tau);
    c.params.p_c = get_num(b, "params", "p_c", c.params.p_c);
    c.params.C_avg = get_num(b, "params", "C_avg", c.params.C_avg);
    c.params.omega1 = get_num(b, "params", "omega1", c.params.omega1);
    c.params.omega2 = get_num(b, "params", "omega2", c.params.omega2);
  }
  if (j.contains("compute")) {
    const json& b = j.at("compute");
    require_object(b, "compute");
    allow_keys(b, "compute", {"k", "mean_P"});
    c.gamma_k = get_num(b, "compute", "k", c.gamma_k);
    c.mean_compute = get_num(b, "compute", "mean_P", c.mean_compute);
  }
  if (j.contains("coupling")) {
    const json& b = j.at("coupling");
    require_object(b, "coupling");
    allow_keys(b, "coupling", {"B0", "alpha"});
    c.coupling.B0 = get_num(b, "coupling", "B0", c.coupling.B0);
    c.coupling.alpha = get_num(b, "coupling", "alpha", c.coupling.alpha);
  }
  if (j.contains("sim")) {
    const json& b = j.at("sim");
    require_object(b, "sim");
    allow_keys(b, "sim",
               {"variant", "target_deliveries", "horizon_time", "warmup_fraction",
                "warmup_time", "seed", "replications", "ci_rel_tolerance"});
    const std::string var = get_str(b, "sim", "variant", "original");
    if (var == "original")
      c.sim.variant = SimVariant::original;
    else if (var == "equivalent")
      c.sim.variant = SimVariant::equivalent;
    else
      throw ConfigError("sim.variant", "expected \"original\" or \"equivalent\"");
    c.sim.target_deliveries =
        get_u64(b, "sim", "target_deliveries", c.sim.target_deliveries);
    c.sim.horizon_time = get_num(b, "sim", "horizon_time", c.sim.horizon_time);
    c.sim.warmup_fraction =
        get_num(b, "sim", "warmup_fraction", c.sim.warmup_fraction);
    c.sim.warmup_time = get_num(b, "sim", "warmup_time", c.sim.warmup_time);
    c.sim.seed = get_u64(b, "sim", "seed", c.sim.seed);
    const std::int64_t reps = get_int(b, "sim", "replications", c.sim.replications);
    if (reps < 1) throw ConfigError("sim.replications", "must be >= 1");
    c.sim.replications = static_cast<std::uint32_t>(reps);
    c.sim.ci_rel_tolerance =
        get_num(b, "sim", "ci_rel_tolerance", c.sim.ci_rel_tolerance);
  }
  if (j.contains("search")) {
    const json& b = j.at("search");
    require_object(b, "search");
    allow_keys(b, "search",
               {"n_tau", "n_meanP", "n_To", "To_min", "To_max",
                "refinement_rounds", "pin_tau", "pin_meanP", "pin_To",
                "meanP_min", "meanP_cap"});
    c.search.n_tau = static_cast<int>(get_int(b, "search", "n_tau", c.search.n_tau));
    c.search.n_meanP =
        static_cast<int>(get_int(b, "search", "n_meanP", c.search.n_meanP));
    c.search.n_To = static_cast<int>(get_int(b, "search", "n_To", c.search.n_To));
    c.search.To_min = get_num(b, "search", "To_min", c.search.To_min);
    c.search.To_max = get_num(b, "search", "To_max", c.search.To_max);
    c.search.refinement_rounds = static_cast<int>(
        get_int(b, "search", "refinement_rounds", c.search.refinement_rounds));
    c.search.pin_tau = get_opt_num(b, "search", "pin_tau", c.search.pin_tau);
    c.search.pin_meanP = get_opt_num(b, "search", "pin_meanP", c.search.pin_meanP);
    c.search.pin_To = get_opt_num(b, "search", "pin_To", c.search.pin_To);
    c.search.meanP_min = get_num(b, "search", "meanP_min", c.search.meanP_min);
    c.search.meanP_cap = get_num(b, "search", "meanP_cap", c.search.meanP_cap);
  }
  if (j.contains("sweep")) {
    const json& b = j.at("sweep");
    require_object(b, "sweep");
    allow_keys(b, "sweep", {"parameter", "lo", "hi", "count"});
    c.sweep.parameter = get_str(b, "sweep", "parameter", c.sweep.parameter);
    c.sweep.lo = get_num(b, "sweep", "lo", c.sweep.lo);
    c.sweep.hi = get_num(b, "sweep", "hi", c.sweep.hi);
    c.sweep.count = static_cast<int>(get_int(b, "sweep", "count", c.sweep.count));
  }
  if (j.contains("weights")) {
    const json& b = j.at("weights");
    if (!b.is_array()) throw ConfigError("weights", "expected a list of [omega1, omega2] pairs");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const json& w = b[i];
      const std::string path = "weights[" + std::to_string(i) + "]";
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
        throw ConfigError(path, "expected [omega1, omega2]");
      c.weights.emplace_back(w[0].get<double>(), w[1].get<double>());
    }
  }
  if (j.contains("validate")) {
    const json& b = j.at("validate");
    require_object(b, "validate");
    allow_keys(b, "validate", {"n_sets", "tolerance"});
    c.validate.n_sets =
        static_cast<int>(get_int(b, "validate", "n_sets", c.validate.n_sets));
    c.validate.tolerance = get_num(b, "validate", "tolerance", c.validate.tolerance);
  }
  if (j.contains("variants")) {
    const json& b = j.at("variants");
    if (!b.is_array()) throw ConfigError("variants", "expected a list");
    for (std::size_t i = 0; i < b.size(); ++i) {
      const std::string path = "variants[" + std::to_string(i) + "]";
      const json& v = b[i];
      require_object(v, path);
      VariantSpec spec;
      spec.label = get_str(v, path, "label", "");
      if (spec.label.empty()) throw ConfigError(path + ".label", "required");
      for (const VariantSpec& prev : c.variants)
        if (prev.label == spec.label)
          throw ConfigError(path + ".label", "duplicate label '" + spec.label + "'");
      spec.patch = v;
      spec.patch.erase("label");
      if (spec.patch.contains("variants"))
        throw ConfigError(path + ".variants", "cannot be overridden per variant");
      if (spec.patch.contains("out"))
        throw ConfigError(path + ".out", "cannot be overridden per variant");
      c.variants.push_back(std::move(spec));
    }
  }
  c.out = get_str(j, "", "out", c.out);
  if (c.out.empty()) throw ConfigError("out", "must be a non-empty path");

  // Semantic validation, mapped back to config paths.
  if (auto issues = param_issues(c.params); !issues.empty())
    throw ConfigError("params", issues.front());
  if (auto issues = coupling_issues(c.coupling); !issues.empty())
    throw ConfigError("coupling", issues.front());
  if (!(c.gamma_k > 0.0)) throw ConfigError("compute.k", "must be > 0");
  if (!(c.mean_compute > 0.0)) throw ConfigError("compute.mean_P", "must be > 0");
  if (c.sim.replications < 1) throw ConfigError("sim.replications", "must be >= 1");
  if (c.sim.target_deliveries == 0 && !(c.sim.horizon_time > 0.0))
    throw ConfigError("sim.horizon_time",
                      "must be > 0 when target_deliveries is 0");
  if (!(c.sim.warmup_fraction >= 0.0 && c.sim.warmup_fraction < 1.0))
    throw ConfigError("sim.warmup_fraction", "must lie in [0, 1)");
  if (!c.search.pin_tau && c.search.n_tau < 2)
    throw ConfigError("search.n_tau", "must be >= 2 when tau is free");
  if (!c.search.pin_meanP && c.search.n_meanP < 2)
    throw ConfigError("search.n_meanP", "must be >= 2 when E[P] is free");
  if (!c.search.pin_To && c.search.n_To < 2)
    throw ConfigError("search.n_To", "must be >= 2 when T_o is free");
  if (!(c.search.To_min >= 0.0)) throw ConfigError("search.To_min", "must be >= 0");
  if (!(c.search.To_max >= c.search.To_min))
    throw ConfigError("search.To_max", "must be >= To_min");
  if (c.search.refinement_rounds < 0)
    throw ConfigError("search.refinement_rounds", "must be >= 0");
  if (!(c.search.meanP_min > 0.0))
    throw ConfigError("search.meanP_min", "must be > 0");
  if (!(c.search.meanP_cap > c.search.meanP_min))
    throw ConfigError("search.meanP_cap", "must exceed meanP_min");
  if (c.search.pin_tau && !(*c.search.pin_tau >= 0.0))
    throw ConfigError("search.pin_tau", "must be >= 0");
  if (c.search.pin_meanP && !(*c.search.pin_meanP > 0.0))
    throw ConfigError("search.pin_meanP", "must be > 0");
  if (c.search.pin_To && !(*c.search.pin_To >= 0.0))
    throw ConfigError("search.pin_To", "must be >= 0");
  if (c.search.pin_tau && c.search.pin_To && *c.search.pin_tau > *c.search.pin_To)
    throw ConfigError("search.pin_tau", "exceeds pin_To");

  if (c.mode == Mode::sweep) {
    static constexpr const char* kParams[] = {"lambda", "T_o", "alpha", "B0",
                                              "k",      "p_c", "C_avg", "mean_P"};
    bool known = false;
    for (const char* s : kParams)
      if (c.sweep.parameter == s) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("sweep.parameter",
                        "unknown sweep parameter '" + c.sweep.parameter +
                            "' (expected one of lambda, T_o, alpha, B0, k, "
                            "p_c, C_avg, mean_P)");
    if (c.sweep.count < 2) throw ConfigError("sweep.count", "must be >= 2");
    if (!(c.sweep.hi > c.sweep.lo))
      throw ConfigError("sweep.hi", "empty sweep range (hi must exceed lo)");
    const std::string& sp = c.sweep.parameter;
    if (sp == "p_c") {
      if (!(c.sweep.lo > 1.0))
        throw ConfigError("sweep.lo", "must be > 1 for parameter 'p_c'");
    } else if (sp == "lambda" || sp == "B0" || sp == "k" || sp == "C_avg" ||
               sp == "mean_P") {
      if (!(c.sweep.lo > 0.0))
        throw ConfigError("sweep.lo", "must be > 0 for parameter '" + sp + "'");
    } else if (!(c.sweep.lo >= 0.0)) {
      throw ConfigError("sweep.lo", "must be >= 0 for parameter '" + sp + "'");
    }
  }
  if (c.mode == Mode::pareto) {
    if (c.weights.empty())
      throw ConfigError("weights", "required for pareto mode (non-empty list)");
    for (std::size_t i = 0; i < c.weights.size(); ++i) {
      auto [w1, w2] = c.weights[i];
      if (w1 < 0.0 || w2 < 0.0 || w1 + w2 <= 0.0)
        throw ConfigError("weights[" + std::to_string(i) + "]",
                          "omega1 and omega2 must be >= 0 with a positive sum");
    }
  }
  if (c.mode == Mode::validate) {
    if (c.validate.n_sets < 1) throw ConfigError("validate.n_sets", "must be >= 1");
    if (!(c.validate.tolerance > 0.0))
      throw ConfigError("validate.tolerance", "must be > 0");
  }
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json j;
  j["mode"] = mode_name(c.mode);
  j["params"] = {{"lambda", c.params.lambda}, {"T_o", c.params.T_o},
                 {"tau", c.params.tau},       {"p_c", c.params.p_c},
                 {"C_avg", c.params.C_avg},   {"omega1", c.params.omega1},
                 {"omega2", c.params.omega2}};
  j["compute"] = {{"k", c.gamma_k}, {"mean_P", c.mean_compute}};
  j["coupling"] = {{"B0", c.coupling.B0}, {"alpha", c.coupling.alpha}};
  j["sim"] = {{"variant", c.sim.variant == SimVariant::original ? "original"
                                                                : "equivalent"},
              {"target_deliveries", c.sim.target_deliveries},
              {"horizon_time", c.sim.horizon_time},
              {"warmup_fraction", c.sim.warmup_fraction},
              {"warmup_time", c.sim.warmup_time},
              {"seed", c.sim.seed},
              {"replications", c.sim.replications},
              {"ci_rel_tolerance", c.sim.ci_rel_tolerance}};
  const auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  j["search"] = {{"n_tau", c.search.n_tau},
                 {"n_meanP", c.search.n_meanP},
                 {"n_To", c.search.n_To},
                 {"To_min", c.search.To_min},
                 {"To_max", c.search.To_max},
                 {"refinement_rounds", c.search.refinement_rounds},
                 {"pin_tau", opt(c.search.pin_tau)},
                 {"pin_meanP", opt(c.search.pin_meanP)},
                 {"pin_To", opt(c.search.pin_To)},
                 {"meanP_min", c.search.meanP_min},
                 {"meanP_cap", c.search.meanP_cap}};
  if (!c.sweep.parameter.empty())
    j["sweep"] = {{"parameter", c.sweep.parameter},
                  {"lo", c.sweep.lo},
                  {"hi", c.sweep.hi},
                  {"count", c.sweep.count}};
  if (!c.weights.empty()) {
    json w = json::array();
    for (auto [w1, w2] : c.weights) w.push_back({w1, w2});
    j["weights"] = std::move(w);
  }
  j["validate"] = {{"n_sets", c.validate.n_sets},
                   {"tolerance", c.validate.tolerance}};
  if (!c.variants.empty()) {
    json v = json::array();
    for (const VariantSpec& s : c.variants) {
      json entry = s.patch;
      entry["label"] = s.label;
      v.push_back(std::move(entry));
    }
    j["variants"] = std::move(v);
  }
  j["out"] = c.out;
  return j;
}

namespace expdetail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline void write_csv(const std::string& path, const json& echo,
                      std::uint64_t seed, const Table& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << "# config: " << echo.dump() << "\n";
  f << "# seed: " << seed << "\n";
  for (std::size_t i = 0; i < t.header.size(); ++i)
    f << (i ? "," : "") << t.header[i];
  f << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string label_path(const std::string& out, const std::string& label) {
  const auto dot = out.find_last_of('.');
  const auto slash = out.find_last_of('/');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash))
    return out + "_" + label;
  return out.substr(0, dot) + "_" + label + out.substr(dot);
}

inline void apply_sweep_value(ExperimentConfig& c, double v) {
  const std::string& sp = c.sweep.parameter;
  if (sp == "lambda")
    c.params.lambda = v;
  else if (sp == "T_o") {
    c.params.T_o = v;
    c.search.pin_To = v;
  } else if (sp == "alpha")
    c.coupling.alpha = v;
  else if (sp == "B0")
    c.coupling.B0 = v;
  else if (sp == "k")
    c.gamma_k = v;
  else if (sp == "p_c")
    c.params.p_c = v;
  else if (sp == "C_avg")
    c.params.C_avg = v;
  else if (sp == "mean_P")
    c.search.pin_meanP = v;
}

struct ModeOutput {
  Table table;
  std::string report;
  int exit_code = 0;
};

inline ModeOutput run_evaluate(const ExperimentConfig& c) {
  const GammaComputeTime comp(c.mean_compute, c.gamma_k);
  const AoIReport r = evaluate(c.params, comp, c.coupling);
  ModeOutput o;
  o.table.header = {"avg_aoi",       "avg_peak_aoi",  "lambda_tilde",
                    "ex2",           "exT",           "exT_given_Id",
                    "exT_given_B",   "peak_numerator", "prob_min_index",
                    "expected_wait", "p_B",           "mu"};
  o.table.rows.push_back({fmt_g(r.avg_aoi), fmt_g(r.avg_peak_aoi),
                          fmt_g(r.lambda_tilde), fmt_g(r.ex2), fmt_g(r.exT),
                          fmt_g(r.exT_given_Id), fmt_g(r.exT_given_B),
                          fmt_g(r.peak_numerator), fmt_g(r.prob_min_index),
                          fmt_g(r.wait.expected_wait), fmt_g(r.stationary.p_B),
                          fmt_g(r.mu)});
  o.report = "avg AoI = " + fmt_g(r.avg_aoi) +
             ", avg peak AoI = " + fmt_g(r.avg_peak_aoi) +
             " (mu = " + fmt_g(r.mu) + ", p_B = " + fmt_g(r.stationary.p_B) + ")";
  return o;
}

inline ModeOutput run_simulate(const ExperimentConfig& c) {
  const GammaComputeTime comp(c.mean_compute, c.gamma_k);
  const SimEstimate est = run(c.params, comp, c.coupling, c.sim);
  ModeOutput o;
  o.table.header = {"avg_aoi",
                    "avg_aoi_hw",
                    "avg_peak_aoi",
                    "avg_peak_aoi_hw",
                    "occ_off",
                    "occ_idle",
                    "occ_busy",
                    "measured_power",
                    "measured_power_hw",
                    "mean_cycle",
                    "n_admitted",
                    "n_emitted",
                    "n_delivered",
                    "n_blocked_at_compute",
                    "n_discarded_deadline",
                    "n_discarded_replaced",
                    "n_found_busy",
                    "ci_ok"};
  const SimCounters& n = est.counters;
  o.table.rows.push_back(
      {fmt_g(est.avg_aoi), fmt_g(est.avg_aoi_hw), fmt_g(est.avg_peak_aoi),
       fmt_g(est.avg_peak_aoi_hw), fmt_g(est.occ_off), fmt_g(est.occ_idle),
       fmt_g(est.occ_busy), fmt_g(est.measured_power),
       fmt_g(est.measured_power_hw), fmt_g(est.mean_cycle),
       std::to_string(n.n_admitted), std::to_string(n.n_emitted),
       std::to_string(n.n_delivered), std::to_string(n.n_blocked_at_compute),
       std::to_string(n.n_discarded_deadline),
       std::to_string(n.n_discarded_replaced), std::to_string(n.n_found_busy),
       est.ci_ok ? "1" : "0"});
  o.report = "simulated avg AoI = " + fmt_g(est.avg_aoi) + " +/- " +
             fmt_g(est.avg_aoi_hw) + ", avg peak AoI = " +
             fmt_g(est.avg_peak_aoi) + " +/- " + fmt_g(est.avg_peak_aoi_hw) +
             ", measured power = " + fmt_g(est.measured_power) + " (" +
             std::to_string(n.n_delivered) + " delivered)";
  if (c.sim.ci_rel_tolerance > 0.0 && !est.ci_ok) {
    o.report += "; CI tolerance not met";
    o.exit_code = 2;
  }
  return o;
}

inline ModeOutput run_validate(const ExperimentConfig& c) {
  ModeOutput o;
  o.table.header = {"set", "closed_form", "simulated", "ci_half_width", "status"};
  std::mt19937_64 rng(mix64(c.sim.seed, 0xD0D0));
  int n_pass = 0;
  for (int i = 0; i < c.validate.n_sets; ++i) {
    const DrawnSet d = draw_feasible_set(rng);
    const GammaComputeTime comp(d.mean_compute, d.gamma_k);
    const AoIReport cf = evaluate(d.params, comp, d.coupling);
    SimConfig sc = c.sim;
    sc.variant = SimVariant::original;
    sc.seed = mix64(c.sim.seed, 0x5E70000 + static_cast<std::uint64_t>(i));
    sc.record_packets = false;
    sc.event_log = nullptr;
    sc.ci_rel_tolerance = 0.0;
    const SimEstimate est = run(d.params, comp, d.coupling, sc);

    char id[16];
    std::snprintf(id, sizeof id, "set%02d", i);
    const auto row = [&](const char* metric, double closed, double sim,
                         double hw) {
      const bool ok =
          std::abs(closed - sim) <=
          std::max(c.validate.tolerance * std::abs(closed), 3.0 * hw);
      o.table.rows.push_back({std::string(id) + "/" + metric, fmt_g(closed),
                              fmt_g(sim), fmt_g(hw), ok ? "pass" : "fail"});
      return ok;
    };
    const bool aoi_ok = row("avg_aoi", cf.avg_aoi, est.avg_aoi, est.avg_aoi_hw);
    const bool peak_ok =
        row("avg_peak_aoi", cf.avg_peak_aoi, est.avg_peak_aoi, est.avg_peak_aoi_hw);
    if (aoi_ok && peak_ok) ++n_pass;
  }
  o.report = std::to_string(n_pass) + "/" + std::to_string(c.validate.n_sets) +
             " within tolerance";
  if (n_pass != c.validate.n_sets) {
    o.report += " (" + std::to_string(c.validate.n_sets - n_pass) + " failed)";
    o.exit_code = 2;
  }
  return o;
}

inline ModeOutput run_sweep(const ExperimentConfig& c) {
  ModeOutput o;
  o.table.header = {"swept-value",        "avg_aoi_strict", "avg_aoi_best",
                    "avg_peak_aoi_strict", "avg_peak_aoi_best", "best_tau",
                    "best_meanP"};
  const std::vector<double> values =
      detail::linspace(c.sweep.lo, c.sweep.hi, c.sweep.count);
  int n_feasible = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  double best_v = std::numeric_limits<double>::quiet_NaN();
  double best_impr = std::numeric_limits<double>::quiet_NaN();
  for (double v : values) {
    ExperimentConfig cc = c;
    apply_sweep_value(cc, v);
    const GammaFamily fam{cc.gamma_k};
    const ThresholdComparison tc =
        strict_vs_best_threshold(cc.params, fam, cc.coupling, cc.search);
    o.table.rows.push_back({fmt_g(v), fmt_g(tc.strict.avg_aoi),
                            fmt_g(tc.best.avg_aoi), fmt_g(tc.strict.avg_peak_aoi),
                            fmt_g(tc.best.avg_peak_aoi), fmt_g(tc.best.best_tau),
                            fmt_g(tc.best.best_meanP)});
    if (tc.best.feasible) {
      ++n_feasible;
      if (tc.best.objective_value < best_obj) {
        best_obj = tc.best.objective_value;
        best_v = v;
        best_impr = tc.improvement;
      }
    }
  }
  if (n_feasible == 0)
    throw ConfigError("sweep", "no feasible point in the swept range");
  o.report = "optimum at " + c.sweep.parameter + " = " + fmt_g(best_v) +
             ": objective = " + fmt_g(best_obj) +
             ", improvement over strict deadline = " + fmt_g(100.0 * best_impr) +
             "%";
  return o;
}

inline ModeOutput run_optimize(const ExperimentConfig& c) {
  const GammaFamily fam{c.gamma_k};
  const OptResult r = minimize(c.params, fam, c.coupling, c.search);
  if (!r.feasible) throw ConfigError("search", r.infeasible_reason);
  ModeOutput o;
  o.table.header = {"best_tau",    "best_meanP",   "best_To",
                    "objective_value", "avg_aoi",  "avg_peak_aoi",
                    "power_slack", "n_evaluated",  "n_infeasible_pruned"};
  o.table.rows.push_back({fmt_g(r.best_tau), fmt_g(r.best_meanP),
                          fmt_g(r.best_To), fmt_g(r.objective_value),
                          fmt_g(r.avg_aoi), fmt_g(r.avg_peak_aoi),
                          fmt_g(r.power_slack), std::to_string(r.n_evaluated),
                          std::to_string(r.n_infeasible_pruned)});
  o.report = "best (tau, E[P], T_o) = (" + fmt_g(r.best_tau) + ", " +
             fmt_g(r.best_meanP) + ", " + fmt_g(r.best_To) +
             "), objective = " + fmt_g(r.objective_value) +
             ", power slack = " + fmt_g(r.power_slack);
  return o;
}

inline ModeOutput run_pareto(const ExperimentConfig& c) {
  const GammaFamily fam{c.gamma_k};
  const std::vector<OptResult> results =
      pareto_front(c.params, fam, c.coupling, c.search, c.weights);
  ModeOutput o;
  o.table.header = {"omega1", "omega2", "avg_aoi", "avg_peak_aoi"};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto [w1, w2] = c.weights[i];
    o.table.rows.push_back({fmt_g(w1), fmt_g(w2), fmt_g(results[i].avg_aoi),
                            fmt_g(results[i].avg_peak_aoi)});
  }
  const std::vector<ParetoPoint>& front = results.front().pareto;
  if (front.empty())
    throw ConfigError("weights", "no feasible point for any weight");
  o.report = "front size = " + std::to_string(front.size()) +
             "; min avg AoI = " + fmt_g(front.front().avg_aoi) +
             " (peak " + fmt_g(front.front().avg_peak_aoi) + ")" +
             "; min avg peak AoI = " + fmt_g(front.back().avg_peak_aoi) +
             " (aoi " + fmt_g(front.back().avg_aoi) + ")";
  return o;
}

inline ExperimentResult run_single(const ExperimentConfig& c) {
  ModeOutput o;
  switch (c.mode) {
    case Mode::evaluate: o = run_evaluate(c); break;
    case Mode::simulate: o = run_simulate(c); break;
    case Mode::validate: o = run_validate(c); break;
    case Mode::sweep: o = run_sweep(c); break;
    case Mode::optimize: o = run_optimize(c); break;
    case Mode::pareto: o = run_pareto(c); break;
  }
  write_csv(c.out, config_to_json(c), c.sim.seed, o.table);
  return {o.exit_code, o.report, {c.out}};
}

}  // namespace expdetail

inline ExperimentResult run_experiment(const nlohmann::json& config) {
  ExperimentConfig base = config_from_json(config);
  if (base.variants.empty()) return expdetail::run_single(base);

  ExperimentResult all;
  for (std::size_t i = 0; i < base.variants.size(); ++i) {
    const VariantSpec& v = base.variants[i];
    nlohmann::json merged = config_to_json(base);
    merged.erase("variants");
    merged.merge_patch(v.patch);
    merged["out"] = expdetail::label_path(base.out, v.label);
    ExperimentConfig c;
    try {
      c = config_from_json(merged);
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      if (msg.rfind(e.path() + ": ", 0) == 0) msg = msg.substr(e.path().size() + 2);
      throw ConfigError("variants[" + std::to_string(i) + "]." + e.path(), msg);
    }
    const ExperimentResult r = expdetail::run_single(c);
    all.exit_code = std::max(all.exit_code, r.exit_code);
    if (!all.report.empty()) all.report += "\n";
    all.report += "[" + v.label + "] " + r.report;
    all.files.insert(all.files.end(), r.files.begin(), r.files.end());
  }
  return all;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
  return run_experiment(config_to_json(config));
}

// Built-in experiment presets.  These strings are the source of truth; the
// copies under presets/ ship for convenience and are checked for equality by
// the test suite.
inline const char* preset_config(std::string_view name) {
  if (name == "fig2")
    return R"json({
  "mode": "sweep",
  "out": "fig2.csv",
  "params": {"lambda": 1.0, "p_c": 10.0, "C_avg": 1.0, "omega1": 1.0, "omega2": 0.0},
  "compute": {"k": 0.1},
  "coupling": {"B0": 10.0, "alpha": 1.0},
  "sweep": {"parameter": "T_o", "lo": 0.25, "hi": 12.0, "count": 20},
  "sim": {"seed": 1},
  "variants": [
    {"label": "lambda0.2", "params": {"lambda": 0.2}},
    {"label": "lambda1", "params": {"lambda": 1.0}}
  ]
})json";
  if (name == "fig3")
    return R"json({
  "mode": "sweep",
  "out": "fig3.csv",
  "params": {"lambda": 1.0, "p_c": 10.0, "C_avg": 1.0, "omega1": 1.0, "omega2": 0.0},
  "compute": {"k": 0.05},
  "coupling": {"B0": 10.0, "alpha": 1.0},
  "sweep": {"parameter": "T_o", "lo": 0.25, "hi": 12.0, "count": 20},
  "sim": {"seed": 1},
  "variants": [
    {"label": "k0.05", "compute": {"k": 0.05}},
    {"label": "k0.005", "compute": {"k": 0.005}}
  ]
})json";
  if (name == "fig4")
    return R"json({
  "mode": "sweep",
  "out": "fig4.csv",
  "params": {"lambda": 1.0, "p_c": 10.0, "C_avg": 1.0, "omega1": 1.0, "omega2": 0.0},
  "compute": {"k": 0.005},
  "coupling": {"B0": 10.0, "alpha": 1.0},
  "sweep": {"parameter": "alpha", "lo": 0.25, "hi": 0.85, "count": 13},
  "sim": {"seed": 1}
})json";
  if (name == "fig5")
    return R"json({
  "mode": "pareto",
  "out": "fig5.csv",
  "params": {"lambda": 1.0, "p_c": 10.0, "C_avg": 1.0},
  "compute": {"k": 0.008},
  "coupling": {"B0": 10.0, "alpha": 1.0},
  "weights": [[1.0, 0.0], [8.0, 1.0], [4.0, 1.0], [2.0, 1.0], [1.0, 1.0],
              [1.0, 2.0], [1.0, 4.0], [1.0, 8.0], [0.0, 1.0]],
  "sim": {"seed": 1},
  "variants": [
    {"label": "k0.008", "compute": {"k": 0.008}},
    {"label": "k0.006", "compute": {"k": 0.006}},
    {"label": "k0.005", "compute": {"k": 0.005}}
  ]
})json";
  return nullptr;
}

}  // namespace aoi
