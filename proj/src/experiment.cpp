// Copyright 2026 The qmem Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmem/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qmem/thermo.hpp"

namespace qmem {

using json = nlohmann::json;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fidelity_matrix: return "fidelity-matrix";
    case ExperimentKind::capacity_sweep: return "capacity-sweep";
    case ExperimentKind::forgetting_curve: return "forgetting-curve";
    case ExperimentKind::association_graph: return "association-graph";
    case ExperimentKind::thermo_trace: return "thermo-trace";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view text) {
  for (auto kind : {ExperimentKind::fidelity_matrix, ExperimentKind::capacity_sweep, ExperimentKind::forgetting_curve,
                    ExperimentKind::association_graph, ExperimentKind::thermo_trace}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::vector<double> TimeGrid::values() const {
  std::vector<double> out;
  out.reserve(points);
  if (points == 1) {
    out.push_back(start);
    return out;
  }
  for (std::size_t i = 0; i < points; ++i) {
    out.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return out;
}

// --- formatting ----------------------------------------------------------------

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of negative zero
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : width_(header.size()) { row(std::move(header)); }

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != width_) throw std::logic_error("CsvTable: row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    const auto& c = cells[i];
    if (c.find_first_of(",\"\n\r") != std::string::npos) {
      text_ += '"';
      for (char ch : c) {
        if (ch == '"') text_ += '"';
        text_ += ch;
      }
      text_ += '"';
    } else {
      text_ += c;
    }
  }
  text_ += '\n';
  return *this;
}

std::string CsvTable::str() const { return text_; }

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

// --- parsing -------------------------------------------------------------------

namespace {

bool is_count(const json& value) {
  return value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0);
}

void allow_keys(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : object.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& object, const std::string& key, const std::string& where, double fallback) {
  if (!object.contains(key)) return fallback;
  if (!object[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return object[key].get<double>();
}

std::size_t get_count(const json& object, const std::string& key, const std::string& where, std::size_t fallback) {
  if (!object.contains(key)) return fallback;
  if (!is_count(object[key])) throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return object[key].get<std::size_t>();
}

std::uint64_t get_seed(const json& object, const std::string& where, std::uint64_t fallback) {
  if (!object.contains("seed")) return fallback;
  if (!is_count(object["seed"])) throw ConfigError(where + ".seed: expected an unsigned integer");
  return object["seed"].get<std::uint64_t>();
}

Modes parse_modes(const json& spec, bool& uniform) {
  try {
    if (spec.is_object()) {
      allow_keys(spec, {"count", "omega", "gamma"}, "modes");
      uniform = true;
      const auto count = get_count(spec, "count", "modes", 1);
      if (count == 0) throw ConfigError("modes.count: must be >= 1");
      return Modes::uniform(count, get_number(spec, "omega", "modes", 1.0), get_number(spec, "gamma", "modes", 1.0));
    }
    if (spec.is_array()) {
      uniform = false;
      std::vector<ModeParams<double>> params;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        allow_keys(spec[i], {"index", "omega", "gamma"}, "modes[]");
        if (!spec[i].contains("omega") || !spec[i].contains("gamma")) {
          throw ConfigError("modes[]: omega and gamma are required");
        }
        params.push_back({get_count(spec[i], "index", "modes[]", i), get_number(spec[i], "omega", "modes[]", 0.0),
                          get_number(spec[i], "gamma", "modes[]", 0.0)});
      }
      if (params.empty()) throw ConfigError("modes: list must be non-empty");
      return Modes::from_params(params);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("modes: ") + e.what());
  }
  throw ConfigError("modes: expected an object {count, omega, gamma} or a list of {omega, gamma}");
}

CodeSpec parse_codes(const json& spec, const std::filesystem::path& base_dir) {
  allow_keys(spec, {"explicit", "sampled", "bose", "registry"}, "codes");
  if (spec.size() != 1) throw ConfigError("codes: exactly one of explicit, sampled, bose, registry is required");
  CodeSpec out;
  if (spec.contains("explicit")) {
    out.source = CodeSpec::Source::explicit_list;
    const auto& list = spec["explicit"];
    if (!list.is_array() || list.empty()) throw ConfigError("codes.explicit: expected a non-empty list");
    for (const auto& e : list) {
      allow_keys(e, {"id", "thetas", "printed_at"}, "codes.explicit[]");
      if (!e.contains("id") || !e["id"].is_string()) throw ConfigError("codes.explicit[].id: expected a string");
      if (!e.contains("thetas") || !e["thetas"].is_array()) {
        throw ConfigError("codes.explicit[].thetas: expected a list of numbers");
      }
      VectorX<double> thetas(static_cast<Eigen::Index>(e["thetas"].size()));
      for (std::size_t k = 0; k < e["thetas"].size(); ++k) {
        if (!e["thetas"][k].is_number()) throw ConfigError("codes.explicit[].thetas: expected numbers");
        thetas[static_cast<Eigen::Index>(k)] = e["thetas"][k].get<double>();
      }
      try {
        out.entries.push_back({e["id"].get<std::string>(), MemoryCode(std::move(thetas)),
                               get_number(e, "printed_at", "codes.explicit[]", 0.0)});
      } catch (const DomainError& err) {
        throw ConfigError(std::string("codes.explicit[]: ") + err.what());
      }
    }
  } else if (spec.contains("sampled")) {
    out.source = CodeSpec::Source::sampled;
    const auto& s = spec["sampled"];
    allow_keys(s, {"count", "theta_min", "theta_max", "seed"}, "codes.sampled");
    out.count = get_count(s, "count", "codes.sampled", 0);
    if (out.count == 0) throw ConfigError("codes.sampled.count: must be >= 1");
    out.theta_min = get_number(s, "theta_min", "codes.sampled", 0.0);
    out.theta_max = get_number(s, "theta_max", "codes.sampled", 2.0);
    out.seed = get_seed(s, "codes.sampled", 0);
  } else if (spec.contains("bose")) {
    out.source = CodeSpec::Source::bose;
    allow_keys(spec["bose"], {"beta"}, "codes.bose");
    out.beta = get_number(spec["bose"], "beta", "codes.bose", 1.0);
    if (!(out.beta > 0.0)) throw ConfigError("codes.bose.beta: must be > 0");
  } else {
    out.source = CodeSpec::Source::registry;
    if (!spec["registry"].is_string()) throw ConfigError("codes.registry: expected a path string");
    out.registry_path = spec["registry"].get<std::string>();
    if (out.registry_path.is_relative() && !base_dir.empty()) out.registry_path = base_dir / out.registry_path;
  }
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc, const std::filesystem::path& base_dir) {
  allow_keys(doc,
             {"kind", "modes", "codes", "time_grid", "eval_time", "epsilon", "threshold", "time_mode", "capacity",
              "outputs"},
             "config");
  ExperimentConfig config;
  if (!doc.contains("kind") || !doc["kind"].is_string()) throw ConfigError("config.kind: expected a string");
  const auto kind = parse_kind(doc["kind"].get<std::string>());
  if (!kind) throw ConfigError("config.kind: unknown experiment kind '" + doc["kind"].get<std::string>() + "'");
  config.kind = *kind;

  if (!doc.contains("modes")) throw ConfigError("config.modes: required");
  config.modes = parse_modes(doc["modes"], config.uniform_modes);

  if (config.kind == ExperimentKind::capacity_sweep) {
    if (!config.uniform_modes) throw ConfigError("capacity-sweep: modes must be {count, omega, gamma}");
    if (doc.contains("codes")) throw ConfigError("capacity-sweep: codes are sampled from the capacity section");
    if (doc.contains("capacity")) {
      const auto& c = doc["capacity"];
      allow_keys(c, {"mode_counts", "candidates", "theta_min", "theta_max", "seed"}, "capacity");
      if (c.contains("mode_counts")) {
        if (!c["mode_counts"].is_array() || c["mode_counts"].empty()) {
          throw ConfigError("capacity.mode_counts: expected a non-empty list");
        }
        config.capacity.mode_counts.clear();
        for (const auto& k : c["mode_counts"]) {
          if (!is_count(k) || k.get<std::size_t>() == 0) {
            throw ConfigError("capacity.mode_counts: expected positive integers");
          }
          config.capacity.mode_counts.push_back(k.get<std::size_t>());
        }
      }
      config.capacity.candidates = get_count(c, "candidates", "capacity", config.capacity.candidates);
      config.capacity.theta_min = get_number(c, "theta_min", "capacity", config.capacity.theta_min);
      config.capacity.theta_max = get_number(c, "theta_max", "capacity", config.capacity.theta_max);
      config.capacity.seed = get_seed(c, "capacity", 0);
    }
    if (config.capacity.candidates == 0) throw ConfigError("capacity.candidates: must be >= 1");
    if (!(config.capacity.theta_min >= 0.0) || !(config.capacity.theta_max > config.capacity.theta_min)) {
      throw ConfigError("capacity: need 0 <= theta_min < theta_max");
    }
  } else {
    if (doc.contains("capacity")) throw ConfigError("config.capacity: only valid for capacity-sweep");
    if (!doc.contains("codes")) throw ConfigError("config.codes: required");
    config.codes = parse_codes(doc["codes"], base_dir);
    if (config.codes.source == CodeSpec::Source::sampled && !(config.codes.theta_max > config.codes.theta_min &&
                                                              config.codes.theta_min >= 0.0)) {
      throw ConfigError("codes.sampled: need 0 <= theta_min < theta_max");
    }
  }

  if (doc.contains("time_grid")) {
    const auto& g = doc["time_grid"];
    allow_keys(g, {"start", "stop", "points"}, "time_grid");
    config.time_grid.start = get_number(g, "start", "time_grid", 0.0);
    config.time_grid.stop = get_number(g, "stop", "time_grid", 1.0);
    config.time_grid.points = get_count(g, "points", "time_grid", 101);
  }
  const auto& tg = config.time_grid;
  if (!(tg.start >= 0.0) || tg.points == 0 || (tg.points > 1 && !(tg.stop > tg.start))) {
    throw ConfigError("time_grid: need start >= 0, points >= 1 and stop > start");
  }

  config.eval_time = get_number(doc, "eval_time", "config", 0.0);
  if (!(config.eval_time >= 0.0)) throw ConfigError("config.eval_time: must be >= 0");
  config.epsilon = get_number(doc, "epsilon", "config", 0.05);
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) throw ConfigError("config.epsilon: must lie in (0, 1)");
  config.threshold = get_number(doc, "threshold", "config", 0.5);
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) throw ConfigError("config.threshold: must lie in (0, 1)");
  if (doc.contains("time_mode")) {
    const auto& m = doc["time_mode"];
    if (m == "common") {
      config.time_mode = TimeMode::common;
    } else if (m == "staggered") {
      config.time_mode = TimeMode::staggered;
    } else {
      throw ConfigError("config.time_mode: expected \"common\" or \"staggered\"");
    }
  }
  if (doc.contains("outputs")) {
    allow_keys(doc["outputs"], {"dir"}, "outputs");
    if (doc["outputs"].contains("dir")) {
      if (!doc["outputs"]["dir"].is_string()) throw ConfigError("outputs.dir: expected a string");
      config.output_dir = doc["outputs"]["dir"].get<std::string>();
    }
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  json doc;
  try {
    doc = json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_experiment_config(doc, path.parent_path());
}

json ExperimentConfig::echo() const {
  json out;
  out["kind"] = std::string(to_string(kind));
  if (uniform_modes) {
    out["modes"] = {{"count", modes.size()}, {"omega", modes.omega()[0]}, {"gamma", modes.gamma()[0]}};
  } else {
    json list = json::array();
    for (const auto& p : modes.params()) list.push_back({{"index", p.index}, {"omega", p.omega}, {"gamma", p.gamma}});
    out["modes"] = std::move(list);
  }
  if (kind == ExperimentKind::capacity_sweep) {
    out["capacity"] = {{"mode_counts", capacity.mode_counts},
                       {"candidates", capacity.candidates},
                       {"theta_min", capacity.theta_min},
                       {"theta_max", capacity.theta_max},
                       {"seed", capacity.seed}};
  } else {
    switch (codes.source) {
      case CodeSpec::Source::explicit_list: {
        json list = json::array();
        for (const auto& e : codes.entries) {
          json thetas = json::array();
          for (Eigen::Index k = 0; k < e.code.thetas().size(); ++k) thetas.push_back(e.code.thetas()[k]);
          list.push_back({{"id", e.id}, {"thetas", std::move(thetas)}, {"printed_at", e.printed_at}});
        }
        out["codes"] = {{"explicit", std::move(list)}};
        break;
      }
      case CodeSpec::Source::sampled:
        out["codes"] = {{"sampled",
                         {{"count", codes.count},
                          {"theta_min", codes.theta_min},
                          {"theta_max", codes.theta_max},
                          {"seed", codes.seed}}}};
        break;
      case CodeSpec::Source::bose: out["codes"] = {{"bose", {{"beta", codes.beta}}}}; break;
      case CodeSpec::Source::registry: out["codes"] = {{"registry", codes.registry_path.generic_string()}}; break;
    }
  }
  out["time_grid"] = {{"start", time_grid.start}, {"stop", time_grid.stop}, {"points", time_grid.points}};
  out["eval_time"] = eval_time;
  out["epsilon"] = epsilon;
  out["threshold"] = threshold;
  out["time_mode"] = time_mode == TimeMode::common ? "common" : "staggered";
  return out;
}

Registry build_registry(const ExperimentConfig& config) {
  switch (config.codes.source) {
    case CodeSpec::Source::explicit_list: {
      Registry registry(config.modes);
      for (const auto& e : config.codes.entries) registry = print_memory(registry, e.id, e.code, e.printed_at);
      return registry;
    }
    case CodeSpec::Source::sampled: {
      Registry registry(config.modes);
      for (std::size_t i = 0; i < config.codes.count; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "m%04zu", i);
        registry = print_memory(registry, id,
                                sample_code(config.modes.size(), config.codes.theta_min, config.codes.theta_max,
                                            config.codes.seed, i));
      }
      return registry;
    }
    case CodeSpec::Source::bose:
      return print_memory_from_beta(Registry(config.modes), "bose", config.codes.beta);
    case CodeSpec::Source::registry: {
      Registry registry = load_registry(config.codes.registry_path);
      if (!(registry.modes() == config.modes)) {
        throw ConfigError("codes.registry: registry mode list differs from config modes");
      }
      return registry;
    }
  }
  throw std::logic_error("unreachable");
}

// --- experiments ---------------------------------------------------------------

namespace {

constexpr const char* kRecallConvention =
    "recall strength is reported as state fidelity (overlap) between the cue and each stored memory";

json summary_header(const ExperimentConfig& config) {
  return {{"schema_version", kArtifactSchemaVersion},
          {"tool", "qmem"},
          {"version", std::string(kVersion)},
          {"kind", std::string(to_string(config.kind))},
          {"config", config.echo()}};
}

std::string fidelity_csv(const FidelityMatrix& f) {
  CsvTable table({"i_id", "j_id", "fidelity", "log_fidelity"});
  for (std::size_t i = 0; i < f.ids.size(); ++i) {
    for (std::size_t j = 0; j < f.ids.size(); ++j) {
      const double v = f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      table.row({f.ids[i], f.ids[j], format_number(v), format_number(std::log(v))});
    }
  }
  return table.str();
}

json fidelity_stats(const FidelityMatrix& f) {
  double lo = 1.0, hi = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < f.values.cols(); ++j) {
      lo = std::min(lo, f.values(i, j));
      hi = std::max(hi, f.values(i, j));
      any = true;
    }
  }
  return any ? json{{"min_off_diagonal", lo}, {"max_off_diagonal", hi}} : json{{"min_off_diagonal", nullptr},
                                                                                {"max_off_diagonal", nullptr}};
}

std::vector<Artifact> run_fidelity(const ExperimentConfig& config, unsigned threads) {
  const auto registry = build_registry(config);
  const auto f = fidelity_matrix(registry, config.eval_time, config.time_mode, threads);
  json summary = summary_header(config);
  summary["results"] = fidelity_stats(f);
  summary["results"]["memories"] = f.ids.size();
  summary["results"]["distinguishable_pairs"] = 0;
  std::size_t distinct = 0;
  for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < f.values.cols(); ++j) distinct += f.values(i, j) < config.epsilon ? 1 : 0;
  }
  summary["results"]["distinguishable_pairs"] = distinct;
  summary["recall_strength_convention"] = kRecallConvention;
  return {{"fidelity.csv", fidelity_csv(f)}, {"summary.json", dump_json(summary)}};
}

std::vector<Artifact> run_association(const ExperimentConfig& config, unsigned threads) {
  const auto registry = build_registry(config);
  const auto f = fidelity_matrix(registry, config.eval_time, config.time_mode, threads);
  const auto graph = association_graph(f, config.threshold);
  CsvTable edges({"i_id", "j_id", "weight"});
  for (const auto& e : graph.edges) edges.row({graph.ids[e.i], graph.ids[e.j], format_number(e.weight)});
  json clusters = json::array();
  for (const auto& c : graph.clusters) {
    json members = json::array();
    for (auto i : c) members.push_back(graph.ids[i]);
    clusters.push_back(std::move(members));
  }
  json summary = summary_header(config);
  summary["results"] = fidelity_stats(f);
  summary["results"]["edges"] = graph.edges.size();
  summary["results"]["clusters"] = std::move(clusters);
  summary["recall_strength_convention"] = kRecallConvention;
  return {{"fidelity.csv", fidelity_csv(f)}, {"edges.csv", edges.str()}, {"summary.json", dump_json(summary)}};
}

std::vector<Artifact> run_forgetting(const ExperimentConfig& config) {
  const auto registry = build_registry(config);
  const auto grid = config.time_grid.values();
  CsvTable table({"id", "t", "self_overlap", "vacuum_overlap", "log_self_overlap", "log_vacuum_overlap",
                  "total_occupation", "after_tau"});
  json per_memory = json::array();
  for (const auto& entry : registry.entries()) {
    const auto curve = forgetting_curve(entry.code, registry.modes(), grid);
    double best_t = grid.front(), best = -INFINITY;
    for (const auto& p : curve.points) {
      table.row({entry.id, format_number(p.t), format_number(std::exp(p.log_self_overlap)),
                 format_number(std::exp(p.log_vacuum_overlap)), format_number(p.log_self_overlap),
                 format_number(p.log_vacuum_overlap), format_number(p.total_occupation),
                 curve.tau && p.t > *curve.tau ? "1" : "0"});
      if (p.log_vacuum_overlap > best) {
        best = p.log_vacuum_overlap;
        best_t = p.t;
      }
    }
    per_memory.push_back({{"id", entry.id},
                          {"tau", curve.tau ? json(*curve.tau) : json("never")},
                          {"vacuum_overlap_peak_t", best_t},
                          {"vacuum_overlap_peak", std::exp(best)}});
  }
  json summary = summary_header(config);
  summary["results"] = {{"memories", std::move(per_memory)}};
  return {{"forgetting.csv", table.str()}, {"summary.json", dump_json(summary)}};
}

std::vector<Artifact> run_capacity(const ExperimentConfig& config) {
  CsvTable table({"mode_count", "candidates", "accepted", "theory_mean_log_overlap", "theory_std_log_overlap"});
  CsvTable curve({"mode_count", "candidate", "accepted_so_far"});
  json rows = json::array();
  for (std::size_t k : config.capacity.mode_counts) {
    CapacityConfig c;
    c.modes = Modes::uniform(k, config.modes.omega()[0], config.modes.gamma()[0]);
    c.theta_min = config.capacity.theta_min;
    c.theta_max = config.capacity.theta_max;
    c.epsilon = config.epsilon;
    c.candidate_count = config.capacity.candidates;
    c.seed = config.capacity.seed;
    const auto report = capacity_estimate(c);
    table.row({std::to_string(k), std::to_string(c.candidate_count), std::to_string(report.accepted),
               format_number(report.theory.mean_log_overlap), format_number(report.theory.std_log_overlap)});
    for (std::size_t i = 0; i < report.acceptance_curve.size(); ++i) {
      curve.row({std::to_string(k), std::to_string(i), std::to_string(report.acceptance_curve[i])});
    }
    rows.push_back({{"mode_count", k},
                    {"accepted", report.accepted},
                    {"theory_mean_log_overlap", report.theory.mean_log_overlap},
                    {"theory_std_log_overlap", report.theory.std_log_overlap}});
  }
  json summary = summary_header(config);
  summary["results"] = {{"sweep", std::move(rows)}, {"log_epsilon", std::log(config.epsilon)}};
  return {{"capacity.csv", table.str()}, {"acceptance.csv", curve.str()}, {"summary.json", dump_json(summary)}};
}

std::vector<Artifact> run_thermo(const ExperimentConfig& config) {
  const auto registry = build_registry(config);
  const auto grid = config.time_grid.values();
  CsvTable trace({"id", "t", "entropy", "energy", "beta_fit", "beta_fit_rms"});
  CsvTable ledger_table({"id", "t_begin", "t_end", "delta_energy", "delta_entropy", "heat", "residual", "flagged"});
  json per_memory = json::array();
  for (std::size_t i = 0; i < registry.size(); ++i) {
    const auto& entry = registry.entries()[i];
    const State origin = registry.state(i, 0.0);
    double min_s = INFINITY, min_t = 0.0;
    for (double t : grid) {
      const auto snap = thermo_snapshot(State(registry.modes(), entry.code, t));
      trace.row({entry.id, format_number(t), format_number(snap.entropy_total), format_number(snap.energy),
                 snap.global_beta ? format_number(snap.global_beta->beta) : "inf",
                 snap.global_beta ? format_number(snap.global_beta->rms_residual) : "0"});
      if (snap.entropy_total < min_s) {
        min_s = snap.entropy_total;
        min_t = t;
      }
    }
    const auto ledger = first_law_ledger(origin, std::span<const double>(grid));
    std::size_t flagged = 0;
    for (const auto& s : ledger.steps) {
      flagged += s.flagged ? 1 : 0;
      ledger_table.row({entry.id, format_number(s.t_begin), format_number(s.t_end), format_number(s.delta_energy),
                        format_number(s.delta_entropy), format_number(s.heat), format_number(s.residual),
                        s.flagged ? "1" : "0"});
    }
    const auto tau = forgetting_time(origin);
    per_memory.push_back({{"id", entry.id},
                          {"tau", tau ? json(*tau) : json("never")},
                          {"entropy_min", min_s},
                          {"entropy_min_t", min_t},
                          {"first_law_total_abs_residual", ledger.total_abs_residual()},
                          {"flagged_steps", flagged}});
  }
  json summary = summary_header(config);
  summary["results"] = {{"memories", std::move(per_memory)}};
  return {{"thermo.csv", trace.str()}, {"first_law.csv", ledger_table.str()}, {"summary.json", dump_json(summary)}};
}

}  // namespace

std::vector<Artifact> run_experiment(const ExperimentConfig& config, unsigned threads) {
  switch (config.kind) {
    case ExperimentKind::fidelity_matrix: return run_fidelity(config, threads);
    case ExperimentKind::association_graph: return run_association(config, threads);
    case ExperimentKind::forgetting_curve: return run_forgetting(config);
    case ExperimentKind::capacity_sweep: return run_capacity(config);
    case ExperimentKind::thermo_trace: return run_thermo(config);
  }
  throw std::logic_error("unreachable");
}

}  // namespace qmem
