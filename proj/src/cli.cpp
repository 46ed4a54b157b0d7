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

#include "qmem/cli.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "qmem/capacity.hpp"
#include "qmem/experiment.hpp"
#include "qmem/thermo.hpp"
#include "qmem/verify.hpp"

namespace qmem {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Invocation {
  std::string subcommand;
  std::optional<std::string> config;
  std::string out = "qmem-out";
  bool out_given = false;
  std::optional<std::uint64_t> seed;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<double> epsilon;
  long dim = 64;
  bool quiet = false;
  double tolerance_scale = 1.0;

  std::string registry;
  std::string id;
  std::vector<double> thetas;
  std::optional<double> beta;
  std::optional<double> time;
  std::optional<double> dt;
  std::optional<std::size_t> modes;
  double omega = 1.0;
  double gamma = 1.0;
};

/// Collects artifacts and publishes them as `<name>.partial` files that are
/// renamed into place only once every write has succeeded.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.push_back({name, std::move(content)}); }
  void add(const Artifact& artifact) { add(artifact.name, artifact.content); }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& f : files_) out.push_back(f.name);
    return out;
  }

  void commit() const {
    fs::create_directories(dir_);
    std::vector<fs::path> partials;
    try {
      for (const auto& f : files_) {
        const fs::path partial = dir_ / (f.name + ".partial");
        std::ofstream stream(partial, std::ios::binary | std::ios::trunc);
        partials.push_back(partial);
        stream << f.content;
        stream.close();
        if (!stream) throw std::runtime_error("cannot write " + partial.string());
      }
      for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(partials[i], dir_ / files_[i].name);
    } catch (...) {
      std::error_code ignored;
      for (const auto& p : partials) fs::remove(p, ignored);
      throw;
    }
  }

 private:
  fs::path dir_;
  std::vector<Artifact> files_;
};

json versions() {
  return {{"qmem", std::string(kVersion)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"cli11", std::string(CLI11_VERSION)}};
}

json manifest(const Invocation& inv, const json& config_echo, std::uint64_t seed, const OutputSet& outputs,
              double wall_time) {
  return {{"schema_version", kArtifactSchemaVersion},
          {"tool", "qmem"},
          {"subcommand", inv.subcommand},
          {"config", config_echo},
          {"seed", seed},
          {"threads", inv.threads},
          {"versions", versions()},
          {"artifacts", outputs.names()},
          {"wall_time_seconds", wall_time}};
}

json thetas_json(const MemoryCode& code) {
  json out = json::array();
  for (Eigen::Index k = 0; k < code.thetas().size(); ++k) out.push_back(code.thetas()[k]);
  return out;
}

MemoryCode code_from_flags(const Invocation& inv) {
  VectorX<double> th(static_cast<Eigen::Index>(inv.thetas.size()));
  for (std::size_t k = 0; k < inv.thetas.size(); ++k) th[static_cast<Eigen::Index>(k)] = inv.thetas[k];
  return MemoryCode(std::move(th));
}

json flags_echo(const Invocation& inv) {
  json echo = json::object();
  if (!inv.registry.empty()) echo["registry"] = inv.registry;
  if (!inv.id.empty()) echo["id"] = inv.id;
  if (!inv.thetas.empty()) echo["thetas"] = inv.thetas;
  if (inv.beta) echo["beta"] = *inv.beta;
  if (inv.time) echo["time"] = *inv.time;
  if (inv.dt) echo["dt"] = *inv.dt;
  if (inv.modes) echo["modes"] = *inv.modes;
  echo["omega"] = inv.omega;
  echo["gamma"] = inv.gamma;
  return echo;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

std::string registry_summary_line(const Registry& registry) {
  return std::to_string(registry.size()) + " memories over " + std::to_string(registry.modes().size()) + " modes";
}

// --- inline subcommands ----------------------------------------------------------

json run_print(const Invocation& inv, std::vector<Artifact>& artifacts, std::ostream& out) {
  require(!inv.registry.empty(), "print: --registry is required");
  require(!inv.id.empty(), "print: --id is required");
  require(inv.thetas.empty() != !inv.beta.has_value(), "print: give exactly one of --thetas or --beta");
  Registry registry;
  if (fs::exists(inv.registry)) {
    registry = load_registry(inv.registry);
  } else {
    const std::size_t count = inv.modes.value_or(inv.thetas.empty() ? 1 : inv.thetas.size());
    registry = Registry(Modes::uniform(count, inv.omega, inv.gamma));
  }
  const double printed_at = inv.time.value_or(0.0);
  registry = inv.beta ? print_memory_from_beta(registry, inv.id, *inv.beta, printed_at)
                      : print_memory(registry, inv.id, code_from_flags(inv), printed_at);
  save_registry(registry, inv.registry);

  const auto& entry = registry.at(inv.id);
  const auto tau = forgetting_time(State(registry.modes(), entry.code));
  json summary = {{"schema_version", kArtifactSchemaVersion},
                  {"kind", "print"},
                  {"config", flags_echo(inv)},
                  {"results",
                   {{"id", entry.id},
                    {"thetas", thetas_json(entry.code)},
                    {"printed_at", entry.printed_at},
                    {"tau", tau ? json(*tau) : json("never")},
                    {"memories", registry.size()}}}};
  artifacts.push_back({"summary.json", dump_json(summary)});
  if (!inv.quiet) out << "print: stored '" << inv.id << "' (" << registry_summary_line(registry) << ")\n";
  return flags_echo(inv);
}

json run_recall(const Invocation& inv, std::vector<Artifact>& artifacts, std::ostream& out) {
  require(!inv.registry.empty(), "recall: --registry is required");
  require(!inv.thetas.empty(), "recall: --thetas (the cue code) is required");
  const Registry registry = load_registry(inv.registry);
  const double t = inv.time.value_or(0.0);
  const auto scores = recall(registry, code_from_flags(inv), t);
  CsvTable table({"rank", "id", "fidelity", "log_fidelity"});
  for (std::size_t r = 0; r < scores.size(); ++r) {
    table.row({std::to_string(r + 1), scores[r].id, format_number(scores[r].fidelity),
               format_number(std::log(scores[r].fidelity))});
  }
  json summary = {{"schema_version", kArtifactSchemaVersion},
                  {"kind", "recall"},
                  {"config", flags_echo(inv)},
                  {"recall_strength_convention",
                   "recall strength is reported as state fidelity (overlap) between the cue and each stored memory"},
                  {"results",
                   {{"best_id", scores.empty() ? json(nullptr) : json(scores.front().id)},
                    {"best_fidelity", scores.empty() ? json(nullptr) : json(scores.front().fidelity)}}}};
  artifacts.push_back({"recall.csv", table.str()});
  artifacts.push_back({"summary.json", dump_json(summary)});
  if (!inv.quiet && !scores.empty()) {
    out << "recall: best match '" << scores.front().id << "' fidelity " << format_number(scores.front().fidelity)
        << "\n";
  }
  return flags_echo(inv);
}

json run_evolve(const Invocation& inv, std::vector<Artifact>& artifacts, std::ostream& out) {
  require(!inv.registry.empty(), "evolve: --registry is required");
  require(!inv.id.empty(), "evolve: --id is required");
  require(inv.time.has_value(), "evolve: --time is required");
  const double duration = *inv.time;
  require(duration >= 0.0, "evolve: --time must be >= 0");
  const double dt = inv.dt.value_or(duration > 0.0 ? duration / 100.0 : 1.0);
  require(dt > 0.0, "evolve: --dt must be > 0");
  const Registry registry = load_registry(inv.registry);
  const auto& entry = registry.at(inv.id);

  std::vector<double> times;
  const auto steps = static_cast<std::size_t>(std::ceil(duration / dt - 1e-9));
  for (std::size_t i = 0; i <= steps; ++i) times.push_back(std::min(duration, dt * static_cast<double>(i)));

  CsvTable table({"id", "t", "mode", "theta_eff", "occupation", "dx2", "dy2", "dxt2", "dyt2", "entropy", "beta"});
  for (double t : times) {
    const State state(registry.modes(), entry.code, t);
    for (std::size_t k = 0; k < registry.modes().size(); ++k) {
      const auto v = variances(state, k);
      const double theta_eff = effective_theta(state, k);
      table.row({entry.id, format_number(t), std::to_string(k), format_number(theta_eff),
                 format_number(occupation(state, k)), format_number(v.dx2), format_number(v.dy2),
                 format_number(v.dxt2), format_number(v.dyt2), format_number(mode_entropy(theta_eff)),
                 format_number(effective_beta(state, k))});
    }
  }
  const State final_state(registry.modes(), entry.code, duration);
  const State origin(registry.modes(), entry.code);
  json summary = {{"schema_version", kArtifactSchemaVersion},
                  {"kind", "evolve"},
                  {"config", flags_echo(inv)},
                  {"results",
                   {{"id", entry.id},
                    {"duration", duration},
                    {"self_overlap", overlap(final_state, origin)},
                    {"vacuum_overlap", overlap(final_state, empty_vacuum(registry.modes()))},
                    {"total_occupation", occupations(final_state).sum()}}}};
  artifacts.push_back({"state.csv", table.str()});
  artifacts.push_back({"summary.json", dump_json(summary)});
  if (!inv.quiet) out << "evolve: '" << entry.id << "' over " << format_number(duration) << "\n";
  return flags_echo(inv);
}

// --- config-driven experiments -----------------------------------------------------

json inline_config(const Invocation& inv, ExperimentKind kind) {
  json doc = {{"kind", std::string(to_string(kind))}};
  if (kind == ExperimentKind::capacity_sweep) {
    doc["modes"] = {{"count", 1}, {"omega", inv.omega}, {"gamma", inv.gamma}};
    if (inv.modes) {
      json counts = json::array();
      for (std::size_t k = 1; k <= *inv.modes; k *= 2) counts.push_back(k);
      doc["capacity"] = {{"mode_counts", counts}};
    }
    return doc;
  }
  if (!inv.registry.empty()) {
    const Registry registry = load_registry(inv.registry);
    json modes = json::array();
    for (const auto& p : registry.modes().params()) {
      modes.push_back({{"index", p.index}, {"omega", p.omega}, {"gamma", p.gamma}});
    }
    doc["modes"] = modes;
    doc["codes"] = {{"registry", fs::absolute(inv.registry).generic_string()}};
  } else if (!inv.thetas.empty()) {
    doc["modes"] = {{"count", inv.thetas.size()}, {"omega", inv.omega}, {"gamma", inv.gamma}};
    doc["codes"] = {{"explicit", {{{"id", inv.id.empty() ? "m0" : inv.id}, {"thetas", inv.thetas}}}}};
  } else if (inv.beta) {
    doc["modes"] = {{"count", inv.modes.value_or(1)}, {"omega", inv.omega}, {"gamma", inv.gamma}};
    doc["codes"] = {{"bose", {{"beta", *inv.beta}}}};
  } else {
    throw ConfigError(inv.subcommand + ": give --config, --registry, --thetas or --beta");
  }
  if (kind == ExperimentKind::forgetting_curve || kind == ExperimentKind::thermo_trace) {
    double stop = 1.0;
    if (inv.time) {
      stop = *inv.time;
    } else if (!inv.thetas.empty()) {
      double tau = 0.0;
      for (double th : inv.thetas) tau = std::max(tau, th / inv.gamma);
      if (tau > 0.0) stop = 3.0 * tau;
    }
    doc["time_grid"] = {{"start", 0.0}, {"stop", stop}, {"points", 301}};
  } else if (inv.time) {
    doc["eval_time"] = *inv.time;
  }
  return doc;
}

json load_config_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
}

void apply_overrides(const Invocation& inv, json& doc) {
  if (inv.epsilon) doc["epsilon"] = *inv.epsilon;
  if (inv.seed) {
    if (doc.value("kind", "") == to_string(ExperimentKind::capacity_sweep)) {
      if (!doc.contains("capacity")) doc["capacity"] = json::object();
      doc["capacity"]["seed"] = *inv.seed;
    } else if (doc.contains("codes") && doc["codes"].is_object() && doc["codes"].contains("sampled")) {
      doc["codes"]["sampled"]["seed"] = *inv.seed;
    }
  }
}

std::uint64_t effective_seed(const ExperimentConfig& config) {
  if (config.kind == ExperimentKind::capacity_sweep) return config.capacity.seed;
  return config.codes.source == CodeSpec::Source::sampled ? config.codes.seed : 0;
}

json run_configured(const Invocation& inv, ExperimentKind kind, std::vector<Artifact>& artifacts, std::uint64_t& seed,
                    std::string& out_dir, std::ostream& out) {
  json doc;
  fs::path base_dir;
  if (inv.config) {
    doc = load_config_json(*inv.config);
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    if (!doc.contains("kind")) doc["kind"] = std::string(to_string(kind));
    base_dir = fs::path(*inv.config).parent_path();
  } else {
    doc = inline_config(inv, kind);
  }
  apply_overrides(inv, doc);
  const ExperimentConfig config = parse_experiment_config(doc, base_dir);
  const bool matrix_only = kind == ExperimentKind::association_graph && config.kind == ExperimentKind::fidelity_matrix;
  if (config.kind != kind && !matrix_only) {
    throw ConfigError(inv.subcommand + ": config kind '" + std::string(to_string(config.kind)) +
                      "' does not match the subcommand");
  }
  if (!inv.out_given && !config.output_dir.empty()) out_dir = config.output_dir;
  seed = effective_seed(config);
  for (auto& artifact : run_experiment(config, inv.threads)) artifacts.push_back(std::move(artifact));
  if (!inv.quiet) out << inv.subcommand << ": " << to_string(config.kind) << " done\n";
  return config.echo();
}

// --- oracle verification -------------------------------------------------------------

int run_oracle_verify(const Invocation& inv, std::vector<Artifact>& artifacts, std::ostream& out, json& echo) {
  require(inv.dim >= 4, "oracle-verify: --dim must be >= 4");
  VerifyOptions options;
  options.dim = inv.dim;
  options.threads = inv.threads;
  options.tolerance_scale = inv.tolerance_scale;
  echo = {{"dim", options.dim}, {"algebra_dim", options.algebra_dim}, {"tolerance_scale", options.tolerance_scale}};
  const auto rows = verify_all(options);

  const std::vector<std::string> header{"suite", "label", "quantity", "expected", "observed",
                                        "residual", "tolerance", "pass"};
  CsvTable all(header);
  CsvTable failed(header);
  std::size_t failures = 0;
  json worst = json::object();
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.suite, r.label, r.quantity, format_number(r.expected),
                                   format_number(r.observed), format_number(r.residual),
                                   format_number(r.tolerance), r.pass ? "1" : "0"};
    all.row(cells);
    if (!r.pass) {
      failed.row(cells);
      ++failures;
    }
    const double previous = worst.contains(r.suite) ? worst[r.suite].get<double>() : 0.0;
    if (r.quantity != "halving_ratio") worst[r.suite] = std::max(previous, r.residual);
  }
  json summary = {{"schema_version", kArtifactSchemaVersion},
                  {"kind", "oracle-verify"},
                  {"config", echo},
                  {"results", {{"checks", rows.size()}, {"failures", failures}, {"max_residual", worst}}}};
  artifacts.push_back({"residuals.csv", all.str()});
  if (failures > 0) artifacts.push_back({"failures.csv", failed.str()});
  artifacts.push_back({"summary.json", dump_json(summary)});
  if (!inv.quiet) out << "oracle-verify: " << rows.size() << " checks, " << failures << " failures\n";
  return failures > 0 ? kExitVerificationFailed : kExitOk;
}

void report_error(std::ostream& err, const char* kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Invocation inv;
  CLI::App app{"qmem: dissipative quantum memory simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", inv.config, "Experiment config (JSON)");
  auto* out_opt = app.add_option("--out", inv.out, "Output directory")->capture_default_str();
  app.add_option("--seed", inv.seed, "Seed for sampled codes (overrides the config)");
  app.add_option("--threads", inv.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--epsilon", inv.epsilon, "Distinguishability threshold (overrides the config)");
  app.add_option("--dim", inv.dim, "Oracle Fock truncation per oscillator")->capture_default_str();
  app.add_flag("--quiet", inv.quiet, "Suppress progress output");

  auto* print = app.add_subcommand("print", "Print a memory into a registry file");
  auto* recall_cmd = app.add_subcommand("recall", "Rank stored memories against a cue code");
  auto* evolve = app.add_subcommand("evolve", "Per-mode trajectory of a stored memory");
  auto* forgetting = app.add_subcommand("forgetting", "Forgetting curves");
  auto* capacity = app.add_subcommand("capacity", "Greedy capacity sweep over mode counts");
  auto* associate = app.add_subcommand("associate", "Fidelity graph and clusters (also runs fidelity-matrix configs)");
  auto* thermo = app.add_subcommand("thermo-trace", "Entropy, energy, fitted beta and first-law ledger");
  auto* verify = app.add_subcommand("oracle-verify", "Closed forms against the Fock-space oracle");
  verify->add_option("--tolerance-scale", inv.tolerance_scale, "Multiply every residual tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  for (auto* sub : {print, recall_cmd, evolve, forgetting, associate, thermo}) {
    sub->add_option("--registry", inv.registry, "Registry file");
    sub->add_option("--thetas", inv.thetas, "Comma-separated code")->delimiter(',');
    sub->add_option("--time", inv.time, "Time");
  }
  for (auto* sub : {print, evolve, forgetting}) sub->add_option("--id", inv.id, "Memory id");
  for (auto* sub : {print, forgetting, thermo, capacity}) {
    sub->add_option("--modes", inv.modes, "Mode count");
    sub->add_option("--omega", inv.omega, "Mode energy")->capture_default_str();
    sub->add_option("--gamma", inv.gamma, "Damping rate")->capture_default_str();
  }
  for (auto* sub : {print, forgetting, thermo}) sub->add_option("--beta", inv.beta, "Inverse temperature");
  evolve->add_option("--dt", inv.dt, "Trajectory step");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage_error", e.what());
    return kExitError;
  }
  inv.subcommand = app.get_subcommands().front()->get_name();
  inv.out_given = out_opt->count() > 0;

  const auto started = std::chrono::steady_clock::now();
  try {
    std::string out_dir = inv.out;
    std::vector<Artifact> artifacts;
    std::uint64_t seed = inv.seed.value_or(0);
    json echo;
    int status = kExitOk;

    const std::string& sub = inv.subcommand;
    if (sub == "print" || sub == "recall" || sub == "evolve" || sub == "oracle-verify") {
      require(!inv.config, sub + ": --config is not used by this subcommand");
    }
    if (sub == "print") {
      echo = run_print(inv, artifacts, out);
    } else if (sub == "recall") {
      echo = run_recall(inv, artifacts, out);
    } else if (sub == "evolve") {
      echo = run_evolve(inv, artifacts, out);
    } else if (sub == "oracle-verify") {
      status = run_oracle_verify(inv, artifacts, out, echo);
    } else {
      const ExperimentKind kind = sub == "forgetting"  ? ExperimentKind::forgetting_curve
                                  : sub == "capacity"  ? ExperimentKind::capacity_sweep
                                  : sub == "associate" ? ExperimentKind::association_graph
                                                       : ExperimentKind::thermo_trace;
      echo = run_configured(inv, kind, artifacts, seed, out_dir, out);
    }
    OutputSet outputs(out_dir);
    for (const auto& artifact : artifacts) outputs.add(artifact);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    outputs.add("manifest.json", dump_json(manifest(inv, echo, seed, outputs, wall)));
    outputs.commit();
    return status;
  } catch (const ConfigError& e) {
    report_error(err, "config_error", e.what());
  } catch (const RegistryError& e) {
    report_error(err, "registry_error", e.what());
  } catch (const DuplicateIdError& e) {
    report_error(err, "duplicate_id", e.what());
  } catch (const BudgetError& e) {
    report_error(err, "budget_error", e.what());
  } catch (const DegenerateError& e) {
    report_error(err, "degenerate", e.what());
  } catch (const DomainError& e) {
    report_error(err, "domain_error", e.what());
  } catch (const MismatchError& e) {
    report_error(err, "mismatch", e.what());
  } catch (const IndexError& e) {
    report_error(err, "unknown_id", e.what());
  } catch (const std::exception& e) {
    report_error(err, "error", e.what());
  }
  return kExitError;
}

}  // namespace qmem
