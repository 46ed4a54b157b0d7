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

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qmem/capacity.hpp"

namespace qmem {

using json = nlohmann::json;

bool Registry::contains(const std::string& id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return true;
  }
  return false;
}

const RegistryEntry& Registry::at(const std::string& id) const {
  for (const auto& e : entries_) {
    if (e.id == id) return e;
  }
  throw IndexError("registry has no entry '" + id + "'");
}

State Registry::state(std::size_t i, double t) const {
  return State(modes_, entries_.at(i).code, t);
}

Registry print_memory(const Registry& registry, std::string id, MemoryCode code, double printed_at) {
  if (id.empty()) throw DomainError("print_memory: id must be non-empty");
  if (registry.contains(id)) throw DuplicateIdError("print_memory: id '" + id + "' already printed");
  if (code.size() != registry.modes().size()) {
    throw MismatchError("print_memory: code length " + std::to_string(code.size()) + " != mode count " +
                        std::to_string(registry.modes().size()));
  }
  if (!(printed_at >= 0.0) || !std::isfinite(printed_at)) {
    throw DomainError("print_memory: printed_at must be finite and >= 0");
  }
  Registry next = registry;
  next.entries_.push_back({std::move(id), std::move(code), printed_at});
  return next;
}

Registry print_memory_from_beta(const Registry& registry, std::string id, double beta, double printed_at) {
  return print_memory(registry, std::move(id), code_from_beta(registry.modes(), beta), printed_at);
}

namespace {

json to_json(const Registry& registry) {
  json modes = json::array();
  for (const auto& p : registry.modes().params()) {
    modes.push_back({{"index", p.index}, {"omega", p.omega}, {"gamma", p.gamma}});
  }
  json entries = json::array();
  for (const auto& e : registry.entries()) {
    json thetas = json::array();
    for (Eigen::Index k = 0; k < e.code.thetas().size(); ++k) thetas.push_back(e.code.thetas()[k]);
    entries.push_back({{"id", e.id}, {"thetas", std::move(thetas)}, {"printed_at", e.printed_at}});
  }
  return {{"schema_version", Registry::kSchemaVersion}, {"modes", std::move(modes)}, {"entries", std::move(entries)}};
}

void require_keys(const json& object, const std::set<std::string>& keys, const std::string& where) {
  if (!object.is_object()) throw RegistryFormatError(where + ": expected an object");
  for (const auto& [key, _] : object.items()) {
    if (!keys.count(key)) throw RegistryFormatError(where + ": unknown key '" + key + "'");
  }
  for (const auto& key : keys) {
    if (!object.contains(key)) throw RegistryFormatError(where + ": missing key '" + key + "'");
  }
}

double number(const json& value, const std::string& where) {
  if (!value.is_number()) throw RegistryFormatError(where + ": expected a number");
  return value.get<double>();
}

Registry from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    throw RegistryFormatError("registry: missing schema_version");
  }
  if (!doc["schema_version"].is_number_integer()) {
    throw RegistryFormatError("registry: schema_version must be an integer");
  }
  const int version = doc["schema_version"].get<int>();
  if (version != Registry::kSchemaVersion) {
    throw RegistryVersionError("registry: schema_version " + std::to_string(version) +
                               " is not supported (expected " + std::to_string(Registry::kSchemaVersion) +
                               "); re-print the memories with this version of qmem");
  }
  require_keys(doc, {"schema_version", "modes", "entries"}, "registry");
  if (!doc["modes"].is_array() || !doc["entries"].is_array()) {
    throw RegistryFormatError("registry: modes and entries must be arrays");
  }

  std::vector<ModeParams<double>> params;
  for (const auto& m : doc["modes"]) {
    require_keys(m, {"index", "omega", "gamma"}, "registry.modes[]");
    if (!m["index"].is_number_unsigned()) throw RegistryFormatError("registry.modes[].index: expected unsigned");
    params.push_back({m["index"].get<std::size_t>(), number(m["omega"], "registry.modes[].omega"),
                      number(m["gamma"], "registry.modes[].gamma")});
  }
  Registry registry;
  try {
    registry = Registry(Modes::from_params(params));
  } catch (const std::exception& e) {
    throw RegistryFormatError(std::string("registry.modes: ") + e.what());
  }

  for (const auto& e : doc["entries"]) {
    require_keys(e, {"id", "thetas", "printed_at"}, "registry.entries[]");
    if (!e["id"].is_string()) throw RegistryFormatError("registry.entries[].id: expected a string");
    if (!e["thetas"].is_array()) throw RegistryFormatError("registry.entries[].thetas: expected an array");
    const auto id = e["id"].get<std::string>();
    if (e["thetas"].size() != registry.modes().size()) {
      throw RegistryLengthError("registry entry '" + id + "': code length " + std::to_string(e["thetas"].size()) +
                                " != mode count " + std::to_string(registry.modes().size()));
    }
    VectorX<double> thetas(static_cast<Eigen::Index>(e["thetas"].size()));
    for (std::size_t k = 0; k < e["thetas"].size(); ++k) {
      thetas[static_cast<Eigen::Index>(k)] = number(e["thetas"][k], "registry.entries[].thetas[]");
    }
    try {
      registry = print_memory(registry, id, MemoryCode(std::move(thetas)), number(e["printed_at"], "printed_at"));
    } catch (const RegistryError&) {
      throw;
    } catch (const std::exception& ex) {
      throw RegistryFormatError("registry entry '" + id + "': " + ex.what());
    }
  }
  return registry;
}

}  // namespace

std::string registry_to_string(const Registry& registry) { return to_json(registry).dump(2) + "\n"; }

Registry registry_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw RegistryFormatError(std::string("registry: malformed JSON: ") + e.what());
  }
  return from_json(doc);
}

void save_registry(const Registry& registry, const std::filesystem::path& path) {
  const auto partial = std::filesystem::path(path.string() + ".partial");
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + partial.string());
    out << registry_to_string(registry);
    if (!out) throw std::runtime_error("write failed: " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

Registry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RegistryError("cannot read registry " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return registry_from_string(text.str());
}

}  // namespace qmem
