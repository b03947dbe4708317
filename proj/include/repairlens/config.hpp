#pragma once

// Pipeline configuration, read from JSON. Relative paths resolve against the
// config file's directory. Unknown keys are rejected with their key path.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "repairlens/error.hpp"
#include "repairlens/io.hpp"
#include "repairlens/newviol.hpp"
#include "repairlens/process.hpp"
#include "repairlens/sampling.hpp"
#include "repairlens/semantic.hpp"
#include "repairlens/violation.hpp"

namespace repairlens {

inline constexpr std::array<std::string_view, 5> kAdapterRoles{"analyzer", "repairer", "test_runner",
                                                               "metric_extractor", "compiler"};

struct SamplingConfig {
  double confidence = 0.95;
  double margin = 0.05;
  double proportion = 0.5;
  double precision_threshold = 0.70;
  std::optional<fs::path> labels;  // filled labeling sheet, optional
};

struct PipelineConfig {
  fs::path corpus_dir;
  fs::path workspace_dir;
  std::map<std::string, std::optional<ToolAdapter>> adapters;  // nullopt = skip
  std::string profile = "sorald-30";
  std::string analyzer_format = "csv";
  std::string analyzer_report = "report.csv";  // file the analyzer writes into {output}
  bool end_line_fallback = false;
  LineNormalization normalization = LineNormalization::Exact;
  SamplingConfig sampling;
  std::uint64_t seed = 42;
  unsigned jobs = 1;
  std::optional<fs::path> patterns;

  const ToolAdapter* adapter(std::string_view role) const {
    auto it = adapters.find(std::string(role));
    return it == adapters.end() || !it->second ? nullptr : &*it->second;
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw Error(ErrorKind::ConfigError, (prefix.empty() ? key : prefix + "." + key) + ": unknown key");
}

template <class T>
T get_as(const nlohmann::json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::ConfigError, path + ": wrong type");
  }
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

inline ToolAdapter parse_adapter(const nlohmann::json& j, const std::string& role, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, path + ": expected an object or \"skip\"");
  reject_unknown(j, {"command", "timeout", "expected_artifacts"}, path);
  if (!j.contains("command")) throw Error(ErrorKind::ConfigError, path + ".command: missing");
  ToolAdapter a;
  a.name = role;
  a.command_template = get_as<std::string>(j, "command", path + ".command", "");
  a.timeout_seconds = get_as<double>(j, "timeout", path + ".timeout", 600.0);
  a.expected_artifacts = get_as<std::vector<std::string>>(j, "expected_artifacts", path + ".expected_artifacts", {});
  validate_adapter(a, path);
  return a;
}

}  // namespace detail

inline PipelineConfig parse_config(const nlohmann::json& doc, const fs::path& base_dir) {
  using detail::get_as;
  if (!doc.is_object()) throw Error(ErrorKind::ConfigError, "config root must be an object");
  detail::reject_unknown(doc,
                         {"corpus_dir", "workspace_dir", "adapters", "profile", "analyzer_format", "analyzer_report",
                          "end_line_fallback", "normalization", "sampling", "seed", "jobs", "patterns"},
                         "");
  PipelineConfig c;
  for (const char* key : {"corpus_dir", "workspace_dir"})
    if (!doc.contains(key)) throw Error(ErrorKind::ConfigError, std::string(key) + ": missing");
  c.corpus_dir = detail::resolve(base_dir, get_as<std::string>(doc, "corpus_dir", "corpus_dir", ""));
  c.workspace_dir = detail::resolve(base_dir, get_as<std::string>(doc, "workspace_dir", "workspace_dir", ""));

  if (!doc.contains("adapters") || !doc.at("adapters").is_object())
    throw Error(ErrorKind::ConfigError, "adapters: missing");
  const auto& adapters = doc.at("adapters");
  detail::reject_unknown(adapters, {kAdapterRoles.begin(), kAdapterRoles.end()}, "adapters");
  for (auto role : kAdapterRoles) {
    const std::string path = "adapters." + std::string(role);
    if (!adapters.contains(role))
      throw Error(ErrorKind::ConfigError, path + ": role not bound (give an adapter or \"skip\")");
    const auto& entry = adapters.at(std::string(role));
    if (entry.is_string() && entry.get<std::string>() == "skip")
      c.adapters[std::string(role)] = std::nullopt;
    else
      c.adapters[std::string(role)] = detail::parse_adapter(entry, std::string(role), path);
  }
  if (!c.adapter("analyzer") || !c.adapter("repairer"))
    throw Error(ErrorKind::ConfigError, "adapters: analyzer and repairer cannot be skipped");

  c.profile = get_as<std::string>(doc, "profile", "profile", c.profile);
  try {
    (void)profile_by_name(c.profile);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, std::string("profile: ") + e.what());
  }
  c.analyzer_format = get_as<std::string>(doc, "analyzer_format", "analyzer_format", c.analyzer_format);
  if (!default_adapters().contains(c.analyzer_format))
    throw Error(ErrorKind::ConfigError, "analyzer_format: unknown format '" + c.analyzer_format + "'");
  c.analyzer_report = get_as<std::string>(doc, "analyzer_report", "analyzer_report", c.analyzer_report);
  c.end_line_fallback = get_as<bool>(doc, "end_line_fallback", "end_line_fallback", false);
  try {
    c.normalization = parse_normalization(get_as<std::string>(doc, "normalization", "normalization", "exact"));
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, std::string("normalization: ") + e.what());
  }

  if (doc.contains("sampling")) {
    const auto& s = doc.at("sampling");
    if (!s.is_object()) throw Error(ErrorKind::ConfigError, "sampling: expected an object");
    detail::reject_unknown(s, {"confidence", "margin", "proportion", "precision_threshold", "labels"}, "sampling");
    c.sampling.confidence = get_as<double>(s, "confidence", "sampling.confidence", 0.95);
    c.sampling.margin = get_as<double>(s, "margin", "sampling.margin", 0.05);
    c.sampling.proportion = get_as<double>(s, "proportion", "sampling.proportion", 0.5);
    c.sampling.precision_threshold = get_as<double>(s, "precision_threshold", "sampling.precision_threshold", 0.70);
    if (s.contains("labels"))
      c.sampling.labels = detail::resolve(base_dir, get_as<std::string>(s, "labels", "sampling.labels", ""));
  }
  try {
    (void)z_for_confidence(c.sampling.confidence);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, std::string("sampling.confidence: ") + e.what());
  }
  if (!(c.sampling.margin > 0 && c.sampling.margin < 1))
    throw Error(ErrorKind::ConfigError, "sampling.margin: must be in (0, 1)");
  if (!(c.sampling.proportion > 0 && c.sampling.proportion < 1))
    throw Error(ErrorKind::ConfigError, "sampling.proportion: must be in (0, 1)");
  if (!(c.sampling.precision_threshold > 0 && c.sampling.precision_threshold < 1))
    throw Error(ErrorKind::ConfigError, "sampling.precision_threshold: must be in (0, 1)");

  c.seed = get_as<std::uint64_t>(doc, "seed", "seed", c.seed);
  c.jobs = get_as<unsigned>(doc, "jobs", "jobs", 1);
  if (c.jobs == 0) throw Error(ErrorKind::ConfigError, "jobs: must be >= 1");
  if (doc.contains("patterns"))
    c.patterns = detail::resolve(base_dir, get_as<std::string>(doc, "patterns", "patterns", ""));
  return c;
}

inline PipelineConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::ConfigError, "config file " + path.string() + " does not exist");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
  return parse_config(doc, fs::absolute(path).parent_path());
}

// The parts of the config a stage's outputs depend on, as stable text.
inline nlohmann::json adapter_json(const PipelineConfig& c, std::string_view role) {
  const auto* a = c.adapter(role);
  if (!a) return "skip";
  return {{"command", a->command_template}, {"expected_artifacts", a->expected_artifacts}};
}

inline PatternTables load_patterns(const PipelineConfig& c) {
  if (!c.patterns) return default_patterns();
  try {
    return PatternTables::from_json(nlohmann::json::parse(io::read_file(*c.patterns)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, "patterns: " + std::string(e.what()));
  }
}

}  // namespace repairlens
