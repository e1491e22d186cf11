#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sdv/errors.hpp"
#include "sdv/kvdoc.hpp"
#include "sdv/n3_rules.hpp"
#include "sdv/query.hpp"
#include "sdv/query_template.hpp"
#include "sdv/rule_engine.hpp"

namespace sdv {

enum class EntityKind { Source, Converted };

struct ParamDecl {
  std::string name;
  bool required = false;
};

/// An entity's configuration folder, loaded and validated:
///   config        kind, declared parameters, file references, mode
///   query.rq      source entities: CONSTRUCT template with $...$ markers
///   rules.n3      converted entities: conversion rules (repeatable)
///   inputs.list   converted entities: one input URL template or file: per line
///   filter.rq     optional output filter (CONSTRUCT or SELECT)
struct EntityConfig {
  std::string path;
  EntityKind kind = EntityKind::Source;
  std::vector<ParamDecl> params;
  std::filesystem::path dir;

  // source
  std::string template_file;
  QueryTemplate tmpl;

  // converted
  std::vector<std::string> rule_files;
  RuleSet rules;
  std::vector<std::string> inputs;
  ApplyMode mode = ApplyMode::SinglePass;
  std::optional<std::variant<ConstructQuery, SelectQuery>> filter;
  std::string filter_file;

  const ParamDecl* find_param(std::string_view name) const {
    for (const ParamDecl& p : params)
      if (p.name == name) return &p;
    return nullptr;
  }
};

struct EntityRequest {
  std::string path;
  std::map<std::string, std::string> params;
  bool want_proof = false;
  // sub-entity split: produce once per value of the named parameter
  std::optional<std::pair<std::string, std::vector<std::string>>> partition;
};

namespace detail {

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// {param} holes of an input URL template.
inline std::set<std::string> url_template_params(std::string_view tpl) {
  std::set<std::string> out;
  size_t i = 0;
  while ((i = tpl.find('{', i)) != std::string_view::npos) {
    size_t end = tpl.find('}', i);
    if (end == std::string_view::npos) break;
    out.insert(std::string(tpl.substr(i + 1, end - i - 1)));
    i = end + 1;
  }
  return out;
}

/// Substitutes {param} holes; query pairs whose value still contains an
/// unfilled hole are dropped (an absent optional parameter removes the pair).
inline std::string expand_input_url(std::string_view tpl,
                                    const std::map<std::string, std::string>& params) {
  std::string expanded;
  size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      size_t end = tpl.find('}', i);
      if (end == std::string_view::npos) {
        expanded += tpl[i++];
        continue;
      }
      std::string name(tpl.substr(i + 1, end - i - 1));
      auto it = params.find(name);
      expanded += it != params.end() ? it->second : "{" + name + "}";
      i = end + 1;
    } else {
      expanded += tpl[i++];
    }
  }
  // drop query pairs with unfilled holes
  size_t qmark = expanded.find('?');
  if (qmark == std::string::npos) return expanded;
  std::string head = expanded.substr(0, qmark);
  std::string query = expanded.substr(qmark + 1);
  std::string kept;
  size_t pos = 0;
  while (pos <= query.size()) {
    size_t amp = query.find('&', pos);
    std::string pair = query.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
    if (!pair.empty() && pair.find('{') == std::string::npos) {
      if (!kept.empty()) kept += '&';
      kept += pair;
    }
    if (amp == std::string::npos) break;
    pos = amp + 1;
  }
  return kept.empty() ? head : head + "?" + kept;
}

} // namespace detail

/// Loads one entity folder. Throws ConfigError with the offending detail.
inline EntityConfig load_entity_config(const std::filesystem::path& dir, std::string path) {
  EntityConfig cfg;
  cfg.path = std::move(path);
  cfg.dir = dir;

  std::string text = detail::read_text_file(dir / "config");
  bool kind_set = false;
  for (const KvLine& kv : read_kv_lines(text)) {
    if (kv.key == "kind") {
      if (kv.value == "source") cfg.kind = EntityKind::Source;
      else if (kv.value == "converted") cfg.kind = EntityKind::Converted;
      else throw ConfigError(cfg.path + ": unknown kind '" + kv.value + "'");
      kind_set = true;
    } else if (kv.key == "param") {
      std::istringstream ss(kv.value);
      ParamDecl p;
      std::string flag;
      ss >> p.name >> flag;
      if (p.name.empty()) throw ConfigError(cfg.path + ": param needs a name");
      if (flag == "required") p.required = true;
      else if (!flag.empty() && flag != "optional")
        throw ConfigError(cfg.path + ": unknown param flag '" + flag + "'");
      cfg.params.push_back(std::move(p));
    } else if (kv.key == "template") {
      cfg.template_file = kv.value;
    } else if (kv.key == "rules") {
      cfg.rule_files.push_back(kv.value);
    } else if (kv.key == "mode") {
      if (kv.value == "single-pass") cfg.mode = ApplyMode::SinglePass;
      else if (kv.value == "fixpoint") cfg.mode = ApplyMode::Fixpoint;
      else throw ConfigError(cfg.path + ": unknown mode '" + kv.value + "'");
    } else if (kv.key == "filter") {
      cfg.filter_file = kv.value;
    } else {
      throw ConfigError(cfg.path + ": unknown config key '" + kv.key + "' (line " +
                        std::to_string(kv.line) + ")");
    }
  }
  if (!kind_set) throw ConfigError(cfg.path + ": config is missing 'kind'");

  if (cfg.kind == EntityKind::Source) {
    if (cfg.template_file.empty()) throw ConfigError(cfg.path + ": source entity needs 'template'");
    cfg.tmpl = QueryTemplate::parse(detail::read_text_file(dir / cfg.template_file));
    for (const std::string& p : cfg.tmpl.parameters)
      if (!cfg.find_param(p))
        throw ConfigError(cfg.path + ": template parameter '" + p + "' is not declared");
  } else {
    if (cfg.rule_files.empty()) throw ConfigError(cfg.path + ": converted entity needs 'rules'");
    for (const std::string& rf : cfg.rule_files) {
      RuleSet rs = parse_rules(detail::read_text_file(dir / rf), rf);
      for (Rule& r : rs.rules) cfg.rules.rules.push_back(std::move(r));
      cfg.rules.prefixes.insert(rs.prefixes.begin(), rs.prefixes.end());
    }
    std::filesystem::path inputs_file = dir / "inputs.list";
    if (!std::filesystem::exists(inputs_file))
      throw ConfigError(cfg.path + ": converted entity needs inputs.list");
    for (const KvLine& kv : read_kv_lines(detail::read_text_file(inputs_file))) {
      if (!kv.value.empty())
        throw ConfigError(cfg.path + ": input URL contains whitespace: " + kv.key + " " + kv.value);
      cfg.inputs.push_back(kv.key);
      for (const std::string& p : detail::url_template_params(kv.key))
        if (!cfg.find_param(p))
          throw ConfigError(cfg.path + ": input references undeclared parameter '" + p + "'");
    }
    if (cfg.inputs.empty()) throw ConfigError(cfg.path + ": converted entity needs at least one input");
  }

  if (!cfg.filter_file.empty()) {
    Query q = parse_query(detail::read_text_file(dir / cfg.filter_file));
    if (auto* c = std::get_if<ConstructQuery>(&q)) cfg.filter = std::move(*c);
    else cfg.filter = std::move(std::get<SelectQuery>(q));
  }
  return cfg;
}

/// All entity folders under one root. Path -> folder mapping is the identity
/// on path segments: entities/<path...>/config.
class EntityRepository {
public:
  /// Scans the root; configuration problems land in errors (one message per
  /// broken entity; broken paths are remembered so access can answer 500
  /// rather than 404 when the service chooses to start anyway).
  static EntityRepository load(const std::filesystem::path& root,
                               std::vector<std::string>& errors) {
    EntityRepository repo;
    repo.root_ = root;
    if (!std::filesystem::exists(root)) {
      errors.push_back("entities root " + root.string() + " does not exist");
      return repo;
    }
    std::vector<std::filesystem::path> config_files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().filename() == "config")
        config_files.push_back(e.path());
    }
    std::sort(config_files.begin(), config_files.end());
    for (const auto& file : config_files) {
      std::string path = std::filesystem::relative(file.parent_path(), root).generic_string();
      try {
        repo.entities_.emplace(path, load_entity_config(file.parent_path(), path));
      } catch (const Error& e) {
        errors.push_back(e.what());
        repo.invalid_.insert(path);
      }
    }
    // dangling self-relative inputs
    for (const auto& [path, cfg] : repo.entities_) {
      for (const std::string& input : cfg.inputs) {
        if (input.rfind("/entities/", 0) != 0) continue;
        std::string target = input.substr(std::string("/entities/").size());
        size_t q = target.find('?');
        if (q != std::string::npos) target.resize(q);
        if (!repo.entities_.count(target) && !repo.invalid_.count(target))
          errors.push_back(path + ": input references unknown entity '" + target + "'");
      }
    }
    return repo;
  }

  const EntityConfig* find(std::string_view path) const {
    auto it = entities_.find(std::string(path));
    return it == entities_.end() ? nullptr : &it->second;
  }

  bool is_invalid(std::string_view path) const { return invalid_.count(std::string(path)) != 0; }
  const std::map<std::string, EntityConfig>& entities() const { return entities_; }
  const std::filesystem::path& root() const { return root_; }

private:
  std::filesystem::path root_;
  std::map<std::string, EntityConfig> entities_;
  std::set<std::string> invalid_;
};

} // namespace sdv
