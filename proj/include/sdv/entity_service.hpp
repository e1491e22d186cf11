#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sdv/csv.hpp"
#include "sdv/direct_mapping.hpp"
#include "sdv/entity.hpp"
#include "sdv/etl.hpp"
#include "sdv/hash.hpp"
#include "sdv/isomorphism.hpp"
#include "sdv/proof.hpp"
#include "sdv/rule_engine.hpp"
#include "sdv/turtle.hpp"

namespace sdv {

/// Service deployment settings (shared manifest grammar, one key per line).
struct ServiceConfig {
  std::filesystem::path entities_root;
  std::filesystem::path source_manifest;
  std::filesystem::path source_data_dir;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string base_url; // absolute self identity; inputs with this prefix stay local
  enum class FetchMode { InProcess, Loopback } fetch_mode = FetchMode::Loopback;
  bool allow_invalid = false;
  std::string default_tz; // overrides the schema manifest's default_tz when set

  static ServiceConfig load(std::string_view text, const std::filesystem::path& base_dir) {
    ServiceConfig cfg;
    auto resolve = [&](const std::string& v) {
      std::filesystem::path p(v);
      return p.is_absolute() ? p : base_dir / p;
    };
    for (const KvLine& kv : read_kv_lines(text)) {
      if (kv.key == "entities_root") cfg.entities_root = resolve(kv.value);
      else if (kv.key == "source_manifest") cfg.source_manifest = resolve(kv.value);
      else if (kv.key == "source_data") cfg.source_data_dir = resolve(kv.value);
      else if (kv.key == "base_url") cfg.base_url = kv.value;
      else if (kv.key == "listen") {
        size_t colon = kv.value.rfind(':');
        if (colon == std::string::npos)
          throw ConfigError("listen needs host:port (line " + std::to_string(kv.line) + ")");
        cfg.listen_host = kv.value.substr(0, colon);
        cfg.listen_port = std::stoi(kv.value.substr(colon + 1));
      } else if (kv.key == "fetch_mode") {
        if (kv.value == "in-process") cfg.fetch_mode = FetchMode::InProcess;
        else if (kv.value == "loopback") cfg.fetch_mode = FetchMode::Loopback;
        else throw ConfigError("unknown fetch_mode '" + kv.value + "'");
      } else if (kv.key == "allow_invalid") {
        cfg.allow_invalid = kv.value == "true";
      } else if (kv.key == "default_tz") {
        cfg.default_tz = kv.value;
      } else {
        throw ConfigError("unknown service config key '" + kv.key + "' (line " +
                          std::to_string(kv.line) + ")");
      }
    }
    if (cfg.entities_root.empty()) throw ConfigError("service config is missing entities_root");
    return cfg;
  }

  static ServiceConfig load_file(const std::filesystem::path& file) {
    return load(detail::read_text_file(file), file.parent_path());
  }
};

/// What a produce call returns: a graph body (Turtle on the wire) or, for
/// SELECT-filtered entities, a row body (CSV on the wire).
struct ProduceResult {
  std::variant<Graph, RowSet> body;
  std::optional<Proof> proof;
  std::vector<std::string> provenance; // every URL fetched, transitively, in fetch order

  const Graph* graph() const { return std::get_if<Graph>(&body); }

  std::string body_text() const {
    if (const Graph* g = graph()) return serialize_turtle(*g);
    const RowSet& rs = std::get<RowSet>(body);
    std::string out = csv_row(rs.columns);
    for (const auto& row : rs.rows) {
      std::vector<std::string> cells;
      cells.reserve(row.size());
      for (const auto& cell : row)
        cells.push_back(cell ? TermPool::term(*cell).value : std::string());
      out += csv_row(cells);
    }
    return out;
  }

  std::string content_type() const { return graph() ? "text/turtle" : "text/csv"; }

  /// Strong validator: digest of the canonical body.
  std::string etag() const {
    if (const Graph* g = graph()) return graph_hash(*g);
    return Sha256::hex(body_text());
  }
};

/// The REST layer's engine: resolves entity paths to configuration folders,
/// orchestrates input fetching (in-process or HTTP loopback), runs the query
/// or rule machinery and hands back entity bodies with optional proofs.
///
/// Requests never mutate service state; the Layer-2 source snapshot is built
/// once at construction.
class EntityService {
public:
  /// HTTP fetch callback: GET url -> (body, provenance header values). Wired
  /// by the HTTP layer; absent means loopback fetching is unavailable.
  using HttpFetch =
      std::function<std::pair<std::string, std::vector<std::string>>(const std::string& url)>;

  EntityService(ServiceConfig cfg, std::vector<std::string>& startup_errors)
      : cfg_(std::move(cfg)) {
    repo_ = EntityRepository::load(cfg_.entities_root, startup_errors);
    if (!cfg_.source_manifest.empty()) {
      try {
        schema_ = load_schema(detail::read_text_file(cfg_.source_manifest));
        if (!cfg_.default_tz.empty()) schema_.default_tz = cfg_.default_tz;
        std::vector<Row> rows;
        for (const auto& [name, table] : schema_.tables) {
          std::filesystem::path csv_file = cfg_.source_data_dir / (name + ".csv");
          if (!std::filesystem::exists(csv_file))
            throw ConfigError("missing source data file " + csv_file.string());
          CsvTable csv = parse_csv(detail::read_text_file(csv_file));
          for (Row& r : rows_from_csv(table, csv)) rows.push_back(std::move(r));
        }
        source_graph_ = map_rows(schema_, rows);
      } catch (const Error& e) {
        startup_errors.push_back(e.what());
      }
    }
  }

  const EntityRepository& repository() const { return repo_; }
  const ServiceConfig& config() const { return cfg_; }
  const Graph& source_graph() const { return source_graph_; }
  const TableSchemaSet& schema() const { return schema_; }

  void set_http_fetch(HttpFetch fetch) { http_fetch_ = std::move(fetch); }
  void set_live_port(int port) { live_port_ = port; }
  int live_port() const {
    int p = live_port_.load();
    return p ? p : cfg_.listen_port;
  }

  const EntityConfig& resolve(std::string_view path) const {
    if (repo_.is_invalid(path))
      throw EvalError("entity '" + std::string(path) + "' is disabled: configuration invalid");
    const EntityConfig* cfg = repo_.find(path);
    if (!cfg) throw NotFoundError("unknown entity '" + std::string(path) + "'");
    return *cfg;
  }

  ProduceResult produce(const EntityRequest& req) const {
    std::set<std::string> visiting;
    return produce_internal(req, visiting);
  }

  /// Issues one produce per partition value concurrently and unions the
  /// graphs. The entity must produce graph bodies.
  Graph produce_partitioned(const EntityRequest& req) const {
    if (!req.partition) {
      ProduceResult r = produce(req);
      if (!r.graph()) throw EvalError("partitioned produce needs a graph-bodied entity");
      return std::move(*std::get_if<Graph>(&r.body));
    }
    const auto& [param, values] = *req.partition;
    std::vector<std::future<ProduceResult>> futures;
    futures.reserve(values.size());
    for (const std::string& value : values) {
      EntityRequest sub = req;
      sub.partition.reset();
      sub.want_proof = false;
      sub.params[param] = value;
      futures.push_back(std::async(std::launch::async, [this, sub] { return produce(sub); }));
    }
    Graph out;
    for (auto& f : futures) {
      ProduceResult r = f.get();
      if (!r.graph()) throw EvalError("partitioned produce needs a graph-bodied entity");
      out.absorb(*r.graph());
    }
    return out;
  }

  nlohmann::json entity_meta(const EntityConfig& cfg) const {
    nlohmann::json j;
    j["path"] = cfg.path;
    j["kind"] = cfg.kind == EntityKind::Source ? "source" : "converted";
    j["params"] = nlohmann::json::array();
    for (const ParamDecl& p : cfg.params)
      j["params"].push_back({{"name", p.name}, {"required", p.required}});
    if (cfg.kind == EntityKind::Source) {
      j["template"] = cfg.template_file;
    } else {
      j["rules"] = cfg.rule_files;
      j["inputs"] = cfg.inputs;
      j["mode"] = cfg.mode == ApplyMode::Fixpoint ? "fixpoint" : "single-pass";
    }
    if (!cfg.filter_file.empty()) j["filter"] = cfg.filter_file;
    return j;
  }

  nlohmann::json entity_list() const {
    nlohmann::json j;
    j["entities"] = nlohmann::json::array();
    for (const auto& [path, cfg] : repo_.entities()) j["entities"].push_back(path);
    return j;
  }

private:
  ProduceResult produce_internal(const EntityRequest& req, std::set<std::string>& visiting) const {
    const EntityConfig& cfg = resolve(req.path);

    std::map<std::string, std::string> params;
    for (const ParamDecl& decl : cfg.params) {
      auto it = req.params.find(decl.name);
      if (it != req.params.end()) params[decl.name] = it->second;
      else if (decl.required)
        throw ParamError("entity '" + cfg.path + "' requires parameter '" + decl.name + "'");
    }

    ProduceResult result;
    if (cfg.kind == EntityKind::Source) {
      std::string query_text = instantiate(cfg.tmpl, params);
      ConstructQuery query;
      try {
        query = parse_construct(query_text);
      } catch (const ParseError& e) {
        throw EvalError("entity '" + cfg.path + "': instantiated template is not a valid query: " +
                        e.what());
      }
      result.body = eval_construct(query, source_graph_);
      // no proof for source entities: the mapping step is a one-to-one
      // extraction, inference starts at the converted layers
      return result;
    }

    // converted entity: fetch inputs, run rules
    std::string visit_key = req.path + "?" + [&] {
      std::string s;
      for (const auto& [k, v] : params) s += k + "=" + v + "&";
      return s;
    }();
    if (!visiting.insert(visit_key).second)
      throw FetchError("input cycle detected at entity '" + req.path + "'");

    std::vector<std::pair<std::string, Graph>> inputs;
    for (const std::string& tpl : cfg.inputs) {
      std::string url = detail::expand_input_url(tpl, params);
      inputs.emplace_back(url, fetch_input(url, cfg, result.provenance, visiting));
    }
    visiting.erase(visit_key);

    std::vector<SourceGraph> sources;
    sources.reserve(inputs.size());
    for (const auto& [url, graph] : inputs) sources.push_back(SourceGraph{url, &graph});

    ProofOptions popts;
    popts.want = req.want_proof;
    ApplyResult applied = apply_rules(sources, cfg.rules, cfg.mode, popts);

    if (cfg.filter) {
      if (const auto* c = std::get_if<ConstructQuery>(&*cfg.filter)) {
        result.body = eval_construct(*c, applied.derived);
      } else {
        result.body = eval_select(std::get<SelectQuery>(*cfg.filter), applied.derived);
      }
    } else {
      result.body = std::move(applied.derived);
    }
    result.proof = std::move(applied.proof);
    return result;
  }

  /// Resolves one input: file: references, self-relative /entities/... paths
  /// (in-process or HTTP loopback per config), and absolute http(s) URLs.
  /// Appends the url and any transitive fetches to provenance.
  Graph fetch_input(const std::string& url, const EntityConfig& from,
                    std::vector<std::string>& provenance, std::set<std::string>& visiting) const {
    provenance.push_back(url);

    if (url.rfind("file:", 0) == 0) {
      std::filesystem::path p = from.dir / url.substr(5);
      std::string text;
      try {
        text = detail::read_text_file(p);
      } catch (const Error& e) {
        throw FetchError(std::string("cannot fetch input: ") + e.what(), url);
      }
      return parse_turtle(text);
    }

    std::string relative = url;
    if (!cfg_.base_url.empty() && url.rfind(cfg_.base_url, 0) == 0)
      relative = url.substr(cfg_.base_url.size());

    if (relative.rfind("/entities/", 0) == 0) {
      if (cfg_.fetch_mode == ServiceConfig::FetchMode::InProcess || !http_fetch_) {
        EntityRequest sub = parse_entity_url(relative);
        ProduceResult r = produce_internal(sub, visiting);
        if (!r.graph())
          throw FetchError("input entity does not produce a graph body", url);
        provenance.insert(provenance.end(), r.provenance.begin(), r.provenance.end());
        return std::move(*std::get_if<Graph>(&r.body));
      }
      std::string loopback = "http://" + cfg_.listen_host + ":" + std::to_string(live_port()) +
                             relative;
      return http_get(loopback, url, provenance);
    }

    if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0)
      return http_get(url, url, provenance);

    throw FetchError("unsupported input reference '" + url + "'", url);
  }

  Graph http_get(const std::string& fetch_url, const std::string& logical_url,
                 std::vector<std::string>& provenance) const {
    if (!http_fetch_)
      throw FetchError("HTTP fetching is not available in this process", logical_url);
    try {
      auto [body, transitive] = http_fetch_(fetch_url);
      provenance.insert(provenance.end(), transitive.begin(), transitive.end());
      return parse_turtle(body);
    } catch (const FetchError&) {
      throw;
    } catch (const Error& e) {
      throw FetchError("cannot fetch input '" + logical_url + "': " + e.what(), logical_url);
    }
  }

  /// "/entities/<path>?k=v&k2=v2" (values raw, not percent-encoded).
  static EntityRequest parse_entity_url(const std::string& url) {
    EntityRequest req;
    std::string rest = url.substr(std::string("/entities/").size());
    size_t q = rest.find('?');
    req.path = rest.substr(0, q == std::string::npos ? rest.size() : q);
    if (q != std::string::npos) {
      std::string query = rest.substr(q + 1);
      size_t pos = 0;
      while (pos <= query.size()) {
        size_t amp = query.find('&', pos);
        std::string pair =
            query.substr(pos, amp == std::string::npos ? std::string::npos : amp - pos);
        size_t eq = pair.find('=');
        if (eq != std::string::npos) req.params[pair.substr(0, eq)] = pair.substr(eq + 1);
        if (amp == std::string::npos) break;
        pos = amp + 1;
      }
    }
    return req;
  }

  ServiceConfig cfg_;
  EntityRepository repo_;
  TableSchemaSet schema_;
  Graph source_graph_;
  HttpFetch http_fetch_;
  std::atomic<int> live_port_{0};
};

} // namespace sdv
