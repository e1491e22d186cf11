// Operator entry point: serve the entity API, run pipelines offline, verify
// proofs, and benchmark conversion throughput over seeded synthetic data.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdv/bench.hpp"
#include "sdv/entity_service.hpp"
#include "sdv/http_server.hpp"
#include "sdv/proof_check.hpp"

namespace {

// Exit codes (frozen; see README):
//   0 ok, 1 unexpected, 2 usage, 3 unknown entity, 4 bad/missing parameter,
//   5 input fetch failure, 6 rule/query evaluation error, 7 proof invalid,
//   8 configuration error
enum ExitCode {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kNotFound = 3,
  kBadParam = 4,
  kFetchFailed = 5,
  kEvalFailed = 6,
  kProofInvalid = 7,
  kConfigError = 8,
};

int map_error(const sdv::Error& e) {
  if (dynamic_cast<const sdv::NotFoundError*>(&e)) return kNotFound;
  if (dynamic_cast<const sdv::ParamError*>(&e)) return kBadParam;
  if (dynamic_cast<const sdv::FetchError*>(&e)) return kFetchFailed;
  if (dynamic_cast<const sdv::ConfigError*>(&e)) return kConfigError;
  return kEvalFailed; // EvalError, ParseError, ModelError
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw sdv::ConfigError("cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (!p.parent_path().empty()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw sdv::Error("cannot write " + p.string());
  out << content;
}

sdv::ServiceConfig load_config(const std::string& config_path, bool force_in_process) {
  sdv::ServiceConfig cfg = sdv::ServiceConfig::load_file(config_path);
  if (const char* root = std::getenv("SDV_ENTITIES_ROOT"); root && *root)
    cfg.entities_root = root;
  if (force_in_process) cfg.fetch_mode = sdv::ServiceConfig::FetchMode::InProcess;
  return cfg;
}

std::map<std::string, std::string> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, std::string> params;
  for (const std::string& kv : kvs) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw sdv::ParamError("--param needs key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return params;
}

int cmd_serve(const std::string& config_path) {
  sdv::ServiceConfig cfg = load_config(config_path, false);
  std::vector<std::string> errors;
  sdv::EntityService service(cfg, errors);
  if (!errors.empty()) {
    for (const std::string& e : errors) std::cerr << "config error: " << e << "\n";
    if (!cfg.allow_invalid) {
      std::cerr << errors.size() << " configuration error(s); refusing to start\n";
      return kConfigError;
    }
    std::cerr << "allow_invalid is set; broken entities answer 500\n";
  }

  sdv::HttpServer server(service);
  if (!server.start()) {
    std::cerr << "cannot bind " << cfg.listen_host << ":" << cfg.listen_port << "\n";
    return kConfigError;
  }
  std::cout << "serving " << service.repository().entities().size() << " entities on http://"
            << cfg.listen_host << ":" << server.port() << "/entities\n";
  server.wait();
  return kOk;
}

int cmd_run(const std::string& config_path, const std::string& entity,
            const std::vector<std::string>& params, const std::string& out_file,
            const std::string& proof_file, const std::string& partition) {
  sdv::ServiceConfig cfg = load_config(config_path, true);
  std::vector<std::string> errors;
  sdv::EntityService service(cfg, errors);
  for (const std::string& e : errors) std::cerr << "warning: " << e << "\n";

  sdv::EntityRequest req;
  req.path = entity;
  req.params = parse_params(params);
  req.want_proof = !proof_file.empty();

  if (!partition.empty()) {
    if (req.want_proof) throw sdv::ParamError("--proof-out is not available with --partition");
    size_t eq = partition.find('=');
    if (eq == std::string::npos)
      throw sdv::ParamError("--partition needs key=v1,v2,..., got '" + partition + "'");
    std::vector<std::string> values;
    std::string list = partition.substr(eq + 1);
    size_t pos = 0;
    while (pos <= list.size()) {
      size_t comma = list.find(',', pos);
      values.push_back(list.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    req.partition = {partition.substr(0, eq), values};
    sdv::Graph g = service.produce_partitioned(req);
    std::string body = sdv::serialize_turtle(g);
    if (out_file.empty()) std::cout << body;
    else write_file(out_file, body);
    return kOk;
  }

  sdv::ProduceResult result = service.produce(req);
  std::string body = result.body_text();
  if (out_file.empty()) std::cout << body;
  else write_file(out_file, body);
  if (!proof_file.empty()) {
    if (!result.proof) throw sdv::EvalError("entity produced no proof (source entities do not)");
    write_file(proof_file, result.proof->to_json().dump(2) + "\n");
  }
  return kOk;
}

int cmd_verify(const std::string& proof_file, const std::vector<std::string>& rule_files,
               const std::vector<std::string>& input_specs) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(read_file(proof_file));
  } catch (const nlohmann::json::exception& e) {
    throw sdv::ConfigError("proof file is not valid JSON: " + std::string(e.what()));
  }
  sdv::Proof proof = sdv::Proof::from_json(parsed);

  sdv::RuleSet rules;
  for (const std::string& rf : rule_files) {
    std::string source = std::filesystem::path(rf).filename().string();
    sdv::RuleSet rs = sdv::parse_rules(read_file(rf), source);
    for (sdv::Rule& r : rs.rules) rules.rules.push_back(std::move(r));
    rules.prefixes.insert(rs.prefixes.begin(), rs.prefixes.end());
  }

  std::vector<sdv::Graph> graphs;
  std::vector<std::pair<std::string, size_t>> ids;
  graphs.reserve(input_specs.size());
  for (const std::string& spec : input_specs) {
    // split at the last '=' so source ids may be URLs with query strings
    size_t eq = spec.rfind('=');
    std::string id = eq == std::string::npos ? spec : spec.substr(0, eq);
    std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    graphs.push_back(sdv::parse_turtle(read_file(path)));
    ids.emplace_back(id, graphs.size() - 1);
  }
  std::vector<sdv::SourceGraph> sources;
  for (const auto& [id, idx] : ids) sources.push_back({id, &graphs[idx]});

  sdv::Verdict verdict = sdv::check_proof(proof, sources, rules);
  if (verdict.valid) {
    std::cout << "proof valid: " << proof.steps.size() << " steps, " << proof.sources.size()
              << " sources\n";
    return kOk;
  }
  std::cerr << "proof invalid";
  if (verdict.step >= 0) std::cerr << " at step " << verdict.step;
  std::cerr << ": " << verdict.reason << "\n";
  return kProofInvalid;
}

int cmd_bench(const std::string& config_path, const std::string& entity,
              const std::string& sizes_arg, int reps, int partitions, uint64_t seed,
              const std::string& out_file) {
  sdv::ServiceConfig cfg = load_config(config_path, true);
  std::vector<std::string> errors;
  sdv::EntityService service(cfg, errors);
  for (const std::string& e : errors) std::cerr << "warning: " << e << "\n";

  const sdv::EntityConfig& ec = service.resolve(entity);
  if (ec.kind != sdv::EntityKind::Converted)
    throw sdv::ParamError("bench needs a converted entity (rules to run)");

  std::vector<size_t> sizes;
  size_t pos = 0;
  while (pos <= sizes_arg.size()) {
    size_t comma = sizes_arg.find(',', pos);
    std::string tok =
        sizes_arg.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) sizes.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (sizes.empty()) throw sdv::ParamError("--sizes needs at least one triple count");

  std::vector<sdv::BenchRow> rows;
  for (size_t size : sizes) {
    sdv::BenchRow row = sdv::run_bench_case(ec.rules, size, seed, reps, partitions);
    rows.push_back(row);
    std::cout << "size=" << row.target_triples << " input_triples=" << row.input_triples
              << " records=" << row.records << " retrieve=" << row.retrieve_s << "s"
              << " convert=" << row.convert_s << "s"
              << " derived=" << row.derived_triples << " records/s=" << size_t(row.records_per_s)
              << " derived/s=" << size_t(row.derived_per_s) << "\n";
  }
  std::string csv = sdv::bench_csv(rows);
  if (!out_file.empty()) write_file(out_file, csv);
  else std::cout << csv;
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic data virtualization pipeline"};
  app.require_subcommand(1);

  std::string config_path;

  auto* serve = app.add_subcommand("serve", "serve the entity API");
  serve->add_option("--config", config_path, "service config file")->required();

  std::string entity, out_file, proof_file, partition;
  std::vector<std::string> params;
  auto* run = app.add_subcommand("run", "produce one entity offline");
  run->add_option("entity", entity, "entity path")->required();
  run->add_option("--config", config_path, "service config file")->required();
  run->add_option("--param", params, "request parameter key=value")->take_all();
  run->add_option("--out", out_file, "output file (stdout when absent)");
  run->add_option("--proof-out", proof_file, "write the proof JSON here");
  run->add_option("--partition", partition, "key=v1,v2,... produce per value and union");

  std::string proof_in;
  std::vector<std::string> rule_files, input_specs;
  auto* verify = app.add_subcommand("verify", "check a proof against rules and inputs");
  verify->add_option("--proof", proof_in, "proof JSON file")->required();
  verify->add_option("--rules", rule_files, "rule file (repeatable)")->required()->take_all();
  verify->add_option("--input", input_specs, "[source-id=]turtle-file (repeatable)")->take_all();

  std::string sizes = "10000,100000,1000000";
  int reps = 3, partitions = 1;
  uint64_t seed = 42;
  auto* bench = app.add_subcommand("bench", "measure conversion throughput on synthetic data");
  bench->add_option("entity", entity, "converted entity whose rules to run")->required();
  bench->add_option("--config", config_path, "service config file")->required();
  bench->add_option("--sizes", sizes, "comma-separated input triple targets");
  bench->add_option("--reps", reps, "repetitions per size");
  bench->add_option("--partitions", partitions, "concurrent sub-conversions");
  bench->add_option("--seed", seed, "generator seed");
  bench->add_option("--out", out_file, "bench report CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (serve->parsed()) return cmd_serve(config_path);
    if (run->parsed()) return cmd_run(config_path, entity, params, out_file, proof_file, partition);
    if (verify->parsed()) return cmd_verify(proof_in, rule_files, input_specs);
    if (bench->parsed()) return cmd_bench(config_path, entity, sizes, reps, partitions, seed, out_file);
  } catch (const sdv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return map_error(e);
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}
