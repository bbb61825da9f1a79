// dslake: command-line front end.
//
// Exit codes: 0 success, 1 domain error (parse, validation, storage, query),
// 2 usage error (bad flags, unreadable input files).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dslake/dslake.hpp"

namespace fs = std::filesystem;
using namespace dslake;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  fs::path storage_root = "dslake-store";
  int node_count = 4;
  int replication = 2;
  std::vector<fs::path> registry_paths;
  std::optional<std::uint64_t> seed;
};

int to_int(const std::string& key, const std::string& v) {
  const auto n = parse_int(trim(v));
  if (!n || *n < 1 || *n > 4096) throw UsageError(key + " must be a positive integer, got '" + v + "'");
  return static_cast<int>(*n);
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  std::uint64_t out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw UsageError(key + " must be an unsigned integer, got '" + v + "'");
  return out;
}

void apply(CliConfig& c, const std::string& key, const std::string& value, const std::string& origin) {
  if (key == "storage_root") c.storage_root = std::string(trim(value));
  else if (key == "nodes") c.node_count = to_int(origin + " nodes", value);
  else if (key == "replication") c.replication = to_int(origin + " replication", value);
  else if (key == "seed") c.seed = to_seed(origin + " seed", value);
  else if (key == "registry") c.registry_paths.emplace_back(std::string(trim(value)));
  else throw UsageError(origin + ": unknown key '" + key + "'");
}

std::string read_input(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) throw UsageError("cannot read '" + p.string() + "'");
  return storage::read_file(p);
}

// Defaults, then the config file, then DSLAKE_* variables; flags are applied
// by the caller last.
CliConfig load_config(const std::optional<fs::path>& explicit_file) {
  CliConfig c;
  std::optional<fs::path> file = explicit_file;
  if (!file && fs::exists("dslake.conf")) file = "dslake.conf";
  if (file) {
    const auto text = read_input(*file);
    for_each_line(text, [&](int lineno, std::string_view raw) {
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') return;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw UsageError(file->string() + ":" + std::to_string(lineno) + ": expected key=value");
      apply(c, std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))),
            file->string() + ":" + std::to_string(lineno));
    });
  }
  const std::pair<const char*, const char*> env[] = {{"DSLAKE_STORAGE_ROOT", "storage_root"},
                                                     {"DSLAKE_NODES", "nodes"},
                                                     {"DSLAKE_REPLICATION", "replication"},
                                                     {"DSLAKE_SEED", "seed"}};
  for (const auto& [var, key] : env)
    if (const char* v = std::getenv(var)) apply(c, key, v, var);
  return c;
}

KnowledgeRegistry make_registry(const CliConfig& c) {
  KnowledgeRegistry reg;
  cyclone::install(reg);
  for (const auto& p : c.registry_paths) register_descriptors(reg, read_input(p));
  return reg;
}

void print_registry(const KnowledgeRegistry& reg) {
  for (const auto& [name, lib] : reg.libraries()) {
    std::cout << "library " << name << "\n";
    for (const auto& t : lib.object_types) {
      std::cout << "  object " << t.name;
      for (const auto& a : t.aliases) std::cout << " (alias " << a << ")";
      std::cout << "\n";
      for (const auto& p : t.output_params)
        std::cout << "    param " << p.name << " " << p.type << (p.composite ? " composite" : "") << "\n";
    }
    for (const auto& [key, id] : lib.filters) std::cout << "  filter " << key.first << " " << key.second << "\n";
    for (const auto& [alias, canonical] : lib.keyword_aliases)
      std::cout << "  keyword " << alias << " -> " << canonical << "\n";
  }
  for (const auto& [name, pkg] : reg.packages()) {
    std::cout << "package " << name << (pkg.mode == ExecutionMode::Builtin ? " builtin" : " external")
              << (pkg.placement == Placement::OnAggregator ? " aggregator" : " node") << "\n";
    for (const auto& in : pkg.inputs)
      std::cout << "  input " << in.name << " " << in.type << (in.required ? " required" : " optional")
                << (in.default_value ? " " + *in.default_value : "") << "\n";
    for (const auto& o : pkg.outputs)
      std::cout << "  output " << o.name << " " << o.type << (o.indexable ? " indexable" : "") << "\n";
  }
}

std::string csv_series(const engine::ResultDocument& doc) {
  std::string out = "object_id,package,output,time,value\n";
  for (const auto& s : doc.simulations)
    for (const auto& [key, v] : s.outputs)
      if (const auto* ts = std::get_if<TimeSeries>(&v))
        for (const auto& p : ts->points)
          out += s.object_id + "," + s.package + ",\"" + key + "\"," + format_iso8601(p.time) + "," +
                 format_fixed4(p.value) + "\n";
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"dslake: domain-specific queries over simulated distributed storage"};
  app.require_subcommand(1);

  std::optional<std::string> config_file, root_flag;
  std::optional<int> nodes_flag, repl_flag;
  std::optional<std::uint64_t> seed_flag;
  std::vector<std::string> registry_flags;
  app.add_option("--config", config_file, "key=value config file (default ./dslake.conf)");
  app.add_option("--root", root_flag, "storage root directory");
  app.add_option("--replication", repl_flag, "replication factor")->check(CLI::PositiveNumber);
  app.add_option("--registry", registry_flags, "extra .kd descriptor files");

  std::string script_path, manifest_path, spec_path, dataset, task_id, package, outdir, csv_path;
  std::vector<int> fail_nodes;
  std::vector<std::string> params, inputs;
  bool full = false;

  auto* validate = app.add_subcommand("validate", "parse and validate a script, print it canonically");
  validate->add_option("script", script_path)->required();

  auto* ingest = app.add_subcommand("ingest", "store the files listed in a manifest.tsv");
  ingest->add_option("manifest", manifest_path)->required();
  ingest->add_option("--nodes", nodes_flag)->check(CLI::PositiveNumber);
  std::vector<std::string> ingest_datasets;
  ingest->add_option("--dataset", ingest_datasets, "also create this dataset, even if no row names it (repeatable)");

  auto* gen = app.add_subcommand("gen-synthetic", "generate and ingest a synthetic dataset, print its ground truth");
  gen->add_option("spec", spec_path)->required();
  gen->add_option("--seed", seed_flag);
  gen->add_option("--nodes", nodes_flag)->check(CLI::PositiveNumber);

  auto* submit = app.add_subcommand("submit", "run a script over a dataset");
  submit->add_option("script", script_path)->required();
  submit->add_option("--dataset", dataset)->required();
  submit->add_option("--nodes", nodes_flag, "simulated node count")->check(CLI::PositiveNumber);
  submit->add_option("--fail-node", fail_nodes, "node to fail before running (repeatable)");
  submit->add_option("--param", params, "extra task parameter key=value (repeatable)");
  submit->add_option("--emit-csv", csv_path, "write simulated series as CSV");
  submit->add_flag("--full", full, "include placement and timing details");

  auto* results = app.add_subcommand("results", "print a stored result document");
  results->add_option("task_id", task_id)->required();

  auto* registry = app.add_subcommand("registry", "inspect the knowledge registry");
  registry->require_subcommand(1);
  auto* registry_list = registry->add_subcommand("list", "list libraries, object types and packages");

  auto* exec_builtin = app.add_subcommand("exec-builtin", "serve a builtin package through the external-command contract");
  exec_builtin->group("");
  exec_builtin->add_option("package", package)->required();
  exec_builtin->add_option("--outdir", outdir)->required();
  exec_builtin->add_option("--input", inputs, "name=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CliConfig cfg = load_config(config_file ? std::optional<fs::path>(*config_file) : std::nullopt);
  if (root_flag) cfg.storage_root = *root_flag;
  if (nodes_flag) cfg.node_count = *nodes_flag;
  if (repl_flag) cfg.replication = *repl_flag;
  if (seed_flag) cfg.seed = *seed_flag;
  for (const auto& r : registry_flags) cfg.registry_paths.emplace_back(r);

  if (*validate) {
    const auto script = read_input(script_path);
    const auto reg = make_registry(cfg);
    const auto ast = query::parse(script);
    query::validate(ast, reg);
    std::cout << query::format(query::canonicalize(ast, reg));
    return 0;
  }

  if (*registry_list) {
    print_registry(make_registry(cfg));
    return 0;
  }

  if (*exec_builtin) {
    std::map<std::string, std::string> raw;
    for (const auto& kv : inputs) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--input expects name=value, got '" + kv + "'");
      raw[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    exec::serve_builtin(make_registry(cfg), package, outdir, raw);
    return 0;
  }

  storage::DiskStore store(cfg.storage_root);

  if (*ingest) {
    std::error_code ec;
    if (!fs::is_regular_file(manifest_path, ec)) throw UsageError("cannot read '" + manifest_path + "'");
    const auto files = storage::load_manifest_files(manifest_path);
    store.init(cfg.node_count, cfg.replication);
    store.ingest(files);
    std::set<std::string> names;
    for (const auto& f : files) names.insert(f.dataset());
    names.insert(ingest_datasets.begin(), ingest_datasets.end());
    for (const auto& n : names) store.create_dataset(n);
    std::cout << "ingested " << files.size() << " files\n";
    return 0;
  }

  if (*gen) {
    const auto spec = cyclone::parse_synthetic_spec(read_input(spec_path));
    const auto data = cyclone::generate_synthetic(spec, cfg.seed.value_or(0));
    store.init(cfg.node_count, cfg.replication);
    store.ingest(data.files);
    store.create_dataset(spec.dataset);
    std::cerr << "generated " << data.files.size() << " snapshots into dataset '" << spec.dataset << "'\n";
    std::cout << data.truth.canonical();
    return 0;
  }

  if (*submit) {
    const auto script = read_input(script_path);
    const auto reg = make_registry(cfg);
    ParamMap extra;
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
      extra[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    // Validate before touching storage so script errors surface first.
    query::validate(query::parse(script), reg);
    const auto files = store.load_dataset(dataset);
    const int nodes = cfg.node_count;
    storage::StorageLayout layout(nodes, std::min(cfg.replication, nodes));
    layout.create_dataset(dataset);
    layout.ingest(files);
    for (const int n : fail_nodes) layout.fail_node(n);

    engine::TaskRequest req{dataset, script, extra, {}};
    const auto doc = engine::submit(req, reg, layout);
    const auto canonical = doc.canonical();
    storage::write_file(store.result_path(doc.task_id), canonical);
    std::cout << (full ? doc.full() : canonical);
    if (!csv_path.empty()) storage::write_file(csv_path, csv_series(doc));
    return 0;
  }

  if (*results) {
    const auto p = store.result_path(task_id);
    if (!fs::exists(p)) throw Error(Errc::IoError, "no stored result for task '" + task_id + "'");
    std::cout << storage::read_file(p);
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "dslake: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dslake: " << e.what() << "\n";
    return 1;
  }
}
