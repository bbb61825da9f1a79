#pragma once

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/text.hpp"
#include "dslake/core/value.hpp"
#include "dslake/exec/binding.hpp"
#include "dslake/knowledge/registry.hpp"
#include "dslake/storage/disk.hpp"

extern char** environ;

namespace dslake::exec {

namespace fs = std::filesystem;

struct PackageInvocation {
  const PackageDescriptor* package = nullptr;
  std::map<std::string, TypedValue> bindings;
  std::vector<OutputRequest> requests;  // empty: every declared output by name
  std::optional<int> placement_node;    // set for OnNode placement
  std::string object_id;
  std::string task_id;
};

enum class ExitStatus { Ok, Failed };

struct PackageOutput {
  std::map<std::string, Value> outputs;  // keyed by request key
  ExitStatus status = ExitStatus::Ok;
  std::string reason;                    // set when Failed
  std::chrono::nanoseconds wall_time{0};
  std::optional<int> executed_on;        // node for OnNode placement
  std::optional<fs::path> scratch_dir;   // kept after a failed external run

  bool ok() const noexcept { return status == ExitStatus::Ok; }
};

// ---------------------------------------------------------------------------
// Exchange files between the engine and external commands.
//
//   literal inputs     int, shortest round-trip real, ISO time, `<n>h`, text
//   record file        `#record`, then `field <TAB> kind <TAB> text` lines,
//                      kind one of none int real text time dur
//   series file        `#series`, then `time <TAB> value` lines
//   requests.tsv       `key <TAB> output <TAB> comma-separated indices`
//   outputs.tsv        `key <TAB> literal-or-file`; a file path is relative
//                      to the output directory unless absolute

inline std::string encode_literal(const Scalar& s) {
  struct V {
    std::string operator()(None) const { return "none"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_shortest(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(TimePoint v) const { return format_iso8601(v); }
    std::string operator()(Hours v) const { return std::to_string(v.count()) + "h"; }
  };
  return std::visit(V{}, s);
}

/// Reads a literal back; the declared semantic type settles ambiguous text.
inline Value decode_literal(const std::string& type, std::string_view text) {
  if (type == "int" || type == "datetime" || type == "duration") return parse_literal(type, text).value;
  if (text == "none") return None{};
  if (const auto v = parse_int(text)) return *v;
  if (const auto v = parse_double(text)) return *v;
  if (const auto v = parse_iso8601(text)) return *v;
  return std::string(text);
}

namespace detail {

inline std::pair<std::string, std::string> scalar_kind(const Scalar& s) {
  static const char* kinds[] = {"none", "int", "real", "text", "time", "dur"};
  return {kinds[s.index()], encode_literal(s)};
}

inline Scalar scalar_from_kind(std::string_view kind, std::string_view text) {
  if (kind == "none") return None{};
  if (kind == "text") return std::string(text);
  if (kind == "int")
    if (const auto v = parse_int(text)) return *v;
  if (kind == "real")
    if (const auto v = parse_double(text)) return *v;
  if (kind == "time")
    if (const auto v = parse_iso8601(text)) return *v;
  if (kind == "dur" && !text.empty() && text.back() == 'h')
    if (const auto v = parse_int(text.substr(0, text.size() - 1))) return Hours{*v};
  throw Error(Errc::FormatError, "bad " + std::string(kind) + " field '" + std::string(text) + "'");
}

}  // namespace detail

inline std::string encode_value_file(const Value& v) {
  std::string out;
  if (const auto* ts = std::get_if<TimeSeries>(&v)) {
    out = "#series\n";
    for (const auto& p : ts->points) out += format_iso8601(p.time) + "\t" + format_shortest(p.value) + "\n";
  } else if (const auto* rec = std::get_if<Record>(&v)) {
    out = "#record\n";
    for (const auto& [k, s] : rec->fields) {
      const auto [kind, text] = detail::scalar_kind(s);
      out += k + "\t" + kind + "\t" + text + "\n";
    }
  } else {
    throw Error(Errc::FormatError, "only series and records are written as files");
  }
  return out;
}

inline Value decode_value_file(std::string_view text) {
  std::string_view kind;
  TimeSeries ts;
  Record rec;
  for_each_line(text, [&](int lineno, std::string_view line) {
    if (lineno == 1) {
      kind = line;
      if (kind != "#series" && kind != "#record") throw FormatError(1, "expected #series or #record");
      return;
    }
    if (line.empty()) return;
    const auto f = split_on(line, '\t');
    if (kind == "#series") {
      if (f.size() != 2) throw FormatError(lineno, "series lines are 'time <TAB> value'");
      const auto t = parse_iso8601(f[0]);
      const auto v = parse_double(f[1]);
      if (!t || !v) throw FormatError(lineno, "bad series point");
      ts.points.push_back(SeriesPoint{*t, *v});
    } else {
      if (f.size() != 3) throw FormatError(lineno, "record lines are 'field <TAB> kind <TAB> value'");
      rec.fields[std::string(f[0])] = detail::scalar_from_kind(f[1], f[2]);
    }
  });
  if (kind == "#series") return ts;
  if (kind == "#record") return rec;
  throw FormatError(1, "empty value file");
}

inline std::string format_requests(std::span<const OutputRequest> requests) {
  std::string out;
  for (const auto& r : requests) {
    out += r.key + "\t" + r.name + "\t";
    for (std::size_t i = 0; i < r.indices.size(); ++i) out += (i ? "," : "") + std::to_string(r.indices[i]);
    out += "\n";
  }
  return out;
}

inline std::vector<OutputRequest> parse_requests(std::string_view text) {
  std::vector<OutputRequest> out;
  for_each_line(text, [&](int lineno, std::string_view line) {
    if (line.empty()) return;
    const auto f = split_on(line, '\t');
    if (f.size() != 3) throw FormatError(lineno, "requests.tsv lines are 'key <TAB> output <TAB> indices'");
    OutputRequest r{std::string(f[1]), {}, std::string(f[0])};
    if (!f[2].empty())
      for (const auto idx : split_on(f[2], ',')) {
        const auto v = parse_int(idx);
        if (!v) throw FormatError(lineno, "bad index '" + std::string(idx) + "'");
        r.indices.push_back(*v);
      }
    out.push_back(std::move(r));
  });
  return out;
}

/// Writes `outputs.tsv` (and one file per series or record) into `outdir`.
inline void write_outputs(const fs::path& outdir, const std::map<std::string, Value>& outputs) {
  std::string table;
  int n = 0;
  for (const auto& [key, v] : outputs) {
    if (std::holds_alternative<TimeSeries>(v) || std::holds_alternative<Record>(v)) {
      const std::string file = "value-" + std::to_string(n++) + ".txt";
      storage::write_file(outdir / file, encode_value_file(v));
      table += key + "\t" + file + "\n";
    } else {
      table += key + "\t" +
               std::visit(
                   [](const auto& x) -> std::string {
                     using T = std::decay_t<decltype(x)>;
                     if constexpr (std::is_same_v<T, TimeSeries> || std::is_same_v<T, Record>) return {};
                     else return encode_literal(Scalar{x});
                   },
                   v) +
               "\n";
    }
  }
  storage::write_file(outdir / "outputs.tsv", table);
}

/// Reads `outputs.tsv`; `type_of` maps an output key to its declared type.
template <typename TypeOf>
std::map<std::string, Value> read_outputs(const fs::path& outdir, TypeOf&& type_of) {
  std::map<std::string, Value> out;
  const auto table = storage::read_file(outdir / "outputs.tsv");
  for_each_line(table, [&](int lineno, std::string_view line) {
    if (line.empty()) return;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw FormatError(lineno, "outputs.tsv lines are 'name <TAB> value'");
    const std::string key(line.substr(0, tab));
    const std::string_view text = line.substr(tab + 1);
    fs::path file(std::string{text});
    if (!text.empty() && file.is_relative()) file = outdir / file;
    std::error_code ec;
    if (!text.empty() && fs::is_regular_file(file, ec)) out[key] = decode_value_file(storage::read_file(file));
    else out[key] = decode_literal(type_of(key), text);
  });
  return out;
}

inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

/// Expands `{input:<name>}` and `{outdir}`; every expansion is shell-quoted.
inline std::string expand_template(const std::string& tpl, const std::map<std::string, std::string>& inputs,
                                   const fs::path& outdir) {
  std::string out;
  std::size_t at = 0;
  for (const auto& ph : scan_placeholders(tpl)) {
    out.append(tpl, at, ph.begin - at);
    if (ph.kind == Placeholder::Kind::Outdir) {
      out += shell_quote(outdir.string());
    } else {
      const auto it = inputs.find(ph.input);
      if (it == inputs.end()) throw Error(Errc::BindingError, "no value for placeholder input '" + ph.input + "'");
      out += shell_quote(it->second);
    }
    at = ph.end;
  }
  out.append(tpl, at, std::string::npos);
  return out;
}

/// Runs `/bin/sh -c command` with the current environment plus
/// DSLAKE_TASK_ID, stdout and stderr captured in `dir`. Returns the exit code
/// (128 + signal for signalled children).
inline int run_shell(const std::string& command, const std::string& task_id, const fs::path& dir) {
  std::vector<std::string> env_store;
  for (char** e = environ; e && *e; ++e)
    if (std::strncmp(*e, "DSLAKE_TASK_ID=", 15) != 0) env_store.emplace_back(*e);
  env_store.push_back("DSLAKE_TASK_ID=" + task_id);
  std::vector<char*> envp;
  for (auto& s : env_store) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::string sh = "/bin/sh", dash_c = "-c", cmd = command;
  char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

  const std::string out_path = (dir / "stdout.txt").string();
  const std::string err_path = (dir / "stderr.txt").string();
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&fa, 1, out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&fa, 2, err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &fa, nullptr, argv, envp.data());
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw Error(Errc::PackageFailure, std::string("cannot start /bin/sh: ") + std::strerror(rc));
  int status = 0;
  while (waitpid(pid, &status, 0) < 0)
    if (errno != EINTR) throw Error(Errc::PackageFailure, "waitpid failed");
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return 255;
}

/// Applies defaults and checks names and semantic types before a call.
inline std::map<std::string, TypedValue> bind_inputs(const PackageDescriptor& pkg,
                                                     const std::map<std::string, TypedValue>& given) {
  for (const auto& [name, v] : given) {
    const auto* in = pkg.find_input(name);
    if (!in) throw Error(Errc::BindingError, "'" + name + "' is not an input of " + pkg.name);
    if (in->type != v.type)
      throw Error(Errc::BindingError, "input '" + name + "' of " + pkg.name + " expects " + in->type + ", got " + v.type);
  }
  std::map<std::string, TypedValue> out = given;
  for (const auto& in : pkg.inputs) {
    if (out.count(in.name)) continue;
    if (in.default_value) out[in.name] = parse_literal(in.type, *in.default_value);
    else if (in.required) throw Error(Errc::BindingError, "required input '" + in.name + "' of " + pkg.name + " is not bound");
  }
  return out;
}

inline std::vector<OutputRequest> effective_requests(const PackageDescriptor& pkg,
                                                     const std::vector<OutputRequest>& requests) {
  if (!requests.empty()) return requests;
  std::vector<OutputRequest> all;
  for (const auto& o : pkg.outputs) all.push_back(OutputRequest{o.name, {}, o.name});
  return all;
}

namespace detail {

inline fs::path make_scratch() {
  std::string tpl = (fs::temp_directory_path() / "dslake-XXXXXX").string();
  if (!mkdtemp(tpl.data())) throw Error(Errc::IoError, "cannot create a scratch directory");
  return tpl;
}

inline std::map<std::string, Value> run_external(const PackageDescriptor& pkg,
                                                 const std::map<std::string, TypedValue>& inputs,
                                                 const std::vector<OutputRequest>& requests, const std::string& task_id,
                                                 const fs::path& scratch, std::string& failure) {
  const fs::path in_dir = scratch / "in";
  const fs::path outdir = scratch / "out";
  fs::create_directories(in_dir);
  fs::create_directories(outdir);
  std::map<std::string, std::string> expansions;
  for (const auto& [name, tv] : inputs) {
    if (std::holds_alternative<TimeSeries>(tv.value) || std::holds_alternative<Record>(tv.value)) {
      const fs::path p = in_dir / (name + ".txt");
      storage::write_file(p, encode_value_file(tv.value));
      expansions[name] = p.string();
    } else {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (!std::is_same_v<T, TimeSeries> && !std::is_same_v<T, Record>)
              expansions[name] = encode_literal(Scalar{x});
          },
          tv.value);
    }
  }
  storage::write_file(outdir / "requests.tsv", format_requests(requests));
  const std::string command = expand_template(*pkg.command_template, expansions, outdir);
  const int code = run_shell(command, task_id, scratch);
  if (code != 0) {
    failure = "command exited with status " + std::to_string(code);
    return {};
  }
  if (!fs::exists(outdir / "outputs.tsv")) {
    failure = "command wrote no outputs.tsv";
    return {};
  }
  std::map<std::string, std::string> types;
  for (const auto& r : requests)
    if (const auto* o = pkg.find_output(r.name)) types[r.key] = o->type;
  try {
    return read_outputs(outdir, [&](const std::string& key) { return types.count(key) ? types[key] : std::string(); });
  } catch (const std::exception& e) {
    failure = std::string("unreadable outputs: ") + e.what();
    return {};
  }
}

}  // namespace detail

/// Runs one package call. Binding problems throw BindingError before
/// anything runs; runtime problems come back as a Failed output.
inline PackageOutput invoke(const PackageInvocation& inv, const KnowledgeRegistry& registry) {
  if (!inv.package) throw Error(Errc::BindingError, "invocation without a package");
  const auto& pkg = *inv.package;
  const auto inputs = bind_inputs(pkg, inv.bindings);
  const auto requests = effective_requests(pkg, inv.requests);
  for (const auto& r : requests) {
    const auto* o = pkg.find_output(r.name);
    if (!o) throw Error(Errc::BindingError, "'" + r.name + "' is not an output of " + pkg.name);
    if (!r.indices.empty() && !o->indexable) throw Error(Errc::BindingError, "output '" + r.name + "' is not indexable");
  }

  PackageOutput result;
  if (pkg.placement == Placement::OnNode) result.executed_on = inv.placement_node;
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, Value> raw;
  std::string failure;
  if (pkg.mode == ExecutionMode::Builtin) {
    try {
      raw = registry.procedures().builtin(*pkg.procedure)(inputs, requests);
    } catch (const std::exception& e) {
      failure = e.what();
    }
  } else {
    const fs::path scratch = detail::make_scratch();
    try {
      raw = detail::run_external(pkg, inputs, requests, inv.task_id, scratch, failure);
    } catch (const std::exception& e) {
      failure = e.what();
    }
    if (failure.empty()) {
      std::error_code ec;
      fs::remove_all(scratch, ec);
    } else {
      result.scratch_dir = scratch;
    }
  }
  if (failure.empty())
    for (const auto& r : requests) {
      const auto it = raw.find(r.key);
      if (it == raw.end()) {
        failure = "missing declared output '" + r.key + "'";
        break;
      }
      result.outputs[r.key] = it->second;
    }
  result.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0);
  if (!failure.empty()) {
    result.status = ExitStatus::Failed;
    result.reason = failure;
    result.outputs.clear();
  }
  return result;
}

/// As invoke, but a failed run raises PackageFailure.
inline PackageOutput invoke_or_throw(const PackageInvocation& inv, const KnowledgeRegistry& registry) {
  auto out = invoke(inv, registry);
  if (!out.ok()) throw Error(Errc::PackageFailure, inv.package->name + ": " + out.reason);
  return out;
}

/// The command side of the exchange contract for a builtin: decodes inputs
/// (literals or value files), reads `requests.tsv` from `outdir`, calls the
/// procedure and writes `outputs.tsv`. Lets a builtin be wrapped as an
/// external command.
inline void serve_builtin(const KnowledgeRegistry& registry, const std::string& package, const fs::path& outdir,
                          const std::map<std::string, std::string>& raw_inputs) {
  const auto& pkg = registry.resolve_package(package);
  if (pkg.mode != ExecutionMode::Builtin) throw Error(Errc::BindingError, package + " is not a builtin package");
  std::map<std::string, TypedValue> inputs;
  for (const auto& [name, text] : raw_inputs) {
    const auto* in = pkg.find_input(name);
    if (!in) throw Error(Errc::BindingError, "'" + name + "' is not an input of " + pkg.name);
    std::error_code ec;
    if (fs::is_regular_file(fs::path(text), ec)) inputs[name] = {in->type, decode_value_file(storage::read_file(text))};
    else inputs[name] = {in->type, decode_literal(in->type, text)};
  }
  const auto bound = bind_inputs(pkg, inputs);
  std::vector<OutputRequest> requests;
  if (fs::exists(outdir / "requests.tsv")) requests = parse_requests(storage::read_file(outdir / "requests.tsv"));
  requests = effective_requests(pkg, requests);
  write_outputs(outdir, registry.procedures().builtin(*pkg.procedure)(bound, requests));
}

}  // namespace dslake::exec
