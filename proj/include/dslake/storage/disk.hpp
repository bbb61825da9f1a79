#pragma once

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/text.hpp"
#include "dslake/storage/layout.hpp"

namespace dslake::storage {

namespace fs = std::filesystem;

/// One row of a `manifest.tsv`:
/// `file_id <TAB> dataset <TAB> t0 <TAB> t1 <TAB> relative_path`.
struct ManifestRow {
  std::string file_id;
  std::string dataset;
  TimePoint t0;
  TimePoint t1;
  std::string relative_path;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, std::string_view bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + p.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::IoError, "short write to " + p.string());
}

inline std::string format_manifest(const std::vector<ManifestRow>& rows) {
  std::string out = "#file_id\tdataset\tt0\tt1\trelative_path\n";
  for (const auto& r : rows)
    out += r.file_id + "\t" + r.dataset + "\t" + format_iso8601(r.t0) + "\t" + format_iso8601(r.t1) + "\t" +
           r.relative_path + "\n";
  return out;
}

inline std::vector<ManifestRow> parse_manifest(std::string_view text) {
  std::vector<ManifestRow> rows;
  for_each_line(text, [&](int lineno, std::string_view line) {
    if (trim(line).empty() || line.front() == '#') return;
    const auto f = split_on(line, '\t');
    if (f.size() != 5) throw FormatError(lineno, "manifest rows have 5 tab-separated columns");
    const auto t0 = parse_iso8601(f[2]);
    const auto t1 = parse_iso8601(f[3]);
    if (!t0 || !t1) throw FormatError(lineno, "bad ISO-8601 time");
    if (*t1 < *t0) throw FormatError(lineno, "t1 before t0");
    if (f[0].empty() || f[1].empty() || f[4].empty()) throw FormatError(lineno, "empty column");
    rows.push_back(ManifestRow{std::string(f[0]), std::string(f[1]), *t0, *t1, std::string(f[4])});
  });
  return rows;
}

/// Reads a manifest and the files it lists (paths relative to the manifest's
/// directory); every file must match its declared id.
inline std::vector<DataFile> load_manifest_files(const fs::path& manifest) {
  const auto rows = parse_manifest(read_file(manifest));
  std::vector<DataFile> files;
  files.reserve(rows.size());
  for (const auto& r : rows) {
    DataFile f(r.dataset, r.t0, r.t1, read_file(manifest.parent_path() / r.relative_path));
    if (f.file_id() != r.file_id)
      throw Error(Errc::IoError, r.relative_path + ": content digest " + f.file_id() + " != manifest id " + r.file_id);
    files.push_back(std::move(f));
  }
  return files;
}

/// Persistent storage root:
///
///   <root>/layout.conf                          `nodes N` and `replication R`
///   <root>/node-<k>/<dataset>/<file_id>         replica bytes
///   <root>/datasets/<dataset>/manifest.tsv      relative_path is `<dataset>/<file_id>`
///   <root>/results/<task_id>.txt                stored result documents
class DiskStore {
 public:
  explicit DiskStore(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const noexcept { return root_; }

  bool initialized() const { return fs::exists(root_ / "layout.conf"); }

  /// Creates the root on first use; afterwards the stored layout must match.
  void init(int node_count, int replication) {
    place("", node_count, replication);
    if (initialized()) {
      const auto [n, r] = layout_config();
      if (n != node_count || r != replication)
        throw Error(Errc::ConfigError, "storage root was created with nodes " + std::to_string(n) + ", replication " +
                                           std::to_string(r));
      return;
    }
    fs::create_directories(root_);
    for (int k = 0; k < node_count; ++k) fs::create_directories(node_dir(k));
    write_file(root_ / "layout.conf",
               "nodes " + std::to_string(node_count) + "\nreplication " + std::to_string(replication) + "\n");
  }

  std::pair<int, int> layout_config() const {
    int nodes = 0, replication = 0;
    for_each_line(read_file(root_ / "layout.conf"), [&](int lineno, std::string_view line) {
      const auto f = split_ws(line);
      if (f.empty()) return;
      const auto v = f.size() == 2 ? parse_int(f[1]) : std::nullopt;
      if (!v) throw FormatError(lineno, "layout.conf expects 'key value'");
      if (f[0] == "nodes") nodes = static_cast<int>(*v);
      else if (f[0] == "replication") replication = static_cast<int>(*v);
      else throw FormatError(lineno, "unknown layout key '" + std::string(f[0]) + "'");
    });
    return {nodes, replication};
  }

  fs::path node_dir(int k) const { return root_ / ("node-" + std::to_string(k)); }
  fs::path manifest_path(const std::string& dataset) const { return root_ / "datasets" / dataset / "manifest.tsv"; }

  bool has_dataset(const std::string& dataset) const { return fs::exists(manifest_path(dataset)); }

  std::vector<std::string> datasets() const {
    std::vector<std::string> out;
    if (!fs::exists(root_ / "datasets")) return out;
    for (const auto& e : fs::directory_iterator(root_ / "datasets"))
      if (fs::exists(e.path() / "manifest.tsv")) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Stores files on their placement nodes and appends them to the dataset
  /// manifests. Duplicate ids within a dataset are rejected before any write.
  void ingest(const std::vector<DataFile>& files) {
    const auto [nodes, replication] = layout_config();
    std::map<std::string, std::vector<ManifestRow>> manifests;
    for (const auto& f : files) {
      auto& rows = manifests[f.dataset()];
      if (rows.empty() && has_dataset(f.dataset())) rows = parse_manifest(read_file(manifest_path(f.dataset())));
      for (const auto& r : rows)
        if (r.file_id == f.file_id())
          throw Error(Errc::DuplicateFile, "'" + f.file_id() + "' in dataset '" + f.dataset() + "'");
      rows.push_back(ManifestRow{f.file_id(), f.dataset(), f.t0(), f.t1(), f.dataset() + "/" + f.file_id()});
    }
    for (const auto& f : files)
      for (int k : place(f.file_id(), nodes, replication))
        write_file(node_dir(k) / f.dataset() / f.file_id(), f.bytes());
    for (const auto& [dataset, rows] : manifests) write_file(manifest_path(dataset), format_manifest(rows));
  }

  void create_dataset(const std::string& dataset) {
    if (!has_dataset(dataset)) write_file(manifest_path(dataset), format_manifest({}));
  }

  /// Reads a dataset back from whichever node directory holds an intact copy.
  std::vector<DataFile> load_dataset(const std::string& dataset) const {
    if (!has_dataset(dataset)) throw Error(Errc::UnknownDataset, "'" + dataset + "'");
    const auto rows = parse_manifest(read_file(manifest_path(dataset)));
    const auto [nodes, replication] = layout_config();
    std::vector<DataFile> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      bool found = false;
      for (int k = 0; k < nodes && !found; ++k) {
        const auto p = node_dir(k) / r.relative_path;
        if (!fs::exists(p)) continue;
        DataFile f(r.dataset, r.t0, r.t1, read_file(p));
        if (f.file_id() != r.file_id) continue;
        out.push_back(std::move(f));
        found = true;
      }
      if (!found) throw Error(Errc::UnreadableFile, "no intact copy of '" + r.file_id + "'");
    }
    return out;
  }

  fs::path result_path(const std::string& task_id) const { return root_ / "results" / (task_id + ".txt"); }

 private:
  fs::path root_;
};

}  // namespace dslake::storage
