#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dslake/core/digest.hpp"
#include "dslake/core/error.hpp"
#include "dslake/core/time.hpp"

namespace dslake::storage {

/// Rendezvous placement: node n scores fnv1a64(file_id + decimal(n)); the
/// `replication` highest scores win, best first (ties to the lower node id).
inline std::vector<int> place(std::string_view file_id, int node_count, int replication) {
  if (node_count < 1 || replication < 1 || replication > node_count)
    throw Error(Errc::InvalidReplication, "replication " + std::to_string(replication) + " on " +
                                              std::to_string(node_count) + " nodes");
  std::vector<std::pair<std::uint64_t, int>> scored;
  scored.reserve(static_cast<std::size_t>(node_count));
  for (int n = 0; n < node_count; ++n)
    scored.emplace_back(fnv1a64(std::to_string(n), fnv1a64(file_id)), n);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(replication));
  for (int i = 0; i < replication; ++i) out.push_back(scored[static_cast<std::size_t>(i)].second);
  return out;
}

using Bytes = std::shared_ptr<const std::string>;

/// Content-addressed data file: file_id is the digest of the bytes, fixed at
/// construction.
class DataFile {
 public:
  DataFile(std::string dataset, TimePoint t0, TimePoint t1, std::string content)
      : dataset_(std::move(dataset)), t0_(t0), t1_(t1) {
    if (t1 < t0) throw Error(Errc::IoError, "degenerate time range for file in '" + dataset_ + "'");
    file_id_ = content_digest(content);
    bytes_ = std::make_shared<const std::string>(std::move(content));
  }

  const std::string& file_id() const noexcept { return file_id_; }
  const std::string& dataset() const noexcept { return dataset_; }
  TimePoint t0() const noexcept { return t0_; }
  TimePoint t1() const noexcept { return t1_; }
  const std::string& bytes() const noexcept { return *bytes_; }
  const Bytes& shared_bytes() const noexcept { return bytes_; }

 private:
  std::string file_id_;
  std::string dataset_;
  TimePoint t0_;
  TimePoint t1_;
  Bytes bytes_;
};

/// Catalog entry of a dataset (a manifest row without the bytes).
struct FileEntry {
  std::string file_id;
  std::string dataset;
  TimePoint t0;
  TimePoint t1;
};

struct Replica {
  int node = -1;
  Bytes bytes;
};

/// Simulated multi-node storage held in memory: one volume per node,
/// deterministic placement, replication and node failures. Mutations are
/// serialised; reads run concurrently.
class StorageLayout {
 public:
  explicit StorageLayout(int node_count, int replication = 2) : node_count_(node_count), replication_(replication) {
    place("", node_count, replication);  // validates the pair
    volumes_.resize(static_cast<std::size_t>(node_count));
  }

  int node_count() const noexcept { return node_count_; }
  int replication() const noexcept { return replication_; }

  void create_dataset(const std::string& name) {
    std::unique_lock lock(mu_);
    datasets_.try_emplace(name);
  }

  /// All-or-nothing: nothing is stored if any file is rejected.
  void ingest(std::span<const DataFile> files) {
    std::unique_lock lock(mu_);
    std::set<std::pair<std::string, std::string>> batch;
    for (const auto& f : files)
      if (!batch.emplace(f.dataset(), f.file_id()).second || in_dataset(f.dataset(), f.file_id()))
        throw Error(Errc::DuplicateFile, "'" + f.file_id() + "' in dataset '" + f.dataset() + "'");
    for (const auto& f : files) {
      auto [it, fresh] = placements_.try_emplace(f.file_id());
      if (fresh) it->second = place(f.file_id(), node_count_, replication_);
      for (int n : it->second)
        volumes_[static_cast<std::size_t>(n)][f.file_id()] = StoredReplica{f.shared_bytes(), f.file_id()};
      datasets_[f.dataset()].push_back(FileEntry{f.file_id(), f.dataset(), f.t0(), f.t1()});
      dataset_ids_[f.dataset()].insert(f.file_id());
    }
  }

  void fail_node(int node) {
    std::unique_lock lock(mu_);
    check_node(node);
    failed_.insert(node);
  }

  void recover_node(int node) {
    std::unique_lock lock(mu_);
    check_node(node);
    failed_.erase(node);
  }

  bool is_failed(int node) const {
    std::shared_lock lock(mu_);
    return failed_.count(node) != 0;
  }

  std::set<int> failed_nodes() const {
    std::shared_lock lock(mu_);
    return failed_;
  }

  const std::vector<int>& placement(const std::string& file_id) const {
    std::shared_lock lock(mu_);
    const auto it = placements_.find(file_id);
    if (it == placements_.end()) throw Error(Errc::UnreadableFile, "'" + file_id + "' is not stored");
    return it->second;
  }

  bool readable(const std::string& file_id) const {
    try {
      read(file_id);
      return true;
    } catch (const Error&) {
      return false;
    }
  }

  /// Bytes from the first surviving replica, in placement order, whose
  /// content still matches the file id.
  Replica read(const std::string& file_id) const {
    std::shared_lock lock(mu_);
    const auto it = placements_.find(file_id);
    if (it == placements_.end()) throw Error(Errc::UnreadableFile, "'" + file_id + "' is not stored");
    for (int n : it->second) {
      if (failed_.count(n)) continue;
      const auto& vol = volumes_[static_cast<std::size_t>(n)];
      const auto f = vol.find(file_id);
      if (f != vol.end() && f->second.digest == file_id) return Replica{n, f->second.bytes};
    }
    throw Error(Errc::UnreadableFile, "no surviving replica of '" + file_id + "'");
  }

  bool has_dataset(const std::string& name) const {
    std::shared_lock lock(mu_);
    return datasets_.count(name) != 0;
  }

  std::vector<FileEntry> dataset_files(const std::string& name) const {
    std::shared_lock lock(mu_);
    const auto it = datasets_.find(name);
    if (it == datasets_.end()) throw Error(Errc::UnknownDataset, "'" + name + "'");
    return it->second;
  }

  std::vector<std::string> datasets() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> out;
    for (const auto& [name, files] : datasets_) out.push_back(name);
    return out;
  }

  /// Number of files held on a node's volume.
  std::size_t volume_size(int node) const {
    std::shared_lock lock(mu_);
    check_node(node);
    return volumes_[static_cast<std::size_t>(node)].size();
  }

  /// Overwrites one replica in place; simulates silent corruption in tests.
  void corrupt_replica(int node, const std::string& file_id, std::string bytes) {
    std::unique_lock lock(mu_);
    check_node(node);
    auto& vol = volumes_[static_cast<std::size_t>(node)];
    const auto it = vol.find(file_id);
    if (it == vol.end()) throw Error(Errc::UnreadableFile, "'" + file_id + "' is not on node " + std::to_string(node));
    it->second.digest = content_digest(bytes);
    it->second.bytes = std::make_shared<const std::string>(std::move(bytes));
  }

 private:
  void check_node(int node) const {
    if (node < 0 || node >= node_count_) throw Error(Errc::UnknownNode, "node " + std::to_string(node));
  }

  bool in_dataset(const std::string& dataset, const std::string& file_id) const {
    const auto it = dataset_ids_.find(dataset);
    return it != dataset_ids_.end() && it->second.count(file_id) != 0;
  }

  // Digest of the bytes actually held by this replica.
  struct StoredReplica {
    Bytes bytes;
    std::string digest;
  };

  int node_count_;
  int replication_;
  mutable std::shared_mutex mu_;
  std::vector<std::map<std::string, StoredReplica>> volumes_;
  std::map<std::string, std::vector<int>> placements_;
  std::map<std::string, std::vector<FileEntry>> datasets_;
  std::map<std::string, std::set<std::string>> dataset_ids_;
  std::set<int> failed_;
};

}  // namespace dslake::storage
