#include <gtest/gtest.h>

#include <atomic>
#include <numeric>
#include <random>
#include <thread>

#include "support.hpp"

using namespace dslake;
using namespace dslake::storage;
using testing_support::TempDir;

namespace {

// Independent statement of the placement rule: FNV-1a over file_id followed
// by the decimal node id, highest score first, lower node id on ties.
std::vector<int> reference_place(const std::string& id, int nodes, int r) {
  auto fnv = [](const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  };
  std::vector<std::pair<std::uint64_t, int>> s;
  for (int n = 0; n < nodes; ++n) s.push_back({fnv(id + std::to_string(n)), -n});
  std::sort(s.rbegin(), s.rend());
  std::vector<int> out;
  for (int i = 0; i < r; ++i) out.push_back(-s[static_cast<std::size_t>(i)].second);
  return out;
}

std::vector<DataFile> make_files(const std::string& dataset, int n, std::uint64_t seed = 1) {
  std::vector<DataFile> files;
  const auto t = make_time(2011, 1, 1);
  for (int i = 0; i < n; ++i) {
    const auto ti = t + std::chrono::hours(6 * i);
    files.emplace_back(dataset, ti, ti, "payload " + std::to_string(seed) + " " + std::to_string(i));
  }
  return files;
}

template <typename Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::IoError;
}

}  // namespace

TEST(Placement, MatchesReferenceRule) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto id = hex64(rng());
    const int nodes = 1 + static_cast<int>(rng() % 9);
    const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(nodes));
    const auto p = place(id, nodes, r);
    EXPECT_EQ(p, reference_place(id, nodes, r));
    EXPECT_EQ(std::set<int>(p.begin(), p.end()).size(), p.size());
    EXPECT_EQ(p, place(id, nodes, r));
  }
}

TEST(Placement, FullReplicationCoversAllNodes) {
  const auto p = place("f1", 4, 4);
  EXPECT_EQ(std::set<int>(p.begin(), p.end()), (std::set<int>{0, 1, 2, 3}));
  EXPECT_EQ(place("f1", 4, 2), place("f1", 4, 2));
  EXPECT_EQ(p[0], place("f1", 4, 1)[0]);
}

TEST(Placement, InvalidReplication) {
  EXPECT_EQ(error_code([] { place("f", 2, 3); }), Errc::InvalidReplication);
  EXPECT_EQ(error_code([] { place("f", 2, 0); }), Errc::InvalidReplication);
  EXPECT_EQ(error_code([] { place("f", 0, 0); }), Errc::InvalidReplication);
  EXPECT_EQ(error_code([] { StorageLayout(3, 4); }), Errc::InvalidReplication);
}

TEST(Placement, LoadIsBalanced) {
  std::mt19937_64 rng(42);
  std::vector<int> load(8);
  for (int i = 0; i < 10000; ++i) ++load[static_cast<std::size_t>(place(hex64(rng()), 8, 1)[0])];
  const double mean = 10000.0 / 8;
  EXPECT_LE(*std::max_element(load.begin(), load.end()), 1.35 * mean);
}

TEST(DataFileTest, IdIsContentDigest) {
  const DataFile a("d", make_time(2011, 1, 1), make_time(2011, 1, 1), "abc");
  const DataFile b("other", make_time(2012, 1, 1), make_time(2012, 1, 2), "abc");
  EXPECT_EQ(a.file_id(), b.file_id());
  EXPECT_EQ(a.file_id(), content_digest("abc"));
  EXPECT_EQ(a.file_id(), "e71fa2190541574b");
  EXPECT_EQ(error_code([] { DataFile("d", make_time(2011, 1, 2), make_time(2011, 1, 1), "x"); }), Errc::IoError);
}

TEST(Layout, YearOfSnapshotsOnFourNodes) {
  StorageLayout layout(4, 2);
  const auto files = make_files("year", 1460);
  layout.create_dataset("year");
  layout.ingest(files);
  std::size_t stored = 0;
  for (int n = 0; n < 4; ++n) stored += layout.volume_size(n);
  EXPECT_EQ(stored, 2u * 1460u);
  for (const auto& f : files) {
    const auto& p = layout.placement(f.file_id());
    EXPECT_EQ(p.size(), 2u);
    EXPECT_NE(p[0], p[1]);
  }
  EXPECT_EQ(layout.dataset_files("year").size(), 1460u);
}

TEST(Layout, EmptyIngestAndDuplicates) {
  StorageLayout layout(3, 2);
  layout.ingest({});
  EXPECT_TRUE(layout.datasets().empty());
  const auto files = make_files("d", 3);
  layout.ingest(files);
  EXPECT_EQ(error_code([&] { layout.ingest(std::vector<DataFile>{files[1]}); }), Errc::DuplicateFile);
  const std::vector<DataFile> twice{make_files("e", 1)[0], make_files("e", 1)[0]};
  EXPECT_EQ(error_code([&] { layout.ingest(twice); }), Errc::DuplicateFile);
  EXPECT_FALSE(layout.has_dataset("e"));
  // The same bytes may appear in another dataset.
  const DataFile other("e", files[0].t0(), files[0].t1(), files[0].bytes());
  EXPECT_NO_THROW(layout.ingest(std::vector<DataFile>{other}));
  EXPECT_EQ(error_code([&] { layout.dataset_files("missing"); }), Errc::UnknownDataset);
}

TEST(Layout, FailuresAndRecovery) {
  StorageLayout layout(4, 2);
  const auto files = make_files("d", 200);
  layout.ingest(files);
  std::map<std::string, std::string> before;
  for (const auto& f : files) before[f.file_id()] = *layout.read(f.file_id()).bytes;

  const auto& f0 = files[0];
  const auto p = layout.placement(f0.file_id());
  layout.fail_node(p[0]);
  const auto r = layout.read(f0.file_id());
  EXPECT_EQ(r.node, p[1]);
  EXPECT_EQ(*r.bytes, f0.bytes());
  layout.fail_node(p[1]);
  EXPECT_EQ(error_code([&] { layout.read(f0.file_id()); }), Errc::UnreadableFile);
  layout.recover_node(p[0]);
  layout.recover_node(p[1]);
  for (const auto& f : files) EXPECT_EQ(*layout.read(f.file_id()).bytes, before[f.file_id()]);
  EXPECT_EQ(error_code([&] { layout.fail_node(4); }), Errc::UnknownNode);
  EXPECT_EQ(error_code([&] { layout.recover_node(-1); }), Errc::UnknownNode);
}

TEST(Layout, SingleReplicaLostIsUnreadable) {
  StorageLayout layout(3, 1);
  const auto files = make_files("d", 5);
  layout.ingest(files);
  const int n = layout.placement(files[2].file_id())[0];
  layout.fail_node(n);
  EXPECT_EQ(error_code([&] { layout.read(files[2].file_id()); }), Errc::UnreadableFile);
}

TEST(Layout, ReadableWheneverFewerThanReplicationNodesFail) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int nodes = 2 + static_cast<int>(rng() % 7);
    const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(nodes));
    StorageLayout layout(nodes, r);
    const auto files = make_files("d", 40, static_cast<std::uint64_t>(trial));
    layout.ingest(files);
    std::vector<int> order(static_cast<std::size_t>(nodes));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int k = 0; k < r - 1; ++k) layout.fail_node(order[static_cast<std::size_t>(k)]);
    for (const auto& f : files) EXPECT_TRUE(layout.readable(f.file_id()));
    // With everything failed, nothing is readable.
    for (int k = 0; k < nodes; ++k) layout.fail_node(k);
    for (const auto& f : files) EXPECT_FALSE(layout.readable(f.file_id()));
  }
}

TEST(Layout, CorruptReplicasAreNeverReturned) {
  std::mt19937_64 rng(5);
  StorageLayout layout(4, 3);
  const auto files = make_files("d", 100);
  layout.ingest(files);
  for (const auto& f : files)
    for (int n : layout.placement(f.file_id()))
      if (rng() % 2) layout.corrupt_replica(n, f.file_id(), f.bytes() + "!");
  for (const auto& f : files) {
    try {
      const auto r = layout.read(f.file_id());
      EXPECT_EQ(content_digest(*r.bytes), f.file_id());
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::UnreadableFile);
    }
  }
}

TEST(Layout, ConcurrentReadsSeeWholeFiles) {
  StorageLayout layout(4, 2);
  const auto files = make_files("d", 400);
  std::atomic<bool> bad{false};
  std::thread writer([&] {
    for (std::size_t i = 0; i < files.size(); i += 40)
      layout.ingest(std::span<const DataFile>(files).subspan(i, 40));
  });
  std::thread reader([&] {
    for (int round = 0; round < 200; ++round)
      for (const auto& f : files)
        if (layout.readable(f.file_id()) && content_digest(*layout.read(f.file_id()).bytes) != f.file_id())
          bad = true;
  });
  writer.join();
  reader.join();
  EXPECT_FALSE(bad);
}

TEST(Disk, ManifestRoundTrip) {
  const std::vector<ManifestRow> rows{
      {"a1", "ds", make_time(2011, 1, 1), make_time(2011, 1, 1, 6), "ds/a1"},
      {"b2", "ds", make_time(2011, 1, 2), make_time(2011, 1, 2), "ds/b2"}};
  const auto text = format_manifest(rows);
  EXPECT_EQ(parse_manifest(text), rows);
  EXPECT_THROW(parse_manifest("a\tb\tc\n"), FormatError);
  EXPECT_THROW(parse_manifest("a\tds\t2011-01-02T00:00:00Z\t2011-01-01T00:00:00Z\tp\n"), FormatError);
}

TEST(Disk, StoreIngestAndReload) {
  TempDir dir;
  DiskStore store(dir / "root");
  store.init(4, 2);
  EXPECT_NO_THROW(store.init(4, 2));
  EXPECT_EQ(error_code([&] { store.init(3, 2); }), Errc::ConfigError);
  const auto files = make_files("ds", 30);
  store.ingest(files);
  EXPECT_EQ(error_code([&] { store.ingest(std::vector<DataFile>{files[3]}); }), Errc::DuplicateFile);
  EXPECT_EQ(store.datasets(), std::vector<std::string>{"ds"});

  for (const auto& f : files) {
    int copies = 0;
    for (int n = 0; n < 4; ++n) copies += fs::exists(store.node_dir(n) / "ds" / f.file_id());
    EXPECT_EQ(copies, 2);
  }
  // Lose one node directory entirely: every file still has an intact copy.
  fs::remove_all(store.node_dir(place(files[0].file_id(), 4, 2)[0]));
  const auto back = store.load_dataset("ds");
  ASSERT_EQ(back.size(), files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    EXPECT_EQ(back[i].file_id(), files[i].file_id());
    EXPECT_EQ(back[i].t0(), files[i].t0());
  }
  EXPECT_EQ(error_code([&] { store.load_dataset("nope"); }), Errc::UnknownDataset);
}

TEST(Disk, ManifestFilesMustMatchTheirIds) {
  TempDir dir;
  write_file(dir / "a.txt", "alpha");
  const auto id = content_digest("alpha");
  write_file(dir / "manifest.tsv", "x\tds\t2011-01-01T00:00:00Z\t2011-01-01T00:00:00Z\ta.txt\n");
  EXPECT_EQ(error_code([&] { load_manifest_files(dir / "manifest.tsv"); }), Errc::IoError);
  write_file(dir / "manifest.tsv", id + "\tds\t2011-01-01T00:00:00Z\t2011-01-01T00:00:00Z\ta.txt\n");
  const auto files = load_manifest_files(dir / "manifest.tsv");
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].bytes(), "alpha");
}
