#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dslake/dslake.hpp"

namespace testing_support {

namespace fs = std::filesystem;

inline std::string sample(const std::string& name) {
  return dslake::storage::read_file(fs::path(DSLAKE_SAMPLES_DIR) / name);
}

inline dslake::KnowledgeRegistry cyclone_registry() {
  dslake::KnowledgeRegistry reg;
  dslake::cyclone::install(reg);
  return reg;
}

class TempDir {
 public:
  TempDir() {
    std::string tpl = (fs::temp_directory_path() / "dslake-test-XXXXXX").string();
    if (!mkdtemp(tpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& p) const { return path_ / p; }

 private:
  fs::path path_;
};

struct CliResult {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is discarded unless merged by the caller.
inline CliResult run_cli(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + std::string(DSLAKE_CLI_PATH) + "' " + args;
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

// Random but well-formed query ASTs, for round-trip properties.
class AstGenerator {
 public:
  explicit AstGenerator(std::uint64_t seed) : rng_(seed) {}

  dslake::query::QueryAst next() {
    using namespace dslake::query;
    QueryAst ast;
    if (coin()) {
      const double a = lat(), b = lat(), c = lon(), d = lon();
      ast.area = dslake::GeoBox{std::min(a, b), std::min(c, d), std::max(a, b), std::max(c, d)};
    }
    if (coin()) {
      auto a = date(), b = date();
      if (b < a) std::swap(a, b);
      ast.time = dslake::TimeRange{a, b};
    }
    const int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) {
      if (coin()) {
        SelectStmt s;
        s.object_type = ident();
        for (int f = pick(3); f > 0; --f) s.filters.push_back(Clause{ident(), value(), {}});
        if (coin()) s.out = outs();
        ast.statements.push_back(std::move(s));
      } else {
        SimulateStmt s;
        s.package = ident();
        for (int f = pick(2); f > 0; --f) s.options.push_back(Clause{ident(), value(), {}});
        for (int b = pick(3); b > 0; --b) s.in_bindings.push_back(Binding{ident(), expr(), {}});
        if (coin()) s.out = outs();
        ast.statements.push_back(std::move(s));
      }
    }
    return ast;
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }
  double lat() { return std::round(std::uniform_real_distribution<double>(-90, 90)(rng_) * 1e4) / 1e4; }
  double lon() { return std::round(std::uniform_real_distribution<double>(-180, 180)(rng_) * 1e4) / 1e4; }
  dslake::TimePoint date() {
    return dslake::make_time(1950 + pick(150), static_cast<unsigned>(1 + pick(12)), static_cast<unsigned>(1 + pick(28)));
  }

  std::string word() {
    static const char* words[] = {"cyclone", "path", "north", "east", "Params", "EndTime", "level",
                                  "bsm", "x", "semantic_association", "depth2", "a_b", "Radius"};
    return words[pick(static_cast<int>(std::size(words)))];
  }
  std::string ident() {
    std::string s = word();
    if (coin()) s += "-" + std::string(coin() ? "path" : "east");
    return s;
  }
  std::string value() {
    switch (pick(4)) {
      case 0: return ident();
      case 1: return std::to_string(pick(1000));
      case 2: return std::to_string(1 + pick(99)) + (coin() ? "h" : "d");
      default: return dslake::format_dmy(date());
    }
  }
  dslake::query::Expr expr() {
    using namespace dslake::query;
    switch (pick(5)) {
      case 0: return Expr{Ref{ident(), {}}};
      case 1: return Expr{IntLit{pick(100000)}};
      case 2: return Expr{DateLit{date()}};
      case 3: return Expr{DurationLit{pick(500)}};
      default: {
        Offset o;
        if (coin()) o.base = Ref{ident(), {}};
        else o.base = DateLit{date()};
        o.sign = coin() ? -1 : 1;
        o.delta = DurationLit{pick(500)};
        return Expr{o};
      }
    }
  }
  std::vector<dslake::query::OutItem> outs() {
    std::vector<dslake::query::OutItem> v;
    for (int n = 1 + pick(3); n > 0; --n) {
      dslake::query::OutItem item{ident(), {}, {}};
      for (int k = pick(3); k > 0; --k) item.indices.push_back(expr());
      v.push_back(std::move(item));
    }
    return v;
  }

  std::mt19937_64 rng_;
};

}  // namespace testing_support
