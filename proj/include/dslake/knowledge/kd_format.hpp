#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/text.hpp"
#include "dslake/knowledge/descriptors.hpp"
#include "dslake/knowledge/registry.hpp"

namespace dslake {

// Descriptor files (.kd) are line oriented. `#` starts a comment line. A
// section header opens a library, an object type (belonging to the library
// opened last) or a package:
//
//   [library <name>]   extractor <file-kind> <procedure>
//                      combiner <object-type> <procedure>
//                      filter <object-type> <keyword> <procedure>
//                      keyword <alias> <canonical-keyword>
//   [object <name>]    level atomic|file|high
//                      alias <name>
//                      fragment <type>
//                      source <file-kind>
//                      param <name> <semantic-type> [composite]
//   [package <name>]   input <name> <semantic-type> required|optional [<default>]
//                      output <name> <semantic-type> [indexable]
//                      mode builtin|external
//                      placement aggregator|node
//                      procedure <id>
//                      command <template, rest of line>
//
// Unknown keys, sections or arities are load errors.

struct DescriptorSet {
  std::vector<DomainLibraryDescriptor> libraries;
  std::vector<PackageDescriptor> packages;

  friend bool operator==(const DescriptorSet&, const DescriptorSet&) = default;
};

namespace detail {

inline std::string_view level_name(StructureLevel l) {
  switch (l) {
    case StructureLevel::Atomic: return "atomic";
    case StructureLevel::FileLevel: return "file";
    case StructureLevel::HighLevel: return "high";
  }
  return "high";
}

}  // namespace detail

inline DescriptorSet load_descriptors(std::string_view text) {
  DescriptorSet set;
  enum class Section { None, Library, Object, Package } section = Section::None;

  auto fail = [](int line, const std::string& msg) -> FormatError {
    return FormatError(line, msg, Errc::DescriptorError);
  };

  for_each_line(text, [&](int lineno, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;

    if (line.front() == '[') {
      if (line.back() != ']') throw fail(lineno, "unterminated section header");
      const auto parts = split_ws(line.substr(1, line.size() - 2));
      if (parts.size() != 2) throw fail(lineno, "section header needs a kind and a name");
      const std::string name(parts[1]);
      if (parts[0] == "library") {
        set.libraries.push_back(DomainLibraryDescriptor{name, {}, {}, {}, {}, {}});
        section = Section::Library;
      } else if (parts[0] == "object") {
        if (set.libraries.empty()) throw fail(lineno, "object section outside a library");
        ObjectTypeInfo t;
        t.name = name;
        set.libraries.back().object_types.push_back(std::move(t));
        section = Section::Object;
      } else if (parts[0] == "package") {
        PackageDescriptor p;
        p.name = name;
        set.packages.push_back(std::move(p));
        section = Section::Package;
      } else {
        throw fail(lineno, "unknown section kind '" + std::string(parts[0]) + "'");
      }
      return;
    }

    const auto f = split_ws(line);
    const std::string_view key = f[0];
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (f.size() - 1 < lo || f.size() - 1 > hi) throw fail(lineno, "wrong number of values for '" + std::string(key) + "'");
    };
    auto s = [&](std::size_t i) { return std::string(f[i]); };

    switch (section) {
      case Section::None:
        throw fail(lineno, "key outside any section");

      case Section::Library: {
        auto& lib = set.libraries.back();
        if (key == "extractor") {
          arity(2, 2);
          lib.extractors[s(1)] = s(2);
        } else if (key == "combiner") {
          arity(2, 2);
          lib.combiners[s(1)] = s(2);
        } else if (key == "filter") {
          arity(3, 3);
          lib.filters[{s(1), s(2)}] = s(3);
        } else if (key == "keyword") {
          arity(2, 2);
          lib.keyword_aliases[s(1)] = s(2);
        } else {
          throw fail(lineno, "unknown library key '" + std::string(key) + "'");
        }
        break;
      }

      case Section::Object: {
        auto& t = set.libraries.back().object_types.back();
        if (key == "level") {
          arity(1, 1);
          if (f[1] == "atomic") t.level = StructureLevel::Atomic;
          else if (f[1] == "file") t.level = StructureLevel::FileLevel;
          else if (f[1] == "high") t.level = StructureLevel::HighLevel;
          else throw fail(lineno, "level must be atomic, file or high");
        } else if (key == "alias") {
          arity(1, 1);
          t.aliases.push_back(s(1));
        } else if (key == "fragment") {
          arity(1, 1);
          t.fragment_type = s(1);
        } else if (key == "source") {
          arity(1, 1);
          t.source_kind = s(1);
        } else if (key == "param") {
          arity(2, 3);
          if (f.size() == 4 && f[3] != "composite") throw fail(lineno, "param flag must be 'composite'");
          t.output_params.push_back(OutputParam{s(1), s(2), f.size() == 4});
        } else {
          throw fail(lineno, "unknown object key '" + std::string(key) + "'");
        }
        break;
      }

      case Section::Package: {
        auto& p = set.packages.back();
        if (key == "input") {
          arity(3, 4);
          PackageInput in{s(1), s(2), true, std::nullopt};
          if (f[3] == "optional") in.required = false;
          else if (f[3] != "required") throw fail(lineno, "input must be 'required' or 'optional'");
          if (f.size() == 5) in.default_value = s(4);
          p.inputs.push_back(std::move(in));
        } else if (key == "output") {
          arity(2, 3);
          if (f.size() == 4 && f[3] != "indexable") throw fail(lineno, "output flag must be 'indexable'");
          p.outputs.push_back(PackageOutputDecl{s(1), s(2), f.size() == 4});
        } else if (key == "mode") {
          arity(1, 1);
          if (f[1] == "builtin") p.mode = ExecutionMode::Builtin;
          else if (f[1] == "external") p.mode = ExecutionMode::ExternalCommand;
          else throw fail(lineno, "mode must be 'builtin' or 'external'");
        } else if (key == "placement") {
          arity(1, 1);
          if (f[1] == "aggregator") p.placement = Placement::OnAggregator;
          else if (f[1] == "node") p.placement = Placement::OnNode;
          else throw fail(lineno, "placement must be 'aggregator' or 'node'");
        } else if (key == "procedure") {
          arity(1, 1);
          p.procedure = s(1);
        } else if (key == "command") {
          if (f.size() < 2) throw fail(lineno, "empty command");
          p.command_template = std::string(trim(line.substr(key.size())));
        } else {
          throw fail(lineno, "unknown package key '" + std::string(key) + "'");
        }
        break;
      }
    }
  });
  return set;
}

inline std::string write_descriptors(const DescriptorSet& set) {
  std::string out;
  for (const auto& lib : set.libraries) {
    out += "[library " + lib.name + "]\n";
    for (const auto& [kind, id] : lib.extractors) out += "extractor " + kind + " " + id + "\n";
    for (const auto& [type, id] : lib.combiners) out += "combiner " + type + " " + id + "\n";
    for (const auto& [key, id] : lib.filters) out += "filter " + key.first + " " + key.second + " " + id + "\n";
    for (const auto& [alias, canonical] : lib.keyword_aliases) out += "keyword " + alias + " " + canonical + "\n";
    for (const auto& t : lib.object_types) {
      out += "\n[object " + t.name + "]\n";
      out += "level " + std::string(detail::level_name(t.level)) + "\n";
      for (const auto& a : t.aliases) out += "alias " + a + "\n";
      if (!t.fragment_type.empty()) out += "fragment " + t.fragment_type + "\n";
      if (!t.source_kind.empty()) out += "source " + t.source_kind + "\n";
      for (const auto& p : t.output_params)
        out += "param " + p.name + " " + p.type + (p.composite ? " composite" : "") + "\n";
    }
    out += "\n";
  }
  for (const auto& p : set.packages) {
    out += "[package " + p.name + "]\n";
    for (const auto& in : p.inputs) {
      out += "input " + in.name + " " + in.type + (in.required ? " required" : " optional");
      if (in.default_value) out += " " + *in.default_value;
      out += "\n";
    }
    for (const auto& o : p.outputs) out += "output " + o.name + " " + o.type + (o.indexable ? " indexable" : "") + "\n";
    out += std::string("mode ") + (p.mode == ExecutionMode::Builtin ? "builtin" : "external") + "\n";
    out += std::string("placement ") + (p.placement == Placement::OnAggregator ? "aggregator" : "node") + "\n";
    if (p.procedure) out += "procedure " + *p.procedure + "\n";
    if (p.command_template) out += "command " + *p.command_template + "\n";
    out += "\n";
  }
  return out;
}

/// Loads a descriptor text and registers everything in it.
inline void register_descriptors(KnowledgeRegistry& registry, std::string_view text) {
  const auto set = load_descriptors(text);
  for (const auto& lib : set.libraries) registry.register_domain_library(lib);
  for (const auto& pkg : set.packages) registry.register_package(pkg);
}

}  // namespace dslake
