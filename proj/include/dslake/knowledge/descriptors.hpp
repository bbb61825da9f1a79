#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dslake/core/error.hpp"

namespace dslake {

/// Position of a structure in the atomic / single-file / multi-node hierarchy.
enum class StructureLevel { Atomic, FileLevel, HighLevel };

struct OutputParam {
  std::string name;
  std::string type;        // semantic type tag
  bool composite = false;  // a record whose fields are addressed as Params[Field]
  friend bool operator==(const OutputParam&, const OutputParam&) = default;
};

struct ObjectTypeInfo {
  std::string name;
  std::vector<std::string> aliases;
  StructureLevel level = StructureLevel::HighLevel;
  std::vector<OutputParam> output_params;
  std::string fragment_type;  // element type the extractor emits
  std::string source_kind;    // file kind the objects are built from

  const OutputParam* find_param(std::string_view n) const {
    for (const auto& p : output_params)
      if (p.name == n) return &p;
    return nullptr;
  }

  friend bool operator==(const ObjectTypeInfo&, const ObjectTypeInfo&) = default;
};

struct DomainLibraryDescriptor {
  std::string name;
  std::vector<ObjectTypeInfo> object_types;
  std::map<std::string, std::string> extractors;                         // file kind -> procedure id
  std::map<std::string, std::string> combiners;                          // object type -> procedure id
  std::map<std::pair<std::string, std::string>, std::string> filters;    // (object type, keyword) -> id
  std::map<std::string, std::string> keyword_aliases;                    // alias -> canonical keyword

  friend bool operator==(const DomainLibraryDescriptor&, const DomainLibraryDescriptor&) = default;
};

struct PackageInput {
  std::string name;
  std::string type;
  bool required = true;
  std::optional<std::string> default_value;
  friend bool operator==(const PackageInput&, const PackageInput&) = default;
};

struct PackageOutputDecl {
  std::string name;
  std::string type;
  bool indexable = false;
  friend bool operator==(const PackageOutputDecl&, const PackageOutputDecl&) = default;
};

enum class ExecutionMode { Builtin, ExternalCommand };
enum class Placement { OnAggregator, OnNode };

/// Abstract software service: typed inputs and outputs plus how to run it.
struct PackageDescriptor {
  std::string name;
  std::vector<PackageInput> inputs;
  std::vector<PackageOutputDecl> outputs;
  ExecutionMode mode = ExecutionMode::Builtin;
  Placement placement = Placement::OnAggregator;
  std::optional<std::string> command_template;  // ExternalCommand only
  std::optional<std::string> procedure;         // Builtin only

  const PackageInput* find_input(std::string_view n) const {
    for (const auto& i : inputs)
      if (i.name == n) return &i;
    return nullptr;
  }
  const PackageOutputDecl* find_output(std::string_view n) const {
    for (const auto& o : outputs)
      if (o.name == n) return &o;
    return nullptr;
  }

  friend bool operator==(const PackageDescriptor&, const PackageDescriptor&) = default;
};

/// A `{...}` placeholder of a command template.
struct Placeholder {
  enum class Kind { Input, Outdir } kind;
  std::string input;      // for Kind::Input
  std::size_t begin = 0;  // offset of '{'
  std::size_t end = 0;    // one past '}'
};

/// Scans `{input:<name>}` and `{outdir}` placeholders; anything else inside
/// braces is a MalformedTemplate.
inline std::vector<Placeholder> scan_placeholders(std::string_view tpl) {
  std::vector<Placeholder> out;
  std::size_t i = 0;
  while ((i = tpl.find('{', i)) != std::string_view::npos) {
    const auto close = tpl.find('}', i);
    if (close == std::string_view::npos)
      throw Error(Errc::MalformedTemplate, "unterminated placeholder in '" + std::string(tpl) + "'");
    const auto body = tpl.substr(i + 1, close - i - 1);
    Placeholder ph;
    ph.begin = i;
    ph.end = close + 1;
    if (body == "outdir") {
      ph.kind = Placeholder::Kind::Outdir;
    } else if (body.substr(0, 6) == "input:" && body.size() > 6) {
      ph.kind = Placeholder::Kind::Input;
      ph.input = std::string(body.substr(6));
    } else {
      throw Error(Errc::MalformedTemplate, "unknown placeholder '{" + std::string(body) + "}'");
    }
    out.push_back(std::move(ph));
    i = close + 1;
  }
  return out;
}

}  // namespace dslake
