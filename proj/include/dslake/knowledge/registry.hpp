#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/knowledge/descriptors.hpp"
#include "dslake/knowledge/procedures.hpp"

namespace dslake {

/// The knowledge the interpreter consults: domain libraries (object types,
/// filters, keyword extensions) and package descriptions, in two separate
/// namespaces, plus the procedure table the descriptors point into.
///
/// Built once at startup; every const member is a pure lookup.
class KnowledgeRegistry {
 public:
  ProcedureTable& procedures() noexcept { return procedures_; }
  const ProcedureTable& procedures() const noexcept { return procedures_; }

  void register_domain_library(const DomainLibraryDescriptor& lib) {
    if (libraries_.count(lib.name)) throw Error(Errc::DuplicateName, "library '" + lib.name + "'");

    std::map<std::string, std::string> new_names;  // name or alias -> canonical
    auto claim = [&](const std::string& n, const std::string& canonical) {
      if (n.empty()) throw Error(Errc::DescriptorError, "empty object type name in library '" + lib.name + "'");
      if (object_index_.count(n) || !new_names.emplace(n, canonical).second)
        throw Error(Errc::DuplicateName, "object type or alias '" + n + "'");
    };
    std::set<std::string> types;
    for (const auto& t : lib.object_types) {
      claim(t.name, t.name);
      for (const auto& a : t.aliases) claim(a, t.name);
      types.insert(t.name);
      if (t.level == StructureLevel::HighLevel) {
        if (!lib.combiners.count(t.name))
          throw Error(Errc::DescriptorError, "high-level type '" + t.name + "' has no combiner");
        if (t.fragment_type.empty())
          throw Error(Errc::DescriptorError, "high-level type '" + t.name + "' has no fragment type");
        if (!lib.extractors.count(t.source_kind))
          throw Error(Errc::DescriptorError, "no extractor for file kind '" + t.source_kind + "' of '" + t.name + "'");
      }
    }
    for (const auto& [kind, id] : lib.extractors)
      if (!procedures_.has_extractor(id)) throw Error(Errc::UnknownProcedure, "extractor '" + id + "'");
    for (const auto& [type, id] : lib.combiners) {
      if (!types.count(type)) throw Error(Errc::DescriptorError, "combiner for unknown type '" + type + "'");
      if (!procedures_.has_combiner(id)) throw Error(Errc::UnknownProcedure, "combiner '" + id + "'");
    }
    for (const auto& [key, id] : lib.filters) {
      if (!types.count(key.first)) throw Error(Errc::DescriptorError, "filter for unknown type '" + key.first + "'");
      if (!procedures_.has_filter(id)) throw Error(Errc::UnknownProcedure, "filter '" + id + "'");
    }
    for (const auto& [alias, canonical] : lib.keyword_aliases)
      if (keyword_aliases_.count(alias)) throw Error(Errc::DuplicateName, "keyword alias '" + alias + "'");

    libraries_.emplace(lib.name, lib);
    for (const auto& [n, canonical] : new_names) object_index_.emplace(n, ObjectEntry{lib.name, canonical});
    for (const auto& [alias, canonical] : lib.keyword_aliases) keyword_aliases_.emplace(alias, canonical);
  }

  void register_package(const PackageDescriptor& pkg) {
    if (pkg.name.empty()) throw Error(Errc::DescriptorError, "package without a name");
    if (packages_.count(pkg.name)) throw Error(Errc::DuplicateName, "package '" + pkg.name + "'");
    std::set<std::string> names;
    for (const auto& in : pkg.inputs)
      if (!names.insert(in.name).second) throw Error(Errc::DescriptorError, "duplicate input '" + in.name + "'");
    names.clear();
    for (const auto& o : pkg.outputs)
      if (!names.insert(o.name).second) throw Error(Errc::DescriptorError, "duplicate output '" + o.name + "'");

    if (pkg.mode == ExecutionMode::ExternalCommand) {
      if (!pkg.command_template || pkg.command_template->empty())
        throw Error(Errc::MalformedTemplate, "package '" + pkg.name + "' has no command template");
      for (const auto& ph : scan_placeholders(*pkg.command_template))
        if (ph.kind == Placeholder::Kind::Input && !pkg.find_input(ph.input))
          throw Error(Errc::MalformedTemplate, "placeholder references unknown input '" + ph.input + "'");
    } else {
      if (!pkg.procedure) throw Error(Errc::DescriptorError, "builtin package '" + pkg.name + "' has no procedure");
      if (!procedures_.has_builtin(*pkg.procedure))
        throw Error(Errc::UnknownProcedure, "builtin '" + *pkg.procedure + "'");
    }
    packages_.emplace(pkg.name, pkg);
  }

  /// Alias-aware lookup of an object type.
  const ObjectTypeInfo& resolve_object(std::string_view name) const {
    const auto it = object_index_.find(std::string(name));
    if (it == object_index_.end()) throw Error(Errc::UnknownObjectType, "'" + std::string(name) + "'");
    const auto& lib = libraries_.at(it->second.library);
    for (const auto& t : lib.object_types)
      if (t.name == it->second.canonical) return t;
    throw Error(Errc::UnknownObjectType, "'" + std::string(name) + "'");
  }

  /// Case-sensitive lookup of a package.
  const PackageDescriptor& resolve_package(std::string_view name) const {
    const auto it = packages_.find(std::string(name));
    if (it == packages_.end()) throw Error(Errc::UnknownPackage, "'" + std::string(name) + "'");
    return it->second;
  }

  bool has_object(std::string_view name) const { return object_index_.count(std::string(name)) != 0; }
  bool has_package(std::string_view name) const { return packages_.count(std::string(name)) != 0; }

  /// Library that declares the given canonical object type.
  const DomainLibraryDescriptor& library_of(std::string_view object_name) const {
    const auto it = object_index_.find(std::string(object_name));
    if (it == object_index_.end()) throw Error(Errc::UnknownObjectType, "'" + std::string(object_name) + "'");
    return libraries_.at(it->second.library);
  }

  std::string canonical_keyword(std::string_view keyword) const {
    const auto it = keyword_aliases_.find(std::string(keyword));
    return it == keyword_aliases_.end() ? std::string(keyword) : it->second;
  }

  std::optional<std::string> filter_procedure(const std::string& object_type, const std::string& keyword) const {
    const auto& lib = library_of(object_type);
    const auto it = lib.filters.find({object_type, keyword});
    if (it == lib.filters.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, DomainLibraryDescriptor>& libraries() const noexcept { return libraries_; }
  const std::map<std::string, PackageDescriptor>& packages() const noexcept { return packages_; }

 private:
  struct ObjectEntry {
    std::string library;
    std::string canonical;
  };

  ProcedureTable procedures_;
  std::map<std::string, DomainLibraryDescriptor> libraries_;
  std::map<std::string, PackageDescriptor> packages_;
  std::map<std::string, ObjectEntry> object_index_;
  std::map<std::string, std::string> keyword_aliases_;
};

}  // namespace dslake
