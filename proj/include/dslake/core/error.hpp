#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dslake {

enum class Errc {
  // query language
  LexError,
  ParseError,
  UnknownObjectType,
  UnknownFilterKeyword,
  UnknownPackage,
  UnboundReference,
  UnknownOutputParameter,
  UnknownPackageInput,
  InvalidOption,
  TypeMismatch,
  MissingInput,
  OrphanSimulate,
  UnsupportedObjectLevel,
  // knowledge registry
  DuplicateName,
  MalformedTemplate,
  UnknownProcedure,
  DescriptorError,
  // storage
  InvalidReplication,
  DuplicateFile,
  UnknownNode,
  UnknownDataset,
  UnreadableFile,
  // engine
  ConfigError,
  ExtractorFailure,
  CombinerFailure,
  // hybrid exec
  BindingError,
  PackageFailure,
  // cyclone domain
  FormatError,
  SpecError,
  NonmonotonicTimestamps,
  DegenerateBearing,
  UnknownGauge,
  // generic I/O
  IoError,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::LexError: return "LexError";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownObjectType: return "UnknownObjectType";
    case Errc::UnknownFilterKeyword: return "UnknownFilterKeyword";
    case Errc::UnknownPackage: return "UnknownPackage";
    case Errc::UnboundReference: return "UnboundReference";
    case Errc::UnknownOutputParameter: return "UnknownOutputParameter";
    case Errc::UnknownPackageInput: return "UnknownPackageInput";
    case Errc::InvalidOption: return "InvalidOption";
    case Errc::TypeMismatch: return "TypeMismatch";
    case Errc::MissingInput: return "MissingInput";
    case Errc::OrphanSimulate: return "OrphanSimulate";
    case Errc::UnsupportedObjectLevel: return "UnsupportedObjectLevel";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::MalformedTemplate: return "MalformedTemplate";
    case Errc::UnknownProcedure: return "UnknownProcedure";
    case Errc::DescriptorError: return "DescriptorError";
    case Errc::InvalidReplication: return "InvalidReplication";
    case Errc::DuplicateFile: return "DuplicateFile";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::UnknownDataset: return "UnknownDataset";
    case Errc::UnreadableFile: return "UnreadableFile";
    case Errc::ConfigError: return "ConfigError";
    case Errc::ExtractorFailure: return "ExtractorFailure";
    case Errc::CombinerFailure: return "CombinerFailure";
    case Errc::BindingError: return "BindingError";
    case Errc::PackageFailure: return "PackageFailure";
    case Errc::FormatError: return "FormatError";
    case Errc::SpecError: return "SpecError";
    case Errc::NonmonotonicTimestamps: return "NonmonotonicTimestamps";
    case Errc::DegenerateBearing: return "DegenerateBearing";
    case Errc::UnknownGauge: return "UnknownGauge";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

/// Base of every error the library throws. The code identifies the failure
/// class; the message is human-readable and already prefixed with the code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// 1-based position inside a source text.
struct SourceLoc {
  int line = 1;
  int col = 1;

  // Locations never take part in structural AST equality.
  friend constexpr bool operator==(const SourceLoc&, const SourceLoc&) noexcept { return true; }
};

inline std::string to_string(const SourceLoc& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.col);
}

class ParseError : public Error {
 public:
  ParseError(SourceLoc loc, std::string expected, std::string found)
      : ParseError(Errc::ParseError, loc, std::move(expected), std::move(found)) {}

  SourceLoc loc() const noexcept { return loc_; }
  int line() const noexcept { return loc_.line; }
  int col() const noexcept { return loc_.col; }
  const std::string& expected() const noexcept { return expected_; }
  const std::string& found() const noexcept { return found_; }

 protected:
  ParseError(Errc code, SourceLoc loc, std::string expected, std::string found)
      : Error(code, to_string(loc) + ": expected " + expected + ", found " + found),
        loc_(loc),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

 private:
  SourceLoc loc_;
  std::string expected_;
  std::string found_;
};

/// Thrown by the tokenizer. Derives from ParseError so that parse() only ever
/// surfaces one error family.
class LexError : public ParseError {
 public:
  LexError(SourceLoc loc, std::string message)
      : ParseError(Errc::LexError, loc, "valid token", message), message_(std::move(message)) {}

  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
};

/// A name that failed to resolve during validation, with its source position.
class ValidationError : public Error {
 public:
  ValidationError(Errc code, std::string name, SourceLoc loc, const std::string& detail = {})
      : Error(code, to_string(loc) + ": '" + name + "'" + (detail.empty() ? "" : " " + detail)),
        name_(std::move(name)),
        loc_(loc) {}

  const std::string& name() const noexcept { return name_; }
  SourceLoc loc() const noexcept { return loc_; }

 private:
  std::string name_;
  SourceLoc loc_;
};

/// Malformed line in a line-oriented text format (snapshots, descriptors, manifests).
class FormatError : public Error {
 public:
  FormatError(int line, const std::string& message, Errc code = Errc::FormatError)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace dslake
