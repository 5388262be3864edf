#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lela {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- configuration / registry ----

class UnknownComponent : public Error {
 public:
  UnknownComponent(std::string slot, std::string name)
      : Error("unknown component '" + name + "' for slot '" + slot + "'"),
        slot_(std::move(slot)),
        name_(std::move(name)) {}
  const std::string& slot() const { return slot_; }
  const std::string& name() const { return name_; }

 private:
  std::string slot_;
  std::string name_;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

// ---- loaders ----

class UnsupportedFormat : public Error {
 public:
  explicit UnsupportedFormat(std::string format)
      : Error("unsupported input format: " + format), format_(std::move(format)) {}
  const std::string& format() const { return format_; }

 private:
  std::string format_;
};

class NoExtension : public Error {
 public:
  explicit NoExtension(const std::string& path) : Error("path has no extension: " + path) {}
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

/// A required JSON field is absent. `line` is 1-based; 0 when not line-oriented.
class MissingField : public Error {
 public:
  MissingField(std::string field, std::size_t line)
      : Error("missing field '" + field + "'" +
              (line ? " at line " + std::to_string(line) : std::string())),
        field_(std::move(field)),
        line_(line) {}
  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

// ---- knowledge base ----

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public Error {
 public:
  DuplicateId(std::string id, std::size_t first_line, std::size_t second_line)
      : Error("duplicate entity id '" + id + "' at lines " + std::to_string(first_line) +
              " and " + std::to_string(second_line)),
        id_(std::move(id)),
        first_line_(first_line),
        second_line_(second_line) {}
  const std::string& id() const { return id_; }
  std::size_t first_line() const { return first_line_; }
  std::size_t second_line() const { return second_line_; }

 private:
  std::string id_;
  std::size_t first_line_;
  std::size_t second_line_;
};

// ---- spans ----

class InvalidWindow : public Error {
 public:
  using Error::Error;
};

/// Raised when a remapped span does not read back the expected surface. Always
/// indicates an offset bug.
class SurfaceMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidPattern : public Error {
 public:
  using Error::Error;
};

// ---- inference backends ----

class TransportError : public Error {
 public:
  using Error::Error;
};

class ApiError : public Error {
 public:
  ApiError(int status, std::string body)
      : Error("API error " + std::to_string(status) + ": " + body),
        status_(status),
        body_(std::move(body)) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class MalformedResponse : public Error {
 public:
  using Error::Error;
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

class IndexNotBuilt : public Error {
 public:
  using Error::Error;
};

// ---- evaluation ----

class OffsetOutOfRange : public Error {
 public:
  using Error::Error;
};

// ---- pipeline ----

/// Wraps a failure inside a pipeline stage with the stage name and, when
/// relevant, the mention being processed.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string context, const std::string& cause, bool backend_failure)
      : Error("stage '" + stage + "' failed" + (context.empty() ? "" : " on " + context) + ": " +
              cause),
        stage_(std::move(stage)),
        context_(std::move(context)),
        backend_failure_(backend_failure) {}
  const std::string& stage() const { return stage_; }
  const std::string& context() const { return context_; }
  /// True when the root cause was a remote inference failure.
  bool backend_failure() const { return backend_failure_; }

 private:
  std::string stage_;
  std::string context_;
  bool backend_failure_;
};

}  // namespace lela
