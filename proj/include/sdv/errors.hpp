#pragma once

#include <stdexcept>
#include <string>

namespace sdv {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid term/triple construction (variable in asserted graph, literal subject...).
class ModelError : public Error {
public:
  using Error::Error;
};

/// Syntax error in a Turtle document, query, rule file or manifest.
/// Carries a 1-based line/column of the offending input.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, size_t line, size_t column)
      : Error(msg + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line), column_(column) {}

  size_t line() const { return line_; }
  size_t column() const { return column_; }

private:
  size_t line_;
  size_t column_;
};

/// Configuration problem: manifest, entity folder, service config.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Runtime evaluation failure: rule/builtin errors, projection errors.
class EvalError : public Error {
public:
  explicit EvalError(const std::string& what, std::string context = {})
      : Error(what), context_(std::move(context)) {}

  /// Rule id or atom description the error originated from, when known.
  const std::string& context() const { return context_; }

private:
  std::string context_;
};

/// Entity input could not be fetched (HTTP failure, unreadable file).
class FetchError : public Error {
public:
  explicit FetchError(const std::string& what, std::string url = {})
      : Error(what), url_(std::move(url)) {}

  const std::string& url() const { return url_; }

private:
  std::string url_;
};

/// Unknown entity path or missing resource.
class NotFoundError : public Error {
public:
  using Error::Error;
};

/// Request is missing a required parameter or carries an unusable one.
class ParamError : public Error {
public:
  using Error::Error;
};

} // namespace sdv
