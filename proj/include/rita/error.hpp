#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rita {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based; 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(line ? "line " + std::to_string(line) + ": " + reason : reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class UnknownCategory : public Error {
 public:
  explicit UnknownCategory(const std::string& name)
      : Error("unknown ICO category '" + name + "'"), name_(name) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class SpanOutOfBounds : public Error {
 public:
  SpanOutOfBounds(const std::string& id, std::size_t start, std::size_t end)
      : Error("span [" + std::to_string(start) + ", " + std::to_string(end) +
              ") out of bounds in phrase '" + id + "'"),
        id_(id),
        start_(start),
        end_(end) {}

  const std::string& id() const { return id_; }
  std::size_t start() const { return start_; }
  std::size_t end() const { return end_; }

 private:
  std::string id_;
  std::size_t start_;
  std::size_t end_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus is empty") {}
};

class UnknownThreat : public Error {
 public:
  explicit UnknownThreat(const std::string& id)
      : Error("unknown threat '" + id + "'"), id_(id) {}

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class UnknownPhraseId : public Error {
 public:
  explicit UnknownPhraseId(const std::string& id)
      : Error("unknown phrase id '" + id + "'"), id_(id) {}

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Failure talking to an external predictor.
class AdapterError : public Error {
 public:
  enum class Kind { Unreachable, Timeout, MalformedReply };

  AdapterError(Kind kind, const std::string& what, std::string line = {})
      : Error(what), kind_(kind), line_(std::move(line)) {}

  Kind kind() const { return kind_; }
  /// Offending reply line for MalformedReply.
  const std::string& line() const { return line_; }

 private:
  Kind kind_;
  std::string line_;
};

}  // namespace rita
