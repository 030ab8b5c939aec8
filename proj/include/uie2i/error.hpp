#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace uie2i {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied value.
struct InvalidInput : Error {
  using Error::Error;
};

/// Malformed metadata tree; `path` is a JSON-pointer style location of the node.
struct ParseError : Error {
  ParseError(std::string path, const std::string& what)
      : Error(what + " at " + path), path(std::move(path)) {}
  std::string path;
};

/// Bad on-disk data (corrupt JSONL line, unknown task reference, ...).
struct DataError : Error {
  using Error::Error;
};

/// Reason an individual LLM response entry was dropped.
struct Rejection {
  std::string id;  // empty when the entry carried no usable id
  std::string reason;
  bool operator==(const Rejection&) const = default;
};

/// LLM response could not be parsed as JSON even after fence/prose stripping.
struct ResponseInvalid : Error {
  ResponseInvalid(const std::string& what, std::string raw_text)
      : Error(what), raw(std::move(raw_text)) {}
  std::string raw;
};

/// LLM response parsed but no entry survived validation.
struct EmptyResult : Error {
  EmptyResult(const std::string& what, std::vector<Rejection> rejected)
      : Error(what), rejections(std::move(rejected)) {}
  std::vector<Rejection> rejections;
};

struct LlmError : Error {
  LlmError(const std::string& what, bool retryable_) : Error(what), retryable(retryable_) {}
  bool retryable;
};

}  // namespace uie2i
