#pragma once

#include <stdexcept>
#include <string>

namespace bpmeval {

/// Malformed DOT or BPMN XML input.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// A ProcessGraph that cannot be turned into BPMN XML (broken invariants).
struct ConversionError : std::runtime_error {
  explicit ConversionError(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyReference : std::invalid_argument {
  EmptyReference() : std::invalid_argument("reference token sequence is empty") {}
};

struct EmptyInput : std::invalid_argument {
  explicit EmptyInput(const std::string& what) : std::invalid_argument(what) {}
};

struct InvalidCounts : std::invalid_argument {
  explicit InvalidCounts(const std::string& what) : std::invalid_argument(what) {}
};

struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

struct MissingCandidate : std::invalid_argument {
  explicit MissingCandidate(const std::string& id)
      : std::invalid_argument("record has no candidate: " + id) {}
};

struct IdMismatch : std::invalid_argument {
  explicit IdMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct NoDiagramFound : std::runtime_error {
  NoDiagramFound() : std::runtime_error("no DOT diagram found in completion") {}
};

struct EmptyDescription : std::invalid_argument {
  EmptyDescription() : std::invalid_argument("process description is empty") {}
};

struct NetworkError : std::runtime_error {
  explicit NetworkError(const std::string& what) : std::runtime_error(what) {}
};

struct EndpointError : std::runtime_error {
  EndpointError(int status, const std::string& body)
      : std::runtime_error("endpoint returned status " + std::to_string(status) +
                           (body.empty() ? "" : ": " + body)),
        status(status) {}
  int status;
};

struct TimeoutError : std::runtime_error {
  explicit TimeoutError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bpmeval
