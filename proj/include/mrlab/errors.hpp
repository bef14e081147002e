#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mrlab {

/// Unknown attribute, duplicate column or other schema violation.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The catalog lacks a statistic the estimator needs.
class CatalogMissError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structurally invalid logical plan.
class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive routine refused to run because its input exceeds the configured limit.
class LimitError : public std::runtime_error {
 public:
  LimitError(const std::string& what, std::size_t limit)
      : std::runtime_error(what + " (limit " + std::to_string(limit) + ")"), limit_(limit) {}
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t limit_;
};

/// Malformed text input; `position()` is a 0-based character offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A map or reduce task failed; the job was aborted.
class TaskError : public std::runtime_error {
 public:
  TaskError(std::string task_id, const std::string& cause)
      : std::runtime_error("task " + task_id + " failed: " + cause), task_id_(std::move(task_id)) {}
  const std::string& task_id() const noexcept { return task_id_; }

 private:
  std::string task_id_;
};

}  // namespace mrlab

namespace mrlab {

/// The query has no safe plan.
class NoSafePlanError : public std::runtime_error {
 public:
  NoSafePlanError() : std::runtime_error("No safe plan exists") {}
};

}  // namespace mrlab
