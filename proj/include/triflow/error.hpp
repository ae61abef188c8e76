#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace triflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. Carries the file and 1-based line of the offending row.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(std::move(file)), line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Missing file or directory, unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

// Dangling city reference or duplicate primary key inside a dataset.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public ValidationError {
 public:
  ResolutionError(std::string name, std::vector<std::string> candidates)
      : ValidationError(make_message(name, candidates)), name_(std::move(name)), candidates_(std::move(candidates)) {}

  const std::string& name() const { return name_; }
  const std::vector<std::string>& candidates() const { return candidates_; }

 private:
  static std::string make_message(const std::string& name, const std::vector<std::string>& candidates) {
    std::string msg = "unknown city '" + name + "'";
    if (!candidates.empty()) {
      msg += "; did you mean:";
      for (const auto& c : candidates) msg += " " + c;
    }
    return msg;
  }

  std::string name_;
  std::vector<std::string> candidates_;
};

// A retrieved record that is not present verbatim in the source dataset.
class ProvenanceError : public Error {
 public:
  using Error::Error;
};

class ApplicabilityError : public Error {
 public:
  using Error::Error;
};

class SkeletonInfeasible : public Error {
 public:
  using Error::Error;
};

class SlotInfeasible : public Error {
 public:
  explicit SlotInfeasible(std::string slot) : Error("no valid candidate for slot " + slot), slot_(std::move(slot)) {}
  const std::string& slot() const { return slot_; }

 private:
  std::string slot_;
};

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace triflow
