#pragma once

#include <stdexcept>
#include <string>

namespace exacb {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied configuration, spec files, keys, or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Arguments outside an operation's stated domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Harness spawn/exit problems; carries captured output in what().
class HarnessError : public Error {
 public:
  using Error::Error;
};

// Store backend failures other than not-found.
class StoreError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// merge_reports conflicts (mixed experiments, clashing parameter keys).
class ConflictError : public Error {
 public:
  using Error::Error;
};

class FixtureError : public Error {
 public:
  using Error::Error;
};

}  // namespace exacb
