#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace octlayers {

/// Category of a failure; drives CLI exit codes and HTTP status mapping.
enum class ErrorKind {
  Format,            // unreadable or corrupt input file
  Validation,        // data violates an invariant
  Spec,              // bad generator or study settings
  Range,             // index or id out of range
  Capability,        // operation needs data the dataset lacks
  Edit,              // illegal grid edit
  Domain,            // maps with mismatched lattices
  InsufficientData,  // too few samples or subjects
  Selection,         // empty or out-of-domain selection
  Io,                // filesystem failure
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::vector<std::string> details = {})
      : std::runtime_error(std::move(message)), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::vector<std::string> details_;
};

[[noreturn]] inline void fail(ErrorKind kind, std::string message,
                              std::vector<std::string> details = {}) {
  throw Error(kind, std::move(message), std::move(details));
}

}  // namespace octlayers
