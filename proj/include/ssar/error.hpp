#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ssar {

/// Structured failure carrying a machine-readable code plus key/value
/// details. The CLI serializes these into its error JSON.
class Error : public std::runtime_error {
 public:
  using Detail = std::pair<std::string, std::string>;

  Error(std::string code, const std::string& message, std::vector<Detail> details = {})
      : std::runtime_error(message), code_(std::move(code)), details_(std::move(details)) {}

  const std::string& code() const noexcept { return code_; }
  const std::vector<Detail>& details() const noexcept { return details_; }

 private:
  std::string code_;
  std::vector<Detail> details_;
};

/// Raised for configuration / user input problems (CLI exit code 2).
class UserError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssar
