#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace intimacy {

// Contract failure carrying a stable error name (e.g. "not_connected") that
// callers and tests can match on; what() holds the readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace intimacy
