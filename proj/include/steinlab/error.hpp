#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace steinlab {

/// Raised when a caller supplies arguments outside an operation's domain.
/// `parameter()` names the offending argument so front ends can report it.
class InputError : public std::invalid_argument {
 public:
  InputError(std::string parameter, const std::string& message)
      : std::invalid_argument(parameter + ": " + message), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

namespace detail {

inline void require(bool ok, const char* parameter, const std::string& message) {
  if (!ok) throw InputError(parameter, message);
}

}  // namespace detail
}  // namespace steinlab
