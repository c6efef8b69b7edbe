#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qss {

// Invalid protocol/channel/experiment configuration. `path` names the
// offending field, e.g. "protocol.n" or "channel.p_x".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::invalid_argument(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// A public announcement was attempted out of order (basis strings before
// every receiver acknowledged reception).
class ProtocolOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An operation was invoked in the wrong protocol state.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// One-time-pad key material would have to be reused.
class KeyExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qss
