#pragma once

#include <stdexcept>
#include <string>

namespace focusfl {

/// Malformed or invalid experiment configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter vector went non-finite during descent. Maps to CLI exit code 3.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what, int round = -1)
      : std::runtime_error(what), round_(round) {}

  int round() const { return round_; }
  void set_round(int round) { round_ = round; }

 private:
  int round_;
};

}  // namespace focusfl
