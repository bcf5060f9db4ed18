#pragma once

#include <stdexcept>
#include <string>

namespace photon_switch {

// Base of every error raised by the library.
class SwitchError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidParameters : public SwitchError {
public:
  using SwitchError::SwitchError;
};

// No real dispersive solution for the central-resonator tuning.
class DetuningTooSmall : public SwitchError {
public:
  using SwitchError::SwitchError;
};

class NonConvergence : public SwitchError {
public:
  NonConvergence(const std::string& what, double time)
      : SwitchError(what), time_(time) {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

class GridTooNarrow : public SwitchError {
public:
  using SwitchError::SwitchError;
};

class SingularSystem : public SwitchError {
public:
  using SwitchError::SwitchError;
};

class ConfigError : public SwitchError {
public:
  using SwitchError::SwitchError;
};

class Cancelled : public SwitchError {
public:
  Cancelled() : SwitchError("computation cancelled") {}
};

} // namespace photon_switch
