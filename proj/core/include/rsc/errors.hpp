#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace rsc {

/// Invalid user configuration (unknown preset, bad field, inconsistent values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration or truncation failure: norm drift, step underflow, excessive tail.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested beam geometry cannot be realized.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics (Lamb-Dicke regime, truncation tail, Rabi ordering).
// The default sink writes to stderr; tests install their own.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace rsc
