#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pxem::diag {

using WarningHandler = std::function<void(std::string_view)>;

// Numerical warnings (boundary clamps, capped predictors) go through a
// process-wide handler. The default writes to std::cerr.
void warn(std::string_view message);

/// Installs a handler and returns the previous one.
WarningHandler set_warning_handler(WarningHandler handler);

/// Collects warnings for the lifetime of the object, then restores the
/// previous handler.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }

 private:
  WarningHandler previous_;
  std::vector<std::string> messages_;
};

}  // namespace pxem::diag
