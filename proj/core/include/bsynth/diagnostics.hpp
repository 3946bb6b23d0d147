#pragma once

#include <functional>
#include <string_view>

namespace bsynth {

using WarningSink = std::function<void(std::string_view)>;

/// Emit a non-fatal warning. Defaults to stderr.
void warn(std::string_view message);

/// Replace the process-wide warning sink and return the previous one.
/// Passing an empty function restores the stderr sink.
WarningSink set_warning_sink(WarningSink sink);

/// RAII capture of warnings, used by tests and by the CLI to collect
/// warnings into artifacts.
class ScopedWarningCapture {
public:
    explicit ScopedWarningCapture(WarningSink sink) : previous_(set_warning_sink(std::move(sink))) {}
    ~ScopedWarningCapture() { set_warning_sink(std::move(previous_)); }
    ScopedWarningCapture(const ScopedWarningCapture&) = delete;
    ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

private:
    WarningSink previous_;
};

}  // namespace bsynth
