#include <bsynth/diagnostics.hpp>

#include <iostream>
#include <mutex>
#include <string>

namespace bsynth {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& current_sink() {
    static WarningSink sink;
    return sink;
}

}  // namespace

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex());
    auto& sink = current_sink();
    if (sink) {
        sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(sink_mutex());
    auto previous = std::move(current_sink());
    current_sink() = std::move(sink);
    return previous;
}

}  // namespace bsynth
