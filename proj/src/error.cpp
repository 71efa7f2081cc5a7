#include "claimmatch/error.hpp"

#include <iostream>
#include <mutex>

namespace claimmatch {
namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& sink() {
    static WarningSink s = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink new_sink) {
    std::lock_guard lock(sink_mutex());
    WarningSink old = std::move(sink());
    sink() = std::move(new_sink);
    return old;
}

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

}  // namespace claimmatch
