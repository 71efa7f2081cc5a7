#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace claimmatch {

/// Coarse error classes. They map one-to-one onto C API status codes and
/// CLI exit codes.
enum class ErrorKind {
    usage,     // bad arguments or configuration
    data,      // malformed or inconsistent input data, I/O failures
    provider,  // embedding / translation provider failures
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::data, what}; }
inline Error provider_error(const std::string& what) { return {ErrorKind::provider, what}; }

using WarningSink = std::function<void(const std::string&)>;

/// Replaces the process-wide warning sink and returns the previous one.
/// The default sink writes to stderr. Pass an empty function to silence.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace claimmatch
