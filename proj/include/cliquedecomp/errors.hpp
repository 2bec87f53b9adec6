#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace cliquedecomp {

/// Precondition violated by the caller (bad shape, probability, size...).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. `line()` is 1-based; 0 when the problem is global
/// (for example a missing problem line).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line == 0 ? what
                                       : "line " + std::to_string(line) +
                                             ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// NaN/Inf in an iterate, a diverging series, or a domain violation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

struct WarningSink {
    std::mutex mutex;
    std::function<void(std::string_view)> handler = [](std::string_view msg) {
        std::cerr << "warning: " << msg << '\n';
    };
};

inline WarningSink& warning_sink() {
    static WarningSink sink;
    return sink;
}

} // namespace detail

/// Replace the process-wide warning handler. Passing an empty function
/// silences warnings.
inline void set_warning_handler(std::function<void(std::string_view)> handler) {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    sink.handler = std::move(handler);
}

inline void warn(std::string_view message) {
    auto& sink = detail::warning_sink();
    std::lock_guard lock(sink.mutex);
    if (sink.handler) sink.handler(message);
}

} // namespace cliquedecomp
