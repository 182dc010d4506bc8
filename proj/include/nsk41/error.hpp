#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace nsk41 {

/// Invalid parameters or configuration; maps to CLI exit status 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operands defined on different grids.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation applied outside its domain (empty band, nonzero mean under a
/// negative-order symbol, theta outside [0, 3], ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// NaN, CFL floor, quadrature failure; maps to CLI exit status 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace log {

using Sink = std::function<void(const std::string&)>;

inline Sink& warning_sink() {
    static Sink sink = [](const std::string& msg) { std::cerr << "[nsk41] warning: " << msg << '\n'; };
    return sink;
}

inline void warn(const std::string& msg) {
    if (auto& s = warning_sink()) s(msg);
}

/// Installs a sink for the current scope and restores the previous one on exit.
class ScopedSink {
public:
    explicit ScopedSink(Sink s) : previous_(std::exchange(warning_sink(), std::move(s))) {}
    ~ScopedSink() { warning_sink() = std::move(previous_); }
    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    Sink previous_;
};

}  // namespace log
}  // namespace nsk41
