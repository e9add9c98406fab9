#pragma once

#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>

namespace lagrom {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    usage = 2,      ///< bad arguments, violated preconditions
    numerical = 3,  ///< CFL, tangling, rank deficiency, blow-up
    io = 4,         ///< file format or filesystem failures
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

/// Rank deficiency; carries the largest rank the data supports.
class RankError : public NumericalError {
public:
    RankError(const std::string& what, int achievable)
        : NumericalError(what), achievable_(achievable) {}
    int achievable_rank() const noexcept { return achievable_; }

private:
    int achievable_;
};

namespace log {

enum class Level { quiet = 0, warn = 1, info = 2, debug = 3 };

/// Verbosity comes from LAGROM_LOG (quiet|warn|info|debug or 0-3); default warn.
inline Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("LAGROM_LOG");
        if (env == nullptr) return Level::warn;
        const std::string s(env);
        if (s == "quiet" || s == "0") return Level::quiet;
        if (s == "info" || s == "2") return Level::info;
        if (s == "debug" || s == "3") return Level::debug;
        return Level::warn;
    }();
    return lvl;
}

inline void emit(Level lvl, const char* tag, const std::string& msg) {
    if (static_cast<int>(lvl) <= static_cast<int>(level())) {
        std::cerr << "[lagrom " << tag << "] " << msg << '\n';
    }
}

inline void warn(const std::string& msg) { emit(Level::warn, "warn", msg); }
inline void info(const std::string& msg) { emit(Level::info, "info", msg); }
inline void debug(const std::string& msg) { emit(Level::debug, "debug", msg); }

}  // namespace log
}  // namespace lagrom
