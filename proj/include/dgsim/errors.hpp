#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgsim {

/// Invalid or inconsistent run configuration. Carries the offending key and,
/// when known, where it was read from.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    ConfigError(std::string key, std::string location, const std::string& what)
        : std::runtime_error(format(key, location, what)), key_(std::move(key)),
          location_(std::move(location)) {}

    const std::string& key() const noexcept { return key_; }
    const std::string& location() const noexcept { return location_; }

private:
    static std::string format(const std::string& key, const std::string& location,
                              const std::string& what) {
        std::string msg;
        if (!location.empty()) msg += location + ": ";
        if (!key.empty()) msg += "'" + key + "': ";
        return msg + what;
    }

    std::string key_;
    std::string location_;
};

/// A violated model invariant; always a bug in the simulated model or a plugin.
class ModelError : public std::logic_error {
public:
    explicit ModelError(const std::string& what) : std::logic_error(what) {}
};

class CausalityError : public ModelError {
public:
    explicit CausalityError(const std::string& what) : ModelError(what) {}
};

/// Malformed input file (knowledge base, trace, tree dump).
class FormatError : public std::runtime_error {
public:
    FormatError(std::string file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

class TrainingError : public std::runtime_error {
public:
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dgsim
