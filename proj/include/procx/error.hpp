#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace procx {

// Input file could not be read or a line failed to decode.
class LoadError : public std::runtime_error {
public:
    LoadError(const std::string& path, std::size_t line, const std::string& reason)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + reason), line_(line) {}
    explicit LoadError(const std::string& message) : std::runtime_error(message) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_ = 0;
};

// Data decoded but violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
    ValidationError(const std::string& document_id, const std::string& reason)
        : std::runtime_error("document " + document_id + ": " + reason), document_id_(document_id) {}

    const std::string& document_id() const { return document_id_; }

private:
    std::string document_id_;
};

// Failure talking to a model provider or the response cache.
class LlmError : public std::runtime_error {
public:
    enum class Kind { provider, cache_miss, malformed_payload, cache_io };

    LlmError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Caller asked for something the inputs cannot satisfy (e.g. more shots than documents).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace procx
