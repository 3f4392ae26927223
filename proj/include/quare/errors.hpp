#pragma once

#include <stdexcept>
#include <string>

namespace quare {

// Transport-level provider failure. Retryable failures are retried with
// exponential backoff by the caller; non-retryable ones surface immediately.
class ProviderError : public std::runtime_error {
public:
    explicit ProviderError(std::string message, bool retryable = false)
        : std::runtime_error(std::move(message)), retryable_(retryable) {}
    bool retryable() const noexcept { return retryable_; }

private:
    bool retryable_;
};

// Provider returned bytes we could not decode into the expected shape.
class DecodeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An agent's output stayed unparseable after the repair attempts.
// Carries the raw text for diagnosis.
class AgentOutputError : public std::runtime_error {
public:
    AgentOutputError(std::string message, std::string raw)
        : std::runtime_error(std::move(message)), raw_(std::move(raw)) {}
    const std::string& raw_output() const noexcept { return raw_; }

private:
    std::string raw_;
};

class IntegrationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TopologyError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ProjectionError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class JudgeError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A pipeline phase failed hard; message names the phase and agent.
class PipelineError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace quare
