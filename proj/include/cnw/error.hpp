#pragma once

#include <stdexcept>
#include <string>

namespace cnw {

/// Malformed input: bad system description, violated precondition, unknown name.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A request that would exceed a configured size cap.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical integration produced a non-finite state or field value.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

} // namespace cnw
