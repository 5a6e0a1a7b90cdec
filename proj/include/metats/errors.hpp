#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace metats {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A linear-algebra step could not be carried out reliably (e.g. a Cholesky
/// pivot below tolerance).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An agent or harness method was called out of protocol order.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Invalid or unreadable configuration. `key` names the offending entry when
/// there is one.
class ConfigError : public std::runtime_error {
public:
    enum class Kind { kInvalid, kMissingFile, kMalformed };

    ConfigError(const std::string& message, std::string key = {}, Kind kind = Kind::kInvalid)
        : std::runtime_error(message), key_(std::move(key)), kind_(kind) {}

    const std::string& key() const noexcept { return key_; }
    Kind kind() const noexcept { return kind_; }

private:
    std::string key_;
    Kind kind_;
};

}  // namespace metats
