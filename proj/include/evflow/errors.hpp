#pragma once

#include <stdexcept>
#include <string>

namespace evflow {

// Configuration / input validation, reported with section.key paths.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed cycle file row.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates a semantic constraint.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Integrator state left the finite range (parameter blow-up).
class NonFiniteState : public std::runtime_error {
public:
    explicit NonFiniteState(const std::string& what) : std::runtime_error(what) {}
};

// Battery state of charge reached zero during discharge.
class SocDepleted : public std::runtime_error {
public:
    explicit SocDepleted(const std::string& what) : std::runtime_error(what) {}
};

// Energy accumulation called with a step size that differs from the
// integration grid.
class GridMismatch : public std::runtime_error {
public:
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evflow
