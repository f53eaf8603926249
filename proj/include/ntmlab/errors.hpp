#pragma once

#include <stdexcept>
#include <string>

namespace ntmlab {

// Shape disagreement between operands. Message names both shapes.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid configuration value (bad head count, even shift width, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// API misuse (backward twice, non-scalar loss, ...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Training hit a non-finite loss or gradient; carries the diagnostic record.
class TrainingAbort : public std::runtime_error {
public:
    TrainingAbort(long iteration, double grad_norm, const std::string& what)
        : std::runtime_error(what), iteration(iteration), grad_norm(grad_norm) {}
    long iteration;
    double grad_norm;
};

} // namespace ntmlab
