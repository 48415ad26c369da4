#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace maxshape {

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PointLocationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative or direct solve that did not reach the requested accuracy.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, std::vector<double> history = {})
        : std::runtime_error(what), residual_(residual), history_(std::move(history))
    {
    }

    double residual() const { return residual_; }
    const std::vector<double>& history() const { return history_; }

private:
    double residual_;
    std::vector<double> history_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QPError : public std::runtime_error {
public:
    QPError(const std::string& what, double kkt_residual)
        : std::runtime_error(what), kkt_residual_(kkt_residual)
    {
    }
    double kkt_residual() const { return kkt_residual_; }

private:
    double kkt_residual_;
};

} // namespace maxshape
