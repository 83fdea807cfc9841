#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace obstlab {

// Spatial dimension is at most 3, so small vectors and matrices never allocate.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

struct SpaceTimePoint {
    Vec x;
    double t = 0.0;
};

inline SpaceTimePoint origin(int n) { return {Vec::Zero(n), 0.0}; }

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments; maps to CLI exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A point or cylinder that leaves the grid domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failure; carries the worst residual seen.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual, long step = -1)
        : Error(what), residual_(residual), step_(step) {}
    double residual() const noexcept { return residual_; }
    long step() const noexcept { return step_; }

private:
    double residual_;
    long step_;
};

}  // namespace obstlab
