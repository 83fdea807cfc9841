#pragma once

#include "obstlab/grid.hpp"

#include <string>
#include <vector>

namespace obstlab {

enum class SweepOrder { lexicographic, red_black };

/// Per-step linear complementarity problem min(A u - q, u) = 0 with
/// A = I/dt - Delta_h (an M-matrix) and q = u_prev/dt - f at the new time level.
struct LcpOptions {
    double theta = 1.5;        // over-relaxation, in (1, 2)
    double tolerance = 1e-10;  // max-norm of min(Au - q, u)
    long max_sweeps = 20000;
    SweepOrder order = SweepOrder::lexicographic;
};

struct ObstacleResult {
    ScalarField u;
    std::vector<double> residual_history;  // final complementarity residual per step (index k-1)
    std::vector<long> sweeps;              // sweeps used per step
    std::vector<std::string> warnings;
};

/// Marches the parabolic obstacle problem H u = f chi_{u>0}, u >= 0 from the
/// initial slice of `data` to t_final, imposing the lateral values of `data`.
/// Throws ConfigError on negative data and NumericalError when a step does not converge.
ObstacleResult solve_obstacle(const ScalarField& f, const ScalarField& data, const LcpOptions& opts = {});

/// max over interior nodes and steps k >= 1 of |min((A u^k - q^k)_i, u^k_i)|.
double lcp_residual(const ScalarField& u, const ScalarField& f);

/// Discrete contact set {u <= eps_pos}, one flag per node in field order.
std::vector<bool> contact_set(const ScalarField& u, double eps_pos);

/// Structured text record of the options and residual history.
std::string run_manifest(const ObstacleResult& result, const LcpOptions& opts);

}  // namespace obstlab
