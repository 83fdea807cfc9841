#pragma once

#include "obstlab/grid.hpp"

#include <map>
#include <string>
#include <string_view>

namespace obstlab {

/// P(x,t) = a + b.x + 1/2 x^T c x + m t, quadratic in space and linear in time.
struct Poly2 {
    double a = 0.0;
    Vec b;
    Mat c;  // symmetric
    double m = 0.0;

    static Poly2 zero(int n);
    /// |x|^2 / (2n), the reference solution of HP = 1.
    static Poly2 pstar(int n);

    int dim() const noexcept { return static_cast<int>(b.size()); }
    double operator()(const Vec& x, double t) const;
    /// H P = tr(c) - m, exact.
    double heat() const { return c.trace() - m; }
    bool is_caloric(double tol = 1e-12) const { return std::abs(heat()) <= tol; }
    /// Sum of absolute coefficients |a| + |b|_1 + |c|_1 + |m|.
    double coefficient_size() const;
};

/// Nodes where the discrete heat operator is defined: spatially interior with time index >= 1.
bool heat_defined(const Grid& grid, std::size_t s, int k) noexcept;

/// Discrete H u = Delta_h u - (u^k - u^{k-1}) / dt with the 2n+1 point Laplacian.
/// Exact on Poly2. Nodes where it is undefined hold 0.
ScalarField apply_heat(const ScalarField& u);
double heat_at(const ScalarField& u, std::size_t s, int k);

struct HeatOptions {
    double tolerance = 1e-10;  // absolute, max-norm of the step residual
    long max_iterations = 100000;
};

struct HeatSolution {
    ScalarField u;
    double max_residual = 0.0;  // max over steps of |H u - f| at interior nodes
    long iterations = 0;
};

/// Implicit Euler for H u = f. The initial slice and the lateral boundary of
/// `data` are imposed; each step is one conjugate-gradient solve with (I/dt - Delta_h).
/// Throws NumericalError when a step does not reach the tolerance.
HeatSolution solve_heat(const ScalarField& f, const ScalarField& data, const HeatOptions& opts = {});

using CaseParams = std::map<std::string, double>;

struct ManufactureMetadata {
    std::string case_id;
    CaseParams params;              // effective parameters, defaults filled in
    double mollification_radius = 0.0;
    std::string u_source;           // "closed-form" or "solve_heat"
    double solve_residual = 0.0;
};

struct ManufacturedCase {
    ScalarField u;
    ScalarField f;
    ManufactureMetadata meta;
};

/// Case ids: caloric-poly, pstar, hoelder-rhs, dini-rhs, nondini-rhs,
/// traveling-wave, half-space, shell-rhs, affine-rhs.
///
/// Closed-form cases sample u; right-hand-side cases solve H u = f with zero data.
/// Throws ConfigError for unknown ids or parameters.
ManufacturedCase manufacture(const Grid& grid, std::string_view case_id, const CaseParams& params = {});

/// Right-hand side of a case alone (no solve).
ScalarField manufacture_rhs(const Grid& grid, std::string_view case_id, const CaseParams& params = {});

/// Structured text record (JSON) of the metadata.
std::string metadata_record(const ManufactureMetadata& meta);

}  // namespace obstlab
