#pragma once

#include "obstlab/curve.hpp"
#include "obstlab/grid.hpp"
#include "obstlab/heat.hpp"

#include <string>
#include <vector>

namespace obstlab {

// Scaled-norm convention used by every fit residual below:
//
//   res(u, P, r) = ( (1/|Q_r^-|) sum_Q w |u - P|^p )^(1/p) / r^2
//
// which differs from the r^-(n+2+2p)/p normalisation only by the fixed factor
// |Q_1^-|^(1/p). Slopes and dichotomies are unaffected.

/// ((1/|Q_rho^-|) sum |f - f(x0,t0)|^p)^(1/p); f(x0,t0) is interpolated (exact at nodes).
double omega(const ScalarField& f, const SpaceTimePoint& center, double rho, double p);
ModulusCurve omega_curve(const ScalarField& f, const SpaceTimePoint& center, double p,
                         const std::vector<double>& radii);

/// Running supremum of omega over the ladder, truncated below at r_min = 4h.
ModulusCurve sigma(const ScalarField& f, const SpaceTimePoint& center, double p,
                   const std::vector<double>& radii);

struct OmegaTilde {
    double value = 0.0;
    double c = 0.0;  // the unique minimising constant c_r
};

/// inf over constants c of the L^p cylinder average of |f - c|.
OmegaTilde omega_tilde(const ScalarField& f, const SpaceTimePoint& center, double r, double p);
OmegaTilde omega_tilde(const CylinderSamples& q, double p);
ModulusCurve omega_tilde_curve(const ScalarField& f, const SpaceTimePoint& center, double p,
                               const std::vector<double>& radii);

enum class ConstraintKind { free, heat_equals, caloric };

struct FitConstraint {
    ConstraintKind kind = ConstraintKind::free;
    double value = 0.0;  // required H P for heat_equals

    static FitConstraint free() { return {}; }
    static FitConstraint heat_equals(double c) { return {ConstraintKind::heat_equals, c}; }
    static FitConstraint caloric() { return {ConstraintKind::caloric, 0.0}; }
    double heat_value() const { return kind == ConstraintKind::heat_equals ? value : 0.0; }
};

struct Poly2Fit {
    Poly2 poly;
    double residual = 0.0;
    int iterations = 0;     // IRLS iterations, 0 for p = 2
    bool converged = true;
    double gap = 0.0;       // last objective decrease when IRLS stops early
};

/// Best fit of u over Q_r^-(center) within the constrained family. p = 2 is an
/// exact weighted least-squares solve with the constraint eliminated; other p
/// use damped IRLS to a coefficient tolerance of 1e-8.
Poly2Fit fit_poly2(const ScalarField& u, const SpaceTimePoint& center, double r, double p,
                   FitConstraint constraint);
Poly2Fit fit_poly2(const CylinderSamples& q, double p, FitConstraint constraint);

/// Scaled residual of u - P on the samples (coordinates relative to the center).
double poly2_residual(const CylinderSamples& q, const Poly2& poly, double p);

double n_tilde(const ScalarField& u, const SpaceTimePoint& center, double r, double p);
/// Fit over c_r P_* + caloric polynomials, with c_r taken from omega_tilde(f, r).
double n_hat(const ScalarField& u, const ScalarField& f, const SpaceTimePoint& center, double r, double p);
ModulusCurve n_tilde_curve(const ScalarField& u, const SpaceTimePoint& center, double p,
                           const std::vector<double>& radii);
ModulusCurve n_hat_curve(const ScalarField& u, const ScalarField& f, const SpaceTimePoint& center, double p,
                         const std::vector<double>& radii);

/// kappa * 1/2 (max(0, x.nu))^2.
struct HalfSpaceProfile {
    Vec nu;
    double kappa = 1.0;

    double operator()(const Vec& y) const {
        const double d = std::max(0.0, y.dot(nu));
        return 0.5 * kappa * d * d;
    }
};

double half_space_residual(const CylinderSamples& q, const HalfSpaceProfile& profile, double p);

struct HalfSpaceFit {
    HalfSpaceProfile profile;
    double residual = 0.0;
};

/// Amplitude fit kappa >= 0 at a fixed direction.
HalfSpaceFit fit_half_space_amplitude(const CylinderSamples& q, const Vec& nu, double p);

struct NRegResult {
    double value = 0.0;
    Vec nu;
    bool degenerate = false;  // objective flat over the scan (u ~ 0)
};

/// inf over nu in S^{n-1} of the scaled residual against kappa * 1/2 (x.nu)_+^2.
/// n = 1 checks both directions; n = 2 scans 256 angles then golden-section;
/// n = 3 scans a 512-point Fibonacci lattice then Nelder-Mead on the tangent plane.
/// The result is never worse than the best scanned direction.
NRegResult n_reg(const ScalarField& u, const SpaceTimePoint& center, double rho, double p, double kappa = 1.0);
NRegResult n_reg(const CylinderSamples& q, double p, double kappa = 1.0);

/// n_reg on every ladder radius >= r_min; normals, when requested, receive nu* per radius.
ModulusCurve n_reg_curve(const ScalarField& u, const SpaceTimePoint& center, double p,
                         const std::vector<double>& radii, double kappa = 1.0,
                         std::vector<Vec>* normals = nullptr);

/// Running supremum of n_reg over the ladder.
ModulusCurve m_reg(const ScalarField& u, const SpaceTimePoint& center, double p,
                   const std::vector<double>& radii, double kappa = 1.0);

struct DiniResult {
    double value = 0.0;        // ladder part + tail, +inf when flagged non-Dini
    double ladder_part = 0.0;  // trapezoid in ln s over the ladder
    double tail = 0.0;         // extrapolated contribution below the smallest radius
    double exponent = 0.0;     // gamma of the power model, or q of the log model
    std::string tail_model;    // "power", "log", or "zero"
    bool dini = true;
};

/// integral_0^r sigma(s)/s ds. Below the ladder sigma is extrapolated from its
/// three smallest points, either as A s^gamma (tail A r_min^gamma / gamma) or,
/// when it fits better, as B / ln(e/s)^q. gamma <= 0.01 or q <= 1.01 flags the
/// curve as non-Dini. Above the ladder sigma is held at its last value.
DiniResult dini_integral(const ModulusCurve& curve, double r);

/// ln(mu) / ln(lambda).
double dini_exponent(double lambda, double mu);

/// C0' { N1 rho^alpha + int_0^rho w/r dr + rho^alpha int_rho^1 w/r^(1+alpha) dr }.
double dini_bound(double n1, const ModulusCurve& curve, double rho, double lambda, double mu,
                  double c0_prime = 1.0);

}  // namespace obstlab
