#pragma once

#include "obstlab/curve.hpp"
#include "obstlab/grid.hpp"
#include "obstlab/regularity.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace obstlab {

/// Existential constants of the estimates, exposed as named parameters.
struct Calibration {
    double lambda = 0.5;
    double mu = 0.75;
    double c0 = 10.0;
    double m0 = 0.05;
    double r0 = 0.25;

    double alpha() const { return dini_exponent(lambda, mu); }
    /// Throws ConfigError unless lambda, mu in (0,1) and c0, m0, r0 > 0.
    void validate() const;
};

enum class CheckStatus { pass, fail, not_applicable };
std::string_view to_string(CheckStatus s);

/// One recorded comparison `lhs op rhs` with op in {"<=", "<", ">=", ">"}.
struct Criterion {
    std::string name;
    double lhs = 0.0;
    std::string op = "<=";
    double rhs = 0.0;
    bool holds = false;

    static Criterion make(std::string name, double lhs, std::string op, double rhs);
    bool evaluate() const;
};

struct VerificationReport {
    std::string check;
    std::string inputs_digest;
    std::vector<double> ladder;
    std::map<std::string, std::vector<double>> series;  // per-radius quantities
    std::map<std::string, double> values;               // scalars (slopes, constants, ...)
    std::vector<Criterion> criteria;
    bool premise = true;
    std::string premise_note;
    bool hard = false;  // failures of hard checks map to exit code 3
    CheckStatus status = CheckStatus::pass;

    // Summary row.
    double target = 0.0;
    double measured = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};

/// status = not_applicable when the premise fails, else pass iff every criterion holds.
/// Each criterion's `holds` is recomputed from lhs, op and rhs first.
void recompute_status(VerificationReport& report);

/// Structured text record (JSON); non-finite numbers are written as strings.
std::string report_record(const VerificationReport& report);
VerificationReport report_from_record(std::string_view text);

/// `check,target,measured,bound,ratio,pass` with one row per report.
std::string summary_csv(const std::vector<VerificationReport>& reports);

/// 64-bit FNV-1a over grid shape and values, as 16 hex digits.
std::string field_digest(const ScalarField& field);
std::string combine_digests(const std::vector<std::string>& parts);

struct CheckOptions {
    SpaceTimePoint center;
    double p = 2.0;
    std::vector<double> ladder;  // truncated to r >= 4h inside each check
    Calibration cal;
    std::optional<double> expected;  // target for slope/constant comparisons
    double tolerance = 0.15;         // absolute tolerance on slopes, relative on constants
};

/// sup_r N~(u,r) against ||u||_p + ||f||_p + sup_r w~(r); also asserts N~ <= N^ per radius.
VerificationReport check_bmo(const ScalarField& u, const ScalarField& f, const CheckOptions& opts);
/// Compares the ratio of two BMO reports (coarse and refined grid) within `rel_tol`.
VerificationReport check_bmo_refinement(const VerificationReport& coarse, const VerificationReport& fine,
                                        double rel_tol = 0.2);

/// Premise: the tail mean of w~ over the smallest quartile is below 10% of its max.
/// Conclusion: the same for N~ (with an absolute floor of 1e-9).
VerificationReport check_vmo(const ScalarField& u, const ScalarField& f, const CheckOptions& opts);

/// Caloric Taylor fit at the smallest radius, error curve e(r), its slope and the
/// ratio e/dini_bound. f(center) P_* is subtracted first when f(center) != 0.
VerificationReport check_taylor(const ScalarField& u, const ScalarField& f, const CheckOptions& opts);

/// sup_r lp_average(u,Q_r)/r^2 and sup_r max_{Q_r} u / r^2 over the ladder.
VerificationReport check_quadratic_growth(const ScalarField& u, const CheckOptions& opts);

/// If u(x0,t0) > 2 lambda with lambda = C0 d^2 w(f, d), asserts
/// sup over the parabolic boundary of Q_d^- of u >= f(x0,t0) d^2 / (2n+1).
VerificationReport check_nondegeneracy(const ScalarField& u, const ScalarField& f, const SpaceTimePoint& point,
                                       double d, const Calibration& cal, double p = 2.0);

/// Space-time box K = [lo, hi] x [t_lo, t_hi].
struct Region {
    Vec lo, hi;
    double t_lo = 0.0, t_hi = 0.0;
    bool contains(const Vec& x, double t) const;
};

/// Family of runs with tau_m = max f_m - min f_m: sup_K u_m against tau_m.
/// Not applicable when u_limit is positive somewhere on K.
VerificationReport check_weak_nondegeneracy(const std::vector<ScalarField>& us, const std::vector<ScalarField>& fs,
                                            const Region& K, const ScalarField* u_limit = nullptr);

/// Per ladder radius r >= r_check with lambda r inside the ladder and M(r) <= M0:
/// M(lambda r) < mu M(r)  or  M(r) < C0 sigma(r). M(r) <= 1e-10 satisfies the first branch.
VerificationReport check_decay_dichotomy(const ModulusCurve& m_curve, const ModulusCurve& sigma_curve,
                                         const Calibration& cal, double r_check = 0.0);

/// M_reg and sigma for u / f(center) and f / f(center), the normalisation used for regular points.
struct RegularCurves {
    double f0 = 0.0;
    ModulusCurve m;
    ModulusCurve sigma;
    std::vector<Vec> normals;
};
RegularCurves regular_curves(const ScalarField& u, const ScalarField& f, const CheckOptions& opts);

/// Regular when f(center) > 0 and M_reg(u/f(center), r0) <= M0. Reports nu at the
/// smallest radius, the half-space error curve, its slope and the bound-shape ratio.
VerificationReport check_regular_point(const ScalarField& u, const ScalarField& f, const CheckOptions& opts);

struct Classification {
    bool applicable = false;  // f(center) > 0
    bool regular = false;
    double m_r0 = 0.0;
    Vec nu;
};
/// The classification part of check_regular_point alone (ladder cut at r0).
Classification classify_regular(const ScalarField& u, const ScalarField& f, const CheckOptions& opts);

}  // namespace obstlab
