#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace obstlab {

enum class CurveKind { omega, sigma, omega_tilde, n_tilde, n_hat, n_reg, m_reg, other };

std::string_view to_string(CurveKind kind);
CurveKind curve_kind_from_string(std::string_view name);

/// Functional values on a strictly increasing radius ladder.
struct ModulusCurve {
    CurveKind kind = CurveKind::other;
    std::vector<double> radii;
    std::vector<double> values;

    std::size_t size() const noexcept { return radii.size(); }
    /// Linear interpolation in ln r; throws DomainError outside [radii.front(), radii.back()].
    double at(double r) const;
};

/// Log-spaced radii from rmin to rmax inclusive with `per_decade` points per decade.
std::vector<double> log_ladder(double rmin, double rmax, int per_decade);

/// Parses `log:<rmin>:<rmax>:<points_per_decade>`.
std::vector<double> parse_ladder(std::string_view spec);

/// Drops radii below rmin (with a 1e-9 relative slack).
std::vector<double> truncate_ladder(const std::vector<double>& radii, double rmin);

/// Running maximum, so the result is nondecreasing.
std::vector<double> running_max(const std::vector<double>& values);

/// Least-squares slope of ln(value) against ln(r) over the middle two quartiles
/// of the ladder (indices n/4 .. 3n/4). Nonpositive values are skipped; NaN if
/// fewer than two usable points remain.
double middle_quartile_slope(const std::vector<double>& radii, const std::vector<double>& values);

/// Plain least-squares slope of ln(value) against ln(r) over all positive entries.
double loglog_slope(const std::vector<double>& radii, const std::vector<double>& values);

}  // namespace obstlab
