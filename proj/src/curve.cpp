#include "obstlab/curve.hpp"

#include "obstlab/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace obstlab {

namespace {

constexpr std::pair<CurveKind, std::string_view> kKindNames[] = {
    {CurveKind::omega, "omega"},         {CurveKind::sigma, "sigma"},
    {CurveKind::omega_tilde, "omega_tilde"}, {CurveKind::n_tilde, "n_tilde"},
    {CurveKind::n_hat, "n_hat"},         {CurveKind::n_reg, "n_reg"},
    {CurveKind::m_reg, "m_reg"},         {CurveKind::other, "other"},
};

double parse_double(std::string_view text, const char* field) {
    try {
        std::size_t used = 0;
        const std::string s(text);
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ConfigError("");
        return v;
    } catch (...) {
        throw ConfigError(std::string("ladder: cannot parse ") + field + " from '" + std::string(text) + "'");
    }
}

}  // namespace

std::string_view to_string(CurveKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "other";
}

CurveKind curve_kind_from_string(std::string_view name) {
    for (const auto& [k, s] : kKindNames)
        if (s == name) return k;
    throw ConfigError("unknown curve kind '" + std::string(name) + "'");
}

double ModulusCurve::at(double r) const {
    if (radii.empty()) throw DomainError("empty curve");
    const double slack = 1e-9 * r;
    if (r < radii.front() - slack || r > radii.back() + slack)
        throw DomainError("radius outside curve range");
    if (r <= radii.front()) return values.front();
    if (r >= radii.back()) return values.back();
    const auto it = std::upper_bound(radii.begin(), radii.end(), r);
    const std::size_t j = static_cast<std::size_t>(it - radii.begin());
    const double l0 = std::log(radii[j - 1]), l1 = std::log(radii[j]);
    const double th = (std::log(r) - l0) / (l1 - l0);
    return (1.0 - th) * values[j - 1] + th * values[j];
}

std::vector<double> log_ladder(double rmin, double rmax, int per_decade) {
    if (!(rmin > 0.0) || !(rmax >= rmin)) throw ConfigError("ladder: need 0 < rmin <= rmax");
    if (per_decade < 1) throw ConfigError("ladder: points per decade must be >= 1");
    const double decades = std::log10(rmax / rmin);
    const int intervals = std::max(1, static_cast<int>(std::lround(decades * per_decade)));
    if (rmax == rmin) return {rmin};
    std::vector<double> r(static_cast<std::size_t>(intervals) + 1);
    const double lmin = std::log(rmin), lmax = std::log(rmax);
    for (int i = 0; i <= intervals; ++i)
        r[i] = std::exp(lmin + (lmax - lmin) * static_cast<double>(i) / intervals);
    r.front() = rmin;
    r.back() = rmax;
    return r;
}

std::vector<double> parse_ladder(std::string_view spec) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = spec.find(':', start);
        parts.push_back(spec.substr(start, pos == std::string_view::npos ? spec.npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (parts.size() != 4 || parts[0] != "log")
        throw ConfigError("ladder must read log:<rmin>:<rmax>:<points_per_decade>");
    const double rmin = parse_double(parts[1], "rmin");
    const double rmax = parse_double(parts[2], "rmax");
    const double ppd = parse_double(parts[3], "points_per_decade");
    if (ppd != std::floor(ppd)) throw ConfigError("ladder: points per decade must be an integer");
    return log_ladder(rmin, rmax, static_cast<int>(ppd));
}

std::vector<double> truncate_ladder(const std::vector<double>& radii, double rmin) {
    std::vector<double> out;
    for (double r : radii)
        if (r >= rmin * (1.0 - 1e-9)) out.push_back(r);
    return out;
}

std::vector<double> running_max(const std::vector<double>& values) {
    std::vector<double> out(values.size());
    double m = -INFINITY;
    for (std::size_t i = 0; i < values.size(); ++i) {
        m = std::max(m, values[i]);
        out[i] = m;
    }
    return out;
}

namespace {

double slope_over(const std::vector<double>& radii, const std::vector<double>& values,
                  std::size_t lo, std::size_t hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = lo; i <= hi && i < radii.size(); ++i) {
        if (!(values[i] > 0.0) || !(radii[i] > 0.0)) continue;
        const double x = std::log(radii[i]), y = std::log(values[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m < 2) return NAN;
    const double den = m * sxx - sx * sx;
    if (den == 0.0) return NAN;
    return (m * sxy - sx * sy) / den;
}

}  // namespace

double middle_quartile_slope(const std::vector<double>& radii, const std::vector<double>& values) {
    const std::size_t n = radii.size();
    if (n < 2) return NAN;
    std::size_t lo = n / 4, hi = (3 * n) / 4;
    if (hi >= n) hi = n - 1;
    if (hi <= lo) { lo = 0; hi = n - 1; }
    return slope_over(radii, values, lo, hi);
}

double loglog_slope(const std::vector<double>& radii, const std::vector<double>& values) {
    if (radii.empty()) return NAN;
    return slope_over(radii, values, 0, radii.size() - 1);
}

}  // namespace obstlab
