#include "obstlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace obstlab {

namespace {

constexpr double kTol = 1e-9;

int integral_ratio(double num, double den, const char* what) {
    const double q = num / den;
    const double rq = std::round(q);
    if (std::abs(q - rq) > kTol || rq < 1.0) {
        std::ostringstream os;
        os << what << " must be a positive integer (got " << q << ")";
        throw ConfigError(os.str());
    }
    return static_cast<int>(rq);
}

double ball_volume(int n, double r) {
    switch (n) {
        case 1: return 2.0 * r;
        case 2: return M_PI * r * r;
        default: return 4.0 / 3.0 * M_PI * r * r * r;
    }
}

}  // namespace

Grid::Grid(const GridSpec& spec) : spec_(spec) {
    if (spec.n < 1 || spec.n > 3) throw ConfigError("grid.n must be 1, 2 or 3");
    if (!(spec.h > 0.0)) throw ConfigError("grid.h must be positive");
    if (!(spec.dt > 0.0)) throw ConfigError("grid.dt must be positive");
    if (!(spec.R > 0.0)) throw ConfigError("grid.R must be positive");
    if (!(spec.T > 0.0)) throw ConfigError("grid.T must be positive");
    if (spec.dt > spec.h * spec.h * (1.0 + kTol))
        throw ConfigError("grid.dt must not exceed h^2");
    nx_ = 2 * integral_ratio(spec.R, spec.h, "grid.R / grid.h") + 1;
    nt_ = integral_ratio(spec.T, spec.dt, "grid.T / grid.dt") + 1;
    ns_ = 1;
    for (int a = spec.n - 1; a >= 0; --a) {
        strides_[a] = ns_;
        ns_ *= static_cast<std::size_t>(nx_);
    }
}

Grid build_grid(const GridSpec& spec) { return Grid(spec); }

std::array<int, 3> Grid::unravel(std::size_t s) const noexcept {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < spec_.n; ++a) {
        idx[a] = static_cast<int>(s / strides_[a]);
        s %= strides_[a];
    }
    return idx;
}

std::size_t Grid::ravel(const std::array<int, 3>& idx) const noexcept {
    std::size_t s = 0;
    for (int a = 0; a < spec_.n; ++a) s += static_cast<std::size_t>(idx[a]) * strides_[a];
    return s;
}

Vec Grid::position(std::size_t s) const {
    const auto idx = unravel(s);
    Vec x(spec_.n);
    for (int a = 0; a < spec_.n; ++a) x[a] = coord(idx[a]);
    return x;
}

bool Grid::on_lateral_boundary(std::size_t s) const noexcept {
    const auto idx = unravel(s);
    for (int a = 0; a < spec_.n; ++a)
        if (idx[a] == 0 || idx[a] == nx_ - 1) return true;
    return false;
}

std::vector<bool> Grid::ball_mask() const {
    std::vector<bool> mask(ns_);
    const double r2 = spec_.R * spec_.R * (1.0 + kTol);
    for (std::size_t s = 0; s < ns_; ++s) mask[s] = position(s).squaredNorm() <= r2;
    return mask;
}

std::size_t Grid::nearest_spatial(const Vec& x) const {
    if (x.size() != spec_.n) throw DomainError("point dimension does not match grid");
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < spec_.n; ++a) {
        const double u = (x[a] + spec_.R) / spec_.h;
        if (u < -kTol || u > nx_ - 1 + kTol) throw DomainError("point outside grid domain");
        idx[a] = std::clamp(static_cast<int>(std::lround(u)), 0, nx_ - 1);
    }
    return ravel(idx);
}

NodeRef Grid::node_at(const SpaceTimePoint& p) const {
    const std::size_t s = nearest_spatial(p.x);
    if ((position(s) - p.x).cwiseAbs().maxCoeff() > kTol * spec_.h)
        throw DomainError("point is not a spatial grid node");
    const double kt = (p.t - t_start()) / spec_.dt;
    const long k = std::lround(kt);
    if (std::abs(kt - static_cast<double>(k)) > kTol || k < 0 || k >= nt_)
        throw DomainError("time is not a grid time level");
    return {s, static_cast<int>(k)};
}

bool Grid::same_shape(const Grid& other) const noexcept {
    return spec_.n == other.spec_.n && nx_ == other.nx_ && nt_ == other.nt_ &&
           std::abs(spec_.h - other.spec_.h) <= kTol * spec_.h &&
           std::abs(spec_.dt - other.spec_.dt) <= kTol * spec_.dt &&
           std::abs(spec_.t_final - other.spec_.t_final) <= kTol * spec_.dt;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw ConfigError("field size does not match grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw NumericalError("field contains a non-finite value", v);
}

ScalarField ScalarField::sample(const Grid& grid,
                                const std::function<double(const Vec&, double)>& g) {
    std::vector<double> v(grid.size());
    for (std::size_t s = 0; s < grid.spatial_count(); ++s) {
        const Vec x = grid.position(s);
        for (int k = 0; k < grid.time_count(); ++k) v[grid.index(s, k)] = g(x, grid.time(k));
    }
    return ScalarField(grid, std::move(v));
}

ScalarField ScalarField::constant(const Grid& grid, double c) {
    return ScalarField(grid, std::vector<double>(grid.size(), c));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

// ---------------------------------------------------------------------------

double Cylinder::measure() const { return ball_volume(static_cast<int>(center.x.size()), r) * r * r; }

bool cylinder_inside(const Grid& grid, const Cylinder& cyl) {
    const auto& sp = grid.spec();
    if (cyl.center.x.size() != sp.n || !(cyl.r > 0.0)) return false;
    const double slack = kTol * sp.h;
    for (int a = 0; a < sp.n; ++a)
        if (std::abs(cyl.center.x[a]) + cyl.r > sp.R + slack) return false;
    if (cyl.center.t - cyl.r * cyl.r < grid.t_start() - kTol * sp.dt) return false;
    if (cyl.center.t > sp.t_final + kTol * sp.dt) return false;
    return true;
}

void require_inside(const Grid& grid, const Cylinder& cyl) {
    if (!cylinder_inside(grid, cyl)) {
        std::ostringstream os;
        os << "cylinder of radius " << cyl.r << " at t0=" << cyl.center.t << " leaves the grid domain";
        throw DomainError(os.str());
    }
}

double evaluate(const ScalarField& field, const SpaceTimePoint& point) {
    const Grid& g = field.grid();
    const int n = g.dim();
    if (point.x.size() != n) throw DomainError("point dimension does not match grid");
    const int nx = g.nodes_per_axis();
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0, 0, 0};
    for (int a = 0; a < n; ++a) {
        const double u = (point.x[a] + g.spec().R) / g.h();
        if (u < -kTol || u > nx - 1 + kTol) throw DomainError("evaluation point outside grid domain");
        base[a] = std::clamp(static_cast<int>(std::floor(u)), 0, nx - 2);
        frac[a] = std::clamp(u - base[a], 0.0, 1.0);
    }
    const double ut = (point.t - g.t_start()) / g.dt();
    if (ut < -kTol || ut > g.time_count() - 1 + kTol)
        throw DomainError("evaluation time outside grid domain");
    const int k0 = std::clamp(static_cast<int>(std::floor(ut)), 0, g.time_count() - 2);
    const double ft = std::clamp(ut - k0, 0.0, 1.0);

    double acc = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
        std::array<int, 3> idx = base;
        double w = 1.0;
        for (int a = 0; a < n; ++a) {
            const bool up = (corner >> a) & 1;
            idx[a] += up ? 1 : 0;
            w *= up ? frac[a] : 1.0 - frac[a];
        }
        if (w == 0.0) continue;
        const std::size_t s = g.ravel(idx);
        acc += w * ((1.0 - ft) * field.at(s, k0) + (ft > 0.0 ? ft * field.at(s, k0 + 1) : 0.0));
    }
    return acc;
}

ScalarField rescale(const ScalarField& field, const SpaceTimePoint& center, double rho) {
    const auto& sp = field.grid().spec();
    return rescale(field, center, rho, GridSpec{sp.n, 1.0, 1.0, sp.h, sp.dt, 0.0});
}

ScalarField rescale(const ScalarField& field, const SpaceTimePoint& center, double rho,
                    const GridSpec& out) {
    if (!(rho > 0.0)) throw ConfigError("rescale radius must be positive");
    const Grid& src = field.grid();
    Grid dst(out);
    if (out.n != src.dim()) throw ConfigError("rescale output dimension mismatch");
    const auto& sp = src.spec();
    for (int a = 0; a < sp.n; ++a)
        if (std::abs(center.x[a]) + rho * out.R > sp.R + kTol * sp.h)
            throw DomainError("rescaled cylinder leaves the grid domain");
    if (center.t + rho * rho * (out.t_final - out.T) < src.t_start() - kTol * sp.dt ||
        center.t + rho * rho * out.t_final > sp.t_final + kTol * sp.dt)
        throw DomainError("rescaled cylinder leaves the grid time range");

    const double inv = 1.0 / (rho * rho);
    std::vector<double> v(dst.size());
    SpaceTimePoint q{Vec(sp.n), 0.0};
    for (std::size_t s = 0; s < dst.spatial_count(); ++s) {
        q.x = center.x + rho * dst.position(s);
        for (int k = 0; k < dst.time_count(); ++k) {
            q.t = center.t + rho * rho * dst.time(k);
            v[dst.index(s, k)] = evaluate(field, q) * inv;
        }
    }
    return ScalarField(dst, std::move(v));
}

CylinderSamples cylinder_samples(const ScalarField& field, const Cylinder& cyl) {
    const Grid& g = field.grid();
    require_inside(g, cyl);
    if (cyl.r < g.r_min() * (1.0 - kTol)) {
        std::ostringstream os;
        os << "analysis radius " << cyl.r << " is below r_min = 4h = " << g.r_min();
        throw ConfigError(os.str());
    }
    const int n = g.dim();
    const int nx = g.nodes_per_axis();
    const double h = g.h();
    const Vec& x0 = cyl.center.x;

    // Spatial cell box (lower-corner indices) and the node box it touches.
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0}, nlo{0, 0, 0}, ext{1, 1, 1};
    for (int a = 0; a < n; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor((x0[a] - cyl.r + g.spec().R) / h)) - 1);
        hi[a] = std::min(nx - 2, static_cast<int>(std::ceil((x0[a] + cyl.r + g.spec().R) / h)));
        nlo[a] = lo[a];
        ext[a] = hi[a] - lo[a] + 2;
    }
    std::vector<double> ws(static_cast<std::size_t>(ext[0]) * ext[1] * ext[2], 0.0);
    const double corner_w = std::pow(h, n) / static_cast<double>(1 << n);
    const double r2 = cyl.r * cyl.r * (1.0 + 1e-12);
    auto local = [&](const std::array<int, 3>& idx) {
        std::size_t l = 0;
        for (int a = 0; a < 3; ++a) l = l * ext[a] + static_cast<std::size_t>(idx[a] - nlo[a]);
        return l;
    };
    std::array<int, 3> c{lo[0], n > 1 ? lo[1] : 0, n > 2 ? lo[2] : 0};
    for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
        for (c[1] = (n > 1 ? lo[1] : 0); c[1] <= (n > 1 ? hi[1] : 0); ++c[1]) {
            for (c[2] = (n > 2 ? lo[2] : 0); c[2] <= (n > 2 ? hi[2] : 0); ++c[2]) {
                double d2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    const double xc = g.coord(c[a]) + 0.5 * h - x0[a];
                    d2 += xc * xc;
                }
                if (d2 > r2) continue;
                for (int corner = 0; corner < (1 << n); ++corner) {
                    std::array<int, 3> idx = c;
                    for (int a = 0; a < n; ++a) idx[a] += (corner >> a) & 1;
                    ws[local(idx)] += corner_w;
                }
            }
        }
    }

    std::vector<double> wt(static_cast<std::size_t>(g.time_count()), 0.0);
    const double t_lo = cyl.center.t - cyl.r * cyl.r - kTol * g.dt();
    const double t_hi = cyl.center.t + kTol * g.dt();
    int k_first = g.time_count(), k_last = -1;
    for (int k = 0; k + 1 < g.time_count(); ++k) {
        const double tc = g.time(k) + 0.5 * g.dt();
        if (tc < t_lo || tc > t_hi) continue;
        wt[k] += 0.5 * g.dt();
        wt[k + 1] += 0.5 * g.dt();
        k_first = std::min(k_first, k);
        k_last = std::max(k_last, k + 1);
    }

    CylinderSamples out;
    out.cylinder = cyl;
    if (k_last < 0) throw DomainError("cylinder contains no time cells");
    std::array<int, 3> idx{0, 0, 0};
    for (idx[0] = nlo[0]; idx[0] < nlo[0] + ext[0]; ++idx[0]) {
        for (idx[1] = (n > 1 ? nlo[1] : 0); idx[1] < (n > 1 ? nlo[1] + ext[1] : 1); ++idx[1]) {
            for (idx[2] = (n > 2 ? nlo[2] : 0); idx[2] < (n > 2 ? nlo[2] + ext[2] : 1); ++idx[2]) {
                const double w_s = ws[local(idx)];
                if (w_s == 0.0) continue;
                const std::size_t s = g.ravel(idx);
                const Vec y = g.position(s) - x0;
                for (int k = k_first; k <= k_last; ++k) {
                    if (wt[k] == 0.0) continue;
                    const double w = w_s * wt[k];
                    out.samples.push_back({y, g.time(k) - cyl.center.t, w, field.at(s, k), {s, k}});
                    out.total_weight += w;
                }
            }
        }
    }
    return out;
}

double lp_average(const CylinderSamples& q, double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
    double acc = 0.0;
    for (const auto& smp : q.samples) acc += smp.w * std::pow(std::abs(smp.value), p);
    return std::pow(acc / q.total_weight, 1.0 / p);
}

double lp_average(const ScalarField& field, const Cylinder& cyl, double p) {
    return lp_average(cylinder_samples(field, cyl), p);
}

std::vector<NodeRef> parabolic_boundary_nodes(const Grid& grid, const Cylinder& cyl) {
    require_inside(grid, cyl);
    const int n = grid.dim();
    const int nx = grid.nodes_per_axis();
    const double r2 = cyl.r * cyl.r * (1.0 + kTol);
    auto in_ball = [&](const std::array<int, 3>& idx) {
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double d = grid.coord(idx[a]) - cyl.center.x[a];
            d2 += d * d;
        }
        return d2 <= r2;
    };

    std::vector<std::size_t> ball, shell;
    for (std::size_t s = 0; s < grid.spatial_count(); ++s) {
        const auto idx = grid.unravel(s);
        if (!in_ball(idx)) continue;
        ball.push_back(s);
        bool edge = false;
        for (int a = 0; a < n && !edge; ++a) {
            for (int d : {-1, 1}) {
                auto nb = idx;
                nb[a] += d;
                if (nb[a] < 0 || nb[a] >= nx || !in_ball(nb)) {
                    edge = true;
                    break;
                }
            }
        }
        if (edge) shell.push_back(s);
    }

    const double t_lo = cyl.center.t - cyl.r * cyl.r - kTol * grid.dt();
    const double t_hi = cyl.center.t + kTol * grid.dt();
    int k_bottom = -1;
    std::vector<int> slices;
    for (int k = 0; k < grid.time_count(); ++k) {
        const double t = grid.time(k);
        if (t < t_lo || t > t_hi) continue;
        if (k_bottom < 0) k_bottom = k;
        slices.push_back(k);
    }
    std::vector<NodeRef> out;
    if (k_bottom < 0) return out;
    for (std::size_t s : shell)
        for (int k : slices) out.push_back({s, k});
    for (std::size_t s : ball) out.push_back({s, k_bottom});
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace obstlab
