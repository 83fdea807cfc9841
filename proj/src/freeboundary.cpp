#include "obstlab/freeboundary.hpp"

#include "obstlab/io.hpp"
#include "obstlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace obstlab {

double default_extraction_threshold(const Grid& grid) { return 0.25 * grid.h() * grid.h(); }

FreeBoundaryCloud extract_free_boundary(const ScalarField& u, std::optional<double> eps_pos) {
    const Grid& g = u.grid();
    const double eps = eps_pos.value_or(default_extraction_threshold(g));
    if (!(eps > 0.0)) throw ConfigError("extract_free_boundary: eps_pos must be positive");
    const int n = g.dim();
    const int nx = g.nodes_per_axis();
    const double h = g.h();
    FreeBoundaryCloud cloud;
    cloud.n = n;

    for (int k = 1; k < g.time_count(); ++k) {
        for (int axis = 0; axis < n; ++axis) {
            const std::size_t st = g.stride(axis);
            for (std::size_t s = 0; s < g.spatial_count(); ++s) {
                const auto idx = g.unravel(s);
                if (idx[axis] + 1 >= nx) continue;
                const std::size_t s1 = s + st;
                const bool p0 = u.at(s, k) > eps, p1 = u.at(s1, k) > eps;
                if (p0 == p1) continue;
                // z = zero-side node, p = positive node, q = next node beyond p.
                const std::size_t z = p0 ? s1 : s, p = p0 ? s : s1;
                const int dir = p0 ? -1 : 1;  // from z towards p along the axis
                const int ip = idx[axis] + (p0 ? 0 : 1);
                const double xp = g.coord(ip), xz = xp - dir * h;
                const double a = std::sqrt(u.at(p, k));
                double root;
                const int iq = ip + dir;
                const bool has_q = iq >= 0 && iq < nx;
                const double b = has_q ? std::sqrt(std::max(0.0, u.at(dir > 0 ? p + st : p - st, k))) : 0.0;
                if (has_q && b > a) {
                    root = xp - dir * h * a / (b - a);
                } else {
                    const double az = std::sqrt(std::max(0.0, u.at(z, k))), ae = std::sqrt(eps);
                    const double th = a > az ? (ae - az) / (a - az) : 0.5;
                    root = xz + dir * h * std::clamp(th, 0.0, 1.0);
                }
                // u(z) <= eps still allows the front up to sqrt(2 eps) past z
                const double xfar = xz - dir * std::min(h, std::sqrt(2.0 * eps));
                root = std::clamp(root, std::min(xfar, xp), std::max(xfar, xp));
                FreeBoundaryPoint pt;
                pt.t = g.time(k);
                pt.time_index = k;
                pt.x = g.position(p);
                pt.x[axis] = root;
                pt.axis = axis;
                pt.positive_node = p;
                pt.zero_node = z;
                cloud.points.push_back(std::move(pt));
            }
        }
    }
    return cloud;
}

FreeBoundaryCloud classify_points(const ScalarField& u, const ScalarField& f, const FreeBoundaryCloud& cloud,
                                  const CheckOptions& opts, std::size_t stride) {
    if (stride == 0) throw ConfigError("classify_points: stride must be positive");
    FreeBoundaryCloud out = cloud;
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < out.points.size(); i += stride) picked.push_back(i);
    parallel_for(picked.size(), [&](std::size_t j) {
        auto& pt = out.points[picked[j]];
        CheckOptions o = opts;
        o.center = {pt.x, pt.t};
        try {
            const auto c = classify_regular(u, f, o);
            if (!c.applicable) return;
            pt.classified = true;
            pt.regular = c.regular;
            pt.normal = c.nu;
            pt.m_reg = c.m_r0;
        } catch (const DomainError&) {
            // cylinder leaves the grid: stays unclassified
        }
    });
    return out;
}

GraphDiagnostic graph_diagnostic(const FreeBoundaryCloud& cloud, const Grid& grid, int axis) {
    const int n = grid.dim();
    if (axis < 0 || axis >= n) throw ConfigError("graph_diagnostic: axis out of range");
    using Key = std::array<int, 4>;  // transverse node indices, then time index
    std::map<Key, double> graph;
    std::map<Key, int> multiplicity;
    for (const auto& pt : cloud.points) {
        if (pt.axis != axis) continue;
        auto idx = grid.unravel(pt.positive_node);
        Key key{0, 0, 0, pt.time_index};
        for (int a = 0, j = 0; a < n; ++a)
            if (a != axis) key[j++] = idx[a];
        graph[key] = pt.x[axis];
        ++multiplicity[key];
    }
    for (const auto& [key, m] : multiplicity)
        if (m > 1) graph.erase(key);  // several crossings on one line: not a graph there

    const int nt = n - 1;
    const double h = grid.h(), dt = grid.dt();
    auto lookup = [&](Key k) -> const double* {
        const auto it = graph.find(k);
        return it == graph.end() ? nullptr : &it->second;
    };

    std::map<int, std::vector<double>> bins;
    std::map<int, double> bin_scale;
    const double base = std::sqrt(dt);
    for (const auto& [key, g0] : graph) {
        // Central differences for D_{x'} g; skip points without both neighbours.
        std::array<double, 3> grad{0, 0, 0};
        bool ok = true;
        for (int j = 0; j < nt && ok; ++j) {
            Key lo = key, hi = key;
            --lo[j];
            ++hi[j];
            const double* gl = lookup(lo);
            const double* gh = lookup(hi);
            if (!gl || !gh) ok = false;
            else grad[j] = (*gh - *gl) / (2.0 * h);
        }
        if (!ok) continue;
        auto record = [&](const Key& other, const std::array<double, 3>& hp, double k) {
            const double* go = lookup(other);
            if (!go) return;
            double lin = 0.0, hh = 0.0;
            for (int j = 0; j < nt; ++j) {
                lin += hp[j] * grad[j];
                hh += hp[j] * hp[j];
            }
            const double delta = std::sqrt(hh + std::abs(k));
            if (delta <= 0.0) return;
            const double ratio = std::abs(*go - g0 - lin) / delta;
            const int b = static_cast<int>(std::floor(std::log2(delta / base)));
            bins[b].push_back(ratio);
            bin_scale.try_emplace(b, base * std::pow(2.0, b + 0.5));
        };
        for (int e = 0; (1 << e) < grid.time_count(); ++e) {
            const int step = 1 << e;
            for (int sgn : {-1, 1}) {
                Key other = key;
                other[3] += sgn * step;
                record(other, {0, 0, 0}, sgn * step * dt);
            }
        }
        for (int j = 0; j < nt; ++j) {
            for (int e = 0; (1 << e) < grid.nodes_per_axis(); ++e) {
                const int step = 1 << e;
                for (int sgn : {-1, 1}) {
                    Key other = key;
                    other[j] += sgn * step;
                    std::array<double, 3> hp{0, 0, 0};
                    hp[j] = sgn * step * h;
                    record(other, hp, 0.0);
                }
            }
        }
    }

    GraphDiagnostic out;
    out.axis = axis;
    for (const auto& [b, ratios] : bins) {
        double acc = 0.0, mx = 0.0;
        for (double r : ratios) {
            acc += r;
            mx = std::max(mx, r);
        }
        out.scales.push_back(bin_scale[b]);
        out.mean_ratio.push_back(acc / static_cast<double>(ratios.size()));
        out.max_ratio.push_back(mx);
        out.counts.push_back(ratios.size());
    }
    out.slope = loglog_slope(out.scales, out.mean_ratio);
    return out;
}

std::string cloud_csv(const FreeBoundaryCloud& cloud) {
    std::string s = "t";
    for (int a = 1; a <= cloud.n; ++a) s += ",x" + std::to_string(a);
    s += ",regular";
    for (int a = 1; a <= cloud.n; ++a) s += ",nu" + std::to_string(a);
    s += "\n";
    for (const auto& pt : cloud.points) {
        s += format_double(pt.t);
        for (int a = 0; a < cloud.n; ++a) s += "," + format_double(pt.x[a]);
        s += pt.regular ? ",1" : ",0";
        for (int a = 0; a < cloud.n; ++a) s += "," + (pt.classified ? format_double(pt.normal[a]) : std::string());
        s += "\n";
    }
    return s;
}

void write_cloud_csv(const std::filesystem::path& path, const FreeBoundaryCloud& cloud) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    os << cloud_csv(cloud);
}

}  // namespace obstlab
