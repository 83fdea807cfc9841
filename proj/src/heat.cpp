#include "obstlab/heat.hpp"

#include "stencil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>

namespace obstlab {

namespace detail {

Stencil::Stencil(const Grid& grid)
    : n(grid.dim()), inv_h2(1.0 / (grid.h() * grid.h())), is_interior(grid.spatial_count(), 0) {
    for (std::size_t s = 0; s < grid.spatial_count(); ++s) {
        if (grid.on_lateral_boundary(s)) continue;
        is_interior[s] = 1;
        interior.push_back(s);
        for (int a = 0; a < n; ++a) {
            neighbours.push_back(s - grid.stride(a));
            neighbours.push_back(s + grid.stride(a));
        }
    }
}

std::vector<double> slice(const ScalarField& field, int k) {
    const Grid& g = field.grid();
    std::vector<double> v(g.spatial_count());
    for (std::size_t s = 0; s < v.size(); ++s) v[s] = field.at(s, k);
    return v;
}

}  // namespace detail

Poly2 Poly2::zero(int n) {
    Poly2 p;
    p.b = Vec::Zero(n);
    p.c = Mat::Zero(n, n);
    return p;
}

Poly2 Poly2::pstar(int n) {
    Poly2 p = zero(n);
    p.c = Mat::Identity(n, n) / static_cast<double>(n);
    return p;
}

double Poly2::operator()(const Vec& x, double t) const {
    return a + b.dot(x) + 0.5 * x.dot(c * x) + m * t;
}

double Poly2::coefficient_size() const {
    return std::abs(a) + b.cwiseAbs().sum() + c.cwiseAbs().sum() + std::abs(m);
}

bool heat_defined(const Grid& grid, std::size_t s, int k) noexcept {
    return k >= 1 && k < grid.time_count() && !grid.on_lateral_boundary(s);
}

double heat_at(const ScalarField& u, std::size_t s, int k) {
    const Grid& g = u.grid();
    if (!heat_defined(g, s, k)) throw DomainError("heat operator undefined at boundary or initial node");
    double lap = -2.0 * g.dim() * u.at(s, k);
    for (int a = 0; a < g.dim(); ++a) lap += u.at(s - g.stride(a), k) + u.at(s + g.stride(a), k);
    lap /= g.h() * g.h();
    return lap - (u.at(s, k) - u.at(s, k - 1)) / g.dt();
}

ScalarField apply_heat(const ScalarField& u) {
    const Grid& g = u.grid();
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t s = 0; s < g.spatial_count(); ++s) {
        if (g.on_lateral_boundary(s)) continue;
        for (int k = 1; k < g.time_count(); ++k) out[g.index(s, k)] = heat_at(u, s, k);
    }
    return ScalarField(g, std::move(out));
}

HeatSolution solve_heat(const ScalarField& f, const ScalarField& data, const HeatOptions& opts) {
    const Grid& g = f.grid();
    if (!g.same_shape(data.grid())) throw ConfigError("solve_heat: f and data grids differ");
    const detail::Stencil st(g);
    const std::size_t ni = st.interior.size();
    const double inv_dt = 1.0 / g.dt();
    const double diag = inv_dt + 2.0 * st.n * st.inv_h2;

    std::vector<double> values(g.size());
    std::vector<double> cur = detail::slice(data, 0);
    for (std::size_t s = 0; s < cur.size(); ++s) values[g.index(s, 0)] = cur[s];

    std::vector<double> q(ni), r(ni), z(ni), p(ni), ap(ni);
    std::vector<double> dir(g.spatial_count(), 0.0);  // search direction, zero on the boundary
    auto apply_a = [&](const std::vector<double>& full, std::vector<double>& outv) {
        for (std::size_t i = 0; i < ni; ++i) outv[i] = full[st.interior[i]] * inv_dt - st.laplacian(full, i);
    };

    HeatSolution result{ScalarField::constant(g, 0.0), 0.0, 0};
    for (int k = 1; k < g.time_count(); ++k) {
        std::vector<double> prev = cur;
        for (std::size_t s = 0; s < cur.size(); ++s)
            if (!st.is_interior[s]) cur[s] = data.at(s, k);
        for (std::size_t i = 0; i < ni; ++i) q[i] = prev[st.interior[i]] * inv_dt - f.at(st.interior[i], k);

        long it = 0;
        double res_inf = 0.0;
        // Restart loop: the recursive CG residual is re-synchronised with the true one.
        while (true) {
            apply_a(cur, r);
            res_inf = 0.0;
            for (std::size_t i = 0; i < ni; ++i) {
                r[i] = q[i] - r[i];
                res_inf = std::max(res_inf, std::abs(r[i]));
            }
            if (res_inf <= opts.tolerance || it >= opts.max_iterations) break;
            double rz = 0.0;
            for (std::size_t i = 0; i < ni; ++i) {
                z[i] = r[i] / diag;
                p[i] = z[i];
                rz += r[i] * z[i];
            }
            for (; it < opts.max_iterations; ++it) {
                for (std::size_t i = 0; i < ni; ++i) dir[st.interior[i]] = p[i];
                apply_a(dir, ap);
                double pap = 0.0;
                for (std::size_t i = 0; i < ni; ++i) pap += p[i] * ap[i];
                if (!(pap > 0.0)) break;
                const double alpha = rz / pap;
                double rinf = 0.0, rz_new = 0.0;
                for (std::size_t i = 0; i < ni; ++i) {
                    cur[st.interior[i]] += alpha * p[i];
                    r[i] -= alpha * ap[i];
                    rinf = std::max(rinf, std::abs(r[i]));
                    z[i] = r[i] / diag;
                    rz_new += r[i] * z[i];
                }
                if (rinf <= 0.25 * opts.tolerance) { ++it; break; }
                const double beta = rz_new / rz;
                rz = rz_new;
                for (std::size_t i = 0; i < ni; ++i) p[i] = z[i] + beta * p[i];
            }
        }
        if (res_inf > opts.tolerance) {
            std::ostringstream os;
            os << "solve_heat: step " << k << " did not converge (residual " << res_inf << ")";
            throw NumericalError(os.str(), res_inf, k);
        }
        result.iterations += it;
        result.max_residual = std::max(result.max_residual, res_inf);
        for (std::size_t s = 0; s < cur.size(); ++s) values[g.index(s, k)] = cur[s];
    }
    result.u = ScalarField(g, std::move(values));
    return result;
}

// ---------------------------------------------------------------------------
// Manufactured cases

namespace {

struct CaseInfo {
    std::string_view id;
    bool closed_form;
    std::set<std::string> keys;
    CaseParams defaults;
};

const std::vector<CaseInfo>& case_table() {
    static const std::vector<CaseInfo> table = {
        {"caloric-poly", true,
         {"a", "b1", "b2", "b3", "c11", "c22", "c33", "c12", "c13", "c23", "m"},
         {{"a", 0.0}, {"c11", 2.0}, {"c22", 2.0}, {"c33", 2.0}}},
        {"pstar", true, {"kappa"}, {{"kappa", 1.0}}},
        {"hoelder-rhs", false, {"kappa", "beta"}, {{"kappa", 1.0}, {"beta", 0.5}}},
        {"dini-rhs", false, {"kappa"}, {{"kappa", 1.0}}},
        {"nondini-rhs", false, {"kappa"}, {{"kappa", 1.0}}},
        {"traveling-wave", true, {"a"}, {{"a", 0.3}}},
        {"half-space", true, {"kappa", "theta", "shift"}, {{"kappa", 1.0}, {"theta", 0.0}, {"shift", 0.0}}},
        {"shell-rhs", false, {"kappa"}, {{"kappa", 1.0}}},
        {"affine-rhs", false, {"slope"}, {{"slope", 0.25}}},
    };
    return table;
}

const CaseInfo& lookup(std::string_view id) {
    for (const auto& c : case_table())
        if (c.id == id) return c;
    throw ConfigError("unknown case id '" + std::string(id) + "'");
}

CaseParams effective_params(const CaseInfo& info, const CaseParams& given) {
    CaseParams out = info.defaults;
    for (const auto& [k, v] : given) {
        if (!info.keys.count(k))
            throw ConfigError("case '" + std::string(info.id) + "' has no parameter '" + k + "'");
        out[k] = v;
    }
    return out;
}

Poly2 caloric_poly(int n, CaseParams& prm) {
    Poly2 p = Poly2::zero(n);
    const char* bk[] = {"b1", "b2", "b3"};
    const char* ck[3][3] = {{"c11", "c12", "c13"}, {"c12", "c22", "c23"}, {"c13", "c23", "c33"}};
    p.a = prm["a"];
    for (int i = 0; i < n; ++i) {
        p.b[i] = prm.count(bk[i]) ? prm[bk[i]] : 0.0;
        for (int j = 0; j < n; ++j) p.c(i, j) = prm.count(ck[i][j]) ? prm[ck[i][j]] : 0.0;
    }
    if (prm.count("m")) {
        p.m = prm["m"];
        if (!p.is_caloric(1e-12 * (1.0 + std::abs(p.m))))
            throw ConfigError("caloric-poly: m must equal tr(c)");
    } else {
        p.m = p.c.trace();
        prm["m"] = p.m;
    }
    // Drop the unused higher-dimensional defaults from the record.
    for (auto it = prm.begin(); it != prm.end();) {
        const std::string& k = it->first;
        const bool unused = (k.size() == 3 && k[0] == 'c' && (k[1] - '0' > n || k[2] - '0' > n)) ||
                            (k.size() == 2 && k[0] == 'b' && k[1] - '0' > n);
        it = unused ? prm.erase(it) : std::next(it);
    }
    return p;
}

// Radial profile g with g(0) = 0, linear below the mollification radius.
double mollified(double r, double h, double (*g)(double)) {
    if (r >= h) return g(r);
    return g(h) * r / h;
}

double inv_log2(double r) {
    const double l = std::log(M_E / r);
    return 1.0 / (l * l);
}
double inv_log(double r) { return 1.0 / std::log(M_E / r); }

Vec half_space_normal(int n, double theta) {
    Vec nu = Vec::Zero(n);
    nu[0] = std::cos(theta);
    if (n > 1) nu[1] = std::sin(theta);
    else if (theta != 0.0) throw ConfigError("half-space: theta requires n >= 2");
    return nu;
}

ScalarField rhs_for(const Grid& grid, const CaseInfo& info, CaseParams& prm, double& moll) {
    const double h = grid.h();
    const int n = grid.dim();
    moll = 0.0;
    if (info.id == "caloric-poly") return ScalarField::constant(grid, 0.0);
    if (info.id == "pstar") return ScalarField::constant(grid, prm["kappa"]);
    if (info.id == "hoelder-rhs") {
        const double kappa = prm["kappa"], beta = prm["beta"];
        if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("hoelder-rhs: beta must lie in (0, 1]");
        return ScalarField::sample(grid, [=](const Vec& x, double) { return kappa * std::pow(x.norm(), beta); });
    }
    if (info.id == "dini-rhs" || info.id == "nondini-rhs") {
        const double kappa = prm["kappa"];
        moll = h;
        auto g = info.id == "dini-rhs" ? &inv_log2 : &inv_log;
        return ScalarField::sample(grid, [=](const Vec& x, double) { return kappa * mollified(x.norm(), h, g); });
    }
    if (info.id == "traveling-wave") {
        const double a = prm["a"];
        return ScalarField::sample(grid, [=](const Vec& x, double t) { return 1.0 + a * (x[0] - a * t); });
    }
    if (info.id == "half-space") return ScalarField::constant(grid, prm["kappa"]);
    if (info.id == "shell-rhs") {
        const double kappa = prm["kappa"];
        moll = h;
        return ScalarField::sample(grid, [=](const Vec& x, double) {
            const double r = x.norm();
            if (r < h) return 0.0;
            return std::sin(2.0 * M_PI * std::log2(r)) >= 0.0 ? kappa : -kappa;
        });
    }
    if (info.id == "affine-rhs") {
        const double slope = prm["slope"];
        return ScalarField::sample(grid, [=](const Vec& x, double) { return 1.0 + slope * x[0]; });
    }
    (void)n;
    throw ConfigError("unhandled case id");
}

}  // namespace

ScalarField manufacture_rhs(const Grid& grid, std::string_view case_id, const CaseParams& params) {
    const CaseInfo& info = lookup(case_id);
    CaseParams prm = effective_params(info, params);
    double moll = 0.0;
    return rhs_for(grid, info, prm, moll);
}

ManufacturedCase manufacture(const Grid& grid, std::string_view case_id, const CaseParams& params) {
    const CaseInfo& info = lookup(case_id);
    CaseParams prm = effective_params(info, params);
    const int n = grid.dim();
    ManufactureMetadata meta;
    meta.case_id = std::string(case_id);

    std::optional<Poly2> poly;
    if (info.id == "caloric-poly") poly = caloric_poly(n, prm);
    double moll = 0.0;
    ScalarField f = rhs_for(grid, info, prm, moll);
    meta.mollification_radius = moll;

    std::optional<ScalarField> u;
    if (info.closed_form) {
        meta.u_source = "closed-form";
        if (info.id == "caloric-poly") {
            u = ScalarField::sample(grid, [&](const Vec& x, double t) { return (*poly)(x, t); });
        } else if (info.id == "pstar") {
            const double kappa = prm["kappa"];
            u = ScalarField::sample(grid, [=](const Vec& x, double) { return kappa * x.squaredNorm() / (2.0 * n); });
        } else if (info.id == "traveling-wave") {
            const double a = prm["a"];
            u = ScalarField::sample(grid, [=](const Vec& x, double t) {
                const double d = std::max(0.0, x[0] - a * t);
                return 0.5 * d * d;
            });
        } else {  // half-space
            const double kappa = prm["kappa"], shift = prm["shift"];
            const Vec nu = half_space_normal(n, prm["theta"]);
            u = ScalarField::sample(grid, [=](const Vec& x, double) {
                const double d = std::max(0.0, x.dot(nu) - shift);
                return 0.5 * kappa * d * d;
            });
        }
    } else {
        meta.u_source = "solve_heat";
        HeatSolution sol = solve_heat(f, ScalarField::constant(grid, 0.0));
        meta.solve_residual = sol.max_residual;
        u = std::move(sol.u);
    }
    meta.params = prm;
    return {std::move(*u), std::move(f), std::move(meta)};
}

std::string metadata_record(const ManufactureMetadata& meta) {
    nlohmann::ordered_json j;
    j["case"] = meta.case_id;
    j["params"] = meta.params;
    j["mollification_radius"] = meta.mollification_radius;
    j["u_source"] = meta.u_source;
    j["solve_residual"] = meta.solve_residual;
    return j.dump(2);
}

}  // namespace obstlab
