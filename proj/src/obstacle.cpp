#include "obstlab/obstacle.hpp"

#include "stencil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace obstlab {

namespace {

std::vector<std::size_t> sweep_order(const Grid& g, const detail::Stencil& st, SweepOrder order) {
    std::vector<std::size_t> idx(st.interior.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (order == SweepOrder::red_black) {
        auto colour = [&](std::size_t i) {
            const auto m = g.unravel(st.interior[i]);
            return (m[0] + m[1] + m[2]) % 2;
        };
        std::stable_partition(idx.begin(), idx.end(), [&](std::size_t i) { return colour(i) == 0; });
    }
    return idx;
}

// |min(A u - q, u)| maximised over the interior.
double step_residual(const detail::Stencil& st, const std::vector<double>& u, const std::vector<double>& q,
                     double diag) {
    double res = 0.0;
    for (std::size_t i = 0; i < st.interior.size(); ++i) {
        const double ui = u[st.interior[i]];
        double nb = 0.0;
        const std::size_t* p = &st.neighbours[i * 2 * st.n];
        for (int j = 0; j < 2 * st.n; ++j) nb += u[p[j]];
        const double w = diag * ui - st.inv_h2 * nb - q[i];
        res = std::max(res, std::abs(std::min(w, ui)));
    }
    return res;
}

}  // namespace

ObstacleResult solve_obstacle(const ScalarField& f, const ScalarField& data, const LcpOptions& opts) {
    const Grid& g = f.grid();
    if (!g.same_shape(data.grid())) throw ConfigError("solve_obstacle: f and data grids differ");
    if (!(opts.theta > 0.0 && opts.theta < 2.0)) throw ConfigError("solve_obstacle: theta must lie in (0, 2)");
    const detail::Stencil st(g);
    for (std::size_t s = 0; s < g.spatial_count(); ++s) {
        for (int k = 0; k < g.time_count(); ++k) {
            if (k > 0 && st.is_interior[s]) continue;
            if (data.at(s, k) < 0.0) throw ConfigError("solve_obstacle: boundary/initial data must be nonnegative");
        }
    }

    const std::size_t ni = st.interior.size();
    const double inv_dt = 1.0 / g.dt();
    const double diag = inv_dt + 2.0 * st.n * st.inv_h2;
    const auto order = sweep_order(g, st, opts.order);

    std::vector<double> values(g.size());
    std::vector<double> cur = detail::slice(data, 0);
    for (std::size_t s = 0; s < cur.size(); ++s) values[g.index(s, 0)] = cur[s];

    ObstacleResult out{ScalarField::constant(g, 0.0), {}, {}, {}};
    std::vector<double> q(ni);
    double worst_negative_f = 0.0;
    for (int k = 1; k < g.time_count(); ++k) {
        for (std::size_t s = 0; s < cur.size(); ++s)
            if (!st.is_interior[s]) cur[s] = data.at(s, k);
        for (std::size_t i = 0; i < ni; ++i) q[i] = cur[st.interior[i]] * inv_dt - f.at(st.interior[i], k);

        double res = step_residual(st, cur, q, diag);
        long sweeps = 0;
        while (res > opts.tolerance && sweeps < opts.max_sweeps) {
            for (std::size_t i : order) {
                const std::size_t s = st.interior[i];
                double nb = 0.0;
                const std::size_t* p = &st.neighbours[i * 2 * st.n];
                for (int j = 0; j < 2 * st.n; ++j) nb += cur[p[j]];
                const double gs = (q[i] + st.inv_h2 * nb) / diag;
                cur[s] = std::max(0.0, cur[s] + opts.theta * (gs - cur[s]));
            }
            ++sweeps;
            res = step_residual(st, cur, q, diag);
        }
        if (res > opts.tolerance) {
            std::ostringstream os;
            os << "solve_obstacle: PSOR did not converge at step " << k << " (residual " << res << ")";
            throw NumericalError(os.str(), res, k);
        }
        out.residual_history.push_back(res);
        out.sweeps.push_back(sweeps);
        for (std::size_t i = 0; i < ni; ++i) {
            const std::size_t s = st.interior[i];
            if (cur[s] > 0.0) worst_negative_f = std::min(worst_negative_f, f.at(s, k));
        }
        for (std::size_t s = 0; s < cur.size(); ++s) values[g.index(s, k)] = cur[s];
    }
    if (worst_negative_f < 0.0) {
        std::ostringstream os;
        os << "f is negative on the positivity set (min " << worst_negative_f
           << "); the complementarity form assumes f >= 0";
        out.warnings.push_back(os.str());
    }
    out.u = ScalarField(g, std::move(values));
    return out;
}

double lcp_residual(const ScalarField& u, const ScalarField& f) {
    const Grid& g = u.grid();
    if (!g.same_shape(f.grid())) throw ConfigError("lcp_residual: grids differ");
    const detail::Stencil st(g);
    const double inv_dt = 1.0 / g.dt();
    const double diag = inv_dt + 2.0 * st.n * st.inv_h2;
    std::vector<double> q(st.interior.size());
    double worst = 0.0;
    std::vector<double> prev = detail::slice(u, 0);
    for (int k = 1; k < g.time_count(); ++k) {
        std::vector<double> cur = detail::slice(u, k);
        for (std::size_t i = 0; i < q.size(); ++i) q[i] = prev[st.interior[i]] * inv_dt - f.at(st.interior[i], k);
        worst = std::max(worst, step_residual(st, cur, q, diag));
        prev = std::move(cur);
    }
    return worst;
}

std::vector<bool> contact_set(const ScalarField& u, double eps_pos) {
    if (!(eps_pos > 0.0)) throw ConfigError("contact_set: eps_pos must be positive");
    std::vector<bool> mask(u.values().size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = u.values()[i] <= eps_pos;
    return mask;
}

std::string run_manifest(const ObstacleResult& result, const LcpOptions& opts) {
    nlohmann::ordered_json j;
    j["solver"] = "projected-sor";
    j["theta"] = opts.theta;
    j["tolerance"] = opts.tolerance;
    j["max_sweeps"] = opts.max_sweeps;
    j["order"] = opts.order == SweepOrder::red_black ? "red-black" : "lexicographic";
    j["max_residual"] = result.residual_history.empty()
                            ? 0.0
                            : *std::max_element(result.residual_history.begin(), result.residual_history.end());
    j["residual_history"] = result.residual_history;
    j["sweeps"] = result.sweeps;
    j["warnings"] = result.warnings;
    return j.dump(2);
}

}  // namespace obstlab
