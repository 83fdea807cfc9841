// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "obstlab/cli.hpp"
#include "obstlab/freeboundary.hpp"
#include "obstlab/heat.hpp"
#include "obstlab/obstacle.hpp"
#include "obstlab/regularity.hpp"
#include "obstlab/verify.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace obstlab;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kExactSlack = 2.0;           // sup error <= 2 (h^2 + dt)
constexpr double kRefineFactor = 3.0;         // error ratio under halving
constexpr double kRuntimeBase = 30.0;         // seconds, n = 2 base resolution
constexpr double kNormalTol = 1e-3;
constexpr double kRegSlope = 1.0, kRegSlopeTol = 0.2;
constexpr double kIdentityTol = 1e-12;
constexpr double kOracleTol = 1e-8;
constexpr double kGoldenTol = 1e-6;
constexpr int kOracleInstances = 24;
constexpr double kTaylorSlopeTol = 0.15;
constexpr double kDiniBand = 3.0;
constexpr double kQuadTol = 1e-3;

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sup_error(const ScalarField& a, const ScalarField& b) {
    double e = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) e = std::max(e, std::abs(a.values()[i] - b.values()[i]));
    return e;
}

bool nondecreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1]) return false;
    return true;
}

SpaceTimePoint at(std::initializer_list<double> x, double t) {
    SpaceTimePoint p{Vec(static_cast<Eigen::Index>(x.size())), t};
    int i = 0;
    for (double v : x) p.x[i++] = v;
    return p;
}

// Obstacle solve with f = 1 and the half-space profile as data.
struct HalfSpaceRun {
    double error;
    double seconds;
    double min_u;
};

HalfSpaceRun half_space_run(double h, double dt, double theta) {
    const Grid g(GridSpec{2, 1.0, 0.5, h, dt, 0.0});
    const auto mc = manufacture(g, "half-space", {{"theta", theta}});
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = solve_obstacle(ScalarField::constant(g, 1.0), mc.u);
    return {sup_error(res.u, mc.u), seconds_since(t0), res.u.min()};
}

Outcome criterion1() {
    Outcome o;
    const double h = 0.05, dt = 0.00125;
    const auto base = half_space_run(h, dt, 0.0);
    const double bound = kExactSlack * (h * h + dt);
    o.require(base.error <= bound, "aligned error " + fmt(base.error) + " <= " + fmt(bound));
    o.note("aligned profile error " + fmt(base.error) + " (bound " + fmt(bound) + ")");

    // The axis-aligned profile is reproduced to rounding, so the refinement rate is
    // measured on a rotated profile whose interface cuts the mesh.
    const double theta = 0.3;
    const auto coarse = half_space_run(h, dt, theta);
    const auto fine = half_space_run(h / 2, dt / 2, theta);
    const double ratio = coarse.error / fine.error;
    const double runtime = std::max(base.seconds, coarse.seconds);
    o.require(runtime <= kRuntimeBase, "runtime " + fmt(runtime) + " s <= 30 s");
    o.require(coarse.error <= bound, "rotated error " + fmt(coarse.error) + " <= " + fmt(bound));
    o.require(fine.error <= kExactSlack * (h * h / 4 + dt / 2), "rotated refined error within bound");
    o.require(ratio >= kRefineFactor, "refinement ratio " + fmt(ratio) + " >= 3");
    o.note("rotated errors " + fmt(coarse.error) + " -> " + fmt(fine.error) + " (ratio " + fmt(ratio) + "), base solve " + fmt(runtime) + " s");
    return o;
}

Outcome criterion2() {
    Outcome o;
    const double a = 0.3;
    // Free boundary location and normal: obstacle solve on the n = 2 base grid.
    const Grid g2(GridSpec{2, 1.0, 0.5, 0.05, 0.00125, 0.0});
    const auto tw = manufacture(g2, "traveling-wave", {{"a", a}});
    const auto sol = solve_obstacle(tw.f, tw.u);
    const auto cloud = extract_free_boundary(sol.u);
    double worst = 0.0;
    std::vector<int> per_slice(g2.time_count(), 0);
    for (const auto& pt : cloud.points) {
        if (pt.axis != 0) continue;
        worst = std::max(worst, std::abs(pt.x[0] - a * pt.t));
        ++per_slice[pt.time_index];
    }
    int missing = 0;
    for (int k = 1; k < g2.time_count(); ++k) missing += per_slice[k] == 0 ? 1 : 0;
    o.require(missing == 0, "free boundary found on every slice (" + std::to_string(missing) + " missing)");
    o.require(worst <= g2.h(), "location error " + fmt(worst) + " <= h");
    o.note("max location error " + fmt(worst) + " (h = " + fmt(g2.h()) + ")");

    CheckOptions opts;
    opts.center = at({0.0, 0.0}, 0.0);
    opts.ladder = log_ladder(4 * g2.h(), 0.25, 24);
    const auto cls = classify_regular(sol.u, tw.f, opts);
    const double nerr = (cls.nu - Vec::Unit(2, 0)).norm();
    o.require(cls.regular, "origin classified regular");
    o.require(nerr <= kNormalTol, "normal error " + fmt(nerr) + " <= 1e-3");
    o.note("nu error " + fmt(nerr) + ", M_reg(r0) " + fmt(cls.m_r0));

    // n_reg slope: obstacle solve on a fine n = 1 grid.
    const Grid g1(GridSpec{1, 1.0, 1.0, 0.01, 1e-4, 0.0});
    const auto tw1 = manufacture(g1, "traveling-wave", {{"a", a}});
    const auto sol1 = solve_obstacle(tw1.f, tw1.u);
    const auto radii = log_ladder(8 * g1.h(), 0.4, 24);
    const auto curve = n_reg_curve(sol1.u, at({0.0}, 0.0), 2.0, radii, 1.0);
    const double slope = oracle::loglog_fit(curve.radii, curve.values, 0, curve.size() - 1);
    o.require(std::abs(slope - kRegSlope) <= kRegSlopeTol, "n_reg slope " + fmt(slope) + " in 1 +- 0.2");
    o.note("n_reg slope " + fmt(slope));
    return o;
}

Outcome criterion3() {
    Outcome o;
    int checked = 0;

    // u >= 0 on obstacle outputs.
    const Grid g1(GridSpec{1, 1.0, 0.5, 0.025, 0.000625, 0.0});
    for (const char* id : {"half-space", "traveling-wave", "pstar"}) {
        const auto mc = manufacture(g1, id);
        const auto sol = solve_obstacle(mc.f, mc.u);
        o.require(sol.u.min() >= 0.0, std::string("u >= 0 for ") + id);
        ++checked;
    }

    // N~ <= N^ on the full ladder.
    const Grid gh(GridSpec{1, 0.5, 0.25, 0.01, 1e-4, 0.0});
    const auto hold = manufacture(gh, "hoelder-rhs", {{"beta", 0.5}});
    const auto tw = manufacture(gh, "traveling-wave");
    const auto ladder = log_ladder(4 * gh.h(), 0.25, 24);
    const auto origin1 = at({0.0}, 0.0);
    for (const auto* mc : {&hold, &tw}) {
        const auto nt = n_tilde_curve(mc->u, origin1, 2.0, ladder);
        const auto nh = n_hat_curve(mc->u, mc->f, origin1, 2.0, ladder);
        for (std::size_t i = 0; i < nt.size(); ++i) {
            o.require(nt.values[i] <= nh.values[i] * (1 + 1e-12) + 1e-14, "N~ <= N^ at r = " + fmt(nt.radii[i]));
            ++checked;
        }
        const auto s = sigma(mc->f, origin1, 2.0, ladder);
        const auto m = m_reg(mc->u, origin1, 2.0, ladder, std::max(evaluate(mc->f, origin1), 1e-300));
        o.require(nondecreasing(s.values) && nondecreasing(m.values), "sigma and M_reg nondecreasing");
        checked += 2;
    }

    // Non-degeneracy with lambda = 0 (f constant).
    Calibration cal;
    auto nondeg_sweep = [&](const ScalarField& u, const ScalarField& f, double d) {
        const Grid& g = u.grid();
        for (std::size_t s = 0; s < g.spatial_count(); s += 3) {
            for (int k = g.time_count() - 1; k >= 0; k -= g.time_count() / 4) {
                const SpaceTimePoint p{g.position(s), g.time(k)};
                if (!cylinder_inside(g, Cylinder{p, d})) continue;
                const auto rep = check_nondegeneracy(u, f, p, d, cal);
                if (rep.status == CheckStatus::not_applicable) continue;
                o.require(rep.status == CheckStatus::pass, "nondegeneracy at a checked point");
                ++checked;
            }
        }
    };
    const Grid gp1(GridSpec{1, 1.0, 1.0, 0.05, 0.0025, 0.0});
    const Grid gp2(GridSpec{2, 1.0, 0.5, 0.05, 0.00125, 0.0});
    for (double d : {0.1, 0.2}) {
        const auto p1 = manufacture(gp1, "pstar", {{"kappa", 1.0}});
        nondeg_sweep(p1.u, p1.f, d);
        const auto p2 = manufacture(gp2, "pstar", {{"kappa", 2.5}});
        nondeg_sweep(p2.u, p2.f, d);
        const auto hs = manufacture(g1, "half-space");
        nondeg_sweep(solve_obstacle(hs.f, hs.u).u, hs.f, d);
    }

    // H P* = 1 and the caloric constraint.
    for (int n = 1; n <= 3; ++n) {
        const Grid g(GridSpec{n, 0.5, 0.05, 0.05, 0.0025, 0.0});
        const auto P = Poly2::pstar(n);
        const auto u = ScalarField::sample(g, [&](const Vec& x, double t) { return P(x, t); });
        const auto hu = apply_heat(u);
        double worst = std::abs(P.heat() - 1.0);
        for (std::size_t s = 0; s < g.spatial_count(); ++s)
            for (int k = 1; k < g.time_count(); ++k)
                if (heat_defined(g, s, k)) worst = std::max(worst, std::abs(hu.at(s, k) - 1.0));
        o.require(worst <= kIdentityTol, "H P* = 1 (n = " + std::to_string(n) + ", dev " + fmt(worst) + ")");
        ++checked;
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const Grid gc(GridSpec{2, 0.5, 0.25, 0.05, 0.0025, 0.0});
    for (int i = 0; i < 10; ++i) {
        std::vector<double> v(gc.size());
        for (double& x : v) x = U(rng);
        const ScalarField u(gc, std::move(v));
        const auto fit = fit_poly2(u, at({0.0, 0.0}, 0.0), 0.25, 2.0, FitConstraint::caloric());
        const double dev = std::abs(fit.poly.c.trace() - fit.poly.m);
        o.require(dev <= kIdentityTol * std::max(1.0, fit.poly.coefficient_size()), "caloric fit tr(c) = m");
        ++checked;
    }
    o.note(std::to_string(checked) + " assertions");
    return o;
}

Outcome criterion4() {
    Outcome o;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst_fit = 0.0, worst_hs = 0.0, worst_golden = 0.0;
    for (int inst = 0; inst < kOracleInstances; ++inst) {
        const int n = 1 + inst % 2;
        const double h = n == 1 ? 0.05 : 0.1;
        const Grid g(GridSpec{n, 1.0, 1.0, h, h * h / 2, 0.0});
        const double c0 = U(rng), c1 = U(rng), c2 = U(rng), c3 = U(rng);
        std::vector<double> v(g.size());
        for (std::size_t s = 0; s < g.spatial_count(); ++s) {
            const Vec x = g.position(s);
            for (int k = 0; k < g.time_count(); ++k) {
                const double t = g.time(k);
                v[g.index(s, k)] = c0 + c1 * x[0] + c2 * std::max(0.0, x[0] - 0.1) * std::max(0.0, x[0] - 0.1) +
                                   c3 * x.squaredNorm() * x[0] + 0.5 * t + 0.1 * U(rng);
            }
        }
        const ScalarField u(g, std::move(v));
        Vec x0 = Vec::Zero(n);
        for (int a = 0; a < n; ++a) x0[a] = std::round(U(rng) * 2) * h;
        const double t0 = -std::round((0.2 + 0.2 * (U(rng) + 1)) / g.dt()) * g.dt();
        const double r = 4 * h + (0.5 - 4 * h) * (U(rng) + 1) / 2;
        const auto q = cylinder_samples(u, Cylinder{{x0, t0}, r});

        const double heat = 2.0 * U(rng);
        const double free_impl = fit_poly2(q, 2.0, FitConstraint::free()).residual;
        const double heat_impl = fit_poly2(q, 2.0, FitConstraint::heat_equals(heat)).residual;
        const double cal_impl = fit_poly2(q, 2.0, FitConstraint::caloric()).residual;
        worst_fit = std::max({worst_fit, std::abs(free_impl - oracle::dense_fit_residual(q, oracle::Family::free)),
                              std::abs(heat_impl - oracle::dense_fit_residual(q, oracle::Family::heat_equals, heat)),
                              std::abs(cal_impl - oracle::dense_fit_residual(q, oracle::Family::heat_equals, 0.0))});

        Vec nu(n);
        for (int a = 0; a < n; ++a) nu[a] = U(rng);
        nu.normalize();
        const double hs_impl = fit_half_space_amplitude(q, nu, 2.0).residual;
        worst_hs = std::max(worst_hs, std::abs(hs_impl - oracle::dense_half_space_residual(q, nu)));

        for (double p : {1.5, 3.0}) {
            const auto impl = omega_tilde(q, p);
            const auto ref = oracle::golden_omega_tilde(q, p);
            worst_golden = std::max({worst_golden, std::abs(impl.value - ref.value), std::abs(impl.c - ref.c)});
        }
    }
    o.require(worst_fit <= kOracleTol, "polynomial fits vs dense least squares " + fmt(worst_fit));
    o.require(worst_hs <= kOracleTol, "half-space amplitude fit vs dense least squares " + fmt(worst_hs));
    o.require(worst_golden <= kGoldenTol, "omega_tilde vs golden section " + fmt(worst_golden));
    o.note(std::to_string(kOracleInstances) + " instances; max deviations " + fmt(worst_fit) + ", " + fmt(worst_hs) +
           ", " + fmt(worst_golden));
    return o;
}

Outcome criterion5() {
    Outcome o;
    const double h = 0.005;
    const Grid g(GridSpec{1, 0.5, 0.25, h, h * h, 0.0});
    CheckOptions opts;
    opts.center = at({0.0}, 0.0);
    opts.ladder = log_ladder(4 * h, 0.25, 24);
    opts.tolerance = kTaylorSlopeTol;
    for (double beta : {0.3, 0.5, 0.8}) {
        const auto mc = manufacture(g, "hoelder-rhs", {{"beta", beta}});
        opts.expected = beta;
        const auto rep = check_taylor(mc.u, mc.f, opts);
        const double slope = rep.values.at("slope");
        o.require(std::abs(slope - beta) <= kTaylorSlopeTol, "slope " + fmt(slope) + " for beta " + fmt(beta));
        o.note("beta " + fmt(beta) + ": slope " + fmt(slope));
    }
    const auto dini = manufacture(g, "dini-rhs");
    opts.expected.reset();
    const auto rep = check_taylor(dini.u, dini.f, opts);
    const double band = rep.values.at("ratio_band");
    const double drops = rep.values.at("monotone_violations");
    o.require(drops == 0.0, "Dini error curve monotone after smoothing (" + fmt(drops) + " drops)");
    o.require(band <= kDiniBand, "e/dini_bound band " + fmt(band) + " <= 3");
    o.note("Dini band " + fmt(band));
    return o;
}

Outcome criterion6() {
    Outcome o;
    Calibration cal;  // lambda 0.5, mu 0.75, C0 10
    auto run = [&](const ScalarField& u, const ScalarField& f, const SpaceTimePoint& c, double rmax) {
        CheckOptions opts;
        opts.center = c;
        opts.ladder = log_ladder(4 * u.grid().h(), rmax, 24);
        opts.cal = cal;
        const auto rc = regular_curves(u, f, opts);
        return check_decay_dichotomy(rc.m, rc.sigma, cal, 2 * u.grid().r_min());
    };
    auto fraction = [](const VerificationReport& r, std::size_t) {
        const double c = r.values.at("checked");
        return c > 0 ? r.values.at("held") / c : 0.0;
    };

    const Grid g1(GridSpec{1, 1.0, 1.0, 0.01, 1e-4, 0.0});
    const auto tw = manufacture(g1, "traveling-wave", {{"a", 0.3}});
    const auto rtw = run(tw.u, tw.f, at({0.0}, 0.0), 0.4);
    const double ftw = fraction(rtw, rtw.ladder.size());
    auto covered = [](const VerificationReport& r) {
        return r.values.at("checked") == static_cast<double>(r.ladder.size()) && !r.ladder.empty();
    };
    o.require(covered(rtw), "traveling wave premise met at every radius >= 8h");
    o.require(rtw.status == CheckStatus::pass && ftw == 1.0,
              "traveling wave disjunction at all radii >= 8h (" + fmt(ftw * 100) + "%)");

    const Grid g2(GridSpec{2, 1.0, 0.25, 0.025, 0.000625, 0.0});
    const auto hs = manufacture(g2, "half-space");
    const auto rhs = run(hs.u, hs.f, at({0.0, 0.0}, 0.0), 0.5);
    const double fhs = fraction(rhs, rhs.ladder.size());
    o.require(covered(rhs), "half-space premise met at every radius >= 8h");
    o.require(rhs.status == CheckStatus::pass && fhs == 1.0,
              "half-space disjunction at all radii >= 8h (" + fmt(fhs * 100) + "%)");

    const auto ps = manufacture(g1, "pstar");
    const auto rps = run(ps.u, ps.f, at({0.0}, 0.0), 0.4);
    o.require(rps.status == CheckStatus::not_applicable, "P* flagged as failing the M0 premise");
    o.note("traveling wave " + fmt(ftw * 100) + "% of " + std::to_string(rtw.ladder.size()) + " radii, half-space " +
           fmt(fhs * 100) + "% of " + std::to_string(rhs.ladder.size()) + ", P* premise: " + rps.premise_note);
    return o;
}

Outcome criterion7() {
    Outcome o;
    double worst = 0.0;
    for (double beta : {0.3, 0.5, 1.0}) {
        for (double r : {0.25, 1.0}) {
            ModulusCurve c;
            c.radii = log_ladder(1e-3, r, 24);
            for (double s : c.radii) c.values.push_back(std::pow(s, beta));
            const auto d = dini_integral(c, r);
            const double err = std::abs(d.value - std::pow(r, beta) / beta);
            worst = std::max(worst, err);
            o.require(err <= kQuadTol, "beta " + fmt(beta) + ", r " + fmt(r) + " error " + fmt(err));
        }
    }
    ModulusCurve nd;
    nd.radii = log_ladder(1e-3, 1.0, 24);
    for (double s : nd.radii) nd.values.push_back(1.0 / std::log(std::exp(1.0) / s));
    const auto d = dini_integral(nd, 1.0);
    o.require(!d.dini, "1/ln(e/s) flagged non-Dini");
    o.note("max quadrature error " + fmt(worst) + ", non-Dini flag " + (d.dini ? "missing" : "raised"));
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::map<std::string, std::string> tree(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return out;
}

Outcome criterion8() {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "obstlab_acceptance_report";
    fs::remove_all(dir);
    ExperimentConfig cfg;
    cfg.grid = GridSpec{1, 1.0, 1.0, 0.02, 4e-4, 0.0};
    cfg.case_id = "traveling-wave";
    cfg.output = dir;
    cfg.ladder = "log:0.08:0.5:12";
    const char* prev = std::getenv("OBSTLAB_THREADS");
    const std::string saved = prev ? prev : "";
    setenv("OBSTLAB_THREADS", "1", 1);
    const int c1 = cmd_report(cfg);
    const auto first = tree(dir);
    setenv("OBSTLAB_THREADS", "4", 1);
    const int c2 = cmd_report(cfg);
    const auto second = tree(dir);
    if (prev) setenv("OBSTLAB_THREADS", saved.c_str(), 1);
    else unsetenv("OBSTLAB_THREADS");
    o.require(c1 == c2, "same exit code");
    o.require(first.count("summary.csv") && first.count("digest.txt"), "summary.csv and digest.txt written");
    o.require(first == second, "byte-identical outputs across runs (1 and 4 threads)");
    o.note(std::to_string(first.size()) + " files compared");
    fs::remove_all(dir);
    return o;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* title;
        std::function<Outcome()> run;
    };
    const Entry entries[] = {
        {1, "exact-solution reproduction", criterion1},
        {2, "manufactured moving boundary", criterion2},
        {3, "constant-free inequalities", criterion3},
        {4, "oracle equivalence", criterion4},
        {5, "Taylor error shape", criterion5},
        {6, "decay dichotomy", criterion6},
        {7, "Dini quadrature", criterion7},
        {8, "determinism", criterion8},
    };
    int failed = 0;
    for (const auto& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.run();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("exception: ") + ex.what();
        }
        std::printf("criterion %d %s: %s (%s) [%.1f s]\n", e.id, e.title, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed ? 1 : 0;
}
