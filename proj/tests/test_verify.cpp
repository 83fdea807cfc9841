#include "obstlab/obstacle.hpp"
#include "obstlab/verify.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>

using namespace obstlab;

namespace {

Vec vec(std::initializer_list<double> v) {
    Vec x(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double a : v) x[i++] = a;
    return x;
}

CheckOptions at_origin(int n, const std::string& ladder) {
    CheckOptions o;
    o.center = origin(n);
    o.ladder = parse_ladder(ladder);
    return o;
}

Grid hoelder_grid(double h) { return Grid(GridSpec{1, 0.5, 0.25, h, h * h, 0.0}); }

}  // namespace

TEST(Calibration, DefaultsAndValidation) {
    Calibration c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_NEAR(c.alpha(), std::log(0.75) / std::log(0.5), 1e-15);
    c.mu = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = Calibration{};
    c.m0 = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Report, StatusIsPureFunctionOfNumbers) {
    VerificationReport r;
    r.criteria.push_back(Criterion::make("a", 1.0, "<=", 2.0));
    r.criteria.push_back(Criterion::make("b", 3.0, ">", 2.0));
    recompute_status(r);
    EXPECT_EQ(r.status, CheckStatus::pass);
    r.criteria[1].holds = false;  // stale flag is recomputed
    recompute_status(r);
    EXPECT_EQ(r.status, CheckStatus::pass);
    r.criteria[0].lhs = 5.0;
    recompute_status(r);
    EXPECT_EQ(r.status, CheckStatus::fail);
    r.premise = false;
    recompute_status(r);
    EXPECT_EQ(r.status, CheckStatus::not_applicable);
}

TEST(Report, RecordRoundTrip) {
    const Grid g = hoelder_grid(0.02);
    const auto mc = manufacture(g, "hoelder-rhs");
    const auto r = check_taylor(mc.u, mc.f, at_origin(1, "log:0.08:0.25:12"));
    const auto back = report_from_record(report_record(r));
    EXPECT_EQ(back.check, r.check);
    EXPECT_EQ(back.inputs_digest, r.inputs_digest);
    EXPECT_EQ(back.ladder, r.ladder);
    EXPECT_EQ(back.values.at("slope"), r.values.at("slope"));
    ASSERT_EQ(back.criteria.size(), r.criteria.size());
    EXPECT_EQ(back.status, r.status);
    auto copy = back;
    recompute_status(copy);
    EXPECT_EQ(copy.status, r.status);
    // NaN entries survive as strings.
    EXPECT_TRUE(std::isnan(back.series.at("bound").front()));
    EXPECT_EQ(report_record(back), report_record(r));
}

TEST(Report, SummaryCsv) {
    VerificationReport r;
    r.check = "x";
    r.target = 1.0;
    r.measured = 0.5;
    r.bound = std::nan("");
    r.ratio = 0.5;
    recompute_status(r);
    EXPECT_EQ(summary_csv({r}), "check,target,measured,bound,ratio,pass\nx,1,0.5,,0.5,pass\n");
}

TEST(Digest, SensitiveToValuesAndShape) {
    const Grid g(GridSpec{1, 0.5, 0.1, 0.1, 0.01, 0.0});
    const auto a = ScalarField::constant(g, 1.0);
    const auto b = ScalarField::constant(g, 1.0 + 1e-15);
    const auto c = ScalarField::constant(Grid(GridSpec{1, 0.5, 0.1, 0.1, 0.01, -1.0}), 1.0);
    EXPECT_EQ(field_digest(a).size(), 16u);
    EXPECT_EQ(field_digest(a), field_digest(ScalarField::constant(g, 1.0)));
    EXPECT_NE(field_digest(a), field_digest(b));
    EXPECT_NE(field_digest(a), field_digest(c));
}

TEST(Bmo, CaloricPolynomial) {
    const Grid g(GridSpec{2, 1.0, 0.5, 0.05, 0.00125, 0.0});
    const auto mc = manufacture(g, "caloric-poly");
    const auto r = check_bmo(mc.u, mc.f, at_origin(2, "log:0.2:0.5:12"));
    EXPECT_LE(r.values.at("sup_n_tilde"), 1e-6);
    EXPECT_LE(r.ratio, 1e-6);
    EXPECT_EQ(r.status, CheckStatus::pass);
    EXPECT_TRUE(r.hard);
}

TEST(Bmo, HoelderRefinementStable) {
    const auto coarse_mc = manufacture(hoelder_grid(0.01), "hoelder-rhs", {{"beta", 0.5}});
    const auto fine_mc = manufacture(hoelder_grid(0.005), "hoelder-rhs", {{"beta", 0.5}});
    const auto opts = at_origin(1, "log:0.04:0.25:24");
    const auto a = check_bmo(coarse_mc.u, coarse_mc.f, opts);
    const auto b = check_bmo(fine_mc.u, fine_mc.f, opts);
    const auto r = check_bmo_refinement(a, b);
    EXPECT_LE(r.values.at("relative_change"), 0.2);
    EXPECT_EQ(r.status, CheckStatus::pass);
}

TEST(Bmo, NonDiniStillFinite) {
    const auto mc = manufacture(hoelder_grid(0.01), "nondini-rhs");
    const auto r = check_bmo(mc.u, mc.f, at_origin(1, "log:0.04:0.25:24"));
    EXPECT_TRUE(std::isfinite(r.ratio));
    EXPECT_EQ(r.status, CheckStatus::pass);
}

TEST(Vmo, HoelderTailsVanish) {
    // beta = 1 so the quartile tail of omega_tilde drops under 10% of its max within [4h, R]
    const auto mc = manufacture(hoelder_grid(0.005), "hoelder-rhs", {{"beta", 1.0}});
    const auto r = check_vmo(mc.u, mc.f, at_origin(1, "log:0.02:0.5:24"));
    EXPECT_TRUE(r.premise);
    EXPECT_EQ(r.status, CheckStatus::pass);
}

TEST(Vmo, ShellOscillationNotApplicable) {
    const auto mc = manufacture(hoelder_grid(0.005), "shell-rhs");
    const auto r = check_vmo(mc.u, mc.f, at_origin(1, "log:0.02:0.25:24"));
    EXPECT_EQ(r.status, CheckStatus::not_applicable);
}

TEST(Vmo, CaloricTrivial) {
    const auto mc = manufacture(hoelder_grid(0.01), "caloric-poly");
    const auto r = check_vmo(mc.u, mc.f, at_origin(1, "log:0.04:0.25:12"));
    EXPECT_NE(r.status, CheckStatus::fail);
}

TEST(Taylor, CaloricErrorVanishes) {
    const auto mc = manufacture(hoelder_grid(0.01), "caloric-poly");
    const auto r = check_taylor(mc.u, mc.f, at_origin(1, "log:0.04:0.25:12"));
    for (double e : r.series.at("error")) EXPECT_LE(e, 1e-6);
}

TEST(Taylor, HoelderSlope) {
    const auto mc = manufacture(hoelder_grid(0.005), "hoelder-rhs", {{"beta", 0.5}});
    auto opts = at_origin(1, "log:0.02:0.25:24");
    opts.expected = 0.5;
    const auto r = check_taylor(mc.u, mc.f, opts);
    EXPECT_NEAR(r.values.at("slope"), 0.5, 0.15);
    EXPECT_EQ(r.status, CheckStatus::pass);
}

TEST(Taylor, SubtractsPstarWhenF0NonZero) {
    // u = P* + caloric part, f = 1: after subtraction the Taylor error vanishes.
    const Grid g = hoelder_grid(0.01);
    const auto u = ScalarField::sample(g, [](const Vec& x, double t) { return 0.5 * x[0] * x[0] + 0.3 * x[0] + (x[0] * x[0] + 2 * t); });
    const auto r = check_taylor(u, ScalarField::constant(g, 1.0), at_origin(1, "log:0.04:0.25:12"));
    EXPECT_DOUBLE_EQ(r.values.at("f0"), 1.0);
    for (double e : r.series.at("error")) EXPECT_LE(e, 1e-8);
}

TEST(QuadraticGrowth, HalfSpaceAndPstar) {
    const Grid g1(GridSpec{1, 1.0, 0.5, 0.05, 0.0025, 0.0});
    const auto hs = manufacture(g1, "half-space");
    EXPECT_NEAR(check_quadratic_growth(hs.u, at_origin(1, "log:0.2:0.5:12")).values.at("c1_sup"), 0.5, 1e-12);
    const Grid g2(GridSpec{2, 1.0, 0.5, 0.05, 0.00125, 0.0});
    const auto ps = manufacture(g2, "pstar");
    EXPECT_NEAR(check_quadratic_growth(ps.u, at_origin(2, "log:0.2:0.5:12")).values.at("c1_sup"), 0.25, 1e-12);
}

TEST(QuadraticGrowth, ObstacleTravelingWave) {
    const Grid g(GridSpec{1, 1.0, 0.5, 0.025, 0.000625, 0.0});
    const auto mc = manufacture(g, "traveling-wave");
    const auto u = solve_obstacle(mc.f, mc.u).u;
    auto opts = at_origin(1, "log:0.1:0.5:12");
    const double exact = check_quadratic_growth(mc.u, opts).values.at("c1_sup");
    opts.expected = exact;
    opts.tolerance = 0.1;
    const auto r = check_quadratic_growth(u, opts);
    EXPECT_EQ(r.status, CheckStatus::pass) << r.values.at("c1_sup") << " vs " << exact;
}

TEST(Nondegeneracy, PstarExample) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.05, 0.0025, 0.0});
    const auto ps = manufacture(g, "pstar");
    const auto r = check_nondegeneracy(ps.u, ps.f, {vec({0.3}), -0.5}, 0.2, Calibration{});
    EXPECT_DOUBLE_EQ(r.values.at("lambda"), 0.0);
    EXPECT_NEAR(r.values.at("bound"), 0.04 / 3, 1e-15);
    EXPECT_NEAR(r.values.at("sup_boundary"), 0.125, 1e-12);
    EXPECT_EQ(r.status, CheckStatus::pass);
}

TEST(Nondegeneracy, ZeroNotApplicable) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.05, 0.0025, 0.0});
    const auto r = check_nondegeneracy(ScalarField::constant(g, 0.0), ScalarField::constant(g, 1.0), {vec({0.3}), -0.5},
                                       0.2, Calibration{});
    EXPECT_EQ(r.status, CheckStatus::not_applicable);
}

TEST(Nondegeneracy, TravelingWaveSweep) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.05, 0.0025, 0.0});
    const auto mc = manufacture(g, "traveling-wave");
    Calibration cal;
    int checked = 0;
    for (double d : {0.1, 0.2})
        for (std::size_t s = 0; s < g.spatial_count(); ++s)
            for (int k = g.time_count() - 1; k > 0; k -= 40) {
                const SpaceTimePoint p{g.position(s), g.time(k)};
                if (mc.u.at(s, k) <= 0.1 || !cylinder_inside(g, Cylinder{p, d})) continue;
                const auto r = check_nondegeneracy(mc.u, mc.f, p, d, cal);
                EXPECT_NE(r.status, CheckStatus::fail);
                checked += r.status == CheckStatus::pass;
            }
    EXPECT_GT(checked, 0);
}

TEST(Nondegeneracy, ScaledPstar) {
    const Grid g(GridSpec{2, 1.0, 0.5, 0.05, 0.00125, 0.0});
    for (double kappa : {0.5, 3.0}) {
        const auto ps = manufacture(g, "pstar", {{"kappa", kappa}});
        for (double d : {0.1, 0.2, 0.5}) {
            const auto r = check_nondegeneracy(ps.u, ps.f, {vec({0.3, -0.2}), -0.25}, d, Calibration{});
            EXPECT_EQ(r.status, CheckStatus::pass);
        }
    }
}

TEST(WeakNondegeneracy, BoundedRatio) {
    const Grid g(GridSpec{1, 1.0, 0.5, 0.05, 0.0025, 0.0});
    const auto hs = manufacture(g, "half-space");
    std::vector<ScalarField> us, fs;
    for (double m : {4.0, 8.0, 16.0, 32.0}) {
        auto f = ScalarField::sample(g, [=](const Vec& x, double) { return 1.0 + x[0] / m; });
        us.push_back(solve_obstacle(f, hs.u).u);
        fs.push_back(std::move(f));
    }
    const Region K{vec({-0.8}), vec({-0.2}), -0.25, 0.0};
    const auto r = check_weak_nondegeneracy(us, fs, K, &hs.u);
    EXPECT_TRUE(r.premise);
    EXPECT_EQ(r.status, CheckStatus::pass);
    EXPECT_TRUE(std::isfinite(r.values.at("constant")));
}

TEST(WeakNondegeneracy, ZeroOscillationAndRefusal) {
    const Grid g(GridSpec{1, 1.0, 0.5, 0.05, 0.0025, 0.0});
    const auto hs = manufacture(g, "half-space");
    const auto u = solve_obstacle(hs.f, hs.u).u;
    const Region K{vec({-0.8}), vec({-0.2}), -0.25, 0.0};
    const auto r = check_weak_nondegeneracy({u}, {hs.f}, K, &hs.u);
    EXPECT_EQ(r.status, CheckStatus::pass);
    EXPECT_EQ(r.series.at("sup_K").front(), 0.0);

    const Region bad{vec({-0.2}), vec({0.4}), -0.25, 0.0};
    EXPECT_EQ(check_weak_nondegeneracy({u}, {hs.f}, bad, &hs.u).status, CheckStatus::not_applicable);
}

TEST(DecayDichotomy, HalfSpaceVacuous) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.02, 4e-4, 0.0});
    const auto hs = manufacture(g, "half-space");
    const auto opts = at_origin(1, "log:0.08:0.5:24");
    const auto rc = regular_curves(hs.u, hs.f, opts);
    for (double v : rc.m.values) EXPECT_LE(v, 1e-10);
    const auto r = check_decay_dichotomy(rc.m, rc.sigma, opts.cal, 0.16);
    EXPECT_EQ(r.status, CheckStatus::pass);
    EXPECT_GT(r.values.at("checked"), 0.0);
}

TEST(DecayDichotomy, CaloricFlagged) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.02, 4e-4, 0.0});
    const auto u = ScalarField::sample(g, [](const Vec& x, double t) { return 2.0 + x[0] * x[0] + 2 * t; });
    const auto f = ScalarField::constant(g, 1.0);
    const auto opts = at_origin(1, "log:0.08:0.5:24");
    const auto rc = regular_curves(u, f, opts);
    const auto r = check_decay_dichotomy(rc.m, rc.sigma, opts.cal, 0.16);
    EXPECT_NE(r.status, CheckStatus::pass);
    EXPECT_FALSE(r.premise_note.empty());
}

TEST(DecayDichotomy, TruthTableRecorded) {
    ModulusCurve m, s;
    m.radii = s.radii = log_ladder(0.01, 1.0, 10);
    for (double r : m.radii) {
        m.values.push_back(0.01 * r);
        s.values.push_back(0.0);
    }
    const auto rep = check_decay_dichotomy(m, s, Calibration{}, 0.0);
    EXPECT_EQ(rep.status, CheckStatus::pass);  // M(r/2) = M(r)/2 < 0.75 M(r)
    EXPECT_EQ(rep.series.at("branch_contract").size(), rep.ladder.size());
    for (double b : rep.series.at("branch_data")) EXPECT_EQ(b, 0.0);
}

TEST(RegularPoint, TravelingWave) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.01, 1e-4, 0.0});
    const auto mc = manufacture(g, "traveling-wave", {{"a", 0.3}});
    auto opts = at_origin(1, "log:0.04:0.5:24");
    opts.expected = 1.0;
    opts.tolerance = 0.2;
    const auto r = check_regular_point(mc.u, mc.f, opts);
    EXPECT_EQ(r.values.at("regular"), 1.0);
    EXPECT_NEAR(r.values.at("nu1"), 1.0, 1e-3);
    EXPECT_EQ(r.status, CheckStatus::pass) << "slope " << r.values.at("slope");
}

TEST(RegularPoint, PstarNotRegular) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.02, 4e-4, 0.0});
    const auto ps = manufacture(g, "pstar");
    const auto opts = at_origin(1, "log:0.08:0.5:24");
    const auto r = check_regular_point(ps.u, ps.f, opts);
    EXPECT_EQ(r.values.at("regular"), 0.0);
    // Scale invariance: n_reg(P*) is constant across radii.
    const auto& m = r.series.at("m_reg");
    EXPECT_NEAR(m.front(), m.back(), 0.1 * m.back());
}

TEST(RegularPoint, ZeroFNotApplicable) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.02, 4e-4, 0.0});
    const auto mc = manufacture(g, "hoelder-rhs");
    const auto r = check_regular_point(mc.u, mc.f, at_origin(1, "log:0.08:0.5:24"));
    EXPECT_EQ(r.status, CheckStatus::not_applicable);
}

TEST(RegularPoint, ClassificationScaleInvariant) {
    const Grid g(GridSpec{1, 1.0, 1.0, 0.02, 4e-4, 0.0});
    const auto mc = manufacture(g, "traveling-wave");
    auto scale = [&](const ScalarField& a, double c) {
        std::vector<double> v(a.values().begin(), a.values().end());
        for (double& x : v) x *= c;
        return ScalarField(g, v);
    };
    const auto opts = at_origin(1, "log:0.08:0.5:24");
    const auto a = classify_regular(mc.u, mc.f, opts);
    const auto b = classify_regular(scale(mc.u, 7.0), scale(mc.f, 7.0), opts);
    EXPECT_EQ(a.regular, b.regular);
    EXPECT_NEAR(a.m_r0, b.m_r0, 1e-10);
}
