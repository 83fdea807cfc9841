#include "obstlab/verify.hpp"

#include "obstlab/io.hpp"
#include "obstlab/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <sstream>

namespace obstlab {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double from_num(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        return kNaN;
    }
    return kNaN;
}

std::vector<double> ladder_for(const Grid& g, const std::vector<double>& radii) {
    auto L = truncate_ladder(radii, g.r_min());
    if (L.empty()) throw ConfigError("ladder: no radius >= r_min = 4h");
    return L;
}

std::string radius_tag(const char* prefix, double r) { return std::string(prefix) + "@r=" + format_double(r); }

// Nodes of the closed cylinder |x - x0| <= r, t0 - r^2 <= t <= t0.
template <class F>
void for_closed_cylinder(const Grid& g, const Cylinder& cyl, F&& visit) {
    const int n = g.dim();
    const double eps = 1e-9;
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < n; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::ceil((cyl.center.x[a] - cyl.r + g.spec().R) / g.h() - eps)));
        hi[a] = std::min(g.nodes_per_axis() - 1,
                         static_cast<int>(std::floor((cyl.center.x[a] + cyl.r + g.spec().R) / g.h() + eps)));
    }
    const int k_lo = std::max(0, static_cast<int>(std::ceil((cyl.center.t - cyl.r * cyl.r - g.t_start()) / g.dt() - eps)));
    const int k_hi = std::min(g.time_count() - 1, static_cast<int>(std::floor((cyl.center.t - g.t_start()) / g.dt() + eps)));
    const double r2 = cyl.r * cyl.r * (1.0 + 1e-9);
    std::array<int, 3> idx{0, 0, 0};
    for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0])
        for (idx[1] = lo[1]; idx[1] <= (n > 1 ? hi[1] : 0); ++idx[1])
            for (idx[2] = lo[2]; idx[2] <= (n > 2 ? hi[2] : 0); ++idx[2]) {
                const std::size_t s = g.ravel(idx);
                if ((g.position(s) - cyl.center.x).squaredNorm() > r2) continue;
                for (int k = k_lo; k <= k_hi; ++k) visit(s, k);
            }
}

ScalarField subtract_pstar(const ScalarField& u, const Vec& x0, double c) {
    const Poly2 P = Poly2::pstar(u.grid().dim());
    const Grid& g = u.grid();
    std::vector<double> v(u.values().begin(), u.values().end());
    for (std::size_t s = 0; s < g.spatial_count(); ++s) {
        const double ps = c * P(g.position(s) - x0, 0.0);
        for (int k = 0; k < g.time_count(); ++k) v[g.index(s, k)] -= ps;
    }
    return ScalarField(g, std::move(v));
}

ScalarField shift(const ScalarField& f, double c) {
    std::vector<double> v(f.values().begin(), f.values().end());
    for (double& x : v) x -= c;
    return ScalarField(f.grid(), std::move(v));
}

// Ratio of max to min over positive finite entries of r >= lo.
double band(const std::vector<double>& radii, const std::vector<double>& ratio, double lo, double hi) {
    double mn = kInf, mx = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < lo * (1 - 1e-9) || radii[i] > hi * (1 + 1e-9)) continue;
        if (!(ratio[i] > 0.0) || !std::isfinite(ratio[i])) continue;
        mn = std::min(mn, ratio[i]);
        mx = std::max(mx, ratio[i]);
    }
    return mx > 0.0 ? mx / mn : kNaN;
}

double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

double tail_mean(const std::vector<double>& v) {
    const std::size_t q = std::max<std::size_t>(1, v.size() / 4);
    double acc = 0.0;
    for (std::size_t i = 0; i < q; ++i) acc += v[i];
    return acc / static_cast<double>(q);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace

void Calibration::validate() const {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ConfigError("calibration.lambda must lie in (0, 1)");
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("calibration.mu must lie in (0, 1)");
    if (!(c0 > 0.0)) throw ConfigError("calibration.C0 must be positive");
    if (!(m0 > 0.0)) throw ConfigError("calibration.M0 must be positive");
    if (!(r0 > 0.0)) throw ConfigError("calibration.r0 must be positive");
}

std::string_view to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        default: return "not_applicable";
    }
}

Criterion Criterion::make(std::string name, double lhs, std::string op, double rhs) {
    Criterion c{std::move(name), lhs, std::move(op), rhs, false};
    c.holds = c.evaluate();
    return c;
}

bool Criterion::evaluate() const {
    if (op == "<=") return lhs <= rhs;
    if (op == "<") return lhs < rhs;
    if (op == ">=") return lhs >= rhs;
    if (op == ">") return lhs > rhs;
    throw ConfigError("criterion: unknown operator '" + op + "'");
}

void recompute_status(VerificationReport& report) {
    bool all = true;
    for (auto& c : report.criteria) {
        c.holds = c.evaluate();
        all = all && c.holds;
    }
    if (!report.premise)
        report.status = CheckStatus::not_applicable;
    else
        report.status = all ? CheckStatus::pass : CheckStatus::fail;
}

std::string report_record(const VerificationReport& r) {
    json j;
    j["check"] = r.check;
    j["status"] = std::string(to_string(r.status));
    j["hard"] = r.hard;
    j["premise"] = r.premise;
    j["premise_note"] = r.premise_note;
    j["inputs_digest"] = r.inputs_digest;
    j["summary"] = {{"target", num(r.target)}, {"measured", num(r.measured)}, {"bound", num(r.bound)},
                    {"ratio", num(r.ratio)}};
    json ladder = json::array();
    for (double x : r.ladder) ladder.push_back(num(x));
    j["ladder"] = ladder;
    json values = json::object();
    for (const auto& [k, v] : r.values) values[k] = num(v);
    j["values"] = values;
    json series = json::object();
    for (const auto& [k, v] : r.series) {
        json a = json::array();
        for (double x : v) a.push_back(num(x));
        series[k] = a;
    }
    j["series"] = series;
    json crit = json::array();
    for (const auto& c : r.criteria)
        crit.push_back({{"name", c.name}, {"lhs", num(c.lhs)}, {"op", c.op}, {"rhs", num(c.rhs)}, {"holds", c.holds}});
    j["criteria"] = crit;
    return j.dump(2) + "\n";
}

VerificationReport report_from_record(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report record: ") + e.what());
    }
    VerificationReport r;
    try {
        r.check = j.at("check").get<std::string>();
        const auto st = j.at("status").get<std::string>();
        r.status = st == "pass" ? CheckStatus::pass : st == "fail" ? CheckStatus::fail : CheckStatus::not_applicable;
        r.hard = j.at("hard").get<bool>();
        r.premise = j.at("premise").get<bool>();
        r.premise_note = j.at("premise_note").get<std::string>();
        r.inputs_digest = j.at("inputs_digest").get<std::string>();
        const auto& s = j.at("summary");
        r.target = from_num(s.at("target"));
        r.measured = from_num(s.at("measured"));
        r.bound = from_num(s.at("bound"));
        r.ratio = from_num(s.at("ratio"));
        for (const auto& x : j.at("ladder")) r.ladder.push_back(from_num(x));
        for (const auto& [k, v] : j.at("values").items()) r.values[k] = from_num(v);
        for (const auto& [k, v] : j.at("series").items())
            for (const auto& x : v) r.series[k].push_back(from_num(x));
        for (const auto& c : j.at("criteria"))
            r.criteria.push_back({c.at("name").get<std::string>(), from_num(c.at("lhs")), c.at("op").get<std::string>(),
                                  from_num(c.at("rhs")), c.at("holds").get<bool>()});
    } catch (const json::exception& e) {
        throw ConfigError(std::string("report record: ") + e.what());
    }
    return r;
}

std::string summary_csv(const std::vector<VerificationReport>& reports) {
    auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    std::string out = "check,target,measured,bound,ratio,pass\n";
    for (const auto& r : reports) {
        out += r.check + "," + cell(r.target) + "," + cell(r.measured) + "," + cell(r.bound) + "," + cell(r.ratio) +
               "," + std::string(to_string(r.status)) + "\n";
    }
    return out;
}

std::string field_digest(const ScalarField& field) {
    std::uint64_t h = 14695981039346656037ULL;
    const auto& sp = field.grid().spec();
    const std::int32_t shape[3] = {sp.n, field.grid().nodes_per_axis(), field.grid().time_count()};
    h = fnv1a(h, shape, sizeof shape);
    const double geo[3] = {sp.h, sp.dt, sp.t_final};
    h = fnv1a(h, geo, sizeof geo);
    h = fnv1a(h, field.values().data(), field.values().size() * sizeof(double));
    return hex64(h);
}

std::string combine_digests(const std::vector<std::string>& parts) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& p : parts) h = fnv1a(h, p.data(), p.size());
    return hex64(h);
}

// ---------------------------------------------------------------------------

VerificationReport check_bmo(const ScalarField& u, const ScalarField& f, const CheckOptions& opts) {
    const auto L = ladder_for(u.grid(), opts.ladder);
    VerificationReport rep;
    rep.check = "bmo";
    rep.hard = true;
    rep.inputs_digest = combine_digests({field_digest(u), field_digest(f)});
    rep.ladder = L;
    const auto nt = n_tilde_curve(u, opts.center, opts.p, L);
    const auto nh = n_hat_curve(u, f, opts.center, opts.p, L);
    const auto wt = omega_tilde_curve(f, opts.center, opts.p, L);
    rep.series["n_tilde"] = nt.values;
    rep.series["n_hat"] = nh.values;
    rep.series["omega_tilde"] = wt.values;

    const Cylinder big{opts.center, L.back()};
    const double unorm = lp_average(u, big, opts.p);
    const double fnorm = lp_average(f, big, opts.p);
    const double lhs = max_of(nt.values);
    const double bracket = unorm + fnorm + max_of(wt.values);
    rep.values["sup_n_tilde"] = lhs;
    rep.values["u_norm"] = unorm;
    rep.values["f_norm"] = fnorm;
    rep.values["sup_omega_tilde"] = max_of(wt.values);
    rep.values["bracket"] = bracket;
    const double ratio = bracket > 0.0 ? lhs / bracket : (lhs > 0.0 ? kInf : 0.0);

    const double uscale = std::max(std::abs(u.min()), std::abs(u.max()));
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double slack = 1e-12 * (nh.values[i] + uscale / (L[i] * L[i]));
        rep.criteria.push_back(Criterion::make(radius_tag("n_tilde<=n_hat", L[i]), nt.values[i], "<=",
                                               nh.values[i] + slack));
    }
    rep.criteria.push_back(Criterion::make("ratio_finite", ratio, "<", kInf));
    rep.target = kNaN;
    rep.measured = lhs;
    rep.bound = bracket;
    rep.ratio = ratio;
    recompute_status(rep);
    return rep;
}

VerificationReport check_bmo_refinement(const VerificationReport& coarse, const VerificationReport& fine,
                                        double rel_tol) {
    VerificationReport rep;
    rep.check = "bmo_refinement";
    rep.inputs_digest = combine_digests({coarse.inputs_digest, fine.inputs_digest});
    const double a = coarse.ratio, b = fine.ratio;
    const double scale = std::max(std::abs(a), std::abs(b));
    const double rel = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
    rep.values["ratio_coarse"] = a;
    rep.values["ratio_fine"] = b;
    rep.values["relative_change"] = rel;
    rep.criteria.push_back(Criterion::make("relative_change", rel, "<=", rel_tol));
    rep.target = rel_tol;
    rep.measured = rel;
    rep.bound = rel_tol;
    rep.ratio = b > 0.0 ? a / b : kNaN;
    recompute_status(rep);
    return rep;
}

VerificationReport check_vmo(const ScalarField& u, const ScalarField& f, const CheckOptions& opts) {
    const auto L = ladder_for(u.grid(), opts.ladder);
    VerificationReport rep;
    rep.check = "vmo";
    rep.inputs_digest = combine_digests({field_digest(u), field_digest(f)});
    rep.ladder = L;
    const auto nt = n_tilde_curve(u, opts.center, opts.p, L);
    const auto wt = omega_tilde_curve(f, opts.center, opts.p, L);
    rep.series["n_tilde"] = nt.values;
    rep.series["omega_tilde"] = wt.values;
    const double floor = 1e-9;
    const double wmax = max_of(wt.values), wtail = tail_mean(wt.values);
    const double nmax = max_of(nt.values), ntail = tail_mean(nt.values);
    rep.values["omega_tilde_max"] = wmax;
    rep.values["omega_tilde_tail"] = wtail;
    rep.values["n_tilde_max"] = nmax;
    rep.values["n_tilde_tail"] = ntail;
    rep.premise = wtail <= 0.1 * wmax + floor;
    if (!rep.premise) rep.premise_note = "omega_tilde does not vanish along the ladder";
    rep.criteria.push_back(Criterion::make("n_tilde_tail", ntail, "<=", 0.1 * nmax + floor));
    rep.target = 0.1;
    rep.measured = nmax > 0.0 ? ntail / nmax : 0.0;
    rep.bound = 0.1;
    rep.ratio = wmax > 0.0 ? wtail / wmax : 0.0;
    recompute_status(rep);
    return rep;
}

VerificationReport check_taylor(const ScalarField& u, const ScalarField& f, const CheckOptions& opts) {
    opts.cal.validate();
    const Grid& g = u.grid();
    const auto L = ladder_for(g, opts.ladder);
    VerificationReport rep;
    rep.check = "taylor";
    rep.inputs_digest = combine_digests({field_digest(u), field_digest(f)});
    rep.ladder = L;

    const double f0 = evaluate(f, opts.center);
    const ScalarField v = f0 != 0.0 ? subtract_pstar(u, opts.center.x, f0) : u;
    const ScalarField fz = f0 != 0.0 ? shift(f, f0) : f;
    rep.values["f0"] = f0;

    const auto fit = fit_poly2(v, opts.center, L.front(), opts.p, FitConstraint::caloric());
    rep.values["p0_size"] = fit.poly.coefficient_size();
    rep.values["p0_heat"] = fit.poly.heat();

    std::vector<double> e(L.size());
    parallel_for(L.size(), [&](std::size_t i) {
        e[i] = poly2_residual(cylinder_samples(v, Cylinder{opts.center, L[i]}), fit.poly, opts.p);
    });
    const auto wt = omega_tilde_curve(fz, opts.center, opts.p, L);
    const double n1 = n_tilde(v, opts.center, L.back(), opts.p);
    // w~ at 4h is flattened by the grid, which spoils the tail extrapolation;
    // the bound uses the curve from 8h up.
    const double r_bound = 2.0 * g.r_min() * (1.0 - 1e-9);
    ModulusCurve wb;
    wb.kind = CurveKind::omega_tilde;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (L[i] >= r_bound) {
            wb.radii.push_back(L[i]);
            wb.values.push_back(wt.values[i]);
        }
    if (wb.size() < 3) wb = wt;
    std::vector<double> bound(L.size()), ratio(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
        const bool usable = L[i] <= 1.0 && L[i] >= wb.radii.front() * (1.0 - 1e-9);
        bound[i] = usable ? dini_bound(n1, wb, L[i], opts.cal.lambda, opts.cal.mu) : kNaN;
        ratio[i] = bound[i] > 0.0 ? e[i] / bound[i] : kNaN;
    }
    rep.series["error"] = e;
    rep.series["omega_tilde"] = wt.values;
    rep.series["bound"] = bound;
    rep.series["ratio"] = ratio;

    const double slope = middle_quartile_slope(L, e);
    const double b = band(L, ratio, 2.0 * g.r_min(), 0.25);
    rep.values["slope"] = slope;
    rep.values["n1"] = n1;
    rep.values["ratio_band"] = b;
    rep.values["alpha"] = opts.cal.alpha();

    // Three-point moving average, then count decreases in r.
    std::vector<double> sm(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1, z = std::min(e.size() - 1, i + 1);
        double acc = 0.0;
        for (std::size_t j = a; j <= z; ++j) acc += e[j];
        sm[i] = acc / static_cast<double>(z - a + 1);
    }
    double drops = 0.0;
    for (std::size_t i = 1; i < sm.size(); ++i)
        if (sm[i] < sm[i - 1] * (1.0 - 1e-9)) drops += 1.0;
    rep.values["monotone_violations"] = drops;

    rep.criteria.push_back(Criterion::make("ratio_band", std::isnan(b) ? kInf : b, "<=", 3.0));
    if (opts.expected) {
        rep.criteria.push_back(Criterion::make("slope_error", std::abs(slope - *opts.expected), "<=", opts.tolerance));
        rep.target = *opts.expected;
    } else {
        rep.target = kNaN;
    }
    rep.measured = slope;
    rep.bound = b;
    rep.ratio = std::isnan(b) ? kNaN : b / 3.0;
    recompute_status(rep);
    return rep;
}

VerificationReport check_quadratic_growth(const ScalarField& u, const CheckOptions& opts) {
    const Grid& g = u.grid();
    const auto L = ladder_for(g, opts.ladder);
    VerificationReport rep;
    rep.check = "quadratic_growth";
    rep.inputs_digest = field_digest(u);
    rep.ladder = L;
    std::vector<double> mean(L.size()), sup(L.size());
    parallel_for(L.size(), [&](std::size_t i) {
        const Cylinder cyl{opts.center, L[i]};
        mean[i] = lp_average(u, cyl, opts.p) / (L[i] * L[i]);
        double m = 0.0;
        for_closed_cylinder(g, cyl, [&](std::size_t s, int k) { m = std::max(m, u.at(s, k)); });
        sup[i] = m / (L[i] * L[i]);
    });
    rep.series["mean_constant"] = mean;
    rep.series["sup_constant"] = sup;
    const double c1 = max_of(sup), cm = max_of(mean);
    rep.values["c1_sup"] = c1;
    rep.values["c1_mean"] = cm;
    rep.criteria.push_back(Criterion::make("c1_finite", c1, "<", kInf));
    if (opts.expected) {
        const double t = *opts.expected;
        rep.criteria.push_back(Criterion::make("c1_relative_error", std::abs(c1 - t) / std::abs(t), "<=", opts.tolerance));
        rep.target = t;
        rep.ratio = c1 / t;
    } else {
        rep.target = kNaN;
        rep.ratio = kNaN;
    }
    rep.measured = c1;
    rep.bound = cm;
    recompute_status(rep);
    return rep;
}

VerificationReport check_nondegeneracy(const ScalarField& u, const ScalarField& f, const SpaceTimePoint& point,
                                       double d, const Calibration& cal, double /*p*/) {
    cal.validate();
    const Grid& g = u.grid();
    const Cylinder cyl{point, d};
    require_inside(g, cyl);
    VerificationReport rep;
    rep.check = "nondegeneracy";
    rep.hard = true;
    rep.inputs_digest = combine_digests({field_digest(u), field_digest(f)});
    rep.ladder = {d};

    double fmin = kInf, fmax = -kInf;
    for_closed_cylinder(g, cyl, [&](std::size_t s, int k) {
        fmin = std::min(fmin, f.at(s, k));
        fmax = std::max(fmax, f.at(s, k));
    });
    const double osc = fmax - fmin;
    const double lam = cal.c0 * d * d * osc;
    const double u0 = evaluate(u, point);
    const double f0 = evaluate(f, point);
    double sup = 0.0;
    for (const auto& node : parabolic_boundary_nodes(g, cyl)) sup = std::max(sup, u.at(node));
    const int n = g.dim();
    const double bound = f0 * d * d / (2.0 * n + 1.0);

    rep.values["lambda"] = lam;
    rep.values["f_oscillation"] = osc;
    rep.values["u_center"] = u0;
    rep.values["f_center"] = f0;
    rep.values["sup_boundary"] = sup;
    rep.values["bound"] = bound;
    rep.premise = u0 > 2.0 * lam && f0 > 0.0;
    if (!rep.premise) rep.premise_note = u0 > 2.0 * lam ? "f(x0,t0) <= 0" : "u(x0,t0) <= 2 lambda";
    rep.criteria.push_back(Criterion::make("sup_boundary", sup, ">=", bound));
    rep.target = bound;
    rep.measured = sup;
    rep.bound = bound;
    rep.ratio = bound > 0.0 ? sup / bound : kNaN;
    recompute_status(rep);
    return rep;
}

bool Region::contains(const Vec& x, double t) const {
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12) return false;
    for (Eigen::Index a = 0; a < x.size(); ++a)
        if (x[a] < lo[a] - 1e-12 || x[a] > hi[a] + 1e-12) return false;
    return true;
}

VerificationReport check_weak_nondegeneracy(const std::vector<ScalarField>& us, const std::vector<ScalarField>& fs,
                                            const Region& K, const ScalarField* u_limit) {
    if (us.size() != fs.size() || us.empty()) throw ConfigError("weak nondegeneracy: need matching nonempty u and f runs");
    VerificationReport rep;
    rep.check = "weak_nondegeneracy";
    std::vector<std::string> digests;
    auto sup_on_K = [&](const ScalarField& u) {
        const Grid& g = u.grid();
        double m = 0.0;
        bool any = false;
        for (std::size_t s = 0; s < g.spatial_count(); ++s) {
            const Vec x = g.position(s);
            for (int k = 0; k < g.time_count(); ++k) {
                if (!K.contains(x, g.time(k))) continue;
                any = true;
                m = std::max(m, u.at(s, k));
            }
        }
        if (!any) throw ConfigError("weak nondegeneracy: region K contains no grid node");
        return m;
    };
    if (u_limit) {
        const double lim = sup_on_K(*u_limit);
        rep.values["u_limit_sup"] = lim;
        if (lim > 1e-12) {
            rep.premise = false;
            rep.premise_note = "K meets the positivity set of the limit";
        }
    }
    std::vector<double> tau, sup;
    for (std::size_t m = 0; m < us.size(); ++m) {
        digests.push_back(field_digest(us[m]));
        tau.push_back(fs[m].max() - fs[m].min());
        sup.push_back(sup_on_K(us[m]));
    }
    rep.inputs_digest = combine_digests(digests);
    rep.series["tau"] = tau;
    rep.series["sup_K"] = sup;
    double c = 0.0;
    bool any_tau = false;
    for (std::size_t m = 0; m < tau.size(); ++m) {
        if (tau[m] > 0.0) {
            any_tau = true;
            c = std::max(c, sup[m] / tau[m]);
        } else {
            rep.criteria.push_back(Criterion::make("sup_K_zero_tau[" + std::to_string(m) + "]", sup[m], "<=", 1e-12));
        }
    }
    const double slope = any_tau ? loglog_slope(tau, sup) : kNaN;
    rep.values["constant"] = c;
    rep.values["slope"] = slope;
    if (any_tau) rep.criteria.push_back(Criterion::make("constant_finite", c, "<", kInf));
    rep.target = 1.0;
    rep.measured = slope;
    rep.bound = c;
    rep.ratio = kNaN;
    recompute_status(rep);
    return rep;
}

VerificationReport check_decay_dichotomy(const ModulusCurve& m_curve, const ModulusCurve& sigma_curve,
                                         const Calibration& cal, double r_check) {
    cal.validate();
    if (m_curve.size() == 0) throw ConfigError("decay dichotomy: empty M curve");
    VerificationReport rep;
    rep.check = "decay_dichotomy";
    rep.hard = true;
    std::vector<double> rs, mv, mlv, sv, prem, b1, b2;
    int checked = 0, held = 0;
    for (double r : m_curve.radii) {
        if (r < r_check * (1.0 - 1e-9)) continue;
        if (cal.lambda * r < m_curve.radii.front() * (1.0 - 1e-9)) continue;
        const double M = m_curve.at(r);
        const double Ml = m_curve.at(std::max(cal.lambda * r, m_curve.radii.front()));
        const double s = sigma_curve.at(r);
        const bool premise = M <= cal.m0;
        const bool vacuous = M <= 1e-10;
        const bool first = vacuous || Ml < cal.mu * M;
        const bool second = M < cal.c0 * s;
        rs.push_back(r);
        mv.push_back(M);
        mlv.push_back(Ml);
        sv.push_back(s);
        prem.push_back(premise ? 1.0 : 0.0);
        b1.push_back(first ? 1.0 : 0.0);
        b2.push_back(second ? 1.0 : 0.0);
        if (!premise) continue;
        ++checked;
        const double r1 = vacuous ? 0.0 : Ml / (cal.mu * M);
        const double r2 = s > 0.0 ? M / (cal.c0 * s) : kInf;
        auto c = Criterion::make(radius_tag("dichotomy", r), std::min(r1, r2), "<", 1.0);
        if (c.holds) ++held;
        rep.criteria.push_back(c);
    }
    rep.ladder = rs;
    rep.series["m"] = mv;
    rep.series["m_lambda"] = mlv;
    rep.series["sigma"] = sv;
    rep.series["premise"] = prem;
    rep.series["branch_contract"] = b1;
    rep.series["branch_data"] = b2;
    rep.values["checked"] = checked;
    rep.values["held"] = held;
    const double frac = checked > 0 ? static_cast<double>(held) / checked : kNaN;
    rep.values["pass_fraction"] = frac;
    if (rs.empty()) {
        rep.premise = false;
        rep.premise_note = "no ladder radius with lambda r on the ladder";
    } else if (checked == 0) {
        rep.premise = false;
        rep.premise_note = "M(r) > M0 at every checked radius";
    }
    rep.target = 1.0;
    rep.measured = frac;
    rep.bound = cal.m0;
    rep.ratio = rs.empty() ? kNaN : mv.back() / cal.m0;
    recompute_status(rep);
    return rep;
}

RegularCurves regular_curves(const ScalarField& u, const ScalarField& f, const CheckOptions& opts) {
    RegularCurves rc;
    rc.f0 = evaluate(f, opts.center);
    if (!(rc.f0 > 0.0)) return rc;
    const auto L = ladder_for(u.grid(), opts.ladder);
    rc.m = n_reg_curve(u, opts.center, opts.p, L, rc.f0, &rc.normals);
    rc.m.kind = CurveKind::m_reg;
    for (double& v : rc.m.values) v /= rc.f0;
    rc.m.values = running_max(rc.m.values);
    rc.sigma = sigma(f, opts.center, opts.p, L);
    for (double& v : rc.sigma.values) v /= rc.f0;
    return rc;
}

Classification classify_regular(const ScalarField& u, const ScalarField& f, const CheckOptions& opts) {
    Classification c;
    const double f0 = evaluate(f, opts.center);
    const int n = u.grid().dim();
    c.nu = Vec::Zero(n);
    if (!(f0 > 0.0)) return c;
    c.applicable = true;
    std::vector<double> L;
    for (double r : ladder_for(u.grid(), opts.ladder))
        if (r <= opts.cal.r0 * (1.0 + 1e-9)) L.push_back(r);
    if (L.empty()) throw ConfigError("classification: no ladder radius in [4h, r0]");
    std::vector<Vec> normals;
    const auto curve = n_reg_curve(u, opts.center, opts.p, L, f0, &normals);
    c.m_r0 = max_of(curve.values) / f0;
    c.regular = c.m_r0 <= opts.cal.m0;
    c.nu = normals.front();
    return c;
}

VerificationReport check_regular_point(const ScalarField& u, const ScalarField& f, const CheckOptions& opts) {
    opts.cal.validate();
    const Grid& g = u.grid();
    VerificationReport rep;
    rep.check = "regular_point";
    rep.inputs_digest = combine_digests({field_digest(u), field_digest(f)});
    const auto rc = regular_curves(u, f, opts);
    rep.values["f0"] = rc.f0;
    if (!(rc.f0 > 0.0)) {
        rep.premise = false;
        rep.premise_note = "f(center) <= 0";
        rep.target = opts.cal.m0;
        rep.measured = rep.bound = rep.ratio = kNaN;
        recompute_status(rep);
        return rep;
    }
    const auto& L = rc.m.radii;
    rep.ladder = L;
    double m_r0 = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (L[i] <= opts.cal.r0 * (1.0 + 1e-9)) {
            m_r0 = std::max(m_r0, rc.m.values[i]);
            any = true;
        }
    if (!any) throw ConfigError("regular point: no ladder radius in [4h, r0]");
    const Vec nu = rc.normals.front();
    const HalfSpaceProfile P0{nu, rc.f0};
    std::vector<double> e(L.size()), bound(L.size()), ratio(L.size());
    parallel_for(L.size(), [&](std::size_t i) {
        e[i] = half_space_residual(cylinder_samples(u, Cylinder{opts.center, L[i]}), P0, opts.p) / rc.f0;
    });
    for (std::size_t i = 0; i < L.size(); ++i) {
        bound[i] = L[i] <= 1.0 ? dini_bound(m_r0, rc.sigma, L[i], opts.cal.lambda, opts.cal.mu) : kNaN;
        ratio[i] = bound[i] > 0.0 ? e[i] / bound[i] : kNaN;
    }
    rep.series["m_reg"] = rc.m.values;
    rep.series["sigma"] = rc.sigma.values;
    rep.series["error"] = e;
    rep.series["bound"] = bound;
    rep.series["ratio"] = ratio;
    const double slope = middle_quartile_slope(L, e);
    rep.values["m_r0"] = m_r0;
    rep.values["regular"] = m_r0 <= opts.cal.m0 ? 1.0 : 0.0;
    rep.values["slope"] = slope;
    rep.values["ratio_band"] = band(L, ratio, 2.0 * g.r_min(), opts.cal.r0);
    for (int a = 0; a < nu.size(); ++a) rep.values["nu" + std::to_string(a + 1)] = nu[a];
    rep.criteria.push_back(Criterion::make("m_reg(r0)", m_r0, "<=", opts.cal.m0));
    if (opts.expected)
        rep.criteria.push_back(Criterion::make("slope_error", std::abs(slope - *opts.expected), "<=", opts.tolerance));
    rep.target = opts.cal.m0;
    rep.measured = m_r0;
    rep.bound = opts.cal.m0;
    rep.ratio = m_r0 / opts.cal.m0;
    recompute_status(rep);
    return rep;
}

}  // namespace obstlab
