#include "obstlab/cli.hpp"

#include "obstlab/freeboundary.hpp"
#include "obstlab/io.hpp"
#include "obstlab/obstacle.hpp"
#include "obstlab/regularity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace obstlab {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::ordered_json;

const std::vector<std::string> kAllChecks = {"bmo",           "vmo",          "taylor",        "quadratic-growth",
                                             "nondegeneracy", "decay-dichotomy", "regular-point"};

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    os << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

template <class T>
T field_as(const json& j, const std::string& name) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config field '" + name + "' has the wrong type");
    }
}

void reject_unknown(const json& j, const std::string& prefix, std::initializer_list<const char*> known) {
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw ConfigError("unknown config field '" + prefix + k + "'");
    }
}

std::string format_center(const SpaceTimePoint& c) {
    std::string s;
    for (Eigen::Index a = 0; a < c.x.size(); ++a) s += (a ? "," : "") + format_double(c.x[a]);
    return s + "," + format_double(c.t);
}

void record_config(const ExperimentConfig& cfg) { write_text(cfg.output / "config.json", config_to_json(cfg)); }

ScalarField load_or_fail(const fs::path& path, const char* what) {
    if (!fs::exists(path)) throw ConfigError(std::string(what) + " field file not found: " + path.string());
    return read_field(path);
}

fs::path u_path(const ExperimentConfig& cfg) { return cfg.u_file.empty() ? cfg.output / "u.prfd" : cfg.u_file; }
fs::path f_path(const ExperimentConfig& cfg) { return cfg.f_file.empty() ? cfg.output / "f.prfd" : cfg.f_file; }

CheckOptions check_options(const ExperimentConfig& cfg, const SpaceTimePoint& center) {
    CheckOptions o;
    o.center = center;
    o.p = cfg.p;
    o.ladder = parse_ladder(cfg.effective_ladder());
    o.cal = cfg.cal;
    o.expected = cfg.expected;
    o.tolerance = cfg.tolerance;
    return o;
}

std::vector<VerificationReport> run_checks(const ExperimentConfig& cfg, const ScalarField& u, const ScalarField& f) {
    const auto checks = cfg.checks.empty() ? kAllChecks : cfg.checks;
    const auto centers = cfg.effective_centers();
    std::vector<VerificationReport> out;
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
        const auto opts = check_options(cfg, centers[ci]);
        for (const auto& name : checks) {
            VerificationReport rep;
            if (name == "bmo") rep = check_bmo(u, f, opts);
            else if (name == "vmo") rep = check_vmo(u, f, opts);
            else if (name == "taylor") rep = check_taylor(u, f, opts);
            else if (name == "quadratic-growth") rep = check_quadratic_growth(u, opts);
            else if (name == "nondegeneracy") rep = check_nondegeneracy(u, f, centers[ci], cfg.d, cfg.cal, cfg.p);
            else if (name == "decay-dichotomy") {
                const auto rc = regular_curves(u, f, opts);
                if (rc.f0 > 0.0) {
                    rep = check_decay_dichotomy(rc.m, rc.sigma, cfg.cal, 2.0 * u.grid().r_min());
                } else {
                    rep.check = "decay_dichotomy";
                    rep.premise = false;
                    rep.premise_note = "f(center) <= 0";
                    rep.hard = true;
                    rep.target = 1.0;
                    rep.measured = rep.bound = rep.ratio = std::nan("");
                    recompute_status(rep);
                }
                rep.inputs_digest = combine_digests({field_digest(u), field_digest(f)});
            } else if (name == "regular-point") rep = check_regular_point(u, f, opts);
            else throw ConfigError("unknown check '" + name + "' (verify.checks)");
            rep.values["center_index"] = static_cast<double>(ci);
            out.push_back(std::move(rep));
        }
    }
    return out;
}

int write_reports(const ExperimentConfig& cfg, const std::vector<VerificationReport>& reports) {
    int code = 0;
    for (const auto& r : reports) {
        const int ci = static_cast<int>(r.values.at("center_index"));
        write_text(cfg.output / "reports" / (r.check + "_c" + std::to_string(ci) + ".json"), report_record(r));
        if (r.hard && r.status == CheckStatus::fail) code = 3;
    }
    write_text(cfg.output / "summary.csv", summary_csv(reports));
    return code;
}

ScalarField resolve_f(const ExperimentConfig& cfg, const Grid& grid) {
    const auto& s = cfg.f_source;
    if (s.rfind("const:", 0) == 0) {
        try {
            return ScalarField::constant(grid, std::stod(s.substr(6)));
        } catch (const std::logic_error&) {
            throw ConfigError("solve.f: cannot parse constant in '" + s + "'");
        }
    }
    if (s == "case") return manufacture_rhs(grid, cfg.case_id, cfg.params);
    if (s.rfind("case:", 0) == 0) return manufacture_rhs(grid, s.substr(5), cfg.params);
    if (s.rfind("file:", 0) == 0) {
        auto f = read_field(s.substr(5));
        if (!f.grid().same_shape(grid)) throw ConfigError("solve.f: file grid does not match config grid");
        return f;
    }
    throw ConfigError("solve.f must be const:<v>, case, case:<id> or file:<path> (got '" + s + "')");
}

ScalarField resolve_data(const ExperimentConfig& cfg, const Grid& grid) {
    const auto& s = cfg.data_source;
    if (s == "zero") return ScalarField::constant(grid, 0.0);
    if (s == "case") return manufacture(grid, cfg.case_id, cfg.params).u;
    if (s.rfind("file:", 0) == 0) {
        auto d = read_field(s.substr(5));
        if (!d.grid().same_shape(grid)) throw ConfigError("solve.data: file grid does not match config grid");
        return d;
    }
    throw ConfigError("solve.data must be zero, case or file:<path> (got '" + s + "')");
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    Grid g(grid);
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("config field 'p' must lie in (1, inf)");
    cal.validate();
    if (kind != "heat" && kind != "obstacle") throw ConfigError("config field 'solve.kind' must be heat or obstacle");
    const auto radii = parse_ladder(effective_ladder());
    if (radii.front() < g.r_min() * (1.0 - 1e-9))
        throw ConfigError("config field 'ladder': radii must be >= 4h = " + format_double(g.r_min()));
    for (const auto& c : checks)
        if (std::find(kAllChecks.begin(), kAllChecks.end(), c) == kAllChecks.end())
            throw ConfigError("config field 'verify.checks': unknown check '" + c + "'");
    if (!(d > 0.0)) throw ConfigError("config field 'verify.d' must be positive");
    if (!(tolerance > 0.0)) throw ConfigError("config field 'verify.tolerance' must be positive");
    if (stride == 0) throw ConfigError("config field 'sweep.stride' must be positive");
    if (eps_pos < 0.0) throw ConfigError("config field 'sweep.eps_pos' must be nonnegative");
    for (const auto& c : effective_centers())
        if (c.x.size() != grid.n) throw ConfigError("config field 'centers': dimension does not match grid.n");
}

std::vector<SpaceTimePoint> ExperimentConfig::effective_centers() const {
    if (!centers.empty()) return centers;
    return {{Vec::Zero(grid.n), grid.t_final}};
}

std::string ExperimentConfig::effective_ladder() const {
    if (!ladder.empty()) return ladder;
    const double rmin = 4.0 * grid.h;
    const double rmax = std::max(rmin, 0.5 * std::min(grid.R, std::sqrt(grid.T)));
    return "log:" + format_double(rmin) + ":" + format_double(rmax) + ":24";
}

SpaceTimePoint parse_center(const std::string& text, int n, double t_default) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("");
        } catch (const std::logic_error&) {
            throw ConfigError("center: cannot parse '" + text + "'");
        }
    }
    if (static_cast<int>(v.size()) != n && static_cast<int>(v.size()) != n + 1)
        throw ConfigError("center '" + text + "' needs " + std::to_string(n) + " coordinates (optionally plus t)");
    SpaceTimePoint c{Vec(n), t_default};
    for (int a = 0; a < n; ++a) c.x[a] = v[a];
    if (static_cast<int>(v.size()) == n + 1) c.t = v[n];
    return c;
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(j, "", {"grid", "case", "centers", "p", "ladder", "calibration", "output", "seed", "solve",
                           "verify", "sweep", "inputs"});
    ExperimentConfig c;
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        reject_unknown(g, "grid.", {"n", "R", "T", "h", "dt", "t_final"});
        if (g.contains("n")) c.grid.n = field_as<int>(g["n"], "grid.n");
        if (g.contains("R")) c.grid.R = field_as<double>(g["R"], "grid.R");
        if (g.contains("T")) c.grid.T = field_as<double>(g["T"], "grid.T");
        if (g.contains("h")) c.grid.h = field_as<double>(g["h"], "grid.h");
        if (g.contains("dt")) c.grid.dt = field_as<double>(g["dt"], "grid.dt");
        if (g.contains("t_final")) c.grid.t_final = field_as<double>(g["t_final"], "grid.t_final");
    }
    if (j.contains("case")) {
        const auto& k = j["case"];
        reject_unknown(k, "case.", {"id", "params"});
        if (k.contains("id")) c.case_id = field_as<std::string>(k["id"], "case.id");
        if (k.contains("params"))
            for (const auto& [name, v] : k["params"].items()) c.params[name] = field_as<double>(v, "case.params." + name);
    }
    if (j.contains("centers")) {
        for (const auto& e : j["centers"]) {
            if (e.is_string()) {
                c.centers.push_back(parse_center(e.get<std::string>(), c.grid.n, c.grid.t_final));
            } else {
                const auto v = field_as<std::vector<double>>(e, "centers");
                std::string s;
                for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
                c.centers.push_back(parse_center(s, c.grid.n, c.grid.t_final));
            }
        }
    }
    if (j.contains("p")) c.p = field_as<double>(j["p"], "p");
    if (j.contains("ladder")) c.ladder = field_as<std::string>(j["ladder"], "ladder");
    if (j.contains("calibration")) {
        const auto& k = j["calibration"];
        reject_unknown(k, "calibration.", {"lambda", "mu", "C0", "M0", "r0"});
        if (k.contains("lambda")) c.cal.lambda = field_as<double>(k["lambda"], "calibration.lambda");
        if (k.contains("mu")) c.cal.mu = field_as<double>(k["mu"], "calibration.mu");
        if (k.contains("C0")) c.cal.c0 = field_as<double>(k["C0"], "calibration.C0");
        if (k.contains("M0")) c.cal.m0 = field_as<double>(k["M0"], "calibration.M0");
        if (k.contains("r0")) c.cal.r0 = field_as<double>(k["r0"], "calibration.r0");
    }
    if (j.contains("output")) c.output = field_as<std::string>(j["output"], "output");
    if (j.contains("seed")) c.seed = field_as<std::uint64_t>(j["seed"], "seed");
    if (j.contains("solve")) {
        const auto& k = j["solve"];
        reject_unknown(k, "solve.", {"kind", "f", "data"});
        if (k.contains("kind")) c.kind = field_as<std::string>(k["kind"], "solve.kind");
        if (k.contains("f")) c.f_source = field_as<std::string>(k["f"], "solve.f");
        if (k.contains("data")) c.data_source = field_as<std::string>(k["data"], "solve.data");
    }
    if (j.contains("verify")) {
        const auto& k = j["verify"];
        reject_unknown(k, "verify.", {"checks", "expected", "tolerance", "d"});
        if (k.contains("checks")) c.checks = field_as<std::vector<std::string>>(k["checks"], "verify.checks");
        if (k.contains("expected") && !k["expected"].is_null())
            c.expected = field_as<double>(k["expected"], "verify.expected");
        if (k.contains("tolerance")) c.tolerance = field_as<double>(k["tolerance"], "verify.tolerance");
        if (k.contains("d")) c.d = field_as<double>(k["d"], "verify.d");
    }
    if (j.contains("sweep")) {
        const auto& k = j["sweep"];
        reject_unknown(k, "sweep.", {"stride", "eps_pos"});
        if (k.contains("stride")) c.stride = field_as<std::size_t>(k["stride"], "sweep.stride");
        if (k.contains("eps_pos")) c.eps_pos = field_as<double>(k["eps_pos"], "sweep.eps_pos");
    }
    if (j.contains("inputs")) {
        const auto& k = j["inputs"];
        reject_unknown(k, "inputs.", {"u", "f"});
        if (k.contains("u")) c.u_file = field_as<std::string>(k["u"], "inputs.u");
        if (k.contains("f")) c.f_file = field_as<std::string>(k["f"], "inputs.f");
    }
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["grid"] = {{"n", c.grid.n}, {"R", c.grid.R}, {"T", c.grid.T}, {"h", c.grid.h}, {"dt", c.grid.dt},
                 {"t_final", c.grid.t_final}};
    json params = json::object();
    for (const auto& [k, v] : c.params) params[k] = v;
    j["case"] = {{"id", c.case_id}, {"params", params}};
    json centers = json::array();
    for (const auto& ctr : c.effective_centers()) centers.push_back(format_center(ctr));
    j["centers"] = centers;
    j["p"] = c.p;
    j["ladder"] = c.effective_ladder();
    j["calibration"] = {{"lambda", c.cal.lambda}, {"mu", c.cal.mu}, {"C0", c.cal.c0}, {"M0", c.cal.m0},
                        {"r0", c.cal.r0}};
    j["output"] = c.output.string();
    j["seed"] = c.seed;
    j["solve"] = {{"kind", c.kind}, {"f", c.f_source}, {"data", c.data_source}};
    j["verify"] = {{"checks", c.checks.empty() ? kAllChecks : c.checks},
                   {"expected", c.expected ? json(*c.expected) : json(nullptr)},
                   {"tolerance", c.tolerance},
                   {"d", c.d}};
    j["sweep"] = {{"stride", c.stride}, {"eps_pos", c.eps_pos}};
    j["inputs"] = {{"u", c.u_file.string()}, {"f", c.f_file.string()}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

int cmd_manufacture(const ExperimentConfig& cfg) {
    cfg.validate();
    record_config(cfg);
    const Grid grid(cfg.grid);
    const auto mc = manufacture(grid, cfg.case_id, cfg.params);
    write_field(cfg.output / "u.prfd", mc.u);
    write_field(cfg.output / "f.prfd", mc.f);
    write_text(cfg.output / "manufacture.json", metadata_record(mc.meta) + "\n");
    return 0;
}

int cmd_solve(const ExperimentConfig& cfg) {
    cfg.validate();
    record_config(cfg);
    const Grid grid(cfg.grid);
    const ScalarField f = resolve_f(cfg, grid);
    const ScalarField data = resolve_data(cfg, grid);
    json j;
    j["kind"] = cfg.kind;
    j["f"] = cfg.f_source;
    j["data"] = cfg.data_source;
    if (cfg.kind == "heat") {
        const auto sol = solve_heat(f, data);
        write_field(cfg.output / "u.prfd", sol.u);
        j["max_residual"] = sol.max_residual;
        j["iterations"] = sol.iterations;
        write_text(cfg.output / "solve.json", j.dump(2) + "\n");
    } else {
        const LcpOptions opts;
        const auto res = solve_obstacle(f, data, opts);
        write_field(cfg.output / "u.prfd", res.u);
        j["manifest"] = json::parse(run_manifest(res, opts));
        for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
        write_text(cfg.output / "solve.json", j.dump(2) + "\n");
    }
    write_field(cfg.output / "f.prfd", f);
    return 0;
}

int cmd_analyze(const ExperimentConfig& cfg) {
    cfg.validate();
    const ScalarField u = load_or_fail(u_path(cfg), "u");
    const ScalarField f = load_or_fail(f_path(cfg), "f");
    if (!u.grid().same_shape(f.grid())) throw ConfigError("inputs: u and f grids differ");
    record_config(cfg);
    const auto radii = parse_ladder(cfg.effective_ladder());
    const auto centers = cfg.effective_centers();
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
        const auto& c = centers[ci];
        const fs::path dir = cfg.output / "curves";
        fs::create_directories(dir);
        const std::string tag = "c" + std::to_string(ci) + "_";
        auto emit = [&](const ModulusCurve& m) {
            write_curve_csv(dir / (tag + std::string(to_string(m.kind)) + ".csv"), m);
        };
        emit(omega_curve(f, c, cfg.p, radii));
        emit(sigma(f, c, cfg.p, radii));
        emit(omega_tilde_curve(f, c, cfg.p, radii));
        emit(n_tilde_curve(u, c, cfg.p, radii));
        emit(n_hat_curve(u, f, c, cfg.p, radii));
        const double f0 = evaluate(f, c);
        if (f0 > 0.0) {
            const auto nr = n_reg_curve(u, c, cfg.p, radii, f0);
            emit(nr);
            ModulusCurve mr = nr;
            mr.kind = CurveKind::m_reg;
            mr.values = running_max(mr.values);
            emit(mr);
        } else {
            std::cerr << "note: f(center " << ci << ") <= 0, n_reg and m_reg skipped\n";
        }
    }
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
    cfg.validate();
    const ScalarField u = load_or_fail(u_path(cfg), "u");
    const ScalarField f = load_or_fail(f_path(cfg), "f");
    if (!u.grid().same_shape(f.grid())) throw ConfigError("inputs: u and f grids differ");
    record_config(cfg);
    return write_reports(cfg, run_checks(cfg, u, f));
}

int cmd_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    const ScalarField u = load_or_fail(u_path(cfg), "u");
    const ScalarField f = load_or_fail(f_path(cfg), "f");
    if (!u.grid().same_shape(f.grid())) throw ConfigError("inputs: u and f grids differ");
    record_config(cfg);
    const auto cloud = extract_free_boundary(u, cfg.eps_pos > 0.0 ? std::optional<double>(cfg.eps_pos) : std::nullopt);
    const auto classified = classify_points(u, f, cloud, check_options(cfg, cfg.effective_centers().front()), cfg.stride);
    write_cloud_csv(cfg.output / "cloud.csv", classified);
    const auto gd = graph_diagnostic(classified, u.grid(), 0);
    json j;
    j["axis"] = gd.axis;
    j["scales"] = gd.scales;
    j["mean_ratio"] = gd.mean_ratio;
    j["max_ratio"] = gd.max_ratio;
    j["counts"] = gd.counts;
    j["slope"] = std::isfinite(gd.slope) ? json(gd.slope) : json(nullptr);
    std::size_t regular = 0, classified_n = 0;
    for (const auto& pt : classified.points) {
        regular += pt.regular ? 1 : 0;
        classified_n += pt.classified ? 1 : 0;
    }
    j["points"] = classified.points.size();
    j["classified"] = classified_n;
    j["regular"] = regular;
    write_text(cfg.output / "graph.json", j.dump(2) + "\n");
    return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
    cfg.validate();
    record_config(cfg);
    std::optional<ScalarField> u, f;
    if (!cfg.u_file.empty()) {
        u = load_or_fail(cfg.u_file, "u");
        f = load_or_fail(f_path(cfg), "f");
    } else {
        auto mc = manufacture(Grid(cfg.grid), cfg.case_id, cfg.params);
        u = std::move(mc.u);
        f = std::move(mc.f);
    }
    const auto reports = run_checks(cfg, *u, *f);
    const int code = write_reports(cfg, reports);

    std::ostringstream os;
    os << "obstlab report\n";
    os << "case: " << cfg.case_id << "\n";
    os << "inputs: u " << field_digest(*u) << ", f " << field_digest(*f) << "\n";
    os << "config: " << combine_digests({config_to_json(cfg)}) << "\n";
    os << "ladder: " << cfg.effective_ladder() << "\n\n";
    std::size_t hard_fail = 0;
    for (const auto& r : reports) {
        os << r.check << " [center " << static_cast<int>(r.values.at("center_index")) << "]: " << to_string(r.status);
        if (r.hard) os << " (hard)";
        os << "\n  measured " << format_double(r.measured) << ", bound " << format_double(r.bound) << ", ratio "
           << format_double(r.ratio) << "\n";
        if (!r.premise) os << "  premise: " << r.premise_note << "\n";
        for (const auto& c : r.criteria)
            if (!c.holds) os << "  failed: " << c.name << " " << format_double(c.lhs) << " " << c.op << " "
                             << format_double(c.rhs) << "\n";
        if (r.hard && r.status == CheckStatus::fail) ++hard_fail;
    }
    os << "\n" << reports.size() << " reports, " << hard_fail << " hard failures\n";
    write_text(cfg.output / "digest.txt", os.str());
    return code;
}

// ---------------------------------------------------------------------------

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> n;
    std::optional<double> R, T, h, dt, t_final;
    std::optional<std::string> case_id;
    std::optional<double> a, kappa, beta, theta, shift, slope;
    std::vector<std::string> params;
    std::vector<std::string> centers;
    std::optional<double> p;
    std::optional<std::string> ladder;
    std::optional<double> lambda, mu, c0, m0, r0;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> kind, f_source, data_source;
    std::vector<std::string> checks;
    std::optional<double> expected, tolerance, d;
    std::optional<std::size_t> stride;
    std::optional<double> eps_pos;
    std::optional<std::string> u_file, f_file;
};

void add_options(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "JSON experiment config");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--n", o.n, "spatial dimension");
    sub->add_option("--R", o.R, "half-width of the box");
    sub->add_option("--T", o.T, "time span");
    sub->add_option("--h", o.h, "mesh size");
    sub->add_option("--dt", o.dt, "time step");
    sub->add_option("--t-final", o.t_final, "final time");
    sub->add_option("--case", o.case_id, "manufactured case id");
    sub->add_option("--a", o.a, "case parameter a");
    sub->add_option("--kappa", o.kappa, "case parameter kappa");
    sub->add_option("--beta", o.beta, "case parameter beta");
    sub->add_option("--theta", o.theta, "case parameter theta");
    sub->add_option("--shift", o.shift, "case parameter shift");
    sub->add_option("--slope", o.slope, "case parameter slope");
    sub->add_option("--param", o.params, "case parameter key=value");
    sub->add_option("--center", o.centers, "analysis center x1,..,xn[,t]");
    sub->add_option("--p", o.p, "Lebesgue exponent");
    sub->add_option("--ladder", o.ladder, "radius ladder log:rmin:rmax:per_decade");
    sub->add_option("--lambda", o.lambda, "calibration lambda");
    sub->add_option("--mu", o.mu, "calibration mu");
    sub->add_option("--C0", o.c0, "calibration C0");
    sub->add_option("--M0", o.m0, "calibration M0");
    sub->add_option("--r0", o.r0, "calibration r0");
    sub->add_option("--seed", o.seed, "seed (recorded; scans are deterministic)");
    sub->add_option("--kind", o.kind, "solve: heat or obstacle");
    sub->add_option("--f", o.f_source, "solve: const:<v> | case | case:<id> | file:<path>");
    sub->add_option("--data", o.data_source, "solve: zero | case | file:<path>");
    sub->add_option("--check", o.checks, "verify: check name (repeatable)");
    sub->add_option("--expected", o.expected, "verify: expected slope or constant");
    sub->add_option("--tolerance", o.tolerance, "verify: tolerance for --expected");
    sub->add_option("--d", o.d, "verify: nondegeneracy radius");
    sub->add_option("--stride", o.stride, "sweep: classify every k-th point");
    sub->add_option("--eps-pos", o.eps_pos, "sweep: positivity threshold");
    sub->add_option("--u-file", o.u_file, "input u field");
    sub->add_option("--f-file", o.f_file, "input f field");
}

ExperimentConfig build_config(const Overrides& o) {
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : config_from_json(read_text(o.config));
    auto set = [](auto& dst, const auto& src) {
        if (src) dst = *src;
    };
    set(c.grid.n, o.n);
    set(c.grid.R, o.R);
    set(c.grid.T, o.T);
    set(c.grid.h, o.h);
    set(c.grid.dt, o.dt);
    set(c.grid.t_final, o.t_final);
    set(c.case_id, o.case_id);
    if (o.a) c.params["a"] = *o.a;
    if (o.kappa) c.params["kappa"] = *o.kappa;
    if (o.beta) c.params["beta"] = *o.beta;
    if (o.theta) c.params["theta"] = *o.theta;
    if (o.shift) c.params["shift"] = *o.shift;
    if (o.slope) c.params["slope"] = *o.slope;
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects key=value (got '" + kv + "')");
        try {
            c.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw ConfigError("--param: cannot parse value in '" + kv + "'");
        }
    }
    if (!o.centers.empty()) {
        c.centers.clear();
        for (const auto& s : o.centers) c.centers.push_back(parse_center(s, c.grid.n, c.grid.t_final));
    }
    set(c.p, o.p);
    set(c.ladder, o.ladder);
    set(c.cal.lambda, o.lambda);
    set(c.cal.mu, o.mu);
    set(c.cal.c0, o.c0);
    set(c.cal.m0, o.m0);
    set(c.cal.r0, o.r0);
    set(c.seed, o.seed);
    if (o.out) c.output = *o.out;
    set(c.kind, o.kind);
    set(c.f_source, o.f_source);
    set(c.data_source, o.data_source);
    if (!o.checks.empty()) c.checks = o.checks;
    if (o.expected) c.expected = *o.expected;
    set(c.tolerance, o.tolerance);
    set(c.d, o.d);
    set(c.stride, o.stride);
    set(c.eps_pos, o.eps_pos);
    if (o.u_file) c.u_file = *o.u_file;
    if (o.f_file) c.f_file = *o.f_file;
    return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"obstlab: numerical lab for the parabolic obstacle problem"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // -h would clash with the mesh option --h
    Overrides o;
    struct Cmd {
        const char* name;
        const char* help;
        int (*fn)(const ExperimentConfig&);
    };
    const Cmd cmds[] = {
        {"manufacture", "write a manufactured case (u, f) to field files", cmd_manufacture},
        {"solve", "solve the heat or obstacle problem", cmd_solve},
        {"analyze", "write regularity curves at the configured centers", cmd_analyze},
        {"verify", "run verification checks and write reports", cmd_verify},
        {"sweep", "extract and classify the free boundary", cmd_sweep},
        {"report", "run the configured checks and write summary.csv and digest.txt", cmd_report},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_options(sub, o);
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return cmds[i].fn(build_config(o));
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace obstlab
