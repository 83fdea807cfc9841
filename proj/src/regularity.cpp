#include "obstlab/regularity.hpp"

#include "obstlab/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace obstlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CylinderSamples samples_of(const ScalarField& u, const SpaceTimePoint& center, double r) {
    return cylinder_samples(u, Cylinder{center, r});
}

double scaled_norm(const CylinderSamples& q, double p, const std::function<double(const CylinderSamples::Sample&)>& model) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
    double acc = 0.0;
    if (p == 2.0) {
        for (const auto& s : q.samples) {
            const double d = s.value - model(s);
            acc += s.w * d * d;
        }
    } else {
        for (const auto& s : q.samples) acc += s.w * std::pow(std::abs(s.value - model(s)), p);
    }
    const double r = q.cylinder.r;
    return std::pow(acc / q.total_weight, 1.0 / p) / (r * r);
}

std::vector<double> usable_ladder(const Grid& g, const std::vector<double>& radii) {
    auto out = truncate_ladder(radii, g.r_min());
    if (out.empty()) throw ConfigError("radius ladder has no entry >= r_min = 4h");
    return out;
}

template <class F>
ModulusCurve ladder_curve(CurveKind kind, const std::vector<double>& radii, F&& eval) {
    ModulusCurve c;
    c.kind = kind;
    c.radii = radii;
    c.values.assign(radii.size(), 0.0);
    parallel_for(radii.size(), [&](std::size_t i) { c.values[i] = eval(radii[i]); });
    return c;
}

// Design row of the scaled basis. Diagonal quadratic columns absorb the time
// column when the heat value is fixed.
int basis_size(int n, bool constrained) { return 1 + n + n + n * (n - 1) / 2 + (constrained ? 0 : 1); }

void basis_row(const Vec& xi, double tau, bool constrained, Eigen::VectorXd& row) {
    const int n = static_cast<int>(xi.size());
    int j = 0;
    row[j++] = 1.0;
    for (int i = 0; i < n; ++i) row[j++] = xi[i];
    for (int i = 0; i < n; ++i) row[j++] = 0.5 * xi[i] * xi[i] + (constrained ? tau : 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) row[j++] = xi[i] * xi[k];
    if (!constrained) row[j++] = tau;
}

Poly2 unpack(const Eigen::VectorXd& beta, int n, double r, bool constrained, double heat) {
    Poly2 P = Poly2::zero(n);
    const double r2 = r * r;
    int j = 0;
    P.a = beta[j++];
    for (int i = 0; i < n; ++i) P.b[i] = beta[j++] / r;
    for (int i = 0; i < n; ++i) P.c(i, i) = beta[j++] / r2;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) {
            P.c(i, k) = P.c(k, i) = beta[j++] / r2;
        }
    P.m = constrained ? P.c.trace() - heat : beta[j++] / r2;
    return P;
}

}  // namespace

double omega(const ScalarField& f, const SpaceTimePoint& center, double rho, double p) {
    const double f0 = evaluate(f, center);
    const auto q = samples_of(f, center, rho);
    double acc = 0.0;
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
    for (const auto& s : q.samples) acc += s.w * std::pow(std::abs(s.value - f0), p);
    return std::pow(acc / q.total_weight, 1.0 / p);
}

ModulusCurve omega_curve(const ScalarField& f, const SpaceTimePoint& center, double p,
                         const std::vector<double>& radii) {
    return ladder_curve(CurveKind::omega, usable_ladder(f.grid(), radii),
                        [&](double r) { return omega(f, center, r, p); });
}

ModulusCurve sigma(const ScalarField& f, const SpaceTimePoint& center, double p,
                   const std::vector<double>& radii) {
    ModulusCurve c = omega_curve(f, center, p, radii);
    c.kind = CurveKind::sigma;
    c.values = running_max(c.values);
    return c;
}

OmegaTilde omega_tilde(const CylinderSamples& q, double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
    if (q.samples.empty()) throw DomainError("omega_tilde: empty cylinder");
    double c = 0.0;
    if (p == 2.0) {
        for (const auto& s : q.samples) c += s.w * s.value;
        c /= q.total_weight;
    } else {
        // d/dc of the objective is -p sum w sign(v-c)|v-c|^(p-1), decreasing in c.
        double lo = q.samples.front().value, hi = lo;
        for (const auto& s : q.samples) {
            lo = std::min(lo, s.value);
            hi = std::max(hi, s.value);
        }
        const double span = hi - lo;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + span); ++it) {
            const double mid = 0.5 * (lo + hi);
            double g = 0.0;
            for (const auto& s : q.samples) {
                const double d = s.value - mid;
                g += s.w * std::copysign(std::pow(std::abs(d), p - 1.0), d);
            }
            (g > 0.0 ? lo : hi) = mid;
        }
        c = 0.5 * (lo + hi);
    }
    double acc = 0.0;
    for (const auto& s : q.samples) acc += s.w * std::pow(std::abs(s.value - c), p);
    return {std::pow(acc / q.total_weight, 1.0 / p), c};
}

OmegaTilde omega_tilde(const ScalarField& f, const SpaceTimePoint& center, double r, double p) {
    return omega_tilde(samples_of(f, center, r), p);
}

ModulusCurve omega_tilde_curve(const ScalarField& f, const SpaceTimePoint& center, double p,
                               const std::vector<double>& radii) {
    return ladder_curve(CurveKind::omega_tilde, usable_ladder(f.grid(), radii),
                        [&](double r) { return omega_tilde(f, center, r, p).value; });
}

double poly2_residual(const CylinderSamples& q, const Poly2& poly, double p) {
    return scaled_norm(q, p, [&](const CylinderSamples::Sample& s) { return poly(s.y, s.s); });
}

Poly2Fit fit_poly2(const CylinderSamples& q, double p, FitConstraint constraint) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
    if (q.samples.empty()) throw DomainError("fit_poly2: empty cylinder");
    const int n = static_cast<int>(q.cylinder.center.x.size());
    const bool constrained = constraint.kind != ConstraintKind::free;
    const double heat = constraint.heat_value();
    const double r = q.cylinder.r;
    const int m = basis_size(n, constrained);
    const std::size_t N = q.samples.size();

    // Scaled design matrix and target z = u + heat * s.
    Eigen::MatrixXd X(N, m);
    Eigen::VectorXd z(N), w(N);
    Eigen::VectorXd row(m);
    double scale = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const auto& s = q.samples[k];
        basis_row(s.y / r, s.s / (r * r), constrained, row);
        X.row(static_cast<Eigen::Index>(k)) = row.transpose();
        z[k] = s.value + (constrained ? heat * s.s : 0.0);
        w[k] = s.w / q.total_weight;
        scale = std::max(scale, std::abs(z[k]));
    }

    auto solve = [&](const Eigen::VectorXd& weights) {
        const Eigen::MatrixXd G = X.transpose() * weights.asDiagonal() * X;
        const Eigen::VectorXd rhs = X.transpose() * (weights.asDiagonal() * z);
        return Eigen::VectorXd(G.ldlt().solve(rhs));
    };
    auto objective = [&](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd res = z - X * beta;
        double acc = 0.0;
        for (std::size_t k = 0; k < N; ++k) acc += w[k] * std::pow(std::abs(res[k]), p);
        return acc;
    };

    Poly2Fit out;
    Eigen::VectorXd beta = solve(w);
    if (p != 2.0) {
        const double floor = 1e-9 * (scale > 0.0 ? scale : 1.0);
        const double damping = p > 2.0 ? 1.0 / (p - 1.0) : 1.0;
        Eigen::VectorXd best = beta;
        double best_obj = objective(beta);
        double prev_obj = best_obj;
        out.converged = false;
        Eigen::VectorXd iw(N);
        for (int it = 1; it <= 500; ++it) {
            const Eigen::VectorXd res = z - X * beta;
            for (std::size_t k = 0; k < N; ++k) iw[k] = w[k] * std::pow(std::max(std::abs(res[k]), floor), p - 2.0);
            const Eigen::VectorXd next = beta + damping * (solve(iw) - beta);
            const double step = (next - beta).cwiseAbs().maxCoeff();
            beta = next;
            out.iterations = it;
            const double obj = objective(beta);
            out.gap = prev_obj - obj;
            prev_obj = obj;
            if (obj < best_obj) {
                best_obj = obj;
                best = beta;
            }
            if (step <= 1e-8 * (1.0 + beta.cwiseAbs().maxCoeff())) {
                out.converged = true;
                break;
            }
        }
        beta = best;
    }
    out.poly = unpack(beta, n, r, constrained, heat);
    out.residual = poly2_residual(q, out.poly, p);
    return out;
}

Poly2Fit fit_poly2(const ScalarField& u, const SpaceTimePoint& center, double r, double p,
                   FitConstraint constraint) {
    return fit_poly2(samples_of(u, center, r), p, constraint);
}

double n_tilde(const ScalarField& u, const SpaceTimePoint& center, double r, double p) {
    return fit_poly2(u, center, r, p, FitConstraint::free()).residual;
}

double n_hat(const ScalarField& u, const ScalarField& f, const SpaceTimePoint& center, double r, double p) {
    if (!u.grid().same_shape(f.grid())) throw ConfigError("n_hat: u and f grids differ");
    const double cr = omega_tilde(f, center, r, p).c;
    return fit_poly2(u, center, r, p, FitConstraint::heat_equals(cr)).residual;
}

ModulusCurve n_tilde_curve(const ScalarField& u, const SpaceTimePoint& center, double p,
                           const std::vector<double>& radii) {
    return ladder_curve(CurveKind::n_tilde, usable_ladder(u.grid(), radii),
                        [&](double r) { return n_tilde(u, center, r, p); });
}

ModulusCurve n_hat_curve(const ScalarField& u, const ScalarField& f, const SpaceTimePoint& center, double p,
                         const std::vector<double>& radii) {
    return ladder_curve(CurveKind::n_hat, usable_ladder(u.grid(), radii),
                        [&](double r) { return n_hat(u, f, center, r, p); });
}

double half_space_residual(const CylinderSamples& q, const HalfSpaceProfile& profile, double p) {
    return scaled_norm(q, p, [&](const CylinderSamples::Sample& s) { return profile(s.y); });
}

HalfSpaceFit fit_half_space_amplitude(const CylinderSamples& q, const Vec& nu, double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
    std::vector<double> phi(q.samples.size());
    for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = HalfSpaceProfile{nu, 1.0}(q.samples[k].y);
    double kappa = 0.0;
    if (p == 2.0) {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k) {
            num += q.samples[k].w * phi[k] * q.samples[k].value;
            den += q.samples[k].w * phi[k] * phi[k];
        }
        kappa = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    } else {
        auto slope = [&](double kap) {
            double g = 0.0;
            for (std::size_t k = 0; k < phi.size(); ++k) {
                const double d = q.samples[k].value - kap * phi[k];
                g -= q.samples[k].w * phi[k] * std::copysign(std::pow(std::abs(d), p - 1.0), d);
            }
            return g;
        };
        double hi = 0.0;
        for (std::size_t k = 0; k < phi.size(); ++k)
            if (phi[k] > 0.0) hi = std::max(hi, q.samples[k].value / phi[k]);
        if (hi > 0.0 && slope(0.0) < 0.0) {
            double lo = 0.0;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (slope(mid) < 0.0 ? lo : hi) = mid;
            }
            kappa = 0.5 * (lo + hi);
        }
    }
    HalfSpaceFit out{{nu, kappa}, 0.0};
    out.residual = half_space_residual(q, out.profile, p);
    return out;
}

NRegResult n_reg(const CylinderSamples& q, double p, double kappa) {
    if (!(kappa >= 0.0)) throw ConfigError("n_reg: kappa must be nonnegative");
    const int n = static_cast<int>(q.cylinder.center.x.size());
    auto J = [&](const Vec& nu) { return half_space_residual(q, {nu, kappa}, p); };

    std::vector<Vec> scan;
    if (n == 1) {
        scan = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    } else if (n == 2) {
        for (int j = 0; j < 256; ++j) {
            const double th = 2.0 * std::numbers::pi * j / 256.0;
            Vec v(2);
            v << std::cos(th), std::sin(th);
            scan.push_back(v);
        }
    } else {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int j = 0; j < 512; ++j) {
            const double z = 1.0 - (2.0 * j + 1.0) / 512.0;
            const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vec v(3);
            v << rr * std::cos(golden * j), rr * std::sin(golden * j), z;
            scan.push_back(v);
        }
    }
    std::vector<double> vals(scan.size());
    for (std::size_t j = 0; j < scan.size(); ++j) vals[j] = J(scan[j]);
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    const std::size_t jbest = static_cast<std::size_t>(mn - vals.begin());

    double umax = 0.0;
    for (const auto& s : q.samples) umax = std::max(umax, std::abs(s.value));
    const double r2 = q.cylinder.r * q.cylinder.r;
    NRegResult out{*mn, scan[jbest], false};
    if (*mx - *mn <= 1e-12 * std::max(1.0, *mx) || umax <= 1e-14 * std::max(kappa, 1.0) * r2) {
        out.degenerate = true;
        return out;
    }
    if (n == 1) return out;

    if (n == 2) {
        const double step = 2.0 * std::numbers::pi / 256.0;
        const double th0 = 2.0 * std::numbers::pi * jbest / 256.0;
        auto Jt = [&](double th) {
            Vec v(2);
            v << std::cos(th), std::sin(th);
            return J(v);
        };
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = th0 - step, b = th0 + step;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = Jt(c), fd = Jt(d);
        while (b - a > 1e-10) {
            if (fc < fd) {
                b = d; d = c; fd = fc;
                c = b - g * (b - a); fc = Jt(c);
            } else {
                a = c; c = d; fc = fd;
                d = a + g * (b - a); fd = Jt(d);
            }
        }
        const double th = 0.5 * (a + b);
        const double val = Jt(th);
        if (val < out.value) {
            out.value = val;
            out.nu = Vec(2);
            out.nu << std::cos(th), std::sin(th);
        }
        return out;
    }

    // n = 3: Nelder-Mead in the tangent plane of the best lattice direction.
    const Vec base = scan[jbest];
    Vec e1 = (std::abs(base[0]) < 0.9 ? Vec::Unit(3, 0) : Vec::Unit(3, 1));
    e1 = (e1 - e1.dot(base) * base).normalized();
    const Vec e2 = Vec(Eigen::Vector3d(base[0], base[1], base[2]).cross(Eigen::Vector3d(e1[0], e1[1], e1[2])));
    auto chart = [&](const Eigen::Vector2d& a) { return Vec((base + a[0] * e1 + a[1] * e2).normalized()); };
    std::array<Eigen::Vector2d, 3> simplex{Eigen::Vector2d(0, 0), Eigen::Vector2d(0.08, 0), Eigen::Vector2d(0, 0.08)};
    std::array<double, 3> fs{};
    for (int i = 0; i < 3; ++i) fs[i] = J(chart(simplex[i]));
    for (int it = 0; it < 400; ++it) {
        std::array<int, 3> ord{0, 1, 2};
        std::sort(ord.begin(), ord.end(), [&](int x, int y) { return fs[x] < fs[y]; });
        const int lo = ord[0], mid = ord[1], hi = ord[2];
        if (fs[hi] - fs[lo] <= 1e-12 * std::max(1.0, std::abs(fs[lo])) &&
            (simplex[hi] - simplex[lo]).norm() < 1e-9)
            break;
        const Eigen::Vector2d cen = 0.5 * (simplex[lo] + simplex[mid]);
        const Eigen::Vector2d xr = cen + (cen - simplex[hi]);
        const double fr = J(chart(xr));
        if (fr < fs[lo]) {
            const Eigen::Vector2d xe = cen + 2.0 * (cen - simplex[hi]);
            const double fe = J(chart(xe));
            if (fe < fr) { simplex[hi] = xe; fs[hi] = fe; }
            else { simplex[hi] = xr; fs[hi] = fr; }
        } else if (fr < fs[mid]) {
            simplex[hi] = xr; fs[hi] = fr;
        } else {
            const Eigen::Vector2d xc = cen + 0.5 * (simplex[hi] - cen);
            const double fcn = J(chart(xc));
            if (fcn < fs[hi]) {
                simplex[hi] = xc; fs[hi] = fcn;
            } else {
                for (int i : {mid, hi}) {
                    simplex[i] = simplex[lo] + 0.5 * (simplex[i] - simplex[lo]);
                    fs[i] = J(chart(simplex[i]));
                }
            }
        }
    }
    const int ib = static_cast<int>(std::min_element(fs.begin(), fs.end()) - fs.begin());
    if (fs[ib] < out.value) {
        out.value = fs[ib];
        out.nu = chart(simplex[ib]);
    }
    return out;
}

NRegResult n_reg(const ScalarField& u, const SpaceTimePoint& center, double rho, double p, double kappa) {
    return n_reg(samples_of(u, center, rho), p, kappa);
}

ModulusCurve n_reg_curve(const ScalarField& u, const SpaceTimePoint& center, double p,
                         const std::vector<double>& radii, double kappa, std::vector<Vec>* normals) {
    const auto ladder = usable_ladder(u.grid(), radii);
    std::vector<NRegResult> res(ladder.size());
    parallel_for(ladder.size(), [&](std::size_t i) { res[i] = n_reg(u, center, ladder[i], p, kappa); });
    ModulusCurve c;
    c.kind = CurveKind::n_reg;
    c.radii = ladder;
    for (const auto& r : res) c.values.push_back(r.value);
    if (normals) {
        normals->clear();
        for (const auto& r : res) normals->push_back(r.nu);
    }
    return c;
}

ModulusCurve m_reg(const ScalarField& u, const SpaceTimePoint& center, double p,
                   const std::vector<double>& radii, double kappa) {
    ModulusCurve c = n_reg_curve(u, center, p, radii, kappa);
    c.kind = CurveKind::m_reg;
    c.values = running_max(c.values);
    return c;
}

// ---------------------------------------------------------------------------

namespace {

struct TailModel {
    std::string kind = "zero";  // zero | power | log
    double coef = 0.0;          // A or B
    double exponent = 0.0;      // gamma or q
    bool dini = true;

    double value(double s) const {
        if (kind == "power") return coef * std::pow(s, exponent);
        if (kind == "log") return coef / std::pow(std::log(std::numbers::e / s), exponent);
        return 0.0;
    }
    // integral_0^r value(s)/s ds
    double integral(double r) const {
        if (!dini) return kInf;
        if (kind == "power") return coef * std::pow(r, exponent) / exponent;
        if (kind == "log") return coef / ((exponent - 1.0) * std::pow(std::log(std::numbers::e / r), exponent - 1.0));
        return 0.0;
    }
};

// Fits ln v = a + b x on three points; returns (a, b, sum of squared residuals).
std::array<double, 3> line_fit(const std::array<double, 3>& x, const std::array<double, 3>& y) {
    const double mx = (x[0] + x[1] + x[2]) / 3.0, my = (y[0] + y[1] + y[2]) / 3.0;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < 3; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double b = sxx > 0.0 ? sxy / sxx : 0.0;
    const double a = my - b * mx;
    double ss = 0.0;
    for (int i = 0; i < 3; ++i) ss += std::pow(y[i] - a - b * x[i], 2);
    return {a, b, ss};
}

TailModel fit_tail(const ModulusCurve& curve) {
    TailModel t;
    if (curve.size() < 3) {
        if (curve.size() == 0 || curve.values.front() <= 0.0) return t;
        // Too few points for an exponent: treat as flat, which is not integrable at 0.
        t.kind = "power";
        t.coef = curve.values.front();
        t.dini = false;
        return t;
    }
    if (curve.values[0] <= 0.0) return t;  // nondecreasing curves vanish below a zero
    std::array<double, 3> ls{}, lls{}, lv{};
    for (int i = 0; i < 3; ++i) {
        if (!(curve.values[i] > 0.0)) return t;
        ls[i] = std::log(curve.radii[i]);
        lls[i] = std::log(std::log(std::numbers::e / curve.radii[i]));
        lv[i] = std::log(curve.values[i]);
    }
    const auto pw = line_fit(ls, lv);
    const bool log_ok = curve.radii[2] < 1.0;
    const auto lg = log_ok ? line_fit(lls, lv) : std::array<double, 3>{0, 0, kInf};
    if (lg[2] < pw[2]) {
        t.kind = "log";
        t.coef = std::exp(lg[0]);
        t.exponent = -lg[1];
        t.dini = t.exponent > 1.01;
    } else {
        t.kind = "power";
        t.coef = std::exp(pw[0]);
        t.exponent = pw[1];
        t.dini = t.exponent > 0.01;
    }
    return t;
}

// Curve extended below the ladder by the tail model and above it by its last value.
double extended(const ModulusCurve& curve, const TailModel& tail, double s) {
    if (s < curve.radii.front()) return tail.value(s);
    if (s > curve.radii.back()) return curve.values.back();
    return curve.at(s);
}

// Trapezoid in ln s of g(s) over [a, b] using the ladder nodes inside it.
double log_trapezoid(const ModulusCurve& curve, double a, double b, const std::function<double(double)>& g) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{a};
    for (double r : curve.radii)
        if (r > a && r < b) pts.push_back(r);
    pts.push_back(b);
    double acc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        acc += 0.5 * (g(pts[i - 1]) + g(pts[i])) * std::log(pts[i] / pts[i - 1]);
    return acc;
}

}  // namespace

DiniResult dini_integral(const ModulusCurve& curve, double r) {
    if (curve.size() == 0) throw ConfigError("dini_integral: empty curve");
    if (!(r > 0.0)) throw ConfigError("dini_integral: r must be positive");
    const TailModel tail = fit_tail(curve);
    DiniResult out;
    out.tail_model = tail.kind;
    out.exponent = tail.exponent;
    out.dini = tail.dini;
    const double r0 = std::min(r, curve.radii.front());
    out.tail = tail.integral(r0);
    const double top = std::min(r, curve.radii.back());
    out.ladder_part = log_trapezoid(curve, r0, top, [&](double s) { return curve.at(s); });
    if (r > curve.radii.back()) out.ladder_part += curve.values.back() * std::log(r / curve.radii.back());
    out.value = out.dini ? out.ladder_part + out.tail : kInf;
    return out;
}

double dini_exponent(double lambda, double mu) {
    if (!(lambda > 0.0 && lambda < 1.0) || !(mu > 0.0 && mu < 1.0))
        throw ConfigError("lambda and mu must lie in (0, 1)");
    return std::log(mu) / std::log(lambda);
}

double dini_bound(double n1, const ModulusCurve& curve, double rho, double lambda, double mu, double c0_prime) {
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("dini_bound: rho must lie in (0, 1]");
    const double alpha = dini_exponent(lambda, mu);
    const TailModel tail = fit_tail(curve);
    const double inner = dini_integral(curve, rho).value;

    // integral_rho^1 w(r) r^-(1+alpha) dr = integral of w r^-alpha d(ln r)
    auto g = [&](double s) { return extended(curve, tail, s) * std::pow(s, -alpha); };
    double outer = 0.0;
    const double lo = curve.radii.front(), hi = std::min(1.0, curve.radii.back());
    if (rho < lo) {
        const int m = 64;
        const double a = rho, b = std::min(lo, 1.0);
        double prev = g(a);
        for (int i = 1; i <= m; ++i) {
            const double s1 = a * std::pow(b / a, static_cast<double>(i) / m);
            const double s0 = a * std::pow(b / a, static_cast<double>(i - 1) / m);
            const double cur = g(s1);
            outer += 0.5 * (prev + cur) * std::log(s1 / s0);
            prev = cur;
        }
    }
    outer += log_trapezoid(curve, std::max(rho, lo), hi, g);
    if (hi < 1.0) outer += curve.values.back() * (std::pow(std::max(hi, rho), -alpha) - 1.0) / alpha;

    const double ra = std::pow(rho, alpha);
    return c0_prime * (n1 * ra + inner + ra * outer);
}

}  // namespace obstlab
