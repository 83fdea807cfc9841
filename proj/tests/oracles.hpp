#pragma once

// Reference computations used only by tests. They take a different route from
// the library: unscaled coordinates, dense QR or KKT solves, golden-section
// search instead of bisection, brute-force loops instead of running maxima.

#include "obstlab/grid.hpp"
#include "obstlab/heat.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using obstlab::CylinderSamples;

inline int family_size(int n) { return 1 + n + n * (n + 1) / 2 + 1; }

// Unscaled monomials: 1, y_i, 1/2 y_i^2, y_i y_j (i<j), s.
inline Eigen::RowVectorXd monomials(const obstlab::Vec& y, double s) {
    const int n = static_cast<int>(y.size());
    Eigen::RowVectorXd row(family_size(n));
    int j = 0;
    row[j++] = 1.0;
    for (int i = 0; i < n; ++i) row[j++] = y[i];
    for (int i = 0; i < n; ++i) row[j++] = 0.5 * y[i] * y[i];
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) row[j++] = y[i] * y[k];
    row[j++] = s;
    return row;
}

inline double scaled_residual(const CylinderSamples& q, const std::function<double(const CylinderSamples::Sample&)>& model,
                              double p = 2.0) {
    double acc = 0.0, wsum = 0.0;
    for (const auto& s : q.samples) {
        acc += s.w * std::pow(std::abs(s.value - model(s)), p);
        wsum += s.w;
    }
    const double r = q.cylinder.r;
    return std::pow(acc / wsum, 1.0 / p) / (r * r);
}

enum class Family { free, heat_equals };

// Weighted least squares over the quadratic family, optionally with the linear
// constraint tr(c) - m = heat imposed through a KKT system.
inline double dense_fit_residual(const CylinderSamples& q, Family fam, double heat = 0.0) {
    const int n = static_cast<int>(q.cylinder.center.x.size());
    const int m = family_size(n);
    const auto N = static_cast<Eigen::Index>(q.samples.size());
    Eigen::MatrixXd A(N, m);
    Eigen::VectorXd b(N);
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto& s = q.samples[static_cast<std::size_t>(k)];
        const double sw = std::sqrt(s.w);
        A.row(k) = sw * monomials(s.y, s.s);
        b[k] = sw * s.value;
    }
    Eigen::VectorXd beta;
    if (fam == Family::free) {
        beta = A.householderQr().solve(b);
    } else {
        Eigen::RowVectorXd cons = Eigen::RowVectorXd::Zero(m);
        for (int i = 0; i < n; ++i) cons[1 + n + i] = 1.0;
        cons[m - 1] = -1.0;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + 1, m + 1);
        K.topLeftCorner(m, m) = A.transpose() * A;
        K.block(0, m, m, 1) = cons.transpose();
        K.block(m, 0, 1, m) = cons;
        Eigen::VectorXd rhs(m + 1);
        rhs.head(m) = A.transpose() * b;
        rhs[m] = heat;
        beta = K.fullPivLu().solve(rhs).head(m);
    }
    return scaled_residual(q, [&](const CylinderSamples::Sample& s) { return monomials(s.y, s.s).dot(beta); });
}

// Nonnegative amplitude of kappa * 1/2 (y.nu)_+^2 by a one-column QR solve.
inline double dense_half_space_residual(const CylinderSamples& q, const obstlab::Vec& nu) {
    const auto N = static_cast<Eigen::Index>(q.samples.size());
    Eigen::MatrixXd A(N, 1);
    Eigen::VectorXd b(N);
    auto phi = [&](const obstlab::Vec& y) {
        const double d = std::max(0.0, y.dot(nu));
        return 0.5 * d * d;
    };
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto& s = q.samples[static_cast<std::size_t>(k)];
        const double sw = std::sqrt(s.w);
        A(k, 0) = sw * phi(s.y);
        b[k] = sw * s.value;
    }
    double kappa = A.colPivHouseholderQr().solve(b)[0];
    kappa = std::max(0.0, kappa);
    return scaled_residual(q, [&](const CylinderSamples::Sample& s) { return kappa * phi(s.y); });
}

// Golden-section minimisation of a unimodal function on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct ConstantFit {
    double value;
    double c;
};

inline ConstantFit golden_omega_tilde(const CylinderSamples& q, double p) {
    double lo = q.samples.front().value, hi = lo, wsum = 0.0;
    for (const auto& s : q.samples) {
        lo = std::min(lo, s.value);
        hi = std::max(hi, s.value);
        wsum += s.w;
    }
    auto obj = [&](double c) {
        double acc = 0.0;
        for (const auto& s : q.samples) acc += s.w * std::pow(std::abs(s.value - c), p);
        return acc / wsum;
    };
    const double c = golden_min(obj, lo, hi);
    return {std::pow(obj(c), 1.0 / p), c};
}

// sup over the first i+1 entries, recomputed from scratch for every i.
inline std::vector<double> brute_running_sup(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double m = v[0];
        for (std::size_t j = 0; j <= i; ++j) m = v[j] > m ? v[j] : m;
        out[i] = m;
    }
    return out;
}

// Least-squares slope of ln y on ln x over [lo, hi] of the index range.
inline double loglog_fit(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(hi - lo + 1), 2);
    Eigen::VectorXd b(A.rows());
    for (std::size_t i = lo; i <= hi; ++i) {
        A(static_cast<Eigen::Index>(i - lo), 0) = 1.0;
        A(static_cast<Eigen::Index>(i - lo), 1) = std::log(x[i]);
        b[static_cast<Eigen::Index>(i - lo)] = std::log(y[i]);
    }
    return A.householderQr().solve(b)[1];
}

}  // namespace oracle
