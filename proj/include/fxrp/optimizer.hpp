#pragma once

// Quasi-Newton (BFGS) minimisation with central-difference gradients.
// Objectives may return +inf to mark infeasible points; the line search
// backs away from them.

#include "fxrp/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace fxrp {

struct BfgsOptions {
    int max_iter = 500;
    double rel_tol = 1e-9;    // relative change in the objective
    double grad_step = 1e-5;  // relative finite-difference step
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::string message;
};

namespace detail {

inline double fd_step(double x, double typical, double rel) {
    const double h = rel * std::max(std::abs(x), typical);
    volatile double xp = x + h;  // make x + h - x exact
    return xp - x;
}

}  // namespace detail

/// Central differences with step rel * max(|x_i|, typical_i); one-sided where
/// a neighbour is infeasible. `curvature`, when given, receives the diagonal
/// second differences.
template <class Fn>
Eigen::VectorXd numeric_gradient(Fn&& f, const Eigen::VectorXd& x, double fx, const Eigen::VectorXd& typical,
                                 double rel = 1e-5, Eigen::VectorXd* curvature = nullptr) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    if (curvature) curvature->resize(n);
    Eigen::VectorXd xt = x;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = detail::fd_step(x(i), typical(i), rel);
        xt(i) = x(i) + h;
        const double fp = f(xt);
        xt(i) = x(i) - h;
        const double fm = f(xt);
        xt(i) = x(i);
        const bool okp = std::isfinite(fp), okm = std::isfinite(fm);
        if (okp && okm)
            g(i) = (fp - fm) / (2.0 * h);
        else if (okp)
            g(i) = (fp - fx) / h;
        else if (okm)
            g(i) = (fx - fm) / h;
        else
            g(i) = 0.0;
        if (curvature) (*curvature)(i) = okp && okm ? (fp - 2.0 * fx + fm) / (h * h) : std::nan("");
    }
    return g;
}

/// Hessian by second differences of function values. Empty when any
/// evaluation is infeasible.
template <class Fn>
std::optional<Eigen::MatrixXd> numeric_hessian(Fn&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& typical,
                                               double rel = 1e-4) {
    const Eigen::Index n = x.size();
    const double fx = f(x);
    if (!std::isfinite(fx)) return std::nullopt;
    Eigen::VectorXd h(n);
    for (Eigen::Index i = 0; i < n; ++i) h(i) = detail::fd_step(x(i), typical(i), rel);
    Eigen::MatrixXd H(n, n);
    Eigen::VectorXd xt = x;
    const auto eval = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
        xt = x;
        xt(i) += si * h(i);
        xt(j) += sj * h(j);
        return f(xt);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        const double fp = eval(i, 1, i, 0), fm = eval(i, -1, i, 0);
        if (!std::isfinite(fp) || !std::isfinite(fm)) return std::nullopt;
        H(i, i) = (fp - 2.0 * fx + fm) / (h(i) * h(i));
        for (Eigen::Index j = 0; j < i; ++j) {
            const double fpp = eval(i, 1, j, 1), fpm = eval(i, 1, j, -1);
            const double fmp = eval(i, -1, j, 1), fmm = eval(i, -1, j, -1);
            if (!std::isfinite(fpp) || !std::isfinite(fpm) || !std::isfinite(fmp) || !std::isfinite(fmm))
                return std::nullopt;
            H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
        }
    }
    return H;
}

template <class Fn>
BfgsResult minimize_bfgs(Fn&& f, Eigen::VectorXd x, const Eigen::VectorXd& typical, BfgsOptions opts = {}) {
    const Eigen::Index n = x.size();
    BfgsResult res;
    double fx = f(x);
    if (!std::isfinite(fx)) fail(ErrorKind::numerical, "optimizer started at an infeasible point");

    Eigen::VectorXd curv;
    Eigen::VectorXd g = numeric_gradient(f, x, fx, typical, opts.grad_step, &curv);
    const auto scaled_identity = [&](const Eigen::VectorXd& c) {
        Eigen::MatrixXd H0 = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            H0(i, i) = std::isfinite(c(i)) && c(i) > 0.0 ? 1.0 / c(i) : typical(i) * typical(i);
        return H0;
    };
    Eigen::MatrixXd H = scaled_identity(curv);
    bool fresh_H = true;
    int small_changes = 0;

    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        Eigen::VectorXd d = -H * g;
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            H = scaled_identity(curv);
            fresh_H = true;
            d = -H * g;
            slope = g.dot(d);
            if (!(slope < 0.0)) {
                res.converged = true;
                res.message = "zero gradient";
                break;
            }
        }

        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            x_new = x + step * d;
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!fresh_H) {
                H = scaled_identity(curv);
                fresh_H = true;
                continue;
            }
            // No descent along the steepest scaled direction: numerically stationary.
            res.converged = true;
            res.message = "line search cannot improve";
            break;
        }

        Eigen::VectorXd g_new = numeric_gradient(f, x_new, f_new, typical, opts.grad_step, &curv);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
            H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
            fresh_H = false;
        }
        const double change = std::abs(fx - f_new) / std::max(std::abs(f_new), 1.0);
        x = std::move(x_new);
        fx = f_new;
        g = std::move(g_new);
        small_changes = change < opts.rel_tol ? small_changes + 1 : 0;
        if (small_changes >= 2) {
            res.converged = true;
            res.message = "relative objective change below tolerance";
            ++res.iterations;
            break;
        }
    }
    if (!res.converged) res.message = "iteration cap reached";
    res.x = std::move(x);
    res.f = fx;
    return res;
}

}  // namespace fxrp
