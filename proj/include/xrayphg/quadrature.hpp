#ifndef XRAYPHG_QUADRATURE_HPP
#define XRAYPHG_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <map>
#include <vector>

#include "xrayphg/errors.hpp"

namespace xrayphg {

inline constexpr double pi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// Gauss-Legendre rules
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> nodes;   // on (-1,1), ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on (-1,1). Nodes by Newton iteration on P_n,
/// cached per n (read-mostly cache, guarded).
inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

/// Single-panel Gauss-Legendre integral of f over [a,b].
template <class F>
auto integrate_gl(F&& f, double a, double b, int n = 64) {
    const GaussRule& r = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    using R = decltype(f(a));
    R sum{};
    for (int i = 0; i < n; ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
    return sum * half;
}

/// Node-doubling Gauss-Legendre: stop when two refinements agree below tol.
template <class F>
auto integrate_gl_adaptive(F&& f, double a, double b, double tol = 1e-11,
                           int n0 = 64, int max_doublings = 6) {
    auto prev = integrate_gl(f, a, b, n0);
    int n = n0;
    for (int k = 0; k < max_doublings; ++k) {
        n *= 2;
        auto cur = integrate_gl(f, a, b, n);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw nonconvergence_error("integrate_gl_adaptive: no convergence at n=" + std::to_string(n));
}

// ---------------------------------------------------------------------------
// tanh-sinh (double exponential) rule on (0,1)
// ---------------------------------------------------------------------------
//
// Nodes u_k = 1/(1+exp(-2y_k)), y_k = (pi/2) sinh(k h).  The callable
// receives both u and 1-u so integrands with endpoint factors u^a (1-u)^b
// can be evaluated without cancellation.

template <class F>
auto tanh_sinh_01(F&& f, double tol = 1e-12, int max_level = 10,
                  bool* converged = nullptr) {
    using R = decltype(f(0.5, 0.5));
    const double t_max = 6.0;

    auto node_term = [&](double t, R& out) -> bool {
        const double y = 0.5 * pi * std::sinh(t);
        const double e = std::exp(-2.0 * y);
        const double u = 1.0 / (1.0 + e);
        const double umc = e / (1.0 + e); // 1-u, exact to rounding
        // du/dt = (pi/2) cosh(t) * sech^2(y) / 2 = pi cosh(t) u (1-u)
        const double w = pi * std::cosh(t) * u * umc;
        if (w < 1e-300 || umc == 0.0) return false;
        out = w * f(u, umc);
        return true;
    };

    double h = 0.5;
    R term{};
    R sum{};
    if (node_term(0.0, term)) sum = term;
    for (double t = h; t <= t_max; t += h) {
        if (node_term(t, term)) sum += term;
        if (node_term(-t, term)) sum += term;
    }
    R prev = sum * h;
    if (converged) *converged = false;

    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        R add{};
        for (double t = h; t <= t_max; t += 2.0 * h) {
            if (node_term(t, term)) add += term;
            if (node_term(-t, term)) add += term;
        }
        R cur = prev * 0.5 + add * h;
        if (level >= 3 && std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) {
            if (converged) *converged = true;
            return cur;
        }
        prev = cur;
    }
    return prev;
}

/// Strict variant: throws if the level cap is hit before tolerance.
template <class F>
auto tanh_sinh_01_strict(F&& f, double tol = 1e-12, int max_level = 10) {
    bool ok = false;
    auto v = tanh_sinh_01(f, tol, max_level, &ok);
    if (!ok) throw nonconvergence_error("tanh_sinh_01: level cap reached before tolerance");
    return v;
}

/// tanh-sinh on (a,b); callable receives x only (use for mild singularities).
template <class F>
auto tanh_sinh_ab(F&& f, double a, double b, double tol = 1e-12, int max_level = 10) {
    const double len = b - a;
    return tanh_sinh_01([&](double u, double umc) {
        return f(a + len * u, len * umc);   // second arg: distance to b
    }, tol, max_level) * len;
}

namespace detail {
template <class F, class R>
void adaptive_quad_rec(F& f, double a, double b, double tol, int depth, R whole, R& acc) {
    const double mid = 0.5 * (a + b);
    const R left = integrate_gl(f, a, mid, 16);
    const R right = integrate_gl(f, mid, b, 16);
    if (depth >= 24 || std::abs(left + right - whole) <= tol) {
        acc += left + right;
        return;
    }
    adaptive_quad_rec(f, a, mid, 0.5 * tol, depth + 1, left, acc);
    adaptive_quad_rec(f, mid, b, 0.5 * tol, depth + 1, right, acc);
}
} // namespace detail

/// Recursive bisection Gauss rule; resolves isolated kinks and mild interior
/// singularities at cost concentrated near them.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double tol = 1e-10) {
    using R = decltype(f(a));
    R acc{};
    detail::adaptive_quad_rec(f, a, b, tol, 0, integrate_gl(f, a, b, 16), acc);
    return acc;
}

// ---------------------------------------------------------------------------
// Periodic trapezoid rule (spectrally accurate for smooth periodic f)
// ---------------------------------------------------------------------------

template <class F>
auto periodic_trapezoid(F&& f, double a, double b, int n) {
    using R = decltype(f(a));
    const double h = (b - a) / n;
    R sum{};
    for (int k = 0; k < n; ++k) sum += f(a + k * h);
    return sum * h;
}

/// Doubling periodic trapezoid until two refinements agree.
template <class F>
auto periodic_trapezoid_adaptive(F&& f, double a, double b, double tol = 1e-10,
                                 int n0 = 512, int max_doublings = 5) {
    auto prev = periodic_trapezoid(f, a, b, n0);
    int n = n0;
    for (int k = 0; k < max_doublings; ++k) {
        n *= 2;
        auto cur = periodic_trapezoid(f, a, b, n);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// ---------------------------------------------------------------------------
// Smooth cutoff 1_{[0,eps/3]} <= chi <= 1_{[0,2eps/3]}
// ---------------------------------------------------------------------------

/// C^infinity bump: 1 on [0,eps/3], 0 on [2eps/3,inf), monotone in between.
inline double smooth_cutoff(double tau, double eps) {
    if (tau <= eps / 3.0) return 1.0;
    if (tau >= 2.0 * eps / 3.0) return 0.0;
    const double s = (tau - eps / 3.0) / (eps / 3.0); // in (0,1)
    auto g = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    return g(1.0 - s) / (g(s) + g(1.0 - s));
}

} // namespace xrayphg

#endif
