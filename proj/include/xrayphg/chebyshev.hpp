#ifndef XRAYPHG_CHEBYSHEV_HPP
#define XRAYPHG_CHEBYSHEV_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "xrayphg/quadrature.hpp"

namespace xrayphg {

/// Chebyshev series on [0,1] (first kind, argument x = 2u-1).
///
/// Coefficients follow the Clenshaw convention: f(u) = c0/2 + sum_k c_k T_k(x).
class ChebSeries {
public:
    ChebSeries() = default;
    explicit ChebSeries(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

    /// Lobatto node j of the degree-n rule, as a point of [0,1].
    static double node(int j, int n) { return 0.5 * (1.0 + std::cos(pi * j / n)); }

    /// Interpolate given values at the n+1 Lobatto points (index j = 0..n).
    static ChebSeries fit_values(const std::vector<double>& fv) {
        const int n = static_cast<int>(fv.size()) - 1;
        std::vector<double> c(n + 1, 0.0);
        for (int k = 0; k <= n; ++k) {
            double s = 0.5 * (fv[0] + (k % 2 == 0 ? fv[n] : -fv[n]));
            for (int j = 1; j < n; ++j) s += fv[j] * std::cos(pi * j * k / n);
            c[k] = 2.0 * s / n;
        }
        c[n] *= 0.5;
        return ChebSeries(std::move(c));
    }

    /// Interpolate f at n+1 Chebyshev-Lobatto points of [0,1].
    static ChebSeries fit(const std::function<double(double)>& f, int n) {
        std::vector<double> fv(n + 1);
        for (int j = 0; j <= n; ++j) {
            const double x = std::cos(pi * j / n);
            fv[j] = f(0.5 * (1.0 + x));
        }
        std::vector<double> c(n + 1, 0.0);
        for (int k = 0; k <= n; ++k) {
            double s = 0.5 * (fv[0] + (k % 2 == 0 ? fv[n] : -fv[n]));
            for (int j = 1; j < n; ++j) s += fv[j] * std::cos(pi * j * k / n);
            c[k] = 2.0 * s / n;
        }
        c[n] *= 0.5;
        return ChebSeries(std::move(c));
    }

    /// Fit with automatic degree: double n until trailing coefficients fall
    /// below tol relative to the largest, cappedat max_degree.
    static ChebSeries fit_auto(const std::function<double(double)>& f,
                               double tol = 1e-13, int max_degree = 64) {
        int n = 16;
        for (;;) {
            ChebSeries s = fit(f, n);
            double big = 0.0;
            for (double ck : s.c_) big = std::max(big, std::abs(ck));
            double tail = 0.0;
            for (size_t k = s.c_.size() - 3; k < s.c_.size(); ++k)
                tail = std::max(tail, std::abs(s.c_[k]));
            if (tail <= tol * (big + 1e-300) || n >= max_degree) {
                s.trim(tol * big);
                return s;
            }
            n *= 2;
        }
    }

    double operator()(double u) const {
        if (c_.empty()) return 0.0;
        const double x = 2.0 * u - 1.0;
        double b1 = 0.0, b2 = 0.0;
        for (size_t k = c_.size(); k-- > 1;) {
            double b0 = 2.0 * x * b1 - b2 + c_[k];
            b2 = b1;
            b1 = b0;
        }
        return x * b1 - b2 + 0.5 * c_[0];
    }

    /// Series of df/du (factor 2 from the [0,1] -> [-1,1] map).
    ChebSeries derivative() const {
        const int n = static_cast<int>(c_.size()) - 1;
        if (n < 1) return ChebSeries(std::vector<double>{0.0});
        std::vector<double> d(n + 1, 0.0);
        // d_{k-1} = d_{k+1} + 2 k c_k, downward recurrence on [-1,1]
        for (int k = n; k >= 1; --k)
            d[k - 1] = (k + 1 <= n ? d[k + 1] : 0.0) + 2.0 * k * c_[k];
        d.resize(n); // degree drops by one
        for (double& v : d) v *= 2.0;
        return ChebSeries(std::move(d));
    }

    /// Series of (u - 1/2) f(u), i.e. (x/2) f in the [-1,1] variable. Exact.
    ChebSeries times_u_minus_half() const {
        const int n = static_cast<int>(c_.size()) - 1;
        if (n < 0) return ChebSeries();
        // work with actual coefficients D_k (D_0 = c_0/2)
        std::vector<double> D(c_.begin(), c_.end());
        if (!D.empty()) D[0] *= 0.5;
        std::vector<double> out(n + 2, 0.0); // actual coefficients of x*f
        if (n >= 1) out[0] = 0.5 * D[1];
        for (int m = 1; m <= n + 1; ++m) {
            double v = 0.0;
            if (m - 1 == 0) v += D[0];
            else if (m - 1 <= n) v += 0.5 * D[m - 1];
            if (m + 1 <= n) v += 0.5 * D[m + 1];
            out[m] = v;
        }
        out[0] *= 2.0;                       // back to the halved-c0 convention
        for (double& v : out) v *= 0.5;      // (u-1/2) = x/2
        return ChebSeries(std::move(out));
    }

    /// Exact integral over [0,1].
    double integral01() const {
        if (c_.empty()) return 0.0;
        double s = 0.5 * c_[0];
        for (size_t k = 2; k < c_.size(); k += 2)
            s += c_[k] / (1.0 - static_cast<double>(k) * k);
        return s;
    }

    int degree() const { return c_.empty() ? 0 : static_cast<int>(c_.size()) - 1; }
    const std::vector<double>& coefficients() const { return c_; }

    void trim(double tol) {
        while (c_.size() > 1 && std::abs(c_.back()) <= tol) c_.pop_back();
    }

private:
    std::vector<double> c_;
};

} // namespace xrayphg

#endif
