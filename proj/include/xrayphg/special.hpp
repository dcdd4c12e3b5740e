#ifndef XRAYPHG_SPECIAL_HPP
#define XRAYPHG_SPECIAL_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xrayphg/chebyshev.hpp"
#include "xrayphg/errors.hpp"
#include "xrayphg/quadrature.hpp"

namespace xrayphg {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Gamma
// ---------------------------------------------------------------------------

/// Principal-branch log Gamma. Lanczos (g=7, 9 coefficients) for
/// Re z >= 1/2, downward recurrence lnG(z) = lnG(z+m) - sum log(z+j)
/// otherwise; the recurrence keeps all branch cuts on (-inf, 0].
inline cplx log_gamma(cplx z) {
    static const double lanczos[9] = {
        0.99999999999980993,    676.5203681218851,    -1259.1392167224028,
        771.32342877765313,     -176.61502916214059,  12.507343278686905,
        -0.13857109526572012,   9.9843695780195716e-6, 1.5056327351493116e-7};

    if (z.real() < 0.5) {
        const double nearest = std::round(z.real());
        if (nearest <= 0.0 && std::abs(z - cplx(nearest, 0.0)) < 1e-12)
            throw pole_error("log_gamma: pole at z=" + std::to_string(nearest));
        const int m = static_cast<int>(std::ceil(0.5 - z.real()));
        cplx shift = 0.0;
        for (int j = 0; j < m; ++j) shift += std::log(z + cplx(j, 0.0));
        return log_gamma(z + cplx(m, 0.0)) - shift;
    }

    cplx a = lanczos[0];
    for (int i = 1; i < 9; ++i) a += lanczos[i] / (z - 1.0 + cplx(i, 0.0));
    const cplx t = z + 6.5; // z - 1 + g + 1/2
    return 0.5 * std::log(2.0 * pi) + (z - 0.5) * std::log(t) - t + std::log(a);
}

inline cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

/// Binomial coefficient as a double (exact for the ranges used here).
inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
    return c;
}

// ---------------------------------------------------------------------------
// Diagonal Beta B(z,z) and its pole / zero data
// ---------------------------------------------------------------------------

/// Value of a meromorphic function together with pole bookkeeping.
struct MeromorphicSample {
    struct NearPole {
        cplx location;
        int order = 1;
        cplx leading_coefficient; // coefficient of (z - location)^{-order}
    };
    cplx z;
    cplx value{};
    std::optional<NearPole> near_pole;

    bool is_pole() const { return near_pole.has_value(); }
};

/// Residue of B(z,z) at z = -n: 2 C(2n,n).
inline double beta_diag_residue(int n) {
    return 2.0 * binomial(2 * n, n);
}

/// Slope of the simple zero of B(z,z) at z = -n-1/2:
/// lim B(z,z)/(z+n+1/2) = -(4^{2n+2}/(n+1)) pi / C(2n+2,n+1).
inline double beta_diag_zero_slope(int n) {
    return -std::pow(4.0, 2 * n + 2) / (n + 1.0) * pi / binomial(2 * n + 2, n + 1);
}

/// B(z,z) = Gamma(z)^2 / Gamma(2z).  Within 1e-6 of a pole the Laurent data
/// is reported instead of a raw value; the simple zeros at -N0-1/2 are
/// evaluated through their slope when closer than 1e-7.
inline MeromorphicSample beta_diag(cplx z) {
    MeromorphicSample out;
    out.z = z;

    const double nr = std::round(z.real());
    if (nr <= 0.0 && std::abs(z - cplx(nr, 0.0)) < 1e-6) {
        const int n = static_cast<int>(-nr);
        out.near_pole = MeromorphicSample::NearPole{cplx(nr, 0.0), 1,
                                                    beta_diag_residue(n)};
        return out;
    }
    const double hr = std::round(z.real() + 0.5) - 0.5; // nearest half-integer
    if (hr <= -0.5 && std::abs(z - cplx(hr, 0.0)) < 1e-7) {
        const int n = static_cast<int>(-hr - 0.5);
        out.value = beta_diag_zero_slope(n) * (z - cplx(hr, 0.0));
        return out;
    }
    out.value = std::exp(2.0 * log_gamma(z) - log_gamma(2.0 * z));
    return out;
}

// ---------------------------------------------------------------------------
// Symmetric profiles on [0,1]
// ---------------------------------------------------------------------------

/// A profile f on [0,1] with f(u) = f(1-u), held as a Chebyshev series.
/// smoothness_order bounds how many derivatives the continuation machinery
/// may consume.  An analytic derivative can be supplied to bypass spectral
/// differentiation.
class SymmetricProfile {
public:
    static SymmetricProfile from_function(const std::function<double(double)>& f,
                                          int smoothness_order = 32,
                                          int max_degree = 64) {
        SymmetricProfile p;
        p.series_ = ChebSeries::fit_auto(f, 1e-14, max_degree);
        p.smoothness_ = smoothness_order;
        check_symmetry(f);
        return p;
    }

    static SymmetricProfile from_function(const std::function<double(double)>& f,
                                          const std::function<double(double)>& fprime,
                                          int smoothness_order = 32,
                                          int max_degree = 64) {
        SymmetricProfile p = from_function(f, smoothness_order, max_degree);
        p.analytic_derivative_ = fprime;
        return p;
    }

    static SymmetricProfile from_coefficients(std::vector<double> cheb_coeffs,
                                              int smoothness_order = 32) {
        SymmetricProfile p;
        p.series_ = ChebSeries(std::move(cheb_coeffs));
        p.smoothness_ = smoothness_order;
        check_symmetry([&p](double u) { return p.series_(u); });
        return p;
    }

    double operator()(double u) const { return series_(u); }
    const ChebSeries& series() const { return series_; }
    int smoothness_order() const { return smoothness_ - consumed_; }

    /// The profile (u - 1/2) f'(u), consuming one derivative.
    SymmetricProfile recursion_derivative() const {
        if (smoothness_order() < 1)
            throw smoothness_error("SymmetricProfile: derivative budget exhausted");
        SymmetricProfile q;
        if (analytic_derivative_) {
            auto fd = analytic_derivative_;
            q.series_ = ChebSeries::fit_auto(
                [fd](double u) { return (u - 0.5) * fd(u); }, 1e-14,
                series_.degree() + 1);
        } else {
            q.series_ = series_.derivative().times_u_minus_half();
        }
        q.smoothness_ = smoothness_;
        q.consumed_ = consumed_ + 1;
        return q;
    }

private:
    static void check_symmetry(const std::function<double(double)>& f) {
        double scale = 1.0, worst = 0.0;
        for (int i = 0; i <= 20; ++i) {
            const double u = i / 40.0; // [0, 1/2]
            const double a = f(u), b = f(1.0 - u);
            scale = std::max(scale, std::abs(a));
            worst = std::max(worst, std::abs(a - b));
        }
        if (worst > 1e-12 * scale)
            throw std::invalid_argument("SymmetricProfile: f(u) != f(1-u), gap " +
                                        std::to_string(worst));
    }

    ChebSeries series_;
    std::function<double(double)> analytic_derivative_;
    int smoothness_ = 32;
    int consumed_ = 0;
};

// ---------------------------------------------------------------------------
// Generalized Beta functional beta[f](z) = int_0^1 f(u) (u(1-u))^{z-1} du
// ---------------------------------------------------------------------------

namespace detail {

/// Direct quadrature, valid for Re z > 0.
inline cplx beta_functional_quad(const ChebSeries& f, cplx z, double tol = 1e-13) {
    return tanh_sinh_01([&](double u, double umc) -> cplx {
        const cplx w = (z - 1.0) * (std::log(u) + std::log(umc));
        return f(u) * std::exp(w);
    }, tol, 11);
}

/// Continuation by beta[f](z) = (2/z) ((2z+1) beta[f](z+1) + beta[(u-1/2)f'](z+1)).
inline cplx beta_functional_eval(const SymmetricProfile& f, cplx z) {
    if (z.real() > 0.25) return beta_functional_quad(f.series(), z);
    if (f.smoothness_order() < 1)
        throw smoothness_error("gen_beta: continuation to Re z <= 0 needs another derivative");
    const SymmetricProfile g = f.recursion_derivative();
    return (2.0 / z) * ((2.0 * z + 1.0) * beta_functional_eval(f, z + 1.0) +
                        beta_functional_eval(g, z + 1.0));
}

} // namespace detail

/// Residue of beta[f] at z = -n.  Base case (n=0) is
/// 2 (beta[f](1) + beta[(u-1/2)f'](1)); each further step uses the recursion
/// Res_{-n}[f] = (-2/n) ((1-2n) Res_{-(n-1)}[f] + Res_{-(n-1)}[(u-1/2)f']).
inline double gen_beta_residue(const SymmetricProfile& f, int n) {
    if (n >= f.smoothness_order())
        throw smoothness_error("gen_beta_residue: needs n < smoothness_order");
    if (n == 0) {
        const SymmetricProfile g = f.recursion_derivative();
        return 2.0 * (f.series().integral01() + g.series().integral01());
    }
    const SymmetricProfile g = f.recursion_derivative();
    return (-2.0 / n) * ((1.0 - 2.0 * n) * gen_beta_residue(f, n - 1) +
                         gen_beta_residue(g, n - 1));
}

/// beta[f](z) with meromorphic continuation to Re z > -smoothness_order.
/// Near the simple poles at -N0 (within 1e-6) the Laurent data is reported.
inline MeromorphicSample gen_beta(const SymmetricProfile& f, cplx z) {
    MeromorphicSample out;
    out.z = z;
    if (z.real() <= -static_cast<double>(f.smoothness_order()))
        throw smoothness_error("gen_beta: Re z <= -smoothness_order");

    const double nr = std::round(z.real());
    if (nr <= 0.0 && std::abs(z - cplx(nr, 0.0)) < 1e-6) {
        const int n = static_cast<int>(-nr);
        out.near_pole = MeromorphicSample::NearPole{cplx(nr, 0.0), 1,
                                                    gen_beta_residue(f, n)};
        return out;
    }
    out.value = detail::beta_functional_eval(f, z);
    return out;
}

/// Convenience overload for the constant profile f == c.
inline MeromorphicSample gen_beta(double c, cplx z) {
    static const SymmetricProfile one =
        SymmetricProfile::from_function([](double) { return 1.0; });
    MeromorphicSample s = gen_beta(one, z);
    s.value *= c;
    if (s.near_pole) s.near_pole->leading_coefficient *= c;
    return s;
}

} // namespace xrayphg

#endif
