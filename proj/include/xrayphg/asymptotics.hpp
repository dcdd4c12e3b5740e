#ifndef XRAYPHG_ASYMPTOTICS_HPP
#define XRAYPHG_ASYMPTOTICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xrayphg/geometry.hpp"
#include "xrayphg/index_algebra.hpp"
#include "xrayphg/special.hpp"
#include "xrayphg/threading.hpp"
#include "xrayphg/transforms.hpp"

namespace xrayphg {

// ---------------------------------------------------------------------------
// Profiles and fitted expansions
// ---------------------------------------------------------------------------

/// Samples of a boundary or interior profile on a geometric grid of the bdf,
/// taken at a frozen glancing point (or boundary point).
struct ProfileSamples {
    std::vector<double> abscissae; // strictly decreasing toward 0
    std::vector<double> values;
    GlancingChart side;

    static std::vector<double> geometric_grid(double from = 0.3, double to = 1e-4,
                                              double ratio = 0.8) {
        std::vector<double> g;
        for (double t = from; t >= to; t *= ratio) g.push_back(t);
        return g;
    }
};

/// One term of a truncated polyhomogeneous expansion.
struct ExpansionTerm {
    double z = 0.0;
    int k = 0;
    double coeff = 0.0;
    double scaled = 0.0; // coeff times the design-column norm (data share)
};

struct Expansion {
    std::vector<ExpansionTerm> terms; // sorted by (z, k)
    double remainder_exponent = 0.0;
    double fit_residual = 0.0; // relative l2 residual

    double coeff(double z, int k) const {
        for (const auto& t : terms)
            if (std::abs(t.z - z) < 1e-9 && t.k == k) return t.coeff;
        return 0.0;
    }
    double scaled_coeff(double z, int k) const {
        for (const auto& t : terms)
            if (std::abs(t.z - z) < 1e-9 && t.k == k) return std::abs(t.scaled);
        return 0.0;
    }
    /// Present in the data above the absence threshold of the fit.
    bool active(double z, int k, double rel = 1e-6) const {
        double big = 0.0;
        for (const auto& t : terms) big = std::max(big, std::abs(t.scaled));
        return scaled_coeff(z, k) > rel * big;
    }
};

/// Least-squares fit of sum c_{z,k} tau^z (log tau)^k to the samples.
/// Columns are scaled to unit norm; conditioning is measured by SVD and
/// fits with condition > 1e12 (or rank-deficient) are refused.
inline Expansion fit_expansion(const ProfileSamples& samples,
                               const std::vector<std::pair<double, int>>& candidates) {
    const int m = static_cast<int>(samples.abscissae.size());
    const int n = static_cast<int>(candidates.size());
    if (m < n) throw fit_error("fit_expansion: fewer samples than candidates");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(candidates[i].first - candidates[j].first) < 0.05 &&
                candidates[i].second == candidates[j].second)
                throw fit_error("fit_expansion: candidate exponents closer than 0.05");

    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        const double s = std::log(samples.abscissae[i]);
        y(i) = samples.values[i];
        for (int j = 0; j < n; ++j) {
            double v = std::exp(candidates[j].first * s);
            for (int k = 0; k < candidates[j].second; ++k) v *= s;
            A(i, j) = v;
        }
    }
    Eigen::VectorXd colnorm(n);
    for (int j = 0; j < n; ++j) {
        colnorm(j) = A.col(j).norm();
        if (colnorm(j) == 0.0) throw fit_error("fit_expansion: zero design column");
        A.col(j) /= colnorm(j);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0)
        throw fit_error("fit_expansion: rank-deficient design");
    const double cond = sv(0) / sv(sv.size() - 1);
    if (cond > 1e12)
        throw fit_error("fit_expansion: design condition " + std::to_string(cond));

    const Eigen::VectorXd cs = svd.solve(y);
    const double resid = (A * cs - y).norm() / (y.norm() + 1e-300);

    Expansion out;
    out.fit_residual = resid;
    double zmax = candidates.front().first;
    for (int j = 0; j < n; ++j) {
        ExpansionTerm t;
        t.z = candidates[j].first;
        t.k = candidates[j].second;
        t.coeff = cs(j) / colnorm(j);
        t.scaled = cs(j);
        out.terms.push_back(t);
        zmax = std::max(zmax, t.z);
    }
    std::sort(out.terms.begin(), out.terms.end(),
              [](const ExpansionTerm& a, const ExpansionTerm& b) {
                  return a.z != b.z ? a.z < b.z : a.k < b.k;
              });
    out.remainder_exponent = zmax + 1.0;
    return out;
}

/// Leading-exponent estimate from the tail of the grid: local log-log slopes
/// with one Richardson sweep (valid when the leading term carries no log).
inline double estimate_leading_exponent(const ProfileSamples& samples) {
    const size_t n = samples.abscissae.size();
    if (n < 4) throw fit_error("estimate_leading_exponent: too few samples");
    auto slope = [&](size_t i) {
        return std::log(std::abs(samples.values[i + 1] / samples.values[i])) /
               std::log(samples.abscissae[i + 1] / samples.abscissae[i]);
    };
    const double s1 = slope(n - 2), s2 = slope(n - 3);
    const double r2 = samples.abscissae[n - 3] / samples.abscissae[n - 2];
    // error ~ tau^2: eliminate with the grid ratio
    const double w = r2 * r2;
    return (w * s1 - s2) / (w - 1.0);
}

// ---------------------------------------------------------------------------
// Profile generation
// ---------------------------------------------------------------------------

/// Boundary profile of fn along the chart ray family of a frozen omega.
inline ProfileSamples boundary_profile(const ConvexModel& model,
                                       const std::function<double(const BoundaryRay&)>& fn,
                                       double omega_mid, int w_sign,
                                       std::vector<double> taus =
                                           ProfileSamples::geometric_grid()) {
    ProfileSamples out;
    out.abscissae = std::move(taus);
    out.values.resize(out.abscissae.size());
    out.side.omega_mid = omega_mid;
    out.side.w_sign = w_sign;
    // grid given in tau; chart_ray expects t: convert via the 1-1 relation
    parallel_for(out.abscissae.size(), [&](std::size_t i) {
        const double tau = out.abscissae[i];
        // solve tau(t) = tau by bisection in alpha directly
        double lo = 0.0, hi = pi / 2;
        for (int it = 0; it < 60; ++it) {
            const double a = 0.5 * (lo + hi);
            (model.tau_tilde(BoundaryRay{0.0, a}) > tau ? lo : hi) = a;
        }
        const double alpha = 0.5 * (lo + hi);
        const BoundaryRay probe{0.0, w_sign * alpha};
        const GlancingChart c = model.glancing_chart(probe);
        const BoundaryRay ray{wrap_angle(probe.beta + omega_mid - c.omega_mid),
                              probe.alpha};
        out.values[i] = fn(ray);
    });
    return out;
}

/// Interior profile of fn along the inward ray of a boundary point.
inline ProfileSamples interior_profile(const ConvexModel& model,
                                       const std::function<double(const Point2&)>& fn,
                                       double boundary_angle,
                                       std::vector<double> rhos =
                                           ProfileSamples::geometric_grid()) {
    ProfileSamples out;
    out.abscissae = std::move(rhos);
    out.values.resize(out.abscissae.size());
    out.side.omega_mid = boundary_angle;
    parallel_for(out.abscissae.size(), [&](std::size_t i) {
        const double r = 1.0 - out.abscissae[i];
        out.values[i] = fn(Point2{r * std::cos(boundary_angle),
                                  r * std::sin(boundary_angle)});
    });
    return out;
}

// ---------------------------------------------------------------------------
// Predicted leading coefficients
// ---------------------------------------------------------------------------

/// Leading coefficient of the transform of rho^gamma log^k rho h near the
/// glancing set: 2^k h phi kappa^gamma B(gamma+1, gamma+1), at exponent
/// 2 gamma + 1 and log power k.
inline double predict_xray_leading(const ConvexModel& model, double gamma, int k,
                                   double h_value, double phi_value,
                                   double omega_mid, int w_sign) {
    if (gamma <= -1.0)
        throw integrability_error("predict_xray_leading: gamma <= -1");
    const double kap = model.kappa(omega_mid, w_sign);
    const double b = beta_diag(cplx(gamma + 1.0)).value.real();
    return std::pow(2.0, k) * h_value * phi_value * std::pow(kap, gamma) * b;
}

/// Predicted lowest-order singular term of the backprojection of
/// a(omega) tau^gamma log^k tau chi(tau): exponent, log power, coefficient.
/// The fiber sum runs over the two glancing directions; the measured model
/// scalars kappa and s0 replace the paper-side curvature conventions.
struct BackprojectionLeading {
    bool has_term = false;
    double z0 = 0.0;
    int l0 = 0;
    double coeff = 0.0;
};

inline BackprojectionLeading predict_backprojection_leading(
    const ConvexModel& model, double gamma, int k,
    const std::function<double(double, int)>& a, double y_angle) {
    BackprojectionLeading out;

    auto fiber_sum = [&](double kappa_exp) {
        double s = 0.0;
        for (int w : {+1, -1}) {
            const double kap = model.kappa(y_angle, w);
            const double s0 = model.mu_measure_coefficient(y_angle, w);
            s += a(y_angle, w) * std::pow(kap, kappa_exp) * s0;
        }
        return s;
    };

    const double gr = std::round(gamma);
    const bool integer = std::abs(gamma - gr) < 1e-9 && gr >= 0.0;
    if (integer && static_cast<long long>(gr) % 2 == 0) {
        if (k == 0) return out; // pole cancellation: no singular part
        const int m = static_cast<int>(gr) / 2;
        out.has_term = true;
        out.z0 = m + 0.5;
        out.l0 = k - 1;
        out.coeff = (-k / std::pow(2.0, k + 1)) * beta_diag_zero_slope(m) *
                    fiber_sum(-m - 1.5);
        return out;
    }
    if (integer) {
        const int m = (static_cast<int>(gr) - 1) / 2;
        out.has_term = true;
        out.z0 = m + 1.0;
        out.l0 = k + 1;
        out.coeff = (-1.0 / ((k + 1) * std::pow(2.0, k + 1))) *
                    beta_diag_residue(m + 1) * fiber_sum(-m - 2.0);
        return out;
    }
    const double arg = -(gamma + 1.0) / 2.0;
    const MeromorphicSample b = beta_diag(cplx(arg));
    if (b.is_pole())
        throw pole_error("predict_backprojection_leading: Beta pole at " +
                         std::to_string(arg));
    out.has_term = true;
    out.z0 = (gamma + 1.0) / 2.0;
    out.l0 = k;
    out.coeff = std::pow(2.0, -(k + 1)) * b.value.real() *
                fiber_sum(-(gamma + 3.0) / 2.0);
    return out;
}

// ---------------------------------------------------------------------------
// Parity diagnostics
// ---------------------------------------------------------------------------

struct ParityResult {
    double odd_energy = 0.0;
    double even_energy = 0.0;
    std::string verdict; // "odd", "even", "mixed"
};

/// Fit integer exponents of both parities and compare the scaled-coefficient
/// energies (threshold 1e-5).
inline ParityResult parity_check(const ProfileSamples& samples, int max_exponent = 6) {
    std::vector<std::pair<double, int>> candidates;
    for (int z = 0; z <= max_exponent; ++z) candidates.push_back({double(z), 0});
    const Expansion e = fit_expansion(samples, candidates);
    ParityResult out;
    for (const auto& t : e.terms) {
        const double en = t.scaled * t.scaled;
        if (static_cast<int>(std::lround(t.z)) % 2 == 1) out.odd_energy += en;
        else out.even_energy += en;
    }
    const double ratio_tol = 1e-5;
    if (out.even_energy <= ratio_tol * out.odd_energy) out.verdict = "odd";
    else if (out.odd_energy <= ratio_tol * out.even_energy) out.verdict = "even";
    else out.verdict = "mixed";
    return out;
}

// ---------------------------------------------------------------------------
// Boundary determination by layer stripping
// ---------------------------------------------------------------------------

struct BoundaryDetermination {
    std::vector<std::vector<double>> layers; // layers[j][omega index]
    std::vector<double> omegas;              // midpoints sampled
    std::vector<std::string> warnings;
};

/// Recover the boundary coefficients f_j of f ~ sum f_j(y) rho^j from data =
/// I^phi f: fit the leading coefficient a_{1+2j} of the data profile at each
/// omega, divide by phi kappa^j B(j+1,j+1), subtract the numerically
/// synthesized transform of the recovered layer, and continue.
inline BoundaryDetermination boundary_determine(
    const ConvexModel& model,
    const std::function<double(const BoundaryRay&)>& data,
    const std::function<double(double, int)>& phi, int depth, int n_omega = 4,
    std::vector<double> taus = ProfileSamples::geometric_grid(0.3, 3e-4, 0.75)) {
    BoundaryDetermination out;
    for (int i = 0; i < n_omega; ++i)
        out.omegas.push_back(2.0 * pi * i / n_omega);

    // residual data samples per omega
    std::vector<ProfileSamples> profiles(n_omega);
    for (int i = 0; i < n_omega; ++i)
        profiles[i] = boundary_profile(model, data, out.omegas[i], +1, taus);

    for (int j = 0; j <= depth; ++j) {
        std::vector<double> layer(n_omega);
        std::vector<std::pair<double, int>> candidates;
        for (int p = 0; p < 3; ++p) candidates.push_back({2.0 * j + 1.0 + 2.0 * p, 0});

        for (int i = 0; i < n_omega; ++i) {
            const double phv = phi(out.omegas[i], +1);
            if (std::abs(phv) < 1e-12)
                throw std::invalid_argument("boundary_determine: weight vanishes at omega");
            const Expansion e = fit_expansion(profiles[i], candidates);
            const double kap = model.kappa(out.omegas[i], +1);
            const double denom = phv * std::pow(kap, j) *
                                 beta_diag(cplx(j + 1.0)).value.real();
            layer[i] = e.coeff(2.0 * j + 1.0, 0) / denom;
        }
        out.layers.push_back(layer);
        if (j == depth) break;

        // subtract the synthesized transform of layer * rho^j; the layer is
        // carried as the trigonometric interpolant of its omega samples
        std::vector<double> acoef(n_omega / 2 + 1, 0.0), bcoef(n_omega / 2 + 1, 0.0);
        for (int m = 0; m <= n_omega / 2; ++m) {
            for (int i = 0; i < n_omega; ++i) {
                const double th = 2.0 * pi * i / n_omega;
                acoef[m] += layer[i] * std::cos(m * th);
                bcoef[m] += layer[i] * std::sin(m * th);
            }
            const double norm = (m == 0 || 2 * m == n_omega) ? 1.0 : 2.0;
            acoef[m] *= norm / n_omega;
            bcoef[m] *= norm / n_omega;
        }
        auto layer_fn = [acoef, bcoef](double angle) {
            double acc = 0.0;
            for (size_t m = 0; m < acoef.size(); ++m)
                acc += acoef[m] * std::cos(m * angle) + bcoef[m] * std::sin(m * angle);
            return acc;
        };
        ScalarField piece = ScalarField::rho_log_power(
            model, double(j), 0, [&model, layer_fn](const Point2& p) {
                return layer_fn(model.boundary_foot_angle(p));
            });
        // weight phi as a fiber-constant field of the footpoint angle
        ScalarField wfield = ScalarField::on_m(
            [&model, &phi](const Point2& p) {
                return phi(model.boundary_foot_angle(p), +1);
            },
            IndexSet::naturals());

        double max_resid = 0.0, next_scale = 0.0;
        for (int i = 0; i < n_omega; ++i) {
            ProfileSamples& prof = profiles[i];
            parallel_for(prof.abscissae.size(), [&](std::size_t s) {
                const double tau = prof.abscissae[s];
                // same ray construction as boundary_profile
                double lo = 0.0, hi = pi / 2;
                for (int it = 0; it < 60; ++it) {
                    const double a2 = 0.5 * (lo + hi);
                    (model.tau_tilde(BoundaryRay{0.0, a2}) > tau ? lo : hi) = a2;
                }
                const BoundaryRay probe{0.0, 0.5 * (lo + hi)};
                const GlancingChart c = model.glancing_chart(probe);
                const BoundaryRay ray{
                    wrap_angle(probe.beta + out.omegas[i] - c.omega_mid), probe.alpha};
                prof.values[s] -= xray(model, piece, wfield, ray);
            });
            for (double v : prof.values) max_resid = std::max(max_resid, std::abs(v));
            next_scale = std::max(next_scale, std::abs(layer[i]));
        }
        if (max_resid > 10.0 * (next_scale + 1.0))
            out.warnings.push_back("layer " + std::to_string(j) +
                                   ": subtraction residual exceeds the next layer scale");
    }
    return out;
}

} // namespace xrayphg

#endif
