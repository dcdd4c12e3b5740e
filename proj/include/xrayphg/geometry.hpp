#ifndef XRAYPHG_GEOMETRY_HPP
#define XRAYPHG_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "xrayphg/errors.hpp"
#include "xrayphg/quadrature.hpp"

namespace xrayphg {

struct Point2 {
    double x = 0.0, y = 0.0;
};

/// Point of the unit sphere bundle: position plus coordinate velocity of the
/// unit (w.r.t. the metric) tangent vector.
struct SMPoint {
    Point2 pos;
    double vx = 0.0, vy = 0.0;
};

/// Point of the boundary sphere bundle in footpoint coordinates: boundary
/// angle beta and incidence angle alpha from the inward normal, wrapped to
/// (-pi, pi].  |alpha| <= pi/2 is the inward boundary (mu = cos alpha >= 0),
/// |alpha| = pi/2 the glancing set.
struct BoundaryRay {
    double beta = 0.0;
    double alpha = 0.0;
};

/// Glancing coordinates (t, omega): odd bdf t and the even data
/// omega = (midpoint boundary angle, direction sign of the boundary geodesic).
struct GlancingChart {
    double t = 0.0;
    double omega_mid = 0.0;
    int w_sign = 1;
};

inline double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * pi);
    if (a > pi) a -= 2.0 * pi;
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

inline double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

/// One traced maximal geodesic: exit time and dense state access.
class GeodesicRecord {
public:
    GeodesicRecord(BoundaryRay ray, double tau, std::function<SMPoint(double)> at)
        : ray_(ray), tau_(tau), at_(std::move(at)) {}

    const BoundaryRay& ray() const { return ray_; }
    double tau() const { return tau_; }
    SMPoint at(double u) const { return at_(u); }

private:
    BoundaryRay ray_;
    double tau_;
    std::function<SMPoint(double)> at_;
};

// ---------------------------------------------------------------------------
// ConvexModel
// ---------------------------------------------------------------------------

/// A convex non-trapping surface with boundary (d = 2), exposing the
/// geometric primitives the transform and asymptotics layers consume.
class ConvexModel {
public:
    virtual ~ConvexModel() = default;

    virtual std::string name() const = 0;

    /// Boundary "radius" m(1): boundary length is 2 pi m(1).
    virtual double boundary_radius() const = 0;

    /// bdf: geodesic distance to the boundary.
    virtual double rho(const Point2& p) const = 0;

    /// Boundary angle of the nearest boundary point.
    virtual double boundary_foot_angle(const Point2& p) const = 0;

    /// Signed exit time: tau >= 0 on the inward boundary, the smooth odd
    /// extension elsewhere.
    virtual double tau_tilde(const BoundaryRay& ray) const = 0;

    /// Scattering relation on the boundary bundle (an involution fixing the
    /// glancing set).
    virtual BoundaryRay scatter(const BoundaryRay& ray) const = 0;

    /// Trace the maximal geodesic of the ray; record gives phi_{u tau}.
    virtual GeodesicRecord trace(const BoundaryRay& ray) const = 0;

    /// Footpoint map: the inward boundary ray whose geodesic passes through
    /// x with fiber direction psi (angle in the orthonormal frame at x).
    virtual BoundaryRay footpoint(const Point2& x, double psi) const = 0;

    /// Unit tangent at x with fiber angle psi (coordinate velocity).
    virtual SMPoint fiber_dir(const Point2& x, double psi) const = 0;

    /// Metric area element in the model's (r, theta)-style chart, exposed
    /// through integrate_interior below.
    virtual double interior_integral(const std::function<double(const SMPoint&)>& f,
                                     int n_r, int n_theta, int n_psi) const = 0;

    /// int_M f dVol.
    virtual double area_integral(const std::function<double(const Point2&)>& f,
                                 int n_r, int n_theta) const = 0;

    // --- derived operations (model-independent given the primitives) ---

    double tau(const BoundaryRay& ray) const {
        if (std::abs(ray.alpha) > pi / 2 + 1e-12)
            throw std::invalid_argument("tau: ray not on the inward boundary");
        return tau_tilde(ray);
    }

    double mu(const BoundaryRay& ray) const { return std::cos(ray.alpha); }

    SMPoint upsilon(const BoundaryRay& ray, double u) const {
        return trace(ray).at(u);
    }

    /// rho(Upsilon(ray, u)) evaluated without endpoint cancellation: the
    /// complement 1-u is supplied exactly and tiny depths fall back to the
    /// first-order normal expansion rho ~ mu t.
    virtual double rho_upsilon(const BoundaryRay& ray, double u, double umc) const {
        const double tt = tau_tilde(ray);
        const double deep = 1e-8;
        if (u < deep) return mu_signed(ray) * tt * u;
        if (umc < deep) {
            const BoundaryRay s = scatter(ray);
            return mu_signed(s) * tau_tilde(s) * umc;
        }
        return rho(trace(ray).at(u).pos);
    }

    /// Positive factor F with rho(Upsilon(ray,u)) = F tau^2 u(1-u); endpoint
    /// and glancing values substituted analytically.
    double f_factor(const BoundaryRay& ray, double u) const {
        const double tt = tau_tilde(ray);
        if (std::abs(tt) < glancing_tau_tol_)
            return kappa(ray.beta, ray.alpha >= 0 ? +1 : -1);
        if (u < endpoint_u_tol_) return mu_signed(ray) / tt;
        if (u > 1.0 - endpoint_u_tol_) {
            const BoundaryRay r2 = scatter(ray);
            return mu_signed(r2) / tau_tilde(r2);
        }
        return rho(trace(ray).at(u).pos) / (tt * tt * u * (1.0 - u));
    }

    /// Measured glancing limit of F at the glancing point (beta, w); the
    /// model-specific value of the boundary convexity factor.
    virtual double kappa(double beta, int w_sign) const {
        return measure_kappa(beta, w_sign);
    }

    /// Leading coefficient s0 of mu dSigma ~ sum s_p tau^{2p+1} dtau dOmega,
    /// measured by fitting the density ratio along the glancing chart.
    virtual double mu_measure_coefficient(double beta, int w_sign) const {
        return measure_s0(beta, w_sign);
    }

    /// Glancing chart (t, omega) of a ray near the glancing set.
    GlancingChart glancing_chart(const BoundaryRay& ray) const {
        const double a = wrap_angle(ray.alpha);
        if (std::abs(std::abs(a) - pi / 2) > chart_threshold_)
            throw out_of_chart_error("glancing_chart: |alpha| too far from pi/2");
        return glancing_chart_unchecked(ray);
    }

    /// Measured glancing limit of F (usable to cross-check closed-form
    /// overrides).
    double kappa_measured(double beta, int w_sign) const {
        return measure_kappa(beta, w_sign);
    }

    /// Inverse chart: the inward ray with glancing coordinates (t, omega).
    BoundaryRay chart_ray(double t, double omega_mid, int w_sign) const {
        // alpha(t) from a 1-D solve of the rotation-free relation; exact for
        // the disk, few iterations otherwise.
        const double target = 2.0 * t / boundary_radius();
        double lo = 0.0, hi = pi / 2;
        auto dtheta_of = [&](double a) {
            BoundaryRay r{0.0, a * w_sign};
            return wrap_angle(scatter(r).beta) * w_sign;
        };
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (dtheta_of(mid) > target ? lo : hi) = mid;
        }
        const double a = 0.5 * (lo + hi);
        BoundaryRay ray;
        ray.alpha = w_sign * a;
        ray.beta = wrap_angle(omega_mid - w_sign * t / boundary_radius());
        // midpoint correction for non-disk models (dtheta/2 need not equal
        // t/m(1) exactly once measured): recompute from the actual chart
        const double mid_err = wrap_angle(glancing_chart_unchecked(ray).omega_mid - omega_mid);
        ray.beta = wrap_angle(ray.beta - mid_err);
        return ray;
    }

    /// Boundary-bundle integral int G(ray) mu dSigma over the inward
    /// boundary with a Gauss rule in alpha and a trapezoid in beta.
    double boundary_integral(const std::function<double(const BoundaryRay&)>& g,
                             int n_beta = 64, int n_alpha = 96) const {
        const double m1 = boundary_radius();
        return periodic_trapezoid([&](double beta) {
            return integrate_gl([&](double alpha) {
                const BoundaryRay ray{beta, alpha};
                return g(ray) * std::cos(alpha);
            }, -pi / 2, pi / 2, n_alpha);
        }, 0.0, 2.0 * pi, n_beta) * m1;
    }

    double chart_threshold() const { return chart_threshold_; }
    void set_chart_threshold(double v) { chart_threshold_ = v; }

protected:
    double mu_signed(const BoundaryRay& ray) const { return std::cos(ray.alpha); }

    GlancingChart glancing_chart_unchecked(const BoundaryRay& ray) const {
        GlancingChart c;
        const double a = wrap_angle(ray.alpha);
        c.w_sign = a >= 0 ? +1 : -1;
        const BoundaryRay s = scatter(ray);
        const double dtheta = wrap_angle(s.beta - ray.beta);
        c.t = 0.5 * boundary_radius() * dtheta * c.w_sign;
        c.omega_mid = wrap_angle(ray.beta + 0.5 * dtheta);
        return c;
    }

    /// Richardson extrapolation of F(t, u=1/2) in the even chart variable t.
    double measure_kappa(double beta, int w_sign) const {
        const int levels = 5;
        std::array<double, levels> v{};
        double t = 0.08;
        for (int j = 0; j < levels; ++j, t *= 0.5) {
            const BoundaryRay ray{beta, w_sign * (pi / 2 - t)};
            v[j] = f_factor(ray, 0.5);
        }
        // F(t) = kappa + c t^2 + O(t^4): two Richardson sweeps
        std::array<double, levels> r = v;
        for (int pass = 1; pass <= 2; ++pass) {
            const double w = std::pow(4.0, pass);
            for (int j = 0; j + pass < levels; ++j)
                r[j] = (w * r[j + 1] - r[j]) / (w - 1.0);
        }
        const double est = r[levels - 3];
        if (!(est > 0.0))
            throw std::runtime_error("measure_kappa: non-positive convexity factor");
        return est;
    }

    /// Fit of (mu dSigma)/(tau dtau dOmega) -> s0 as tau -> 0 along the
    /// chart; the Jacobian is measured by finite differences of (tau, mid)
    /// as functions of (beta, alpha).
    double measure_s0(double beta, int w_sign) const {
        std::vector<double> taus, svals;
        double a_off = 0.05;
        for (int j = 0; j < 6; ++j, a_off *= 0.65) {
            const BoundaryRay ray{beta, w_sign * (pi / 2 - a_off)};
            const double h = 1e-5;
            auto tau_of = [&](double db, double da) {
                return tau_tilde(BoundaryRay{ray.beta + db, ray.alpha + da});
            };
            auto mid_of = [&](double db, double da) {
                return glancing_chart_unchecked(BoundaryRay{ray.beta + db, ray.alpha + da}).omega_mid;
            };
            const double dtau_db = (tau_of(h, 0) - tau_of(-h, 0)) / (2 * h);
            const double dtau_da = (tau_of(0, h) - tau_of(0, -h)) / (2 * h);
            const double dmid_db = wrap_angle(mid_of(h, 0) - mid_of(-h, 0)) / (2 * h);
            const double dmid_da = wrap_angle(mid_of(0, h) - mid_of(0, -h)) / (2 * h);
            const double det = std::abs(dtau_db * dmid_da - dtau_da * dmid_db);
            if (det < 1e-14) continue;
            const double tau = tau_tilde(ray);
            // mu dSigma = cos(alpha) m(1) dbeta dalpha; dOmega = m(1) dmid
            const double ell = std::cos(ray.alpha) * boundary_radius() /
                               (det * boundary_radius());
            taus.push_back(tau);
            svals.push_back(ell / tau);
        }
        if (taus.size() < 3)
            throw fit_error("mu_measure_coefficient: too few usable samples");
        // s(tau) = s0 + s1 tau^2 (+ s2 tau^4): solve 3x3 least squares by
        // normal equations on the small system
        double A[3][3] = {{0}}, b[3] = {0};
        for (size_t i = 0; i < taus.size(); ++i) {
            const double t2 = taus[i] * taus[i];
            const double row[3] = {1.0, t2, t2 * t2};
            for (int p = 0; p < 3; ++p) {
                for (int q = 0; q < 3; ++q) A[p][q] += row[p] * row[q];
                b[p] += row[p] * svals[i];
            }
        }
        // Gaussian elimination
        for (int p = 0; p < 3; ++p) {
            int piv = p;
            for (int q = p + 1; q < 3; ++q)
                if (std::abs(A[q][p]) > std::abs(A[piv][p])) piv = q;
            std::swap(A[p], A[piv]);
            std::swap(b[p], b[piv]);
            for (int q = p + 1; q < 3; ++q) {
                const double f = A[q][p] / A[p][p];
                for (int r = p; r < 3; ++r) A[q][r] -= f * A[p][r];
                b[q] -= f * b[p];
            }
        }
        double s[3];
        for (int p = 2; p >= 0; --p) {
            s[p] = b[p];
            for (int q = p + 1; q < 3; ++q) s[p] -= A[p][q] * s[q];
            s[p] /= A[p][p];
        }
        // residual guard
        double res = 0.0;
        for (size_t i = 0; i < taus.size(); ++i) {
            const double t2 = taus[i] * taus[i];
            res = std::max(res, std::abs(s[0] + s[1] * t2 + s[2] * t2 * t2 - svals[i]));
        }
        if (res > 1e-4 * (std::abs(s[0]) + 1.0))
            throw fit_error("mu_measure_coefficient: fit residual " + std::to_string(res));
        return s[0];
    }

    double chart_threshold_ = 0.5;
    double glancing_tau_tol_ = 1e-9;
    double endpoint_u_tol_ = 1e-12;
};

// ---------------------------------------------------------------------------
// Euclidean unit disk (closed forms)
// ---------------------------------------------------------------------------

class DiskModel final : public ConvexModel {
public:
    std::string name() const override { return "disk"; }
    double boundary_radius() const override { return 1.0; }

    double rho(const Point2& p) const override {
        const double r2 = p.x * p.x + p.y * p.y;
        return (1.0 - r2) / (1.0 + std::sqrt(r2));
    }

    double boundary_foot_angle(const Point2& p) const override {
        return std::atan2(p.y, p.x);
    }

    double tau_tilde(const BoundaryRay& ray) const override {
        return 2.0 * std::cos(ray.alpha);
    }

    BoundaryRay scatter(const BoundaryRay& ray) const override {
        return BoundaryRay{wrap_angle(ray.beta + pi - 2.0 * ray.alpha),
                           wrap_angle(pi - ray.alpha)};
    }

    double rho_upsilon(const BoundaryRay& ray, double u, double umc) const override {
        // chord identity: rho o Upsilon = 1 - sqrt(1 - tau^2 u (1-u)),
        // rewritten to stay exact for tiny u or 1-u
        const double tt = tau_tilde(ray);
        const double w = tt * tt * u * umc;
        return w / (1.0 + std::sqrt(std::max(0.0, 1.0 - w)));
    }

    GeodesicRecord trace(const BoundaryRay& ray) const override {
        const double tau = tau_tilde(ray);
        const Point2 y{std::cos(ray.beta), std::sin(ray.beta)};
        // v = cos(alpha) * nu + sin(alpha) * T, nu = -y, T = y rotated +90
        const double vx = -std::cos(ray.alpha) * y.x - std::sin(ray.alpha) * y.y;
        const double vy = -std::cos(ray.alpha) * y.y + std::sin(ray.alpha) * y.x;
        return GeodesicRecord(ray, tau, [=](double u) {
            return SMPoint{{y.x + u * tau * vx, y.y + u * tau * vy}, vx, vy};
        });
    }

    BoundaryRay footpoint(const Point2& x, double psi) const override {
        const double vx = std::cos(psi), vy = std::sin(psi);
        const double b = x.x * vx + x.y * vy;
        const double c = x.x * x.x + x.y * x.y - 1.0;
        const double tminus = b + std::sqrt(std::max(b * b - c, 0.0));
        const Point2 y{x.x - tminus * vx, x.y - tminus * vy};
        const double beta = std::atan2(y.y, y.x);
        // alpha: signed angle of v from the inward normal -y, measured toward
        // the tangent T = (-y.y, y.x)
        const double cos_a = -(y.x * vx + y.y * vy);
        const double sin_a = -y.y * vx + y.x * vy;
        return BoundaryRay{beta, std::atan2(sin_a, cos_a)};
    }

    SMPoint fiber_dir(const Point2& x, double psi) const override {
        return SMPoint{x, std::cos(psi), std::sin(psi)};
    }

    double kappa(double, int) const override { return 0.5; } // chord identity limit

    double interior_integral(const std::function<double(const SMPoint&)>& f,
                             int n_r, int n_theta, int n_psi) const override {
        return periodic_trapezoid([&](double theta) {
            return integrate_gl([&](double r) {
                const Point2 p{r * std::cos(theta), r * std::sin(theta)};
                return r * periodic_trapezoid([&](double psi) {
                    return f(fiber_dir(p, psi));
                }, 0.0, 2.0 * pi, n_psi);
            }, 0.0, 1.0, n_r);
        }, 0.0, 2.0 * pi, n_theta);
    }

    double area_integral(const std::function<double(const Point2&)>& f,
                         int n_r, int n_theta) const override {
        return periodic_trapezoid([&](double theta) {
            return integrate_gl([&](double r) {
                return r * f(Point2{r * std::cos(theta), r * std::sin(theta)});
            }, 0.0, 1.0, n_r);
        }, 0.0, 2.0 * pi, n_theta);
    }
};

// ---------------------------------------------------------------------------
// Rotationally symmetric metric dr^2 + m(r)^2 dtheta^2 on r <= 1
// ---------------------------------------------------------------------------

/// m(r) = r (1 + sum_j c_j r^{2j}), m' > 0 on (0,1] (Herglotz, non-trapping),
/// m'(1) > 0 (strictly convex boundary).  Geodesics by adaptive RK4 on
/// (r, theta, p_r) with conserved angular momentum, boundary crossing by
/// bisection.
class RadialModel final : public ConvexModel {
public:
    explicit RadialModel(std::vector<double> m_coeffs, double ode_tol = 1e-10,
                         double crossing_tol = 1e-12)
        : coeffs_(std::move(m_coeffs)), ode_tol_(ode_tol), crossing_tol_(crossing_tol) {
        for (int i = 0; i <= 100; ++i) {
            const double r = 0.01 * i;
            if (r > 0 && m(r) <= 0.0)
                throw config_error("RadialModel: m(r) must be positive on (0,1]");
            if (mprime(r) <= 0.0)
                throw config_error("RadialModel: m'(r) > 0 (Herglotz) violated at r=" +
                                   std::to_string(r));
        }
    }

    std::string name() const override { return "radial"; }
    double boundary_radius() const override { return m(1.0); }
    const std::vector<double>& m_coefficients() const { return coeffs_; }

    double m(double r) const {
        double s = 1.0, rp = 1.0;
        for (double c : coeffs_) { rp *= r * r; s += c * rp; }
        return r * s;
    }
    double mprime(double r) const {
        double s = 1.0, rp = 1.0;
        for (size_t j = 0; j < coeffs_.size(); ++j) {
            rp *= r * r;
            s += coeffs_[j] * (2.0 * (j + 1) + 1.0) * rp;
        }
        return s;
    }

    double rho(const Point2& p) const override {
        return 1.0 - std::sqrt(p.x * p.x + p.y * p.y); // radial lines are geodesics
    }

    double boundary_foot_angle(const Point2& p) const override {
        return std::atan2(p.y, p.x);
    }

    double tau_tilde(const BoundaryRay& ray) const override {
        return trace_full(ray).tau_signed;
    }

    BoundaryRay scatter(const BoundaryRay& ray) const override {
        return trace_full(ray).exit;
    }

    GeodesicRecord trace(const BoundaryRay& ray) const override {
        auto full = std::make_shared<Trajectory>(trace_full(ray));
        const double tau = full->tau_signed;
        return GeodesicRecord(ray, tau, [full, this](double u) {
            return full->state_at(u, *this);
        });
    }

    BoundaryRay footpoint(const Point2& x, double psi) const override {
        // flow the reversed direction forward to the boundary, then reverse
        const double r = std::sqrt(x.x * x.x + x.y * x.y);
        const double theta = std::atan2(x.y, x.x);
        if (r < 1e-12) {
            // radial chord through the center
            return BoundaryRay{wrap_angle(psi + pi), 0.0};
        }
        // psi measured from the outward radial direction at x
        State s;
        s.r = r;
        s.theta = theta;
        s.pr = -std::cos(psi);
        const double L = -std::sin(psi) * m(r);
        auto knots = integrate(s, L);
        const auto& e = knots.states.back();
        const double aexit = std::atan2(-m(1.0) * e.ptheta_rate(*this, L), e.pr);
        return BoundaryRay{wrap_angle(e.theta), wrap_angle(aexit)};
    }

    SMPoint fiber_dir(const Point2& x, double psi) const override {
        const double r = std::sqrt(x.x * x.x + x.y * x.y);
        const double theta = std::atan2(x.y, x.x);
        const double rdot = std::cos(psi);
        const double thdot = (r < 1e-12) ? 0.0 : std::sin(psi) / m(r);
        const double ct = std::cos(theta), st = std::sin(theta);
        return SMPoint{x, rdot * ct - r * st * thdot, rdot * st + r * ct * thdot};
    }

    double interior_integral(const std::function<double(const SMPoint&)>& f,
                             int n_r, int n_theta, int n_psi) const override {
        return periodic_trapezoid([&](double theta) {
            return integrate_gl([&](double r) {
                const Point2 p{r * std::cos(theta), r * std::sin(theta)};
                return m(r) * periodic_trapezoid([&](double psi) {
                    return f(fiber_dir(p, psi));
                }, 0.0, 2.0 * pi, n_psi);
            }, 0.0, 1.0, n_r);
        }, 0.0, 2.0 * pi, n_theta);
    }

    double area_integral(const std::function<double(const Point2&)>& f,
                         int n_r, int n_theta) const override {
        return periodic_trapezoid([&](double theta) {
            return integrate_gl([&](double r) {
                return m(r) * f(Point2{r * std::cos(theta), r * std::sin(theta)});
            }, 0.0, 1.0, n_r);
        }, 0.0, 2.0 * pi, n_theta);
    }

private:
    struct State {
        double r = 1.0, theta = 0.0, pr = 0.0;
        double ptheta_rate(const RadialModel& mod, double L) const {
            const double mm = mod.m(r);
            return L / (mm * mm);
        }
    };

    struct KnotSeq {
        std::vector<double> times;
        std::vector<State> states;
        std::vector<State> derivs;
        double L = 0.0;
    };

    struct Trajectory {
        KnotSeq knots;
        BoundaryRay entry;       // inward representative
        BoundaryRay exit;        // scattered boundary point
        double tau_signed = 0.0; // tau_tilde of the original ray
        bool reversed = false;   // original ray was on the outward side

        SMPoint state_at(double u, const RadialModel& mod) const {
            // Upsilon(ray, u) = phi_{u tau_tilde}; for reversed rays the
            // trajectory belongs to the flipped representative
            double t = u * std::abs(tau_signed);
            State s = interpolate(t, mod);
            double rdot = s.pr;
            double thdot = s.ptheta_rate(mod, knots.L);
            if (reversed) { rdot = -rdot; thdot = -thdot; }
            const double ct = std::cos(s.theta), st = std::sin(s.theta);
            return SMPoint{{s.r * ct, s.r * st},
                           rdot * ct - s.r * st * thdot,
                           rdot * st + s.r * ct * thdot};
        }

        State interpolate(double t, const RadialModel& mod) const {
            const auto& T = knots.times;
            if (t <= T.front()) return knots.states.front();
            if (t >= T.back()) return knots.states.back();
            size_t hi = std::upper_bound(T.begin(), T.end(), t) - T.begin();
            const size_t lo = hi - 1;
            const double h = T[hi] - T[lo];
            const double x = (t - T[lo]) / h;
            auto hermite = [&](double y0, double d0, double y1, double d1) {
                const double x2 = x * x, x3 = x2 * x;
                return y0 * (2 * x3 - 3 * x2 + 1) + d0 * h * (x3 - 2 * x2 + x) +
                       y1 * (-2 * x3 + 3 * x2) + d1 * h * (x3 - x2);
            };
            State out;
            out.r = hermite(knots.states[lo].r, knots.derivs[lo].r,
                            knots.states[hi].r, knots.derivs[hi].r);
            out.theta = hermite(knots.states[lo].theta, knots.derivs[lo].theta,
                                knots.states[hi].theta, knots.derivs[hi].theta);
            out.pr = hermite(knots.states[lo].pr, knots.derivs[lo].pr,
                             knots.states[hi].pr, knots.derivs[hi].pr);
            return out;
        }
    };

    State rhs(const State& s, double L) const {
        const double mm = m(s.r);
        State d;
        d.r = s.pr;
        d.theta = L / (mm * mm);
        d.pr = L * L * mprime(s.r) / (mm * mm * mm);
        return d;
    }

    static State axpy(const State& a, double h, const State& b) {
        return State{a.r + h * b.r, a.theta + h * b.theta, a.pr + h * b.pr};
    }

    State rk4_step(const State& s, double h, double L) const {
        const State k1 = rhs(s, L);
        const State k2 = rhs(axpy(s, 0.5 * h, k1), L);
        const State k3 = rhs(axpy(s, 0.5 * h, k2), L);
        const State k4 = rhs(axpy(s, h, k3), L);
        State out = s;
        out.r += h / 6.0 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
        out.theta += h / 6.0 * (k1.theta + 2 * k2.theta + 2 * k3.theta + k4.theta);
        out.pr += h / 6.0 * (k1.pr + 2 * k2.pr + 2 * k3.pr + k4.pr);
        return out;
    }

    /// Adaptive RK4 with step doubling; stops once r crosses 1 from inside,
    /// then bisects the crossing time.
    KnotSeq integrate(State s, double L) const {
        KnotSeq seq;
        seq.L = L;
        double t = 0.0, h = 0.01;
        seq.times.push_back(t);
        seq.states.push_back(s);
        seq.derivs.push_back(rhs(s, L));
        const double max_time = 50.0;
        // nudge off the boundary if starting tangentially inward
        int steps = 0;
        while (t < max_time) {
            if (++steps > 2000000)
                throw trapping_error("RadialModel: step limit exceeded");
            State big = rk4_step(s, h, L);
            State half = rk4_step(rk4_step(s, 0.5 * h, L), 0.5 * h, L);
            const double err = std::abs(big.r - half.r) + std::abs(big.theta - half.theta) +
                               std::abs(big.pr - half.pr);
            if (err > ode_tol_ && h > 1e-12) {
                h *= 0.5;
                continue;
            }
            State next = half;
            if (next.r >= 1.0 && t + h > 1e-14) {
                // bisect the crossing inside (t, t+h]
                double lo = 0.0, hi = h;
                State exact = next;
                for (int it = 0; it < 80 && (hi - lo) > crossing_tol_ * 0.5; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    State probe = rk4_step(s, mid, L);
                    if (probe.r >= 1.0) { hi = mid; exact = probe; }
                    else lo = mid;
                }
                State final_state = rk4_step(s, hi, L);
                t += hi;
                seq.times.push_back(t);
                seq.states.push_back(final_state);
                seq.derivs.push_back(rhs(final_state, L));
                return seq;
            }
            t += h;
            s = next;
            seq.times.push_back(t);
            seq.states.push_back(s);
            seq.derivs.push_back(rhs(s, L));
            if (err < 0.02 * ode_tol_) h = std::min(2.0 * h, 0.05);
        }
        throw trapping_error("RadialModel: geodesic did not exit before max time");
    }

    Trajectory trace_full(const BoundaryRay& ray) const {
        const double a = wrap_angle(ray.alpha);
        Trajectory tr;
        tr.reversed = std::abs(a) > pi / 2;
        // inward representative
        const BoundaryRay in = tr.reversed
            ? BoundaryRay{ray.beta, wrap_angle(a - pi)}  // reversed direction
            : BoundaryRay{ray.beta, a};
        tr.entry = in;

        if (std::abs(std::abs(a) - pi / 2) < 1e-12) {
            // glancing: fixed point, zero-length geodesic
            tr.tau_signed = 0.0;
            tr.exit = ray;
            KnotSeq seq;
            seq.L = m(1.0) * std::sin(a);
            State s;
            s.theta = ray.beta;
            s.pr = -std::cos(a);
            seq.times = {0.0};
            seq.states = {s};
            seq.derivs = {rhs(s, seq.L)};
            tr.knots = seq;
            return tr;
        }

        if (std::abs(std::sin(in.alpha)) < 1e-12) {
            // radial chord through the center: arclength 2, theta flips
            KnotSeq seq;
            seq.L = 0.0;
            for (int i = 0; i <= 200; ++i) {
                const double t = 2.0 * i / 200.0;
                State s;
                s.r = std::abs(1.0 - t);
                s.theta = t < 1.0 ? in.beta : wrap_angle(in.beta + pi);
                s.pr = t < 1.0 ? -1.0 : 1.0;
                seq.times.push_back(t);
                seq.states.push_back(s);
                State d;
                d.r = s.pr;
                seq.derivs.push_back(d);
            }
            tr.knots = seq;
            const double tau = 2.0;
            tr.tau_signed = tr.reversed ? -tau : tau;
            // forward exit of the inward representative is (beta+pi, pi);
            // for an outward ray the scattered point is its reversal
            tr.exit = tr.reversed ? BoundaryRay{wrap_angle(in.beta + pi), 0.0}
                                  : BoundaryRay{wrap_angle(in.beta + pi), pi};
            return tr;
        }

        State s0;
        s0.r = 1.0;
        s0.theta = in.beta;
        s0.pr = -std::cos(in.alpha);
        const double L = m(1.0) * std::sin(in.alpha);
        tr.knots = integrate(s0, L);
        const double tau = tr.knots.times.back();
        tr.tau_signed = tr.reversed ? -tau : tau;

        const State& e = tr.knots.states.back();
        const double thdot = e.ptheta_rate(*this, L);
        const double aexit = std::atan2(m(1.0) * thdot, -e.pr);
        const BoundaryRay exit_fwd{wrap_angle(e.theta), wrap_angle(aexit)};
        // for an outward ray, the scattered point is the reversal of the
        // inward representative's forward exit
        tr.exit = tr.reversed
            ? BoundaryRay{exit_fwd.beta, wrap_angle(exit_fwd.alpha + pi)}
            : exit_fwd;
        return tr;
    }

    std::vector<double> coeffs_;
    double ode_tol_;
    double crossing_tol_;
};

// ---------------------------------------------------------------------------
// Santalo check
// ---------------------------------------------------------------------------

struct SantaloResult {
    double lhs = 0.0, rhs = 0.0, relative_gap = 0.0;
};

/// lhs = int_SM f dSigma^3 (3-D quadrature); rhs = boundary-initialized
/// flow integral int_{d+SM} int_0^tau f(phi_t) dt mu dSigma^2.
inline SantaloResult santalo_check(const ConvexModel& model,
                                   const std::function<double(const SMPoint&)>& f,
                                   int n_r = 96, int n_angle = 64, int n_u = 96) {
    SantaloResult out;
    out.lhs = model.interior_integral(f, n_r, n_angle, n_angle);
    (void)n_u;
    // chord integrals of rho-like integrands have cut-locus kinks, and the
    // alpha profile picks up sin^2(a) log|sin a| terms from them: adaptive
    // bisection in both u and alpha
    out.rhs = periodic_trapezoid([&](double beta) {
        return integrate_adaptive([&](double alpha) {
            const GeodesicRecord rec = model.trace(BoundaryRay{beta, alpha});
            if (rec.tau() <= 0.0) return 0.0;
            const double inner = integrate_adaptive([&](double u) {
                return f(rec.at(u));
            }, 0.0, 1.0, 1e-11);
            return rec.tau() * inner * std::cos(alpha);
        }, -pi / 2, pi / 2, 1e-10);
    }, 0.0, 2.0 * pi, n_angle) * model.boundary_radius();
    const double scale = std::max({std::abs(out.lhs), std::abs(out.rhs), 1e-30});
    out.relative_gap = std::abs(out.lhs - out.rhs) / scale;
    return out;
}

} // namespace xrayphg

#endif
