#ifndef XRAYPHG_TRANSFORMS_HPP
#define XRAYPHG_TRANSFORMS_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <optional>

#include "xrayphg/geometry.hpp"
#include "xrayphg/index_algebra.hpp"
#include "xrayphg/special.hpp"

namespace xrayphg {

// ---------------------------------------------------------------------------
// Fields and boundary data
// ---------------------------------------------------------------------------

/// Scalar integrand on SM (or M, lifted fiber-constant).  The optional index
/// hint drives integrability guards and endpoint-aware quadrature.  Fields
/// with a boundary-singular factor should use the structured form
/// f = rho^gamma log^k(rho) * smooth, which lets chord quadratures evaluate
/// the bdf without cancellation at the endpoints.
struct ScalarField {
    struct PhgPart {
        double gamma = 0.0;
        int logk = 0;
        std::function<double(const SMPoint&)> smooth; // may be null (== 1)
    };

    std::function<double(const SMPoint&)> eval;
    std::optional<IndexSet> index_hint;
    std::optional<PhgPart> phg;

    static ScalarField on_m(std::function<double(const Point2&)> f,
                            std::optional<IndexSet> hint = std::nullopt) {
        ScalarField out;
        out.eval = [f = std::move(f)](const SMPoint& p) { return f(p.pos); };
        out.index_hint = std::move(hint);
        return out;
    }

    static ScalarField one() {
        return on_m([](const Point2&) { return 1.0; }, IndexSet::naturals());
    }

    /// rho^gamma log^k(rho) times a smooth factor.
    static ScalarField rho_log_power(const ConvexModel& model, double gamma, int logk,
                                     std::function<double(const Point2&)> smooth = nullptr) {
        ScalarField out;
        PhgPart part;
        part.gamma = gamma;
        part.logk = logk;
        if (smooth)
            part.smooth = [smooth](const SMPoint& p) { return smooth(p.pos); };
        out.phg = part;
        out.eval = [&model, gamma, logk, smooth](const SMPoint& p) {
            const double r = model.rho(p.pos);
            double v = (smooth ? smooth(p.pos) : 1.0) * std::pow(r, gamma);
            for (int j = 0; j < logk; ++j) v *= std::log(r);
            return v;
        };
        out.index_hint = IndexSet::single_generator(Exponent(gamma), 1, logk);
        return out;
    }

    static ScalarField rho_power(const ConvexModel& model, double gamma,
                                 std::function<double(const Point2&)> smooth = nullptr) {
        return rho_log_power(model, gamma, 0, std::move(smooth));
    }

    double inf_order() const { return index_hint ? index_hint->inf() : 0.0; }

    /// Endpoint-singular along chords: negative order, a log factor, or a
    /// fractional power (whose derivatives blow up at the boundary).
    bool endpoint_singular() const {
        if (inf_order() < 0.0) return true;
        if (!phg) return false;
        if (phg->logk > 0) return true;
        return std::abs(phg->gamma - std::round(phg->gamma)) > 1e-12;
    }
};

/// Boundary data g on the inward boundary, with the cutoff parameters of its
/// synthesis (chi = 1 on [0, eps/3], 0 beyond 2 eps/3) and the infimum of its
/// tau-exponents when singular.
struct BoundaryData {
    std::function<double(const BoundaryRay&)> eval;
    double cutoff_eps = 0.5;
    double singular_order = 0.0;

    /// a(omega) tau^gamma log^k(tau) chi(tau) with smooth a of the glancing
    /// chart midpoint.
    static BoundaryData phg_profile(const ConvexModel& model, double gamma, int k,
                                    double eps = 0.5,
                                    std::function<double(double, int)> a = nullptr) {
        BoundaryData g;
        g.cutoff_eps = eps;
        g.singular_order = gamma;
        g.eval = [&model, gamma, k, eps, a](const BoundaryRay& ray) {
            const double tau = model.tau_tilde(ray);
            if (tau <= 0.0) return 0.0;
            const double chi = smooth_cutoff(tau, eps);
            if (chi == 0.0) return 0.0;
            double amp = 1.0;
            if (a) {
                const GlancingChart c = model.glancing_chart(ray);
                amp = a(c.omega_mid, c.w_sign);
            }
            const double lg = std::log(tau);
            double logpow = 1.0;
            for (int j = 0; j < k; ++j) logpow *= lg;
            return amp * std::pow(tau, gamma) * logpow * chi;
        };
        return g;
    }
};

// ---------------------------------------------------------------------------
// X-ray transform
// ---------------------------------------------------------------------------

struct XrayOptions {
    enum class Form { automatic, direct, upsilon };
    Form form = Form::automatic;
    double tol = 1e-11;
    int base_nodes = 64;
    int max_doublings = 6;
};

/// Weighted X-ray transform int_0^tau (phi f)(phi_t(ray)) dt.
/// Direct form: composite Gauss-Legendre in t with node doubling, falling
/// back to panel-adaptive bisection when a cut-locus kink stalls the
/// doubling; endpoint-singular fields get a dyadically graded mesh instead.
/// Upsilon form: tau int_0^1 (phi f)(Upsilon) du by tanh-sinh, which absorbs
/// (u(1-u))^gamma endpoint factors.  Structured rho^gamma log^k fields are
/// evaluated through the stable chord bdf in both forms.
inline double xray(const ConvexModel& model, const ScalarField& f,
                   const ScalarField& weight, const BoundaryRay& ray,
                   const XrayOptions& opt = {}) {
    if (f.inf_order() <= -1.0)
        throw integrability_error("xray: index hint has inf <= -1");
    const GeodesicRecord rec = model.trace(ray);
    const double tau = rec.tau();
    if (tau <= 0.0) return 0.0;

    // integrand in (u, 1-u): stable evaluation arbitrarily close to the ends
    auto integrand = [&](double u, double umc) {
        const SMPoint p = rec.at(u);
        if (f.phg) {
            const auto& part = *f.phg;
            const double r = model.rho_upsilon(ray, u, umc);
            double v = std::pow(r, part.gamma);
            for (int j = 0; j < part.logk; ++j) v *= std::log(r);
            if (part.smooth) v *= part.smooth(p);
            return weight.eval(p) * v;
        }
        return weight.eval(p) * f.eval(p);
    };

    const bool singular = f.endpoint_singular();
    XrayOptions::Form form = opt.form;
    if (form == XrayOptions::Form::automatic)
        form = singular ? XrayOptions::Form::upsilon : XrayOptions::Form::direct;

    if (form == XrayOptions::Form::direct) {
        if (!singular) {
            auto in_t = [&](double t) { return integrand(t / tau, 1.0 - t / tau); };
            double prev = integrate_gl(in_t, 0.0, tau, opt.base_nodes);
            int n = opt.base_nodes;
            for (int d = 0; d < opt.max_doublings; ++d) {
                n *= 2;
                const double cur = integrate_gl(in_t, 0.0, tau, n);
                if (std::abs(cur - prev) <= opt.tol * (1.0 + std::abs(cur))) return cur;
                prev = cur;
            }
            return integrate_adaptive(in_t, 0.0, tau, opt.tol);
        }
        // graded dyadic mesh, symmetric from both endpoints, deep enough
        // that the truncated mass ~ 2^{-L(1+gamma)} is below tolerance
        const double mass_rate = std::max(0.05, 1.0 + std::min(f.inf_order(), 0.0));
        const int levels = std::min(900, static_cast<int>(std::ceil(44.0 / mass_rate)));
        double total = 0.0;
        for (int k = 0; k < levels; ++k) {
            const double hi = 0.5 * std::pow(0.5, k); // in u, panels up to 1/2
            const double lo = (k == levels - 1) ? 0.0 : hi * 0.5;
            total += integrate_gl([&](double s) { return integrand(s, 1.0 - s); },
                                  lo, hi, 32);
            total += integrate_gl([&](double s) { return integrand(1.0 - s, s); },
                                  lo, hi, 32);
        }
        return tau * total;
    }
    return tau * tanh_sinh_01(integrand, opt.tol, 11);
}

inline double xray(const ConvexModel& model, const ScalarField& f,
                   const BoundaryRay& ray, const XrayOptions& opt = {}) {
    return xray(model, f, ScalarField::one(), ray, opt);
}

// ---------------------------------------------------------------------------
// Backprojection and normal operator
// ---------------------------------------------------------------------------

struct BackprojectOptions {
    int base_nodes = 512;
    double tol = 1e-10;
    int max_doublings = 5;
};

/// int_{S_x} g(F(x,v)) dS_x(v): periodic trapezoid in the fiber angle with
/// node doubling (spectrally accurate; near-boundary x gets the doublings).
inline double backproject(const ConvexModel& model, const BoundaryData& g,
                          const Point2& x, const BackprojectOptions& opt = {}) {
    if (g.singular_order <= -1.0)
        throw integrability_error("backproject: boundary data not integrable over fibers");
    return periodic_trapezoid_adaptive([&](double psi) {
        return g.eval(model.footpoint(x, psi));
    }, 0.0, 2.0 * pi, opt.tol, opt.base_nodes, opt.max_doublings);
}

/// Normal operator (backprojection of the X-ray transform) at x.
inline double normal_op(const ConvexModel& model, const ScalarField& f,
                        const Point2& x, const BackprojectOptions& bopt = {},
                        const XrayOptions& xopt = {}) {
    BoundaryData g;
    g.singular_order = 0.0;
    g.eval = [&](const BoundaryRay& ray) { return xray(model, f, ray, xopt); };
    return backproject(model, g, x, bopt);
}

/// Flat-disk normal-operator identity: (backprojection o transform) f (x)
/// equals 2 int_M f(y) |x-y|^{-1} dy; computed in polar coordinates around x
/// so the kernel singularity cancels against the Jacobian.
inline double euclid_normal_oracle(const ConvexModel& model,
                                   const std::function<double(const Point2&)>& f,
                                   const Point2& x, int n_phi = 256, int n_r = 96) {
    const bool disk = dynamic_cast<const DiskModel*>(&model) != nullptr;
    const auto* radial = dynamic_cast<const RadialModel*>(&model);
    const bool flat_radial = radial && radial->m_coefficients().empty();
    if (!disk && !flat_radial)
        throw model_mismatch_error("euclid_normal_oracle: flat disk only");
    return 2.0 * periodic_trapezoid([&](double phi) {
        const double ex = std::cos(phi), ey = std::sin(phi);
        const double b = x.x * ex + x.y * ey;
        const double reach = -b + std::sqrt(b * b + 1.0 - (x.x * x.x + x.y * x.y));
        return integrate_gl([&](double r) {
            return f(Point2{x.x + r * ex, x.y + r * ey});
        }, 0.0, reach, n_r);
    }, 0.0, 2.0 * pi, n_phi);
}

// ---------------------------------------------------------------------------
// Glancing B-function
// ---------------------------------------------------------------------------

/// B(ray; z) = int_0^1 h(y o Upsilon) F^{z-1} (u(1-u))^{z-1} du.  Direct
/// tanh-sinh for Re z > 0; at glancing rays the integrand is constant in u
/// and the continuation reduces to the generalized Beta functional,
/// B = h(y) kappa^{z-1} B(z,z).
inline MeromorphicSample glancing_B(const ConvexModel& model,
                                    const std::function<double(double)>& h,
                                    const BoundaryRay& ray, cplx z) {
    MeromorphicSample out;
    out.z = z;
    const double tau = model.tau_tilde(ray);
    const bool glancing = std::abs(tau) < 1e-9;

    if (glancing) {
        const int w = wrap_angle(ray.alpha) >= 0 ? +1 : -1;
        const double kap = model.kappa(ray.beta, w);
        const MeromorphicSample base = gen_beta(1.0, z);
        const cplx factor = h(ray.beta) * std::exp((z - 1.0) * std::log(kap));
        out.near_pole = base.near_pole;
        if (out.near_pole) out.near_pole->leading_coefficient *= factor;
        else out.value = factor * base.value;
        return out;
    }
    if (z.real() <= 0.0)
        throw integrability_error("glancing_B: Re z <= 0 requires a glancing ray");

    const GeodesicRecord rec = model.trace(ray);
    out.value = tanh_sinh_01([&](double u, double umc) -> cplx {
        const SMPoint p = rec.at(u);
        const double hy = h(model.boundary_foot_angle(p.pos));
        // F = rho(Upsilon)/(tau^2 u (1-u)), stable through rho_upsilon
        const double ff = model.rho_upsilon(ray, u, umc) / (tau * tau * u * umc);
        const cplx w = (z - 1.0) * (std::log(u) + std::log(umc) + std::log(ff));
        return hy * std::exp(w);
    }, 1e-12, 11);
    return out;
}

// ---------------------------------------------------------------------------
// Weighted-norm bound check
// ---------------------------------------------------------------------------

enum class AlphaBdf { tau, glancing_t };

struct WeightedBoundResult {
    double lhs = 0.0;
    double bound = 0.0;
    double constant = 0.0;
    double f_sup = 0.0;       // estimated sup of the chord factor
    double ratio_sup = 0.0;   // estimated sup of tau / t
    bool pass = false;
};

/// Checks the weighted estimate
///   int (I0(rho^gamma f))^2 t^{2 delta - 4 gamma - 1} mu dSigma
///     <= C Vol(S^1) int_M f^2 rho^delta dVol,
/// C = F_sup^{2 gamma - delta} B(2g-d+1, 2g-d+1) (tau/t)_sup.
inline WeightedBoundResult weighted_bound_check(
    const ConvexModel& model, double gamma, double delta,
    const std::function<double(const Point2&)>& f, AlphaBdf tbdf = AlphaBdf::tau,
    int n_beta = 48) {
    if (!(delta < 2.0 * gamma + 1.0))
        throw std::invalid_argument("weighted_bound_check: needs delta < 2 gamma + 1");

    WeightedBoundResult out;
    const ScalarField field = ScalarField::rho_power(model, gamma, f);

    auto tvalue = [&](const BoundaryRay& ray) {
        if (tbdf == AlphaBdf::tau) return model.tau_tilde(ray);
        return model.glancing_chart(ray).t;
    };

    // tanh-sinh in alpha absorbs the (cos alpha)^{2 delta + 1} endpoint power.
    // Tolerances are set for ~1e-7 relative accuracy of the integrals; the
    // gamma = delta = 0 equality case involves exact integrands that settle
    // far below that regardless.
    const double texp = 2.0 * delta - 4.0 * gamma - 1.0;
    XrayOptions xopt;
    xopt.tol = 3e-9;
    out.lhs = periodic_trapezoid([&](double beta) {
        return tanh_sinh_ab([&](double alpha, double) {
            const BoundaryRay ray{beta, alpha};
            const double v = xray(model, field, ray, xopt);
            const double t = tvalue(ray);
            if (t <= 0.0) return 0.0;
            return v * v * std::pow(t, texp) * std::cos(alpha);
        }, -pi / 2, pi / 2, 3e-8, 8);
    }, 0.0, 2.0 * pi, n_beta) * model.boundary_radius();

    // sup estimates over a (ray, u) grid, 1% safety inflation; exact when
    // the alpha-bdf is tau itself
    double fsup = 0.0;
    const int ng = 200;
    for (int i = 0; i < ng; ++i) {
        const double alpha = -pi / 2 + pi * (i + 0.5) / ng;
        const BoundaryRay ray{0.0, alpha};
        for (int j = 0; j < ng; ++j)
            fsup = std::max(fsup, model.f_factor(ray, (j + 0.5) / ng));
    }
    out.f_sup = fsup * 1.01;
    out.ratio_sup = 1.0;
    if (tbdf != AlphaBdf::tau) {
        double rsup = 0.0;
        for (int i = 0; i < ng; ++i) {
            const double alpha = pi / 2 - 0.49 * (i + 0.5) / ng;
            const BoundaryRay ray{0.0, alpha};
            const double t = tvalue(ray);
            if (t > 0.0) rsup = std::max(rsup, model.tau_tilde(ray) / t);
        }
        out.ratio_sup = rsup * 1.01;
    }

    const double bexp = 2.0 * gamma - delta;
    out.constant = std::pow(out.f_sup, bexp) *
                   beta_diag(cplx(bexp + 1.0)).value.real() * out.ratio_sup;

    // int_M f^2 rho^delta dVol; rho = 1 - r equals the exact tanh-sinh
    // complement, no cancellation at the boundary
    const auto* radial = dynamic_cast<const RadialModel*>(&model);
    const double mass = periodic_trapezoid([&](double theta) {
        return tanh_sinh_01([&](double r, double rho_exact) {
            const Point2 p{r * std::cos(theta), r * std::sin(theta)};
            const double fr = f(p);
            return fr * fr * std::pow(rho_exact, delta) * (radial ? radial->m(r) : r);
        }, 1e-11, 10);
    }, 0.0, 2.0 * pi, n_beta);

    out.bound = out.constant * 2.0 * pi * mass;
    out.pass = out.lhs <= out.bound * (1.0 + 1e-8);
    return out;
}

} // namespace xrayphg

#endif
