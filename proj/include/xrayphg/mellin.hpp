#ifndef XRAYPHG_MELLIN_HPP
#define XRAYPHG_MELLIN_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "xrayphg/errors.hpp"
#include "xrayphg/quadrature.hpp"
#include "xrayphg/special.hpp"

namespace xrayphg {

/// Conormal input of the Mellin functional: a callable of the bdf together
/// with a declared order t (|H| <~ rho^t near 0).
struct MellinInput {
    std::function<double(double)> h;
    double order = 0.0;
};

/// Mellin functional int_0^eps rho^z H chi drho/rho by tanh-sinh; holomorphic
/// for Re z > -order.
inline cplx mellin_eval(const MellinInput& H, cplx z, double eps = 0.5,
                        double tol = 1e-12) {
    if (z.real() <= -H.order + 1e-12)
        throw integrability_error("mellin_eval: Re z at or below the divergence threshold");
    // int_0^eps rho^{z-1} H chi drho = eps^z int_0^1 u^{z-1} H(eps u) chi du;
    // the magnitudes are combined in one exponential so neither factor
    // overflows at the deep quadrature nodes
    return tanh_sinh_01([&](double u, double) -> cplx {
        const double rho = eps * u;
        const double chi = smooth_cutoff(rho, eps);
        if (chi == 0.0) return cplx(0.0);
        const double hv = H.h(rho) * chi;
        if (hv == 0.0) return cplx(0.0);
        const cplx logterm = (z - 1.0) * std::log(u) + std::log(std::abs(hv));
        if (logterm.real() < -745.0) return cplx(0.0);
        return (hv < 0.0 ? -1.0 : 1.0) * std::exp(logterm);
    }, tol, 11) * std::exp(z * std::log(eps));
}

/// One extracted pole of a Mellin functional: a term c rho^g log^k rho gives
/// a pole of order k+1 at -g; leading_coefficient is c (the expansion
/// coefficient, i.e. the top Laurent coefficient divided by (-1)^k k!).
struct MellinPole {
    double location = 0.0;
    int order = 1;
    double leading_coefficient = 0.0;
};

struct MellinScanOptions {
    double eps = 0.5;
    double residual_tol = 1e-4;
    double amplitude_floor = 1e-7; // pole contribution below this: stop
    int max_poles = 8;
    double quad_tol = 1e-11;
};

namespace detail {

/// Linear least squares of samples F(z_j) against
///   sum_r A_r (z-p)^{-r}  +  quadratic background  +  simple poles fixed
///   left of the whole search window (a rational background absorbing the
///   tails of poles deeper than the current scan can reach), given the
///   pole location p.  Solved by modified Gram-Schmidt QR.
inline double laurent_lsq(const std::vector<cplx>& zs, const std::vector<cplx>& fs,
                          double p, int R,
                          const std::vector<std::pair<double, int>>& fixed_poles,
                          std::vector<cplx>* coeffs) {
    const int n = static_cast<int>(zs.size());
    int nfix = 0;
    for (const auto& fp : fixed_poles) nfix += fp.second;
    const int nc = R + 3 + nfix;
    const double zmid = 0.5 * (zs.front().real() + zs.back().real());
    std::vector<std::vector<cplx>> cols(nc, std::vector<cplx>(n));
    std::vector<double> scale(nc, 0.0);
    for (int j = 0; j < n; ++j) {
        const cplx d = zs[j] - cplx(p, 0.0);
        cplx q = 1.0;
        for (int r = 1; r <= R; ++r) {
            q /= d;
            cols[r - 1][j] = q;
        }
        const cplx w = zs[j] - cplx(zmid, 0.0);
        cols[R][j] = 1.0;
        cols[R + 1][j] = w;
        cols[R + 2][j] = w * w;
        int c = R + 3;
        for (const auto& fp : fixed_poles) {
            cplx qf = 1.0;
            for (int r = 1; r <= fp.second; ++r) {
                qf /= (zs[j] - cplx(fp.first, 0.0));
                cols[c++][j] = qf;
            }
        }
    }
    for (int c = 0; c < nc; ++c) {
        for (int j = 0; j < n; ++j) scale[c] += std::norm(cols[c][j]);
        scale[c] = std::sqrt(scale[c]) + 1e-300;
        for (int j = 0; j < n; ++j) cols[c][j] /= scale[c];
    }

    // modified Gram-Schmidt QR of the n x nc column set
    std::vector<std::vector<cplx>> Q = cols;
    std::vector<std::vector<cplx>> Rm(nc, std::vector<cplx>(nc, 0.0));
    for (int c = 0; c < nc; ++c) {
        double nrm = 0.0;
        for (int j = 0; j < n; ++j) nrm += std::norm(Q[c][j]);
        nrm = std::sqrt(nrm);
        Rm[c][c] = nrm;
        if (nrm < 1e-14) { Rm[c][c] = 1e-14; continue; }
        for (int j = 0; j < n; ++j) Q[c][j] /= nrm;
        for (int c2 = c + 1; c2 < nc; ++c2) {
            cplx dot = 0.0;
            for (int j = 0; j < n; ++j) dot += std::conj(Q[c][j]) * Q[c2][j];
            Rm[c][c2] = dot;
            for (int j = 0; j < n; ++j) Q[c2][j] -= dot * Q[c][j];
        }
    }
    std::vector<cplx> qtb(nc, 0.0), sol(nc);
    for (int c = 0; c < nc; ++c)
        for (int j = 0; j < n; ++j) qtb[c] += std::conj(Q[c][j]) * fs[j];
    for (int c = nc - 1; c >= 0; --c) {
        sol[c] = qtb[c];
        for (int q = c + 1; q < nc; ++q) sol[c] -= Rm[c][q] * sol[q];
        sol[c] /= Rm[c][c];
    }

    double res = 0.0, nf = 0.0;
    for (int j = 0; j < n; ++j) {
        cplx model = 0.0;
        for (int c = 0; c < nc; ++c) model += sol[c] * cols[c][j];
        res += std::norm(model - fs[j]);
        nf += std::norm(fs[j]);
    }
    if (coeffs) {
        coeffs->resize(R);
        for (int r = 1; r <= R; ++r) (*coeffs)[r - 1] = sol[r - 1] / scale[r - 1];
    }
    return std::sqrt(res / (nf + 1e-300));
}

} // namespace detail

/// Poles of the Mellin functional of H with Re z in (window_lo, 0], found
/// rightmost-first.  Each pole is extracted by fitting a Laurent-plus-smooth
/// model to quadrature samples taken on the convergent side of the current
/// abscissa (the transform is never evaluated where it diverges); the fitted
/// terms are then subtracted from H in rho-space and the scan recurses
/// leftward.  Samples stay right of every subtracted pole, where residual
/// subtraction error remains integrable.
inline std::vector<MellinPole> mellin_pole_scan(const MellinInput& H,
                                                double window_lo, int max_order,
                                                const MellinScanOptions& opt = {}) {
    struct Term {
        double gamma;
        int k;
        double c;
    };
    std::vector<Term> terms;

    auto h_reduced = [&](double rho) {
        double v = H.h(rho);
        for (const auto& t : terms) {
            double w = t.c * std::pow(rho, t.gamma);
            for (int j = 0; j < t.k; ++j) w *= std::log(rho);
            v -= w;
        }
        return v;
    };

    // Unit-normalized sharp-cutoff functional G(z) = int_0^1 s^{z-1}
    // H_red(rho0 s) ds with rho0 = eps/3 (inside the chi == 1 region).  For
    // a term c rho^g log^k rho it is an exact Laurent stack at -g with no
    // entire envelope, so a low-degree background suffices in the fits; the
    // pole set matches the chi-cutoff functional and the coefficients are
    // recovered through the log(rho0) binomial mixing below.
    const double rho0 = opt.eps / 3.0;
    auto eval = [&](cplx z) -> cplx {
        return tanh_sinh_01([&](double u, double) -> cplx {
            const double hv = h_reduced(rho0 * u);
            if (hv == 0.0) return cplx(0.0);
            const cplx logterm = (z - 1.0) * std::log(u) + std::log(std::abs(hv));
            if (logterm.real() < -745.0) return cplx(0.0);
            return (hv < 0.0 ? -1.0 : 1.0) * std::exp(logterm);
        }, opt.quad_tol, 11);
    };

    std::vector<MellinPole> out;
    double barrier = -H.order; // current divergence abscissa (<= first pole)
    double profile_scale0 = 0.0;

    // two-window log-log slope of the reduced profile, with the k/ln(rho)
    // log-power bias eliminated by the two-point model slope = g + k/L
    auto next_exponent_guess = [&](bool* exhausted) {
        auto window_slope = [&](double lo, double hi, double* mean_len,
                                double* amp) -> std::optional<double> {
            std::vector<double> ss, vs;
            for (int i = 0; i < 6; ++i) {
                const double rho = lo * std::pow(hi / lo, i / 5.0);
                const double v = std::abs(h_reduced(rho));
                if (v < 1e-280) continue;
                ss.push_back(std::log(rho));
                vs.push_back(std::log(v));
                *amp = std::max(*amp, v);
            }
            if (ss.size() < 4) return std::nullopt;
            double sm = 0, vm = 0;
            for (size_t i = 0; i < ss.size(); ++i) { sm += ss[i]; vm += vs[i]; }
            sm /= ss.size(); vm /= vs.size();
            double num = 0, den = 0;
            for (size_t i = 0; i < ss.size(); ++i) {
                num += (ss[i] - sm) * (vs[i] - vm);
                den += (ss[i] - sm) * (ss[i] - sm);
            }
            *mean_len = sm;
            return num / den;
        };
        double la = 0, lb = 0, amp = 0;
        auto sa = window_slope(1e-5, 1e-4, &la, &amp);
        auto sb = window_slope(1e-3, 1e-2, &lb, &amp);
        if (profile_scale0 == 0.0) profile_scale0 = amp + 1e-300;
        if (!sa || !sb || amp < 1e-7 * profile_scale0) {
            *exhausted = true;
            return 0.0;
        }
        *exhausted = false;
        return (*sa * la - *sb * lb) / (la - lb);
    };

    for (int round = 0; round < opt.max_poles; ++round) {
        bool exhausted = false;
        const double gamma_hat = next_exponent_guess(&exhausted);
        if (exhausted) break;
        if (-gamma_hat < window_lo - 0.45) break; // next pole out of window

        // sample set on the convergent side of the barrier;
        // nearest offset 0.035: the double-exponential rule truncates the
        // u^{d-1} mass below the representable range, an irreducible error
        // ~ exp(-745 d) that only dies out for d above ~0.03
        static const double doffs[] = {0.035, 0.05, 0.075, 0.11, 0.17,
                                       0.26, 0.4, 0.6, 0.9, 1.4};
        std::vector<cplx> zs, fs;
        for (double d : doffs) zs.push_back(cplx(barrier + d, 0.0));
        for (double d : {0.05, 0.12, 0.3, 0.7, 1.1})
            zs.push_back(cplx(barrier + d, 0.5));
        for (double d : {0.08, 0.4, 0.9}) zs.push_back(cplx(barrier + d, -0.9));
        for (const cplx& z : zs) fs.push_back(eval(z));

        const int R = max_order + 1;

        // basis: explicit ladders at already extracted poles (their
        // subtraction leftovers) plus background poles anchored left of the
        // movable search window
        std::vector<std::pair<double, int>> fixed;
        // one extra ladder level per extracted pole: a location error dp in
        // the subtraction leaves a log-raised leftover c dp rho^g log^{k+1}
        for (const auto& q : out) fixed.push_back({q.location, q.order + 1});
        for (double off : {0.55, 1.0, 1.8})
            fixed.push_back({-gamma_hat - off, 1});

        // movable search window around the slope estimate
        const double search_hi = std::min(-gamma_hat + 0.45, barrier + 0.006);
        const double search_lo = -gamma_hat - 0.45;
        if (search_hi <= search_lo) break;
        double pbest = search_lo;
        double rbest = std::numeric_limits<double>::infinity();
        for (double pc = search_hi; pc >= search_lo; pc -= 0.01) {
            const double r = detail::laurent_lsq(zs, fs, pc, R, fixed, nullptr);
            if (r < rbest) { rbest = r; pbest = pc; }
        }
        std::vector<cplx> probe;
        detail::laurent_lsq(zs, fs, pbest, R, fixed, &probe);
        const double dnear0 = std::max(std::abs(zs.front().real() - pbest), 0.03);
        double contrib = 0.0;
        for (int r = 1; r <= R; ++r)
            contrib += std::abs(probe[r - 1]) * std::pow(dnear0, -r);
        double fscale = 0.0;
        for (const cplx& f : fs) fscale = std::max(fscale, std::abs(f));
        if (contrib < opt.amplitude_floor * (fscale + 1.0)) break; // no pole left

        // per-order relocation: surplus Laurent columns absorb location
        // error and flatten the residual landscape, so each candidate order
        // is located with exactly that many columns; the order is the
        // smallest one reaching the residual floor
        std::vector<double> ord_p(R + 1, 0.0), ord_res(R + 1, 0.0);
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int r = 1; r <= R; ++r) {
            double lo = pbest - 0.03;
            double hi = std::min(pbest + 0.03, barrier + 0.006);
            auto residual_at = [&](double pc) {
                return detail::laurent_lsq(zs, fs, pc, r, fixed, nullptr);
            };
            double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
            double fa = residual_at(a), fb = residual_at(b);
            for (int it = 0; it < 50; ++it) {
                if (fa < fb) {
                    hi = b; b = a; fb = fa;
                    a = hi - gr * (hi - lo);
                    fa = residual_at(a);
                } else {
                    lo = a; a = b; fa = fb;
                    b = lo + gr * (hi - lo);
                    fb = residual_at(b);
                }
            }
            ord_p[r] = 0.5 * (lo + hi);
            ord_res[r] = residual_at(ord_p[r]);
        }
        double res_min = std::numeric_limits<double>::infinity();
        for (int r = 1; r <= R; ++r) res_min = std::min(res_min, ord_res[r]);
        int order = R;
        for (int r = 1; r <= R; ++r) {
            if (ord_res[r] <= std::max(30.0 * res_min, 1e-8)) {
                order = r;
                break;
            }
        }
        const double p = ord_p[order];
        std::vector<cplx> coeffs;
        const double res = detail::laurent_lsq(zs, fs, p, order, fixed, &coeffs);
#ifdef XRAYPHG_MELLIN_DEBUG
        std::fprintf(stderr, "round %d: barrier=%.6f ghat=%.4f pbest=%.6f rbest=%.3e p=%.8f order=%d res=%.3e\n", round, barrier, gamma_hat, pbest, rbest, p, order, res);
#endif
        if (p < window_lo - 0.05) break;
        if (res > opt.residual_tol)
            throw fit_error("mellin_pole_scan: Laurent residual " + std::to_string(res));

        // Laurent data -> expansion coefficients: with rho = rho0 s,
        // log^j rho mixes binomially, giving the triangular system
        //   A_{m+1} = rho0^{-p} (-1)^m m! sum_{j>=m} C(j,m) log(rho0)^{j-m} c_j
        // solved downward from the top log level.
        const double L = std::log(rho0);
        const double envelope = std::pow(rho0, -p); // rho0^{gamma}
        std::vector<double> cs(order, 0.0);
        for (int m = order - 1; m >= 0; --m) {
            double fact = 1.0;
            for (int q = 2; q <= m; ++q) fact *= q;
            double rhsv = coeffs[m].real() * ((m % 2) ? -1.0 : 1.0) / (fact * envelope);
            for (int j = m + 1; j < order; ++j)
                rhsv -= binomial(j, m) * std::pow(L, j - m) * cs[j];
            cs[m] = rhsv;
        }

        // re-detection of an already extracted pole (leftover subtraction
        // error): fold the correction into its terms and keep scanning
        MellinPole* known = nullptr;
        for (auto& q : out)
            if (std::abs(q.location - p) < 0.02) known = &q;
        if (known) {
            for (auto& t : terms)
                if (std::abs(t.gamma + known->location) < 0.021 &&
                    t.k < static_cast<int>(cs.size()))
                    t.c += cs[t.k];
            if (known->order - 1 < static_cast<int>(cs.size()))
                known->leading_coefficient += cs[known->order - 1];
            barrier = known->location;
            continue;
        }

        MellinPole pole;
        pole.location = p;
        pole.order = order;
        pole.leading_coefficient = cs[order - 1];
        out.push_back(pole);

        // subtract every extracted log level at this exponent and recurse
        for (int j = 0; j < order; ++j) terms.push_back(Term{-p, j, cs[j]});
        barrier = p;
        if (barrier < window_lo) break;
    }
    return out;
}

} // namespace xrayphg

#endif
