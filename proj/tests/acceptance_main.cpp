// Acceptance suite: one pass/fail line per criterion, exit 1 on any failure.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "xrayphg/asymptotics.hpp"
#include "xrayphg/chebyshev.hpp"
#include "xrayphg/io.hpp"
#include "xrayphg/mellin.hpp"
#include "xrayphg/threading.hpp"
#include "xrayphg/transforms.hpp"

using namespace xrayphg;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number,
                name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

DiskModel disk;

// ---------------------------------------------------------------------------

void criterion_1_beta_facts() {
    // residues 2 C(2n,n) and zero slopes -(4^{2n+2}/(n+1)) pi / C(2n+2,n+1)
    const long long residues[] = {2, 4, 12, 40, 140, 504};
    const long long slope_num[] = {16, 256, 4096, 65536, 1048576, 16777216};
    bool pass = true;
    std::string detail;
    for (int n = 0; n <= 5; ++n) {
        const double want_res = static_cast<double>(residues[n]);
        const double want_slope =
            -static_cast<double>(slope_num[n]) /
            ((n + 1.0) * binomial(2 * n + 2, n + 1)) * pi;
        pass = pass && std::abs(beta_diag_residue(n) - want_res) <= 1e-12 * want_res;
        pass = pass && std::abs(beta_diag_zero_slope(n) - want_slope) <=
                           1e-12 * std::abs(want_slope);

        const double h = 1e-5;
        const double res_probe = (beta_diag(cplx(-double(n) + h)).value * cplx(h)).real();
        const double slope_probe = beta_diag(cplx(-n - 0.5 + h)).value.real() / h;
        pass = pass && std::abs(res_probe - want_res) < 1e-4 * want_res;
        pass = pass && std::abs(slope_probe - want_slope) < 1e-4 * std::abs(want_slope);
        if (n == 0) detail = "slope(0)=" + fmt(beta_diag_zero_slope(0));
    }
    report(1, "diagonal Beta residues and zero slopes, n=0..5", pass, detail);
}

void criterion_2_gen_beta() {
    bool pass = true;
    double worst = 0.0;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> re(0.1, 5.0), im(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const cplx z(re(rng), im(rng));
        const cplx a = gen_beta(1.0, z).value;
        const cplx b = beta_diag(z).value;
        const double tol = std::abs(z) > 3.0 ? 1e-8 * std::abs(b) : 1e-9;
        worst = std::max(worst, std::abs(a - b) / std::max(tol, 1e-300));
        pass = pass && std::abs(a - b) <= std::max(tol, 1e-12);
    }

    // continuation through Re z in (-2, 0): one extra recursion step agrees
    auto f = SymmetricProfile::from_function(
        [](double u) { return 1.0 + 0.5 * u * (1.0 - u); });
    std::uniform_real_distribution<double> rneg(-2.0, 0.0);
    for (int i = 0; i < 12; ++i) {
        cplx z(rneg(rng), 0.3 * im(rng));
        if (std::abs(z.real() - std::round(z.real())) < 0.05) z += cplx(0.07, 0.0);
        const cplx direct = gen_beta(f, z).value;
        const SymmetricProfile g = f.recursion_derivative();
        const cplx stepped = (2.0 / z) * ((2.0 * z + 1.0) * gen_beta(f, z + 1.0).value +
                                          gen_beta(g, z + 1.0).value);
        pass = pass && std::abs(direct - stepped) <= 1e-8 * (1.0 + std::abs(direct));
    }

    auto one = SymmetricProfile::from_function([](double) { return 1.0; });
    pass = pass && std::abs(gen_beta_residue(one, 0) - beta_diag_residue(0)) <= 1e-8;
    pass = pass && std::abs(gen_beta_residue(one, 1) - beta_diag_residue(1)) <= 1e-8;
    report(2, "generalized Beta functional: agreement, continuation, residues",
           pass, "agreement max err/tol=" + fmt(worst));
}

void criterion_3_xray_constants() {
    bool pass = true;
    std::string detail;
    for (double gamma : {0.0, 0.5, 1.0, -0.25}) {
        ScalarField f = ScalarField::rho_power(disk, gamma);
        ProfileSamples prof = boundary_profile(
            disk, [&](const BoundaryRay& ray) { return xray(disk, f, ray); }, 0.4, +1);

        const double lead = estimate_leading_exponent(prof);
        pass = pass && std::abs(lead - (2 * gamma + 1)) <= 1e-3;

        std::vector<std::pair<double, int>> cands;
        for (int p = 0; p < 3; ++p) cands.push_back({2 * gamma + 1 + 2 * p, 0});
        const Expansion e = fit_expansion(prof, cands);
        const double kap = disk.kappa(0.4, 1);
        const double want = std::pow(kap, gamma) *
                            beta_diag(cplx(gamma + 1.0)).value.real();
        const double got = e.coeff(2 * gamma + 1, 0);
        pass = pass && std::abs(got - want) <= 5e-3 * std::abs(want);
        if (gamma == 1.0)
            detail = "c(gamma=1)=" + fmt(got) + " want " + fmt(want);
    }
    // parity: even-candidate energy at most 1e-5 of odd
    ScalarField smooth = ScalarField::on_m(
        [](const Point2& p) { return 1.0 + 0.3 * p.x * p.x + 0.2 * p.y; },
        IndexSet::naturals());
    ProfileSamples prof = boundary_profile(
        disk, [&](const BoundaryRay& ray) { return xray(disk, smooth, ray); }, 1.3, +1);
    const ParityResult parity = parity_check(prof);
    pass = pass && parity.even_energy <= 1e-5 * parity.odd_energy;
    report(3, "transform of rho^gamma: leading exponents, constants, parity",
           pass, detail);
}

struct DeepProfile {
    ProfileSamples prof;
    std::vector<std::pair<double, int>> cands;
};

DeepProfile backprojection_profile(double gamma, int k, double eps, int fiber) {
    BoundaryData g = BoundaryData::phg_profile(disk, gamma, k, eps);
    BackprojectOptions bopt;
    bopt.base_nodes = fiber;
    bopt.max_doublings = 4;
    DeepProfile out;
    out.prof = interior_profile(
        disk, [&](const Point2& x) { return backproject(disk, g, x, bopt); }, 0.0,
        ProfileSamples::geometric_grid(3e-3, 1e-6, 0.75));
    const IndexSet idx = backprojection_index(Exponent(gamma), k);
    for (const auto& p : idx.enumerate_below(4.2)) out.cands.push_back({p.z.re(), p.k});
    return out;
}

void criterion_4_backprojection_structure() {
    bool pass = true;
    std::string detail;

    // tau^{1/2} chi: leading singular exponent 3/4 with no log
    {
        DeepProfile d = backprojection_profile(0.5, 0, 0.6, 2048);
        // free-exponent fit of the singular slot
        auto resid_with = [&](double zstar) {
            std::vector<std::pair<double, int>> cands = {
                {0.0, 0}, {zstar, 0}, {1.0, 0}, {zstar + 1, 0},
                {2.0, 0}, {zstar + 2, 0}, {3.0, 0}};
            return fit_expansion(d.prof, cands).fit_residual;
        };
        double lo = 0.6, hi = 0.9;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
        double fa = resid_with(a), fb = resid_with(b);
        for (int it = 0; it < 40; ++it) {
            if (fa < fb) { hi = b; b = a; fb = fa; a = hi - gr * (hi - lo); fa = resid_with(a); }
            else { lo = a; a = b; fa = fb; b = lo + gr * (hi - lo); fb = resid_with(b); }
        }
        const double zfit = 0.5 * (lo + hi);
        if (std::abs(zfit - 0.75) > 1e-3) {
            pass = false;
            detail += " [exponent " + fmt(zfit) + "]";
        }

        // no log at the leading singular slot: admitting the candidate must
        // not materially improve the fit (contrast with the >= 1e3 blow-up
        // when a genuine log candidate is removed below)
        std::vector<std::pair<double, int>> cands = d.cands;
        cands.push_back({0.75, 1});
        const Expansion ewith = fit_expansion(d.prof, cands);
        const Expansion ewithout = fit_expansion(d.prof, d.cands);
        const double log_gain = ewithout.fit_residual /
                                std::max(ewith.fit_residual, 1e-300);
        if (log_gain > 10.0 ||
            std::abs(ewith.coeff(0.75, 1)) > 1e-3 * std::abs(ewith.coeff(0.75, 0))) {
            pass = false;
            detail += " [log verdict: gain " + fmt(log_gain) + "]";
        }

        // coefficient against the case formula, within 2%
        const auto pred = predict_backprojection_leading(
            disk, 0.5, 0, [](double, int) { return 1.0; }, 0.0);
        const Expansion e2 = fit_expansion(d.prof, d.cands);
        const double got = e2.coeff(0.75, 0);
        if (!(pred.has_term &&
              std::abs(got - pred.coeff) <= 0.02 * std::abs(pred.coeff))) {
            pass = false;
            detail += " [coefficient]";
        }
        detail += " z=" + fmt(zfit) + ", c(3/4)=" + fmt(got) + " want " + fmt(pred.coeff);
    }

    // tau^1 chi: removing the (1,1) candidate degrades the residual >= 1e3
    {
        DeepProfile d = backprojection_profile(1.0, 0, 0.6, 4096);
        std::vector<std::pair<double, int>> with_log = d.cands;
        for (const auto& extra : {std::pair<double, int>{3.0, 1}, {4.0, 0}}) {
            bool present = false;
            for (const auto& c : with_log)
                present = present || (std::abs(c.first - extra.first) < 1e-12 &&
                                      c.second == extra.second);
            if (!present) with_log.push_back(extra);
        }
        std::vector<std::pair<double, int>> without_log;
        for (const auto& c : with_log)
            if (!(c.first == 1.0 && c.second == 1)) without_log.push_back(c);
        const Expansion ew = fit_expansion(d.prof, with_log);
        const Expansion ewo = fit_expansion(d.prof, without_log);
        if (ewo.fit_residual < 1e3 * ew.fit_residual) {
            pass = false;
            detail += " [log ratio " + fmt(ewo.fit_residual / ew.fit_residual) + "]";
        }
    }

    // even synthetic scattering-even data: only integer exponents activate
    {
        BoundaryData g;
        g.eval = [&](const BoundaryRay& ray) {
            const double t2 = disk.tau_tilde(ray) * disk.tau_tilde(ray);
            return (1.0 + 0.5 * t2) * std::exp(-t2);
        };
        BackprojectOptions bopt;
        bopt.base_nodes = 2048;
        bopt.max_doublings = 4;
        ProfileSamples prof = interior_profile(
            disk, [&](const Point2& x) { return backproject(disk, g, x, bopt); }, 0.0,
            ProfileSamples::geometric_grid(3e-3, 1e-6, 0.75));
        std::vector<std::pair<double, int>> cands = {
            {0, 0}, {0.5, 0}, {0.75, 0}, {1, 0}, {1, 1}, {1.5, 0},
            {2, 0}, {2, 1}, {2.5, 0}, {3, 0}};
        const Expansion e = fit_expansion(prof, cands);
        for (const auto& t : e.terms) {
            const bool integer_exp =
                std::abs(t.z - std::round(t.z)) < 1e-9 && t.k == 0;
            if (!integer_exp && e.active(t.z, t.k, 1e-6)) {
                pass = false;
                detail += " [even data activates (" + fmt(t.z) + "," +
                          std::to_string(t.k) + ")]";
            }
        }
    }
    report(4, "backprojection structure: 3/4 exponent, log necessity, evenness",
           pass, detail);
}

void criterion_5_cycle() {
    // log rho -> (no logs, rho^{1/2} present) -> (log reappears).
    // The boundary data is rotationally symmetric and even in alpha; the
    // first-stage data g1 = tau^{-1} I0(log rho) = 2 log tau + s(alpha) has
    // a smooth even part s that is cached as a Chebyshev interpolant, with
    // the log carried analytically.
    ScalarField f0 = ScalarField::rho_log_power(disk, 0.0, 1);
    const double amax = pi / 2 - 1e-9;
    ChebSeries s_part = ChebSeries::fit(
        [&](double u) {
            const BoundaryRay ray{0.0, u * amax};
            const double tau = disk.tau_tilde(ray);
            return xray(disk, f0, ray) / tau - 2.0 * std::log(tau);
        },
        200);
    BoundaryData g1;
    g1.eval = [&](const BoundaryRay& ray) {
        const double tau = disk.tau_tilde(ray);
        const double u = std::abs(wrap_angle(ray.alpha)) / amax;
        return 2.0 * std::log(std::max(tau, 1e-300)) + s_part(std::min(u, 1.0));
    };

    // first pass, interpolated over the radius in q = sqrt(rho); adaptive
    // fiber quadrature resolves the log singularity at tangential angles
    std::vector<double> h1_nodes(161);
    parallel_for(h1_nodes.size(), [&](std::size_t j) {
        const double q = ChebSeries::node(static_cast<int>(j), 160);
        const Point2 x{1.0 - q * q, 0.0};
        h1_nodes[j] = integrate_adaptive(
            [&](double psi) { return g1.eval(disk.footpoint(x, psi)); }, 0.0,
            2.0 * pi, 1e-9);
    });
    ChebSeries h1q = ChebSeries::fit_values(h1_nodes);

    ProfileSamples prof1;
    prof1.abscissae = ProfileSamples::geometric_grid(3e-3, 1e-6, 0.75);
    for (double rho : prof1.abscissae)
        prof1.values.push_back(h1q(std::sqrt(rho)));

    std::vector<std::pair<double, int>> cands1 = {
        {0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {1.5, 0}, {2, 0}, {2, 1}, {2.5, 0}, {3, 0}};
    const Expansion e1 = fit_expansion(prof1, cands1);
    bool pass = e1.active(0.5, 0, 1e-5);
    pass = pass && !e1.active(1.0, 1, 1e-6) && !e1.active(2.0, 1, 1e-6);

    // second pass on the interpolant
    ScalarField h1field;
    h1field.eval = [&](const SMPoint& p) {
        return h1q(std::sqrt(std::max(0.0, disk.rho(p.pos))));
    };
    h1field.index_hint = IndexSet::naturals(); // inf 0: integrable
    XrayOptions xopt;
    xopt.form = XrayOptions::Form::upsilon;
    xopt.tol = 1e-10;
    ChebSeries g2a = ChebSeries::fit(
        [&](double u) {
            const BoundaryRay ray{0.0, u * amax};
            const double tau = disk.tau_tilde(ray);
            if (tau <= 1e-12) return h1q(0.0); // glancing limit of I0 f / tau
            return xray(disk, h1field, ray, xopt) / tau;
        },
        256);
    BoundaryData g2;
    g2.eval = [&](const BoundaryRay& ray) {
        return g2a(std::min(std::abs(wrap_angle(ray.alpha)) / amax, 1.0));
    };
    BackprojectOptions bopt;
    bopt.base_nodes = 2048;
    bopt.max_doublings = 4;
    ProfileSamples prof2;
    prof2.abscissae = ProfileSamples::geometric_grid(3e-3, 1e-6, 0.75);
    prof2.values.resize(prof2.abscissae.size());
    parallel_for(prof2.abscissae.size(), [&](std::size_t i) {
        const double r = 1.0 - prof2.abscissae[i];
        prof2.values[i] = backproject(disk, g2, {r, 0.0}, bopt);
    });

    std::vector<std::pair<double, int>> with_log = {
        {0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {1.5, 0}, {2, 0}, {2, 1}, {2.5, 0}, {3, 0}};
    std::vector<std::pair<double, int>> without_log;
    for (const auto& c : with_log)
        if (!(c.first == 1.0 && c.second == 1)) without_log.push_back(c);
    const Expansion e2w = fit_expansion(prof2, with_log);
    const Expansion e2wo = fit_expansion(prof2, without_log);
    pass = pass && e2w.active(1.0, 1, 1e-5);
    pass = pass && e2wo.fit_residual >= 1e2 * e2w.fit_residual;
    report(5, "tau^{-1}-weighted cycle: log cancellation then re-creation", pass,
           "c(1/2)=" + fmt(e1.coeff(0.5, 0)) + ", second-pass c(1,1)=" +
               fmt(e2w.coeff(1.0, 1)));
}

void criterion_6_normal_operator() {
    bool pass = true;
    const double center = normal_op(disk, ScalarField::one(), {0.0, 0.0});
    pass = pass && std::abs(center - 4.0 * pi) <= 1e-6 * 4.0 * pi;

    double worst = 0.0;
    std::vector<Point2> grid;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            grid.push_back({-0.7 + 0.35 * i, -0.7 + 0.35 * j});
    std::vector<double> errs(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        const double a = normal_op(disk, ScalarField::one(), grid[g]);
        const double b =
            euclid_normal_oracle(disk, [](const Point2&) { return 1.0; }, grid[g]);
        errs[g] = std::abs(a - b) / std::abs(b);
    });
    for (double e : errs) worst = std::max(worst, e);
    pass = pass && worst <= 1e-4;

    // near-boundary profile needs the rho log rho term
    BackprojectOptions bopt;
    bopt.base_nodes = 2048;
    bopt.max_doublings = 4;
    ProfileSamples prof;
    prof.abscissae = ProfileSamples::geometric_grid(0.2, 1e-4, 0.75);
    prof.values.resize(prof.abscissae.size());
    parallel_for(prof.abscissae.size(), [&](std::size_t i) {
        const double r = 1.0 - prof.abscissae[i];
        prof.values[i] = normal_op(disk, ScalarField::one(), {r, 0.0}, bopt);
    });
    std::vector<std::pair<double, int>> cands;
    for (const auto& p : normal_iterate_index(1).enumerate_below(4.2))
        cands.push_back({p.z.re(), p.k});
    const Expansion e = fit_expansion(prof, cands);
    pass = pass && std::abs(e.coeff(1.0, 1)) > 1e-4;
    report(6, "normal operator: center value, kernel oracle grid, log creation",
           pass, "center=" + fmt(center) + ", grid worst=" + fmt(worst) +
                 ", c(1,1)=" + fmt(e.coeff(1.0, 1)));
}

void criterion_7_adjoint_santalo() {
    bool pass = true;
    double worst = 0.0;
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uc(-0.5, 0.5);
    std::vector<std::array<double, 6>> coeffs(10);
    for (auto& c : coeffs)
        for (double& v : c) v = uc(rng);
    std::vector<double> gaps(coeffs.size());
    parallel_for(coeffs.size(), [&](std::size_t t) {
        const auto c = coeffs[t];
        auto ffn = [c](const Point2& p) {
            return 1.0 + c[0] * p.x + c[1] * p.y + c[2] * p.x * p.y +
                   c[3] * (p.x * p.x - p.y * p.y);
        };
        auto gfn = [c](const BoundaryRay& ray) {
            return 1.0 + c[4] * std::cos(ray.beta) + c[5] * std::sin(2.0 * ray.alpha);
        };
        ScalarField f = ScalarField::on_m(ffn, IndexSet::naturals());
        BoundaryData g;
        g.eval = gfn;
        BackprojectOptions bopt;
        bopt.base_nodes = 256;
        bopt.tol = 1e-9;

        const double lhs = disk.boundary_integral([&](const BoundaryRay& ray) {
            return xray(disk, f, ray) * gfn(ray);
        }, 48, 96);
        const double rhs = periodic_trapezoid([&](double theta) {
            return tanh_sinh_01([&](double r, double) {
                const Point2 p{r * std::cos(theta), r * std::sin(theta)};
                return r * ffn(p) * backproject(disk, g, p, bopt);
            }, 1e-9, 7);
        }, 0.0, 2.0 * pi, 48);
        gaps[t] = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
    });
    for (double g : gaps) worst = std::max(worst, g);
    pass = pass && worst <= 1e-6;

    const auto disk_check =
        santalo_check(disk, [](const SMPoint&) { return 1.0; });
    pass = pass && disk_check.relative_gap <= 1e-6;

    RadialModel curved({-1.0 / 6.0});
    const auto curved_check =
        santalo_check(curved, [](const SMPoint&) { return 1.0; }, 96, 48, 64);
    pass = pass && curved_check.relative_gap <= 1e-6;
    report(7, "adjointness (10 random pairs) and Santalo on disk + Herglotz model",
           pass, "adjoint worst=" + fmt(worst) +
                 ", gaps=" + fmt(disk_check.relative_gap) + "/" +
                 fmt(curved_check.relative_gap));
}

void criterion_8_index_golden() {
    const char* dir = std::getenv("XRAYPHG_GOLDEN_DIR");
    std::string base = dir ? dir : "tests/golden";
    bool pass = true;
    std::string detail;

    auto check_table = [&](const IndexSet& E, const std::string& name) {
        try {
            const auto pts = E.enumerate_below(5.0);
            const CsvTable csv = read_csv(base + "/" + name + ".csv");
            if (pts.size() != csv.rows.size()) {
                pass = false;
                detail = name + ": row count";
                return;
            }
            for (size_t i = 0; i < pts.size(); ++i) {
                if (std::abs(pts[i].z.re() - std::stod(csv.rows[i][0])) > 1e-12 ||
                    std::abs(pts[i].z.im() - std::stod(csv.rows[i][1])) > 1e-12 ||
                    pts[i].k != std::stoi(csv.rows[i][2])) {
                    pass = false;
                    detail = name + ": row " + std::to_string(i);
                    return;
                }
            }
        } catch (const std::exception& e) {
            pass = false;
            detail = name + ": " + e.what();
        }
    };

    check_table(xray_index(IndexSet::naturals(), true), "xray_refined_N0");
    check_table(xray_index(IndexSet::naturals(), false), "xray_naive_N0");
    const std::vector<std::pair<Rational, std::string>> gammas = {
        {Rational(0), "0"}, {Rational(1, 2), "1o2"}, {Rational(1), "1"},
        {Rational(2), "2"}, {Rational(3, 2), "3o2"}};
    for (const auto& [g, tag] : gammas) {
        check_table(xray_index(IndexSet::single_generator(Exponent(g), 1, 0), true),
                    "xray_refined_g" + tag);
        for (int k = 0; k <= 2; ++k)
            check_table(backprojection_index(Exponent(g), k),
                        "backproj_g" + tag + "_k" + std::to_string(k));
    }
    for (int k = 0; k <= 3; ++k)
        check_table(normal_iterate_index(k), "normal_iter_k" + std::to_string(k));

    // refined subset of naive on all of them
    auto subset = [](const IndexSet& a, const IndexSet& b) {
        for (const auto& p : a.enumerate_below(8.0))
            if (!b.contains(p.z.re(), p.z.im(), p.k, 8.0)) return false;
        return true;
    };
    pass = pass && subset(xray_index(IndexSet::naturals(), true),
                          xray_index(IndexSet::naturals(), false));
    for (const auto& [g, tag] : gammas) {
        auto e = IndexSet::single_generator(Exponent(g), 1, 0);
        pass = pass && subset(xray_index(e, true), xray_index(e, false));
    }
    report(8, "index-map enumerations match the golden tables; refined in naive",
           pass, detail);
}

void criterion_9_mellin() {
    bool pass = true;
    std::string detail;
    for (double gamma : {0.3, 0.5, 1.0}) {
        for (int k = 0; k <= 2; ++k) {
            const double c = 1.25;
            MellinInput H{[gamma, k, c](double rho) {
                              double v = c * std::pow(rho, gamma);
                              for (int j = 0; j < k; ++j) v *= std::log(rho);
                              return v;
                          },
                          gamma - 1e-3};
            try {
                const auto poles = mellin_pole_scan(H, -gamma - 0.8, k + 1);
                const bool ok = !poles.empty() &&
                                std::abs(poles[0].location + gamma) <= 1e-3 &&
                                poles[0].order == k + 1 &&
                                std::abs(poles[0].leading_coefficient - c) <= 0.01 * c;
                if (!ok && detail.empty())
                    detail = "gamma=" + fmt(gamma) + " k=" + std::to_string(k) +
                             (poles.empty() ? " (no pole)"
                                            : " loc=" + fmt(poles[0].location) +
                                                  " ord=" + std::to_string(poles[0].order) +
                                                  " c=" + fmt(poles[0].leading_coefficient));
                pass = pass && ok;
            } catch (const std::exception& e) {
                pass = false;
                if (detail.empty()) detail = e.what();
            }
        }
    }
    report(9, "Mellin pole scan of planted profiles (location, order, coefficient)",
           pass, detail);
}

void criterion_10_boundary_determination() {
    bool pass = true;
    auto phi = [](double, int) { return 1.0; };

    ScalarField f1 = ScalarField::on_m(
        [&](const Point2& p) { return 1.0 + disk.rho(p); }, IndexSet::naturals());
    const auto rec1 = boundary_determine(
        disk, [&](const BoundaryRay& ray) { return xray(disk, f1, ray); }, phi, 1, 2);
    for (double v : rec1.layers[0]) pass = pass && std::abs(v - 1.0) <= 0.01;
    for (double v : rec1.layers[1]) pass = pass && std::abs(v - 1.0) <= 0.01;

    ScalarField f2 = ScalarField::on_m(
        [&](const Point2& p) { return disk.rho(p); }, IndexSet::naturals());
    const auto rec2 = boundary_determine(
        disk, [&](const BoundaryRay& ray) { return xray(disk, f2, ray); }, phi, 1, 2);
    for (double v : rec2.layers[0]) pass = pass && std::abs(v) <= 0.01;
    for (double v : rec2.layers[1]) pass = pass && std::abs(v - 1.0) <= 0.01;

    const auto rec0 = boundary_determine(
        disk, [](const BoundaryRay&) { return 0.0; }, phi, 1, 2);
    for (const auto& layer : rec0.layers)
        for (double v : layer) pass = pass && std::abs(v) <= 1e-9;
    report(10, "boundary determination: two-layer recovery and zero data", pass,
           "f=1+rho layers: " + fmt(rec1.layers[0][0]) + ", " + fmt(rec1.layers[1][0]));
}

void criterion_11_weighted_bound() {
    bool pass = true;
    // equality case
    const auto eq = weighted_bound_check(disk, 0.0, 0.0,
                                         [](const Point2&) { return 1.0; });
    pass = pass && eq.pass;
    pass = pass && std::abs(eq.lhs - 2.0 * pi * pi) <= 1e-8 * 2.0 * pi * pi;
    pass = pass && std::abs(eq.bound - 2.0 * pi * pi) <= 1e-8 * 2.0 * pi * pi;

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ug(0.0, 1.2), ud01(0.0, 1.0),
        uc(-0.5, 0.5);
    struct Case {
        double gamma, delta;
        std::array<double, 3> c;
    };
    std::vector<Case> cases(20);
    for (auto& cs : cases) {
        cs.gamma = ug(rng);
        const double dmax = std::min(2.0 * cs.gamma + 1.0 - 0.05, 1.5);
        cs.delta = -0.4 + (dmax + 0.4) * ud01(rng);
        for (double& v : cs.c) v = uc(rng);
    }
    std::vector<bool> ok(cases.size());
    parallel_for(cases.size(), [&](std::size_t i) {
        const auto& cs = cases[i];
        auto f = [cs](const Point2& p) {
            return 1.0 + cs.c[0] * p.x + cs.c[1] * p.y +
                   cs.c[2] * (p.x * p.x - p.y * p.y);
        };
        // f is a quadratic polynomial, so 24 beta nodes are exact
        ok[i] = weighted_bound_check(disk, cs.gamma, cs.delta, f,
                                     AlphaBdf::tau, 24).pass;
    });
    for (bool b : ok) pass = pass && b;
    report(11, "weighted estimate: 20 random cases and the equality case", pass,
           "equality lhs=" + fmt(eq.lhs) + " bound=" + fmt(eq.bound));
}

} // namespace

int main(int argc, char** argv) {
    const std::function<void()> criteria[] = {
        criterion_1_beta_facts,        criterion_2_gen_beta,
        criterion_3_xray_constants,    criterion_4_backprojection_structure,
        criterion_5_cycle,             criterion_6_normal_operator,
        criterion_7_adjoint_santalo,   criterion_8_index_golden,
        criterion_9_mellin,            criterion_10_boundary_determination,
        criterion_11_weighted_bound};
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (int i = 1; i <= 11; ++i) which.push_back(i);
    for (int i : which) {
        if (i < 1 || i > 11) continue;
        try {
            criteria[i - 1]();
        } catch (const std::exception& e) {
            report(i, "criterion aborted", false, e.what());
        }
    }
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
