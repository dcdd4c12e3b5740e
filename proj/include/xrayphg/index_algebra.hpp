#ifndef XRAYPHG_INDEX_ALGEBRA_HPP
#define XRAYPHG_INDEX_ALGEBRA_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xrayphg/errors.hpp"

namespace xrayphg {

// ---------------------------------------------------------------------------
// Exponents: complex values carrying an exact rational part when available
// ---------------------------------------------------------------------------

struct Rational {
    long long num = 0, den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }
    double value() const { return static_cast<double>(num) / den; }
    bool is_integer() const { return den == 1; }

    friend Rational operator+(Rational a, Rational b) {
        return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
    }
    friend Rational operator-(Rational a, Rational b) {
        return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
    }
    friend Rational operator*(Rational a, Rational b) {
        return Rational(a.num * b.num, a.den * b.den);
    }
    friend Rational operator/(Rational a, Rational b) {
        return Rational(a.num * b.den, a.den * b.num);
    }
    friend bool operator==(Rational a, Rational b) {
        return a.num == b.num && a.den == b.den;
    }
};

/// Complex exponent; comparisons are exact when both operands carry a
/// rational representation and use a 1e-9 tolerance otherwise.
struct Exponent {
    std::complex<double> v{};
    std::optional<Rational> exact; // set iff v is real and exactly num/den

    Exponent() = default;
    Exponent(Rational r) : v(r.value(), 0.0), exact(r) {}
    Exponent(long long n) : Exponent(Rational(n)) {}
    Exponent(int n) : Exponent(Rational(n)) {}
    explicit Exponent(double x) : v(x, 0.0) {
        // exact when x is representable with a small denominator
        for (long long d : {1LL, 2LL, 3LL, 4LL, 6LL, 8LL, 12LL, 16LL}) {
            const double n = x * d;
            if (std::abs(n - std::round(n)) < 1e-12 && std::abs(n) < 1e15) {
                exact = Rational(static_cast<long long>(std::llround(n)), d);
                return;
            }
        }
    }
    explicit Exponent(std::complex<double> z) : v(z) {
        if (z.imag() == 0.0) *this = Exponent(z.real());
    }

    double re() const { return v.real(); }
    double im() const { return v.imag(); }

    /// a*z + b with rational a, b
    Exponent affine(Rational a, Rational b) const {
        Exponent out;
        out.v = a.value() * v + std::complex<double>(b.value(), 0.0);
        if (exact) out.exact = a * (*exact) + b;
        return out;
    }

    bool equals(const Exponent& o, double tol = 1e-9) const {
        if (exact && o.exact) return *exact == *o.exact;
        return std::abs(v - o.v) < tol;
    }

    /// Rounded distance to the nearest integer (real part; imaginary must
    /// vanish within tol for integer classification).
    bool is_integer(double tol = 1e-9) const {
        if (exact) return exact->is_integer();
        return std::abs(v.imag()) < tol &&
               std::abs(v.real() - std::round(v.real())) < tol;
    }
    long long integer_value() const {
        if (exact && exact->is_integer()) return exact->num;
        return std::llround(v.real());
    }
};

/// One (exponent, log-power) pair of an index set.
struct IndexPoint {
    Exponent z;
    int k = 0;
};

inline bool index_point_less(const IndexPoint& a, const IndexPoint& b) {
    if (std::abs(a.z.re() - b.z.re()) > 1e-9) return a.z.re() < b.z.re();
    if (std::abs(a.z.im() - b.z.im()) > 1e-9) return a.z.im() < b.z.im();
    return a.k < b.k;
}

// ---------------------------------------------------------------------------
// Index sets in lazy generator form
// ---------------------------------------------------------------------------

/// A generator denotes { (base + step*n, j) : n in N0, 0 <= j <= max_log }.
/// Condition (b) is built in (every log power below the cap is present) and
/// condition (a) holds because step >= 1.
struct Generator {
    Exponent base;
    int step = 1;   // 1 realizes condition (c), 2 realizes (c')
    int max_log = 0;
};

/// A single materialized column { (z, j) : 0 <= j <= max_log }.
struct FinitePoint {
    Exponent z;
    int max_log = 0;
};

class IndexSet {
public:
    IndexSet() = default;
    explicit IndexSet(std::string label) : label_(std::move(label)) {}

    static IndexSet empty(std::string label = "empty") { return IndexSet(std::move(label)); }

    /// N0 x {0..max_log}
    static IndexSet naturals(int max_log = 0, std::string label = "N0") {
        IndexSet e(std::move(label));
        e.add_generator(Exponent(0), 1, max_log);
        return e;
    }

    static IndexSet single_generator(Exponent base, int step = 1, int max_log = 0,
                                     std::string label = "") {
        IndexSet e(std::move(label));
        e.add_generator(base, step, max_log);
        return e;
    }

    void add_generator(Exponent base, int step, int max_log) {
        if (step != 1 && step != 2)
            throw std::invalid_argument("IndexSet: generator step must be 1 or 2");
        for (auto& g : gens_) {
            if (g.step == step && g.base.equals(base)) {
                g.max_log = std::max(g.max_log, max_log);
                return;
            }
        }
        gens_.push_back({base, step, max_log});
    }

    void add_point(Exponent z, int max_log) {
        // a point absorbed by an existing generator with >= cap is redundant
        for (const auto& g : gens_)
            if (on_lattice(z, g) && g.max_log >= max_log) return;
        for (auto& p : points_) {
            if (p.z.equals(z)) {
                p.max_log = std::max(p.max_log, max_log);
                return;
            }
        }
        points_.push_back({z, max_log});
    }

    const std::vector<Generator>& generators() const { return gens_; }
    const std::vector<FinitePoint>& points() const { return points_; }
    const std::string& label() const { return label_; }
    void set_label(std::string l) { label_ = std::move(l); }
    bool is_empty() const { return gens_.empty() && points_.empty(); }

    /// Smallest real part present (condition (a) guarantees it is attained).
    double inf() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& g : gens_) m = std::min(m, g.base.re());
        for (const auto& p : points_) m = std::min(m, p.z.re());
        return m;
    }

    /// All (z,k) with Re z <= s, sorted by (Re z, Im z, k).  Finite by
    /// condition (a).
    std::vector<IndexPoint> enumerate_below(double s) const {
        std::vector<IndexPoint> cols; // one entry per exponent, k = cap
        auto push = [&](Exponent z, int cap) {
            for (auto& c : cols) {
                if (c.z.equals(z)) {
                    c.k = std::max(c.k, cap);
                    return;
                }
            }
            cols.push_back({z, cap});
        };
        for (const auto& g : gens_) {
            for (long long n = 0;; ++n) {
                Exponent z = g.base.affine(Rational(1), Rational(n * g.step));
                if (z.re() > s + 1e-12) break;
                push(z, g.max_log);
            }
        }
        for (const auto& p : points_)
            if (p.z.re() <= s + 1e-12) push(p.z, p.max_log);

        std::vector<IndexPoint> out;
        for (const auto& c : cols)
            for (int j = 0; j <= c.k; ++j) out.push_back({c.z, j});
        std::sort(out.begin(), out.end(), index_point_less);
        return out;
    }

    bool contains(double re, double im, int k, double cutoff) const {
        for (const auto& p : enumerate_below(cutoff))
            if (std::abs(p.z.re() - re) < 1e-9 && std::abs(p.z.im() - im) < 1e-9 &&
                p.k == k)
                return true;
        return false;
    }

    /// Max log power attached to exponent z below the cutoff; -1 if absent.
    int max_log_at(const Exponent& z) const {
        int m = -1;
        for (const auto& g : gens_)
            if (on_lattice(z, g)) m = std::max(m, g.max_log);
        for (const auto& p : points_)
            if (p.z.equals(z)) m = std::max(m, p.max_log);
        return m;
    }

    static bool on_lattice(const Exponent& z, const Generator& g) {
        if (std::abs(z.im() - g.base.im()) > 1e-9) return false;
        const double d = z.re() - g.base.re();
        if (d < -1e-9) return false;
        const double n = d / g.step;
        return std::abs(n - std::round(n)) < 1e-9;
    }

private:
    std::vector<Generator> gens_;
    std::vector<FinitePoint> points_;
    std::string label_;
};

// ---------------------------------------------------------------------------
// Operations on index sets
// ---------------------------------------------------------------------------

namespace detail {

/// Intersection of the exponent lattices {b1 + s1 N0} and {b2 + s2 N0} with
/// s1, s2 in {1,2}: empty or an arithmetic progression with step lcm(s1,s2).
/// Returns its base when nonempty.
inline std::optional<Exponent> lattice_intersection(const Exponent& b1, int s1,
                                                    const Exponent& b2, int s2) {
    if (std::abs(b1.im() - b2.im()) > 1e-9) return std::nullopt;
    const double d = b2.re() - b1.re();
    const long long di = std::llround(d);
    if (std::abs(d - di) > 1e-9) return std::nullopt; // incommensurable bases
    const int L = std::lcm(s1, s2);
    // smallest n1 >= 0 with s1 n1 >= di and s1 n1 - di = s2 n2, n2 >= 0
    const long long start = di > 0 ? (di + s1 - 1) / s1 : 0;
    for (long long n1 = start; n1 < start + 2 * L; ++n1) {
        const long long target = s1 * n1 - di; // = s2 n2
        if (target >= 0 && target % s2 == 0)
            return b1.affine(Rational(1), Rational(s1 * n1));
    }
    return std::nullopt;
}

} // namespace detail

/// Plain union of two index sets (generators and points merged).
inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out(a.label().empty() ? b.label() : a.label());
    for (const auto& g : a.generators()) out.add_generator(g.base, g.step, g.max_log);
    for (const auto& g : b.generators()) out.add_generator(g.base, g.step, g.max_log);
    for (const auto& p : a.points()) out.add_point(p.z, p.max_log);
    for (const auto& p : b.points()) out.add_point(p.z, p.max_log);
    return out;
}

/// Extended union: E1 u E2 u { (z, k+k'+1) : (z,k) in E1, (z,k') in E2 }.
/// Realized exactly on the generator representation: shared exponents of two
/// step-{1,2} lattices again form such a lattice.
inline IndexSet extended_union(const IndexSet& e1, const IndexSet& e2) {
    IndexSet out = set_union(e1, e2);
    for (const auto& g1 : e1.generators()) {
        for (const auto& g2 : e2.generators()) {
            auto base = detail::lattice_intersection(g1.base, g1.step, g2.base, g2.step);
            if (base)
                out.add_generator(*base, std::lcm(g1.step, g2.step),
                                  g1.max_log + g2.max_log + 1);
        }
        for (const auto& p2 : e2.points())
            if (IndexSet::on_lattice(p2.z, g1))
                out.add_point(p2.z, g1.max_log + p2.max_log + 1);
    }
    for (const auto& p1 : e1.points()) {
        for (const auto& g2 : e2.generators())
            if (IndexSet::on_lattice(p1.z, g2))
                out.add_point(p1.z, p1.max_log + g2.max_log + 1);
        for (const auto& p2 : e2.points())
            if (p1.z.equals(p2.z))
                out.add_point(p1.z, p1.max_log + p2.max_log + 1);
    }
    out.set_label(e1.label() + " u+ " + e2.label());
    return out;
}

/// E(e) = { (z/e, k) }.  A step-1 lattice divided by 2 splits into two
/// step-1 lattices offset by 1/2.
inline IndexSet scale(const IndexSet& e, int divisor) {
    if (divisor != 1 && divisor != 2)
        throw std::invalid_argument("scale: divisor must be 1 or 2");
    if (divisor == 1) return e;
    IndexSet out(e.label() + "/2");
    for (const auto& g : e.generators()) {
        const Exponent half = g.base.affine(Rational(1, 2), Rational(0));
        if (g.step == 2) {
            out.add_generator(half, 1, g.max_log);
        } else {
            out.add_generator(half, 1, g.max_log);
            out.add_generator(g.base.affine(Rational(1, 2), Rational(1, 2)), 1, g.max_log);
        }
    }
    for (const auto& p : e.points())
        out.add_point(p.z.affine(Rational(1, 2), Rational(0)), p.max_log);
    return out;
}

/// Shift every exponent by a rational delta (e.g. a tau^w weight).
inline IndexSet shift(const IndexSet& e, Rational delta) {
    IndexSet out(e.label() + " shifted");
    for (const auto& g : e.generators())
        out.add_generator(g.base.affine(Rational(1), delta), g.step, g.max_log);
    for (const auto& p : e.points())
        out.add_point(p.z.affine(Rational(1), delta), p.max_log);
    return out;
}

/// Pullback along a b-map face with exponent e.
/// Default: { (e z + l, k) : l in N0 }; for e = 0 the face pulls back to
/// smooth functions, N0 x {0}.  Strict variant: { (e z, k) } with step-2
/// closure (requires a fixed equivalence class of defining functions).
inline IndexSet pullback_index(const IndexSet& E, int e, bool strict = false) {
    if (e < 0) throw std::invalid_argument("pullback_index: e >= 0 required");
    if (e == 0) return IndexSet::naturals(0, "pullback(" + E.label() + ",0)");
    IndexSet out("pullback(" + E.label() + ")");
    if (!strict) {
        for (const auto& g : E.generators())
            out.add_generator(g.base.affine(Rational(e), Rational(0)), 1, g.max_log);
        for (const auto& p : E.points())
            out.add_generator(p.z.affine(Rational(e), Rational(0)), 1, p.max_log);
        return out;
    }
    for (const auto& g : E.generators()) {
        const Exponent b = g.base.affine(Rational(e), Rational(0));
        out.add_generator(b, e == 1 ? g.step : 2, g.max_log);
    }
    for (const auto& p : E.points())
        out.add_generator(p.z.affine(Rational(e), Rational(0)), 2, p.max_log);
    return out;
}

/// Per-face index family on a manifold with corners.
struct IndexFamily {
    std::map<std::string, IndexSet> faces;
};

/// Geometric data of a b-fibration: vanishing orders e(source, target) and
/// the corner structure (which source faces meet).
struct GeometricData {
    std::map<std::string, std::map<std::string, int>> exponents;
    std::vector<std::vector<std::string>> corners;

    int exponent(const std::string& src, const std::string& tgt) const {
        auto it = exponents.find(src);
        if (it == exponents.end()) throw std::invalid_argument("GeometricData: unknown face " + src);
        auto jt = it->second.find(tgt);
        if (jt == it->second.end()) throw std::invalid_argument("GeometricData: unknown target " + tgt);
        return jt->second;
    }

    /// Faces and corners of the chord domain bdy_+SM x [0,1]:
    /// G0 = {u=0}, G1 = {u=1}, G2 = glancing x [0,1]; corners G0^G2, G1^G2.
    /// Exponent rows for the two blow-down maps (to M and to bdy_+SM).
    static GeometricData chord_domain() {
        GeometricData gd;
        gd.exponents["G0"] = {{"dM", 1}, {"d0SM", 0}};
        gd.exponents["G1"] = {{"dM", 1}, {"d0SM", 0}};
        gd.exponents["G2"] = {{"dM", 2}, {"d0SM", 1}};
        gd.corners = {{"G0", "G2"}, {"G1", "G2"}};
        return gd;
    }
};

/// Pushforward f_# of an index family along a b-fibration.  Faces with
/// positive exponent contribute scale(E_face, e); log-raising happens only
/// between faces meeting at a corner.  Faces with e = 0 are integrated out
/// and must have inf > 0 (b-density integrability).
inline IndexSet pushforward_index(const IndexFamily& fam, const GeometricData& gd,
                                  const std::string& target) {
    std::map<std::string, IndexSet> scaled;
    for (const auto& [face, E] : fam.faces) {
        const int e = gd.exponent(face, target);
        if (e == 0) {
            if (!E.is_empty() && E.inf() <= 0.0)
                throw integrability_error("pushforward_index: face " + face +
                                          " integrates out but inf <= 0");
            continue;
        }
        scaled.emplace(face, scale(E, e));
    }
    IndexSet out("pushforward");
    std::map<std::string, bool> in_corner;
    for (const auto& corner : gd.corners) {
        IndexSet acc;
        bool first = true;
        for (const auto& face : corner) {
            auto it = scaled.find(face);
            if (it == scaled.end()) continue;
            in_corner[face] = true;
            acc = first ? it->second : extended_union(acc, it->second);
            first = false;
        }
        out = set_union(out, acc);
    }
    for (const auto& [face, E] : scaled)
        if (!in_corner[face]) out = set_union(out, E);
    out.set_label("pushforward to " + target);
    return out;
}

/// Index map of the X-ray transform.
/// refined (Theorem on C_alpha index sets): { (2z+1, l) } with step-2
/// closure; naive (pushforward-theorem bound): { (q + 2z, p), q in N }.
inline IndexSet xray_index(const IndexSet& E, bool refined = true) {
    if (E.inf() <= -1.0)
        throw integrability_error("xray_index: inf(E) > -1 required");
    IndexSet out(std::string(refined ? "xray" : "xray-naive") + "(" + E.label() + ")");
    const int step = refined ? 2 : 1;
    for (const auto& g : E.generators())
        out.add_generator(g.base.affine(Rational(2), Rational(1)), step, g.max_log);
    for (const auto& p : E.points())
        out.add_generator(p.z.affine(Rational(2), Rational(1)), step, p.max_log);
    return out;
}

/// Index set of the backprojection of tau^gamma log^k tau data:
/// N0 x {0} together with E_{gamma,k}, whose log caps depend on the parity
/// class of gamma (pole cancellation / creation / neither).
inline IndexSet backprojection_index(const Exponent& gamma, int k) {
    IndexSet out = IndexSet::naturals(0, "backprojection");
    const Exponent half = gamma.affine(Rational(1, 2), Rational(1, 2)); // (gamma+1)/2
    int cap;
    if (gamma.is_integer() && gamma.integer_value() >= 0) {
        const bool even = gamma.integer_value() % 2 == 0;
        if (even) {
            if (k == 0) return out;   // E_{gamma,0} empty: pole cancellation
            cap = k - 1;
        } else {
            cap = k + 1;              // pole creation
        }
    } else {
        cap = k;
    }
    out.add_generator(half, 1, cap);
    return out;
}

inline IndexSet backprojection_index(double gamma, int k) {
    return backprojection_index(Exponent(gamma), k);
}

/// Naive backprojection index map: (N0 x {0}) u+ { ((1+z)/2, p) }.
inline IndexSet backprojection_index_naive(const IndexSet& K) {
    IndexSet mapped("(1+K)/2");
    for (const auto& g : K.generators()) {
        // (1 + base + step n)/2
        const Exponent b = g.base.affine(Rational(1, 2), Rational(1, 2));
        if (g.step == 2) {
            mapped.add_generator(b, 1, g.max_log);
        } else {
            mapped.add_generator(b, 1, g.max_log);
            mapped.add_generator(g.base.affine(Rational(1, 2), Rational(1)), 1, g.max_log);
        }
    }
    for (const auto& p : K.points())
        mapped.add_point(p.z.affine(Rational(1, 2), Rational(1, 2)), p.max_log);
    IndexSet out = extended_union(IndexSet::naturals(), mapped);
    out.set_label("backprojection-naive(" + K.label() + ")");
    return out;
}

/// E_k = { (z,p) : z in N0, 0 <= p <= min(z,k) } (normal-operator iterates).
inline IndexSet normal_iterate_index(int k) {
    IndexSet out("E" + std::to_string(k));
    for (int j = 0; j <= k; ++j) out.add_generator(Exponent(j), 1, j);
    return out;
}

// ---------------------------------------------------------------------------
// Structural checks (conditions (a), (b), (c)/(c'))
// ---------------------------------------------------------------------------

/// Condition (b): (z,k) present implies (z,l) present for l < k.  True by
/// construction; verified on the enumeration for tests.
inline bool check_log_closure(const IndexSet& E, double cutoff) {
    auto pts = E.enumerate_below(cutoff);
    for (const auto& p : pts) {
        if (p.k == 0) continue;
        bool found = false;
        for (const auto& q : pts)
            if (q.k == p.k - 1 && q.z.equals(p.z)) { found = true; break; }
        if (!found) return false;
    }
    return true;
}

/// Condition (c) for step=1 / (c') for step=2 on the enumeration.
inline bool check_shift_closure(const IndexSet& E, int step, double cutoff) {
    auto pts = E.enumerate_below(cutoff);
    for (const auto& p : pts) {
        if (p.z.re() + step > cutoff) continue;
        const Exponent shifted = p.z.affine(Rational(1), Rational(step));
        bool found = false;
        for (const auto& q : pts)
            if (q.k == p.k && q.z.equals(shifted)) { found = true; break; }
        if (!found) return false;
    }
    return true;
}

} // namespace xrayphg

#endif
