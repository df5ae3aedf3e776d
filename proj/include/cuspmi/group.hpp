#pragma once

// SL2(Z) elements, the Moebius action, automorphy factors, the three right
// actions used throughout (|_{r,s} on functions, |_{2-k,0} on polynomials and
// their tensor product), coset enumeration for B\Gamma and S/T word
// decomposition.

#include <cstdint>
#include <functional>
#include <type_traits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cuspmi/core/errors.hpp"
#include "cuspmi/core/poly.hpp"

namespace cuspmi {

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("GroupElement: integer overflow");
    return r;
}
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("GroupElement: integer overflow");
    return r;
}

// floor(a / b) for b != 0.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace detail

struct GroupElement {
    std::int64_t a = 1, b = 0, c = 0, d = 1;

    static GroupElement make(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
        GroupElement g{a, b, c, d};
        if (g.det() != 1) throw std::invalid_argument("GroupElement: determinant must be 1");
        return g;
    }
    static constexpr GroupElement identity() { return {1, 0, 0, 1}; }
    static constexpr GroupElement S() { return {0, -1, 1, 0}; }
    static constexpr GroupElement T() { return {1, 1, 0, 1}; }
    static constexpr GroupElement T_inv() { return {1, -1, 0, 1}; }
    static constexpr GroupElement T_pow(std::int64_t n) { return {1, n, 0, 1}; }
    static constexpr GroupElement minus_identity() { return {-1, 0, 0, -1}; }

    std::int64_t det() const {
        return detail::checked_add(detail::checked_mul(a, d), -detail::checked_mul(b, c));
    }
    GroupElement inverse() const { return {d, -b, -c, a}; }
    GroupElement negated() const { return {-a, -b, -c, -d}; }

    friend GroupElement operator*(const GroupElement& x, const GroupElement& y) {
        using detail::checked_add;
        using detail::checked_mul;
        return {checked_add(checked_mul(x.a, y.a), checked_mul(x.b, y.c)),
                checked_add(checked_mul(x.a, y.b), checked_mul(x.b, y.d)),
                checked_add(checked_mul(x.c, y.a), checked_mul(x.d, y.c)),
                checked_add(checked_mul(x.c, y.b), checked_mul(x.d, y.d))};
    }
    friend bool operator==(const GroupElement&, const GroupElement&) = default;

    /// Equal up to the sign ambiguity -I.
    bool equal_up_to_sign(const GroupElement& o) const { return *this == o || *this == o.negated(); }

    std::string str() const {
        return "(" + std::to_string(a) + " " + std::to_string(b) + "; " + std::to_string(c) + " " +
               std::to_string(d) + ")";
    }
};

/// Automorphy factor j(g, z) = c z + d.
inline cplx jfactor(const GroupElement& g, cplx z) {
    return static_cast<double>(g.c) * z + static_cast<double>(g.d);
}

/// Moebius image (a z + b) / (c z + d) of a point of the upper half-plane.
inline cplx mobius(const GroupElement& g, cplx z) {
    return (static_cast<double>(g.a) * z + static_cast<double>(g.b)) / jfactor(g, z);
}

/// A boundary point p/q of the upper half-plane; q = 0 encodes infinity.
struct Cusp {
    std::int64_t p = 1, q = 0;

    static Cusp infinity() { return {1, 0}; }
    bool is_infinity() const { return q == 0; }
    Cusp normalized() const {
        if (q == 0) return infinity();
        std::int64_t g = std::gcd(p, q);
        std::int64_t s = q < 0 ? -1 : 1;
        return {s * p / g, s * q / g};
    }
    double value() const { return static_cast<double>(p) / static_cast<double>(q); }
    friend bool operator==(const Cusp& x, const Cusp& y) {
        const Cusp a = x.normalized(), b = y.normalized();
        return a.p == b.p && a.q == b.q;
    }
};

/// Moebius image of a cusp; g(infinity) = a/c, infinity when c = 0.
inline Cusp mobius(const GroupElement& g, const Cusp& x) {
    using detail::checked_add;
    using detail::checked_mul;
    if (x.is_infinity()) return Cusp{g.a, g.c}.normalized();
    return Cusp{checked_add(checked_mul(g.a, x.p), checked_mul(g.b, x.q)),
                checked_add(checked_mul(g.c, x.p), checked_mul(g.d, x.q))}
        .normalized();
}

/// Weights (r, s) of the action f |_{r,s} g. Only parity is enforced: r + s even.
struct BiWeight {
    int r = 0, s = 0;

    static BiWeight make(int r, int s) {
        if ((r + s) % 2 != 0) throw std::invalid_argument("BiWeight: r + s must be even");
        return {r, s};
    }
    int total() const { return r + s; }
    friend bool operator==(const BiWeight&, const BiWeight&) = default;
};

inline void require_upper_half_plane(cplx z, const char* who) {
    if (!(z.imag() > 0.0)) throw std::domain_error(std::string(who) + ": point must lie in the upper half-plane");
}

/// j(g,z)^{-r} j(g, conj z)^{-s}.
inline cplx automorphy(const GroupElement& g, cplx z, BiWeight w) {
    const cplx j = jfactor(g, z);
    const cplx jb = jfactor(g, std::conj(z));
    return ipow(j, -w.r) * ipow(jb, -w.s);
}

/// Applies only the automorphy factor: fval is the caller-supplied value f(g z).
inline cplx act_rs(cplx fval, const GroupElement& g, cplx z, BiWeight w) {
    require_upper_half_plane(z, "act_rs");
    return automorphy(g, z, w) * fval;
}

/// (f |_{r,s} g)(z) for a callable f on the upper half-plane.
template <class F>
    requires std::is_invocable_r_v<cplx, F, cplx>
cplx act_rs(F&& f, const GroupElement& g, cplx z, BiWeight w) {
    require_upper_half_plane(z, "act_rs");
    return automorphy(g, z, w) * f(mobius(g, z));
}

/// Matrix M with (P |_{2-k,0} g)_m = sum_i M[m][i] p_i, i.e. the coefficient of
/// X^m in (a X + b)^i (c X + d)^{k-2-i}.
inline std::vector<std::vector<double>> poly_action_matrix(const GroupElement& g, int k) {
    const int n = k - 2;
    std::vector<std::vector<double>> m(n + 1, std::vector<double>(n + 1, 0.0));
    const double a = static_cast<double>(g.a), b = static_cast<double>(g.b);
    const double c = static_cast<double>(g.c), d = static_cast<double>(g.d);
    for (int i = 0; i <= n; ++i) {
        // (a X + b)^i
        std::vector<double> left(i + 1);
        for (int t = 0; t <= i; ++t) left[t] = binom(i, t) * std::pow(a, t) * std::pow(b, i - t);
        // (c X + d)^{n-i}
        std::vector<double> right(n - i + 1);
        for (int t = 0; t <= n - i; ++t) right[t] = binom(n - i, t) * std::pow(c, t) * std::pow(d, n - i - t);
        for (int s = 0; s <= i; ++s)
            for (int t = 0; t <= n - i; ++t) m[s + t][i] += left[s] * right[t];
    }
    return m;
}

/// X -> P(g X) j(g, X)^{k-2}, re-expanded in monomials.
inline PolyC act_poly(const PolyC& p, const GroupElement& g, int k) {
    if (k < 2 || k % 2 != 0) throw std::invalid_argument("act_poly: k must be an even integer >= 2");
    const std::size_t n = static_cast<std::size_t>(k - 2);
    if (p.degree_bound() > n) {
        for (std::size_t i = n + 1; i < p.size(); ++i)
            if (p[i] != cplx{0.0, 0.0}) throw consistency_error("act_poly: degree exceeds k-2");
    }
    // Fast paths for the generators; these dominate the cocycle evaluations.
    if (g == GroupElement::identity()) {
        PolyC out(n);
        for (std::size_t i = 0; i <= n && i < p.size(); ++i) out[i] = p[i];
        return out;
    }
    if (g.c == 0 && g.a == 1 && g.d == 1) {
        PolyC out(n);
        for (std::size_t i = 0; i <= n && i < p.size(); ++i) out[i] = p[i];
        return out.shifted(static_cast<double>(g.b));
    }
    if (g == GroupElement::S()) {
        PolyC out(n);
        for (std::size_t m = 0; m <= n && m < p.size(); ++m) out[n - m] = (m % 2 == 0 ? 1.0 : -1.0) * p[m];
        return out;
    }
    const auto mat = poly_action_matrix(g, k);
    PolyC out(n);
    for (std::size_t r = 0; r <= n; ++r) {
        cplx acc{0.0, 0.0};
        for (std::size_t i = 0; i <= n && i < p.size(); ++i) acc += mat[r][i] * p[i];
        out[r] = acc;
    }
    return out;
}

/// The tensor action |_{r,s,2-k}: (F.g)(z, X) = F(gz, gX) j(g,X)^{k-2} j(g,z)^{-r} j(g,zbar)^{-s},
/// evaluated at z for a polynomial-valued callable F.
template <class F>
PolyC act_tensor_at(F&& fam, const GroupElement& g, BiWeight w, int k, cplx z) {
    require_upper_half_plane(z, "act_tensor");
    return act_poly(fam(mobius(g, z)), g, k) * automorphy(g, z, w);
}

/// Same action returned as a new polynomial-valued function of z.
template <class F>
std::function<PolyC(cplx)> act_tensor(F fam, GroupElement g, BiWeight w, int k) {
    return [fam = std::move(fam), g, w, k](cplx z) { return act_tensor_at(fam, g, w, k, z); };
}

/// Integers (a, b) with a d - b c = 1 for coprime (c, d).
inline GroupElement complete_bottom_row(std::int64_t c, std::int64_t d) {
    // extended Euclid on (d, c): x d + y c = g
    std::int64_t old_r = d, r = c, old_x = 1, x = 0, old_y = 0, y = 1;
    while (r != 0) {
        const std::int64_t q = old_r / r;
        std::int64_t t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_x - q * x;
        old_x = x;
        x = t;
        t = old_y - q * y;
        old_y = y;
        y = t;
    }
    if (old_r == -1) {
        old_x = -old_x;
        old_y = -old_y;
        old_r = 1;
    }
    if (old_r != 1) throw std::invalid_argument("complete_bottom_row: (c, d) not coprime");
    return {old_x, -old_y, c, d};
}

/// Representatives of B\Gamma: the identity, then one matrix per coprime (c, d)
/// with 0 < c <= C, |d| <= D. Order: ascending c, ascending |d|, then +d before -d.
inline std::vector<GroupElement> enumerate_cosets(std::int64_t C, std::int64_t D) {
    if (C < 1 || D < 1) throw std::invalid_argument("enumerate_cosets: C, D must be >= 1");
    std::vector<GroupElement> out{GroupElement::identity()};
    for (std::int64_t c = 1; c <= C; ++c) {
        if (c == 1) out.push_back(complete_bottom_row(1, 0));
        for (std::int64_t ad = 1; ad <= D; ++ad)
            for (std::int64_t d : {ad, -ad})
                if (std::gcd(c, d) == 1) out.push_back(complete_bottom_row(c, d));
    }
    return out;
}

enum class Letter { S, T, T_inv };

inline GroupElement letter_matrix(Letter l) {
    switch (l) {
        case Letter::S: return GroupElement::S();
        case Letter::T: return GroupElement::T();
        default: return GroupElement::T_inv();
    }
}

/// A word in S, T, T^{-1}; its product equals the decomposed element, or its
/// negative when `negated` is set.
struct Word {
    std::vector<Letter> letters;
    bool negated = false;

    GroupElement product() const {
        GroupElement g = GroupElement::identity();
        for (Letter l : letters) g = g * letter_matrix(l);
        return negated ? g.negated() : g;
    }
    std::string str() const {
        std::string s;
        for (Letter l : letters) s += (l == Letter::S ? "S" : l == Letter::T ? "T" : "t");
        return s;
    }
};

/// Euclidean reduction on the first column: g = T^{q_1} S T^{q_2} S ... T^{m} (up to sign).
inline Word word_decompose(const GroupElement& g) {
    Word w;
    GroupElement m = g;
    auto push_translation = [&w](std::int64_t q) {
        for (std::int64_t i = 0; i < (q < 0 ? -q : q); ++i) w.letters.push_back(q > 0 ? Letter::T : Letter::T_inv);
    };
    while (m.c != 0) {
        const std::int64_t q = detail::floor_div(m.a, m.c);
        push_translation(q);
        m = GroupElement::T_pow(-q) * m;  // now 0 <= a < |c|
        w.letters.push_back(Letter::S);
        m = GroupElement::S().inverse() * m;
    }
    // m = (a b; 0 a) with a = +-1, i.e. a * T^{a b}
    push_translation(m.a * m.b);
    w.negated = (m.a == -1);
    return w;
}

}  // namespace cuspmi
