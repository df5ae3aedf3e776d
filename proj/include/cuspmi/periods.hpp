#pragma once

// Eichler integrals, period polynomials and additively twisted L-values of a
// level-one cusp form.

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cuspmi/core/compensated.hpp"
#include "cuspmi/core/errors.hpp"
#include "cuspmi/core/poly.hpp"
#include "cuspmi/group.hpp"
#include "cuspmi/qforms.hpp"

namespace cuspmi {

enum class Sign { Plus, Minus };

inline const char* sign_name(Sign s) { return s == Sign::Plus ? "+" : "-"; }

/// Primitive of e^{2 pi i n w} w^m vanishing at i infinity, at w = z:
/// I_0 = e/(2 pi i n), I_m = e z^m/(2 pi i n) - m/(2 pi i n) I_{m-1}.
inline cplx exp_poly_primitive(int n, int m, cplx z) {
    if (n < 1 || m < 0) throw std::invalid_argument("exp_poly_primitive: need n >= 1, m >= 0");
    require_upper_half_plane(z, "exp_poly_primitive");
    const cplx tpin(0.0, 2.0 * pi * n);
    const cplx e = std::exp(tpin * z);
    cplx I = e / tpin, zp = 1.0;
    for (int j = 1; j <= m; ++j) {
        zp *= z;
        I = e * zp / tpin - double(j) / tpin * I;
    }
    return I;
}

/// Centred primitives G_p(z) = int_{i inf}^z f(w) (w - z)^p dw, p = 0..pmax,
/// i.e. sum_n a(n) q^n (-1)^p p! / (2 pi i n)^{p+1}.
struct CentredPrimitives {
    std::vector<cplx> G;
    double tail = 0.0;
};

inline CentredPrimitives centred_primitives(const QExpansion& f, cplx z, int pmax, double rel_tol = 1e-10,
                                            double y_min = default_y_min) {
    if (!f.is_cusp()) throw std::invalid_argument("Eichler integrals need a cusp form");
    if (z.imag() < y_min)
        throw precision_error("Eichler integral: Im z = " + std::to_string(z.imag()) + " below y_min");
    const auto& a = f.coeffs_double();
    const cplx q = std::exp(cplx(0.0, 2.0 * pi) * z);
    std::vector<ComplexSum> acc(pmax + 1);
    cplx qn = 1.0;
    for (std::size_t n = 1; n < a.size(); ++n) {
        qn *= q;
        if (a[n] == 0.0) continue;
        const cplx inv = 1.0 / cplx(0.0, 2.0 * pi * double(n));
        cplx t = a[n] * qn * inv;  // p = 0
        acc[0].add(t);
        for (int p = 1; p <= pmax; ++p) {
            t *= -double(p) * inv;
            acc[p].add(t);
        }
    }
    CentredPrimitives out;
    out.G.resize(pmax + 1);
    double scale = 0.0;
    for (int p = 0; p <= pmax; ++p) {
        out.G[p] = acc[p].value();
        scale = std::max(scale, std::abs(out.G[p]));
    }
    // the 1/(2 pi n)^{p+1} factors only help; p!/(2 pi)^{p+1} bounds the prefactor
    double pref = 0.0, fact = 1.0;
    for (int p = 0; p <= pmax; ++p) {
        if (p > 0) fact *= p;
        pref = std::max(pref, fact / std::pow(2.0 * pi, p + 1));
    }
    const auto [A, e] = coefficient_envelope(f);
    out.tail = pref * envelope_tail(A, e - 1.0, f.N(), std::abs(q));
    if (out.tail > rel_tol * std::max(scale, 1e-300))
        throw precision_error("Eichler integral: q-tail estimate " + std::to_string(out.tail) + " exceeds tolerance");
    return out;
}

/// F^+(z, X) = int_{i inf}^z f(w) (w - X)^{k-2} dw as a polynomial in X; F^- is
/// its coefficient-wise conjugate.
inline PolyC eichler_F(const QExpansion& f, cplx z, Sign sign = Sign::Plus, double rel_tol = 1e-10) {
    const int n = f.weight() - 2;
    const auto G = centred_primitives(f, z, n, rel_tol).G;
    // (w - X)^n = sum_p binom(n,p) (w - z)^p (z - X)^{n-p}
    PolyC out(n);
    for (int p = 0; p <= n; ++p) {
        const int m = n - p;
        const cplx c = binom(n, p) * G[p];
        cplx zp = 1.0;  // z^{m-t}, built from t = m down
        for (int t = m; t >= 0; --t) {
            out[t] += c * binom(m, t) * ((t % 2) ? -1.0 : 1.0) * zp;
            zp *= z;
        }
    }
    return sign == Sign::Plus ? out : out.conj();
}

/// r(g; X) = F(g z0, g X) j(g, X)^{k-2} - F(z0, X).
inline PolyC period_poly_base(const QExpansion& f, const GroupElement& g, Sign sign, cplx z0 = cplx(0.0, 1.0)) {
    const int k = f.weight();
    const cplx gz = mobius(g, z0);
    if (gz.imag() < default_y_min || z0.imag() < default_y_min)
        throw precision_error("period_poly_base: base point or its image too close to the real axis");
    return act_poly(eichler_F(f, gz, sign), g, k) - eichler_F(f, z0, sign);
}

/// The period cocycle g -> r(g; X), anchored at r(S) and extended through the
/// cocycle relation r(g h) = r(g)|h + r(h), r(T) = 0.
class PeriodCocycle {
public:
    explicit PeriodCocycle(QExpansion f, Sign sign = Sign::Plus, cplx z0 = cplx(0.0, 1.0))
        : f_(std::move(f)), sign_(sign), k_(f_.weight()) {
        if (!f_.is_cusp()) throw std::invalid_argument("PeriodCocycle: f must be a cusp form");
        r_S_ = period_poly_base(f_, GroupElement::S(), sign_, z0);
    }

    int weight() const { return k_; }
    Sign sign() const { return sign_; }
    const QExpansion& form() const { return f_; }
    const PolyC& r_S() const { return r_S_; }

    PolyC of_word(const Word& w) const {
        PolyC acc(k_ - 2);
        std::int64_t run = 0;
        auto flush = [&]() {
            if (run != 0) acc = act_poly(acc, GroupElement::T_pow(run), k_);
            run = 0;
        };
        for (Letter l : w.letters) {
            if (l == Letter::T) {
                ++run;
            } else if (l == Letter::T_inv) {
                --run;
            } else {
                flush();
                acc = act_poly(acc, GroupElement::S(), k_) + r_S_;
            }
        }
        flush();
        return acc;  // r(-1) = 0 and -1 acts trivially for even k
    }

    PolyC operator()(const GroupElement& g) const { return of_word(word_decompose(g)); }

    /// r for the coset with bottom row (c, d), c > 0: r(g0)|T^n with d = d0 + n c, 0 <= d0 < c.
    PolyC coset(std::int64_t c, std::int64_t d) const {
        if (c <= 0) throw std::invalid_argument("PeriodCocycle::coset: c must be positive");
        const std::int64_t d0 = ((d % c) + c) % c;
        const std::int64_t n = (d - d0) / c;
        const PolyC base = (*this)(complete_bottom_row(c, d0));
        return n == 0 ? base : base.shifted(static_cast<double>(n));
    }

private:
    QExpansion f_;
    Sign sign_;
    int k_;
    PolyC r_S_;
};

/// Immutable table of r(g0) for all reduced cosets (c, d0), 0 < c <= C, 0 <= d0 < c.
class CosetPeriodTable {
public:
    CosetPeriodTable(const PeriodCocycle& r, std::int64_t C) : C_(C), k_(r.weight()) {
        offset_.resize(C + 2, 0);
        for (std::int64_t c = 1; c <= C; ++c) offset_[c + 1] = offset_[c] + static_cast<std::size_t>(c);
        polys_.resize(offset_[C + 1]);
        for (std::int64_t c = 1; c <= C; ++c)
            for (std::int64_t d0 = 0; d0 < c; ++d0)
                if (std::gcd(c, d0) == 1) polys_[offset_[c] + d0] = r(complete_bottom_row(c, d0));
    }
    std::int64_t C() const { return C_; }
    const PolyC& reduced(std::int64_t c, std::int64_t d0) const { return polys_.at(offset_.at(c) + d0); }
    PolyC at(std::int64_t c, std::int64_t d) const {
        const std::int64_t d0 = ((d % c) + c) % c;
        const std::int64_t n = (d - d0) / c;
        return n == 0 ? reduced(c, d0) : reduced(c, d0).shifted(static_cast<double>(n));
    }

private:
    std::int64_t C_;
    int k_;
    std::vector<std::size_t> offset_;
    std::vector<PolyC> polys_;
};

enum class LMethod { Series, Extraction, Auto };

inline const char* method_name(LMethod m) {
    return m == LMethod::Series ? "series" : m == LMethod::Extraction ? "extraction" : "auto";
}

struct LValue {
    cplx value;
    LMethod method;
};

namespace detail {

inline double smooth_cutoff(double x) {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double t = x - 1.0;
    const double a = std::exp(-1.0 / (1.0 - t)), b = std::exp(-1.0 / t);
    return a / (a + b);
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline std::int64_t mod_pos(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

}  // namespace detail

/// Lambda(s, p/q) = (s-1)! (2 pi)^{-s} sum a(n) e(n p/q) n^{-s}, summed with the
/// smooth weight w(n/X), X = N/2, where N is the stored length of f.
inline cplx twisted_L_series(const QExpansion& f, int s, std::int64_t p, std::int64_t q) {
    if (q < 1 || std::gcd(p, q) != 1) throw std::invalid_argument("twisted_L: need q >= 1 and gcd(p, q) = 1");
    if (2 * s <= f.weight() + 1)
        throw convergence_error("twisted_L: series route requires s > (k+1)/2, got s = " + std::to_string(s));
    const auto& a = f.coeffs_double();
    const double X = 0.5 * double(f.N());
    const std::int64_t pr = detail::mod_pos(p, q);
    ComplexSum acc;
    for (std::size_t n = 1; n < a.size(); ++n) {
        const double w = detail::smooth_cutoff(double(n) / X);
        if (w == 0.0) break;
        if (a[n] == 0.0) continue;
        const double angle = 2.0 * pi * double(detail::mod_pos(static_cast<std::int64_t>(n) * pr, q)) / double(q);
        acc.add(a[n] * w * std::pow(double(n), -s) * cplx(std::cos(angle), std::sin(angle)));
    }
    return detail::factorial(s - 1) * std::pow(2.0 * pi, -s) * acc.value();
}

/// Lambda(j+1, a) for j = 0..k-2 read off r(g; X) with g^{-1} inf = a = -d/c:
/// the coefficient of Y^{k-2-j} in r(g; Y + a) is (-1)^j binom(k-2,j) i^{j+1} Lambda(j+1, a).
inline std::vector<cplx> lvalues_from_period(const PolyC& r_plus, double a, int k) {
    const PolyC Q = r_plus.shifted(a);
    std::vector<cplx> out(k - 1);
    for (int j = 0; j <= k - 2; ++j)
        out[j] = Q[k - 2 - j] / (((j % 2) ? -1.0 : 1.0) * binom(k - 2, j) * ipow_i(j + 1));
    return out;
}

inline cplx twisted_L_extract(const PeriodCocycle& r, int s, std::int64_t p, std::int64_t q) {
    if (r.sign() != Sign::Plus) throw std::invalid_argument("twisted_L: extraction needs the plus cocycle");
    if (q < 1 || std::gcd(p, q) != 1) throw std::invalid_argument("twisted_L: need q >= 1 and gcd(p, q) = 1");
    const int k = r.weight();
    if (s < 1 || s > k - 1) throw std::invalid_argument("twisted_L: extraction covers 1 <= s <= k-1");
    const std::int64_t pr = detail::mod_pos(p, q);
    // g with bottom row (q, -pr) has g^{-1} inf = pr/q
    const PolyC rg = r.coset(q, -pr);
    return lvalues_from_period(rg, double(pr) / double(q), k)[s - 1];
}

/// Auto picks the series when it converges absolutely and the extraction otherwise.
inline LValue twisted_L(const QExpansion& f, int s, std::int64_t p, std::int64_t q, LMethod method = LMethod::Auto,
                        const PeriodCocycle* cocycle = nullptr) {
    if (method == LMethod::Auto) method = (2 * s > f.weight() + 1) ? LMethod::Series : LMethod::Extraction;
    if (method == LMethod::Series) return {twisted_L_series(f, s, p, q), method};
    if (cocycle) return {twisted_L_extract(*cocycle, s, p, q), method};
    return {twisted_L_extract(PeriodCocycle(f), s, p, q), method};
}

/// Lambda(s, -d0/c) for s = 1..k-1 and all reduced residues 0 <= d0 < c <= C,
/// obtained by extraction. Lambda(s, a) depends on a mod 1 only.
class LambdaTable {
public:
    LambdaTable(const PeriodCocycle& r, std::int64_t C) : k_(r.weight()), C_(C) {
        if (r.sign() != Sign::Plus) throw std::invalid_argument("LambdaTable: needs the plus cocycle");
        for (std::int64_t c = 1; c <= C; ++c)
            for (std::int64_t d0 = 0; d0 < c; ++d0) {
                if (std::gcd(c, d0) != 1) continue;
                table_[{c, d0}] = lvalues_from_period(r.coset(c, d0), -double(d0) / double(c), k_);
            }
    }
    int weight() const { return k_; }
    std::int64_t C() const { return C_; }
    bool has(std::int64_t c, std::int64_t d) const {
        return c >= 1 && table_.count({c, detail::mod_pos(d, c)}) > 0;
    }
    /// Lambda(s, -d/c).
    cplx operator()(int s, std::int64_t c, std::int64_t d) const {
        const auto it = table_.find({c, detail::mod_pos(d, c)});
        if (it == table_.end()) throw std::out_of_range("LambdaTable: missing residue (c, d)");
        if (s < 1 || s > k_ - 1) throw std::out_of_range("LambdaTable: s out of range");
        return it->second[s - 1];
    }

private:
    int k_;
    std::int64_t C_;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<cplx>> table_;
};

/// r(g; X) = sum_j (-1)^j binom(k-2,j) i^{j+1} Lambda(j+1, a) (X - a)^{k-2-j}, a = g^{-1} inf.
inline PolyC period_from_Lvalues(const LambdaTable& L, const GroupElement& g, Sign sign = Sign::Plus) {
    const int k = L.weight();
    PolyC out(k - 2);
    if (g.c == 0) return out;
    const std::int64_t c = g.c > 0 ? g.c : -g.c, d = g.c > 0 ? g.d : -g.d;
    if (!L.has(c, d)) throw std::out_of_range("period_from_Lvalues: incomplete table");
    const double a = -double(d) / double(c);
    for (int j = 0; j <= k - 2; ++j) {
        const cplx coef = ((j % 2) ? -1.0 : 1.0) * binom(k - 2, j) * ipow_i(j + 1) * L(j + 1, c, d);
        out += linear_power(a, k - 2 - j, k - 2) * coef;
    }
    return sign == Sign::Plus ? out : out.conj();
}

struct ConvexityRow {
    std::int64_t q;
    double max_ratio;
};

struct ConvexityReport {
    std::vector<ConvexityRow> rows;
    double max_ratio = 0.0;
    bool bounded = true;  // soft flag: ratio never jumped by more than x4 between consecutive q
};

/// max over reduced p/q and j in [jmin, jmax] of |q^{j+1} Lambda(j+1, p/q)| / q^{k-1+0.1}.
inline ConvexityReport convexity_spotcheck(const PeriodCocycle& r, int jmin, int jmax, std::int64_t qmax) {
    const int k = r.weight();
    ConvexityReport rep;
    double prev = 0.0;
    for (std::int64_t q = 1; q <= qmax; ++q) {
        double m = 0.0;
        for (std::int64_t p = 0; p < q; ++p) {
            if (std::gcd(p, q) != 1) continue;
            const auto L = lvalues_from_period(r.coset(q, -p), double(p) / double(q), k);
            for (int j = std::max(jmin, 0); j <= std::min(jmax, k - 2); ++j)
                m = std::max(m, std::abs(L[j]) * std::pow(double(q), j + 1) / std::pow(double(q), k - 1 + 0.1));
        }
        rep.rows.push_back({q, m});
        if (prev > 0.0 && m > 4.0 * prev) rep.bounded = false;
        prev = std::max(prev, m);
        rep.max_ratio = std::max(rep.max_ratio, m);
    }
    return rep;
}

}  // namespace cuspmi
