#pragma once

// Iterated Eichler integrals
//   F_1 = 1,
//   F_n(w; X_1..X_{n-1}) = int_{i inf}^w f_1(w_1)(w_1 - X_1)^{k_1-2} F_{n-1}(w_1; X_2..X_{n-1}) dw_1,
// the multi-variable right action, order-n invariance checks, and the
// second-order cocycle images of the real-analytic constructions.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cuspmi/core/errors.hpp"
#include "cuspmi/core/poly.hpp"
#include "cuspmi/group.hpp"
#include "cuspmi/periods.hpp"
#include "cuspmi/qforms.hpp"
#include "cuspmi/raseries.hpp"

namespace cuspmi {

/// f_1..f_{n-1} with their weights; k0 is the weight of the outer variable.
struct IteratedIntegrand {
    std::vector<QExpansion> forms;
    int k0 = 2;

    IteratedIntegrand() = default;
    explicit IteratedIntegrand(std::vector<QExpansion> fs, int k0_ = 2) : forms(std::move(fs)), k0(k0_) {
        for (const auto& f : forms) {
            if (!f.is_cusp()) throw std::invalid_argument("IteratedIntegrand: all f_i must be cusp forms");
            if (f.weight() % 2 != 0 || f.weight() < 2) throw std::invalid_argument("IteratedIntegrand: weights must be even");
        }
    }
    int depth() const { return int(forms.size()) + 1; }
    std::vector<int> weights() const {
        std::vector<int> ks;
        for (const auto& f : forms) ks.push_back(f.weight());
        return ks;
    }
};

struct IteratedValue {
    MultiPoly value;
    double tail = 0.0;
};

namespace detail {

/// int_{i inf}^0 e^{2 pi i N u} u^p du = (-1)^p p! / (2 pi i N)^{p+1}, p = 0..pmax.
inline std::vector<cplx> centred_moments(int N, int pmax) {
    std::vector<cplx> I(pmax + 1);
    const cplx inv = 1.0 / cplx(0.0, 2.0 * pi * double(N));
    I[0] = inv;
    for (int p = 1; p <= pmax; ++p) I[p] = -double(p) * inv * I[p - 1];
    return I;
}

/// Coefficient matrix of (z - X)^a = sum_i M[i][a] X^i.
inline std::vector<std::vector<cplx>> centred_to_monomial(cplx z, int n) {
    std::vector<std::vector<cplx>> M(n + 1, std::vector<cplx>(n + 1, 0.0));
    for (int a = 0; a <= n; ++a)
        for (int i = 0; i <= a; ++i) M[i][a] = binom(a, i) * ipow(z, a - i) * ((i % 2) ? -1.0 : 1.0);
    return M;
}

/// Depth 3: with u = w_1 - z, U = z - X_1, V = z - X_2,
///   F_2(w_1; X_2) = sum_n b(n) e(n z) e^{2 pi i n u} sum_p binom(K2,p) I_n(p) (u + V)^{K2-p},
/// and integrating f_1(w_1)(u + U)^{K1} F_2 term by term over u in (i inf, 0].
inline IteratedValue iterated_F3(const QExpansion& f1, const QExpansion& f2, cplx z, double rel_tol, double y_min) {
    if (z.imag() < y_min) throw precision_error("iterated_F: Im z = " + std::to_string(z.imag()) + " below y_min");
    const int K1 = f1.weight() - 2, K2 = f2.weight() - 2;
    const auto& a = f1.coeffs_double();
    const auto& b = f2.coeffs_double();
    const int N1 = int(a.size()) - 1, N2 = int(b.size()) - 1;
    const int Nmax = std::min(N1, N2) + 1;  // shells m + n = N are complete up to here
    const cplx q = std::exp(cplx(0.0, 2.0 * pi) * z);

    std::vector<std::vector<cplx>> inner(N2 + 1);  // binom(K2,p) I_n(p)
    for (int n = 1; n <= N2; ++n) {
        inner[n] = centred_moments(n, K2);
        for (int p = 0; p <= K2; ++p) inner[n][p] *= binom(K2, p);
    }

    std::vector<cplx> A((K1 + 1) * (K2 + 1), 0.0);  // A[alpha * (K2+1) + beta]: U^alpha V^beta
    std::vector<cplx> shell(A.size());
    double last_shell = 0.0, total = 0.0;
    cplx qN = q;
    for (int N = 2; N <= Nmax; ++N) {
        qN *= q;
        const auto IN = centred_moments(N, K1 + K2);
        std::fill(shell.begin(), shell.end(), cplx(0.0, 0.0));
        bool any = false;
        for (int n = std::max(1, N - N1); n <= std::min(N2, N - 1); ++n) {
            const int m = N - n;
            const double ab = a[m] * b[n];
            if (ab == 0.0) continue;
            any = true;
            for (int i = 0; i <= K1; ++i) {
                const double bi = binom(K1, i);
                for (int p = 0; p <= K2; ++p) {
                    const int qd = K2 - p;
                    for (int j = 0; j <= qd; ++j)
                        shell[(K1 - i) * (K2 + 1) + (qd - j)] += ab * bi * binom(qd, j) * inner[n][p] * IN[i + j];
                }
            }
        }
        if (!any) continue;
        double mag = 0.0;
        for (std::size_t s = 0; s < A.size(); ++s) {
            const cplx v = shell[s] * qN;
            A[s] += v;
            mag = std::max(mag, std::abs(v));
        }
        last_shell = mag;
        total = std::max(total, mag);
    }
    const double x = std::abs(q);
    const double tail = 10.0 * last_shell * x / (1.0 - x);
    if (tail > rel_tol * std::max(total, 1e-300))
        throw precision_error("iterated_F: truncated q-series tail " + std::to_string(tail) + " exceeds tolerance");

    MultiPoly P({std::size_t(K1), std::size_t(K2)});
    for (int al = 0; al <= K1; ++al)
        for (int be = 0; be <= K2; ++be) P.at(al, be) = A[al * (K2 + 1) + be];
    P = P.apply_along(0, centred_to_monomial(z, K1)).apply_along(1, centred_to_monomial(z, K2));
    return {P, tail};
}

}  // namespace detail

/// F_n at z as a polynomial in X_1..X_{n-1} (MultiPoly axis i-1 holds X_i).
inline IteratedValue iterated_F(const IteratedIntegrand& data, cplx z, double rel_tol = 1e-10,
                                double y_min = default_y_min) {
    require_upper_half_plane(z, "iterated_F");
    switch (data.depth()) {
        case 1:
            return {MultiPoly::scalar(1.0), 0.0};
        case 2: {
            const int n = data.forms[0].weight() - 2;
            if (z.imag() < y_min) throw precision_error("iterated_F: Im z below y_min");
            const auto cp = centred_primitives(data.forms[0], z, n, rel_tol, y_min);
            return {MultiPoly::from_poly(eichler_F(data.forms[0], z, Sign::Plus, rel_tol)), cp.tail};
        }
        case 3:
            return detail::iterated_F3(data.forms[0], data.forms[1], z, rel_tol, y_min);
        default:
            throw std::invalid_argument("iterated_F: depth above 3 is not supported");
    }
}

/// (F.g)(z; X) = F(gz; gX_1, ..) j(g,z)^{k0-2} prod_i j(g,X_i)^{k_i-2}. With
/// `acted` < ks.size() only X_1..X_acted are transformed; the trailing variables
/// are an inert coefficient space.
template <class Fam>
MultiPoly dot_action_at(Fam&& F, const GroupElement& g, const std::vector<int>& ks, int k0, cplx z,
                        std::size_t acted = std::size_t(-1)) {
    require_upper_half_plane(z, "dot_action");
    MultiPoly v = F(mobius(g, z));
    if (v.variables() != ks.size()) throw std::invalid_argument("dot_action: weight list does not match variables");
    for (std::size_t i = 0; i < std::min(acted, ks.size()); ++i) v = v.apply_along(i, poly_action_matrix(g, ks[i]));
    if (k0 != 2) v *= ipow(jfactor(g, z), k0 - 2);
    return v;
}

struct OrderEntry {
    std::string witness;
    MultiPoly image;  // value at the first base point
    double residual = 0.0;  // z-independence residual relative to the image
};

struct OrderReport {
    int order = 0;
    std::vector<OrderEntry> entries;
    double worst = 0.0;
};

/// n = 2: F.(g-1) is independent of z for every witness g.
/// n = 3: F.(g-1) lies in M^(2) tensor V, V the polynomials in the last variable;
/// (F.(g-1)).(h-1), with h acting on z and the leading variables only, is
/// independent of z for every ordered witness pair.
/// Compared between two base points, relative to the larger image.
template <class Fam>
OrderReport order_check(Fam&& F, int n, const std::vector<GroupElement>& witnesses, std::pair<cplx, cplx> zs,
                        const std::vector<int>& ks, int k0 = 2) {
    if (n != 2 && n != 3) throw std::invalid_argument("order_check: order must be 2 or 3");
    OrderReport rep;
    rep.order = n;
    // Images that vanish to round-off relative to F itself are scored against |F|.
    const double ref = std::max(F(zs.first).max_abs(), F(zs.second).max_abs());
    const auto record = [&](std::string label, const MultiPoly& a, const MultiPoly& b) {
        const double scale = std::max(a.max_abs(), b.max_abs());
        const double res = (a - b).max_abs() / (scale > 1e-12 * ref ? scale : ref);
        OrderEntry e{std::move(label), a, res};
        rep.worst = std::max(rep.worst, e.residual);
        rep.entries.push_back(std::move(e));
    };
    for (const auto& g : witnesses) {
        const auto first = [&](cplx z) { return dot_action_at(F, g, ks, k0, z) - F(z); };
        if (n == 2) {
            record(word_decompose(g).str(), first(zs.first), first(zs.second));
            continue;
        }
        for (const auto& h : witnesses) {
            const std::size_t acted = ks.empty() ? 0 : ks.size() - 1;
            const auto second = [&](cplx z) { return dot_action_at(first, h, ks, k0, z, acted) - first(z); };
            record(word_decompose(g).str() + "," + word_decompose(h).str(), second(zs.first), second(zs.second));
        }
    }
    return rep;
}

/// Direct (g-1)-image against its predicted closed form.
struct CocycleComparison {
    PolyC direct, predicted;
    double tail = 0.0;
    double residual() const { return max_abs_diff(direct, predicted); }
    double scale() const { return std::max(direct.max_abs(), predicted.max_abs()); }
};

/// E_{r,s}(z) int_{i inf}^z f_1(w)(w - X)^{k_1-2} dw.
inline SeriesValue<PolyC> real_iterated_F2(const QExpansion& f1, BiWeight w, cplx z, const TruncationParams& t = {}) {
    if (w.total() <= 2) throw convergence_error("real_iterated_F2: needs r + s > 2");
    const auto E = eisenstein_rs(w, z, t);
    const PolyC F = eichler_F(f1, z, Sign::Plus);
    SeriesValue<PolyC> v;
    v.value = F * E.value;
    v.weights = w;
    v.trunc = t;
    v.tail_estimate = F.max_abs() * E.tail_estimate;
    return v;
}

/// F_2.(g-1) under |_{r,s,2-k_1} against E_{r,s} r_{f_1}(g).
inline CocycleComparison real_iterated_F2_image(const QExpansion& f1, BiWeight w, const GroupElement& g, cplx z,
                                                const TruncationParams& t = {}) {
    const int k = f1.weight();
    const auto here = real_iterated_F2(f1, w, z, t);
    const auto there = real_iterated_F2(f1, w, mobius(g, z), t);
    const cplx aut = automorphy(g, z, w);
    CocycleComparison c;
    c.direct = act_poly(there.value, g, k) * aut - here.value;
    const auto E = eisenstein_rs(w, z, t);
    const PolyC r = PeriodCocycle(f1, Sign::Plus)(g);
    c.predicted = r * E.value;
    const double gain = act_poly(PolyC(std::vector<cplx>(k - 1, 1.0)), g, k).max_abs();
    c.tail = here.tail_estimate + std::abs(aut) * gain * there.tail_estimate + r.max_abs() * E.tail_estimate;
    return c;
}

/// (psi^+_f + psi^-_g).(gamma - 1) by the series at z and gamma z, against
/// -(r^+_f(gamma) + r^-_g(gamma)) E_{r,s}(z).
inline CocycleComparison psi_bar_image(const SeriesContext& fplus, const SeriesContext& gminus, BiWeight w,
                                       const GroupElement& g, cplx z, const TruncationParams& t = {}) {
    const int k = fplus.weight();
    if (gminus.weight() != k) throw std::invalid_argument("psi_bar_image: weights differ");
    if (w.total() <= k) throw convergence_error("psi_bar_image: needs r + s > k");
    const cplx gz = mobius(g, z);
    const auto psi = [&](cplx u) {
        auto a = psi_series(fplus, w, Sign::Plus, u, t);
        const auto b = psi_series(gminus, w, Sign::Minus, u, t);
        a.value += b.value;
        a.tail_estimate += b.tail_estimate;
        return a;
    };
    const auto here = psi(z), there = psi(gz);
    const cplx aut = automorphy(g, z, w);
    CocycleComparison c;
    c.direct = act_poly(there.value, g, k) * aut - here.value;
    const auto E = eisenstein_rs(w, z, t);
    const PolyC r = fplus.period(g, Sign::Plus) + gminus.period(g, Sign::Minus);
    c.predicted = r * (-E.value);
    const double gain = act_poly(PolyC(std::vector<cplx>(k - 1, 1.0)), g, k).max_abs();
    c.tail = here.tail_estimate + std::abs(aut) * gain * there.tail_estimate + r.max_abs() * E.tail_estimate;
    return c;
}

/// psi |-> (phi(0, .), .., phi(k-2, .)): coefficients of phi = psi + F E in the
/// (X - z)^i (X - zbar)^{k-2-i} basis.
inline SeriesValue<std::vector<cplx>> map_to_MI(const SeriesContext& ctx, BiWeight w, Sign sign, cplx z,
                                                const TruncationParams& t = {}) {
    if (w.total() <= ctx.weight()) throw convergence_error("map_to_MI: needs r + s > k");
    return phi_coefficients(ctx, w, sign, z, t);
}

}  // namespace cuspmi
