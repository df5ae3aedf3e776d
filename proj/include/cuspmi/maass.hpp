#pragma once

// Maass raising and lowering operators
//   d_r    =  2iy d/dz    + r  =  y (i f_x + f_y) + r f
//   dbar_s = -2iy d/dzbar + s  =  y (f_y - i f_x) + s f
// by central finite differences, and residual checks of the differential
// identities satisfied by the coset series.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cuspmi/core/errors.hpp"
#include "cuspmi/core/poly.hpp"
#include "cuspmi/group.hpp"
#include "cuspmi/periods.hpp"
#include "cuspmi/qforms.hpp"
#include "cuspmi/raseries.hpp"

namespace cuspmi {

struct FDScheme {
    enum class Mode { Central4th, Central2nd };
    double h = 1e-3;
    Mode mode = Mode::Central4th;

    static FDScheme central4(double h = 1e-3) { return {h, Mode::Central4th}; }
    static FDScheme central2(double h = 1e-3) { return {h, Mode::Central2nd}; }

    int order() const { return mode == Mode::Central4th ? 4 : 2; }
    /// Sum of |stencil weights| per axis times h; bounds amplification of evaluation noise.
    double noise_gain() const { return mode == Mode::Central4th ? 1.5 : 1.0; }
    /// Upper bound on the round-off part of d_r f given absolute evaluation noise eps
    /// (both axes, scaled by y).
    double noise_bound(double eps_eval, double y) const { return 2.0 * y * noise_gain() * eps_eval / h + eps_eval; }
    std::string name() const { return mode == Mode::Central4th ? "central-4th" : "central-2nd"; }
};

/// Value and first partials of a function on the upper half-plane.
template <class V>
struct Stencil {
    V f, fx, fy;
};

namespace detail {

template <class V>
V combine(const V& a, const V& b, const V& c, const V& d, double wa, double wb, double wc, double wd) {
    V out = a * wa;
    out += b * wb;
    out += c * wc;
    out += d * wd;
    return out;
}

template <class V>
V combine(const V& a, const V& b, double wa, double wb) {
    V out = a * wa;
    out += b * wb;
    return out;
}

}  // namespace detail

/// f and its x, y partials at z. The stencil must stay strictly inside H.
template <class Fn>
auto stencil(Fn&& fn, cplx z, const FDScheme& sch) -> Stencil<decltype(fn(z))> {
    using V = decltype(fn(z));
    require_upper_half_plane(z, "stencil");
    const double h = sch.h;
    if (!(h > 0.0)) throw std::invalid_argument("FDScheme: step must be positive");
    const double reach = sch.mode == FDScheme::Mode::Central4th ? 2.0 * h : h;
    if (!(z.imag() - reach > 0.0)) throw std::domain_error("stencil: leaves the upper half-plane");
    const cplx ex(h, 0.0), ey(0.0, h);
    Stencil<V> s{fn(z), V{}, V{}};
    if (sch.mode == FDScheme::Mode::Central4th) {
        const double w = 1.0 / (12.0 * h);
        s.fx = detail::combine(fn(z + 2.0 * ex), fn(z + ex), fn(z - ex), fn(z - 2.0 * ex), -w, 8 * w, -8 * w, w);
        s.fy = detail::combine(fn(z + 2.0 * ey), fn(z + ey), fn(z - ey), fn(z - 2.0 * ey), -w, 8 * w, -8 * w, w);
    } else {
        const double w = 1.0 / (2.0 * h);
        s.fx = detail::combine(fn(z + ex), fn(z - ex), w, -w);
        s.fy = detail::combine(fn(z + ey), fn(z - ey), w, -w);
    }
    return s;
}

template <class V>
V apply_d(const Stencil<V>& s, int r, double y) {
    V out = s.fx * cplx(0.0, y);
    out += s.fy * y;
    out += s.f * double(r);
    return out;
}

template <class V>
V apply_dbar(const Stencil<V>& s, int sw, double y) {
    V out = s.fx * cplx(0.0, -y);
    out += s.fy * y;
    out += s.f * double(sw);
    return out;
}

template <class Fn>
auto maass_d(Fn&& fn, int r, cplx z, const FDScheme& sch = {}) {
    return apply_d(stencil(fn, z, sch), r, z.imag());
}

template <class Fn>
auto maass_dbar(Fn&& fn, int s, cplx z, const FDScheme& sch = {}) {
    return apply_dbar(stencil(fn, z, sch), s, z.imag());
}

/// d_r f for a holomorphic q-series, from the term-wise derivative.
inline cplx maass_d_holomorphic(const QExpansion& f, int r, cplx z) {
    return cplx(0.0, 2.0 * z.imag()) * eval_form_derivative(f, z) + double(r) * eval_form(f, z).value;
}

struct Residual {
    double abs = 0.0;
    double scale = 0.0;
    double rel() const { return scale > 0.0 ? abs / scale : abs; }
};

struct EquivarianceReport {
    Residual action;       // d_r(f|_{r,s}g) vs (d_r f)|_{r+1,s-1}g
    Residual commutation;  // d_r(y^k f) vs y^k d_{r+k} f
};

template <class Fn>
EquivarianceReport check_equivariance(Fn fn, const GroupElement& g, BiWeight w, cplx z, int k = 2,
                                      const FDScheme& sch = {}) {
    EquivarianceReport rep;
    const auto fg = [&](cplx u) { return act_rs(fn, g, u, w); };
    const cplx lhs = maass_d(fg, w.r, z, sch);
    const cplx rhs = automorphy(g, z, BiWeight::make(w.r + 1, w.s - 1)) * maass_d(fn, w.r, mobius(g, z), sch);
    rep.action = {std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))};

    const auto yk = [&](cplx u) { return std::pow(u.imag(), k) * fn(u); };
    const cplx a = maass_d(yk, w.r, z, sch);
    const cplx b = std::pow(z.imag(), k) * maass_d(fn, w.r + k, z, sch);
    rep.commutation = {std::abs(a - b), std::max(std::abs(a), std::abs(b))};
    return rep;
}

struct KeyprReport {
    Residual d, dbar;
    double tail = 0.0;  // combined truncation estimate of the series involved
};

/// Residuals, coefficient-wise in the monomial basis, of
///   d_r phi    = r phi_{r+1,s-1} + [plus]  2iy f(z) (X - z)^{k-2} E_{r,s}
///   dbar_s phi = s phi_{r-1,s+1} - [minus] 2iy conj f(z) (X - zbar)^{k-2} E_{r,s}.
inline KeyprReport check_keypr(const SeriesContext& ctx, BiWeight w, Sign sign, cplx z, const TruncationParams& t = {},
                               const FDScheme& sch = {}) {
    const int k = ctx.weight();
    if (w.total() <= k) throw std::invalid_argument("check_keypr: needs r + s > k");
    const double y = z.imag();
    const auto st = stencil([&](cplx u) { return phi(ctx, w, sign, u, t).value; }, z, sch);
    const auto up = phi(ctx, BiWeight::make(w.r + 1, w.s - 1), sign, z, t);
    const auto down = phi(ctx, BiWeight::make(w.r - 1, w.s + 1), sign, z, t);
    const auto E = eisenstein_rs(w, z, t);
    const cplx fz = eval_form(ctx.form(), z).value;

    KeyprReport rep;
    rep.tail = up.tail_estimate + down.tail_estimate + E.tail_estimate;

    const PolyC lhs_d = apply_d(st, w.r, y);
    PolyC rhs_d = up.value * double(w.r);
    if (sign == Sign::Plus) rhs_d += linear_power(z, k - 2, k - 2) * (cplx(0.0, 2.0 * y) * fz * E.value);
    rep.d = {max_abs_diff(lhs_d, rhs_d), std::max(lhs_d.max_abs(), rhs_d.max_abs())};

    const PolyC lhs_b = apply_dbar(st, w.s, y);
    PolyC rhs_b = down.value * double(w.s);
    if (sign == Sign::Minus)
        rhs_b -= linear_power(std::conj(z), k - 2, k - 2) * (cplx(0.0, 2.0 * y) * std::conj(fz) * E.value);
    rep.dbar = {max_abs_diff(lhs_b, rhs_b), std::max(lhs_b.max_abs(), rhs_b.max_abs())};
    return rep;
}

/// Per-j residuals of
///   d_m (sum_j f_j (X-z)^j (X-zbar)^{k-2-j}) = sum_j (d_{m+j} f_j - (j+1) f_{j+1}) (X-z)^j (X-zbar)^{k-2-j}
/// with k - 2 = fjs.size() - 1 and f_{k-1} = 0. The left side is differentiated as a
/// polynomial-valued function and decomposed at z; the right side differentiates each f_j.
template <class Fj>
std::vector<Residual> check_coeffs_identity(const std::vector<Fj>& fjs, int m, cplx z, const FDScheme& sch = {}) {
    if (fjs.empty()) throw std::invalid_argument("check_coeffs_identity: empty coefficient list");
    const int n = int(fjs.size()) - 1;
    const int k = n + 2;
    const double y = z.imag();
    const auto P = [&](cplx u) {
        std::vector<cplx> c(n + 1);
        for (int j = 0; j <= n; ++j) c[j] = fjs[j](u);
        return coeff_assemble(c, u, k);
    };
    const auto lhs = coeff_decompose(apply_d(stencil(P, z, sch), m, y), z, k);

    std::vector<Stencil<cplx>> st;
    st.reserve(n + 1);
    for (int j = 0; j <= n; ++j) st.push_back(stencil(fjs[j], z, sch));
    std::vector<Residual> out(n + 1);
    for (int j = 0; j <= n; ++j) {
        cplx rhs = apply_d(st[j], m + j, y);
        if (j < n) rhs -= double(j + 1) * st[j + 1].f;
        out[j] = {std::abs(lhs[j] - rhs), std::max(std::abs(lhs[j]), std::abs(rhs))};
    }
    return out;
}

struct CompositeReport {
    std::vector<Residual> per_j;
    Residual worst;  // max abs residual over j against the max scale over j
};

/// With f_j the basis coefficients of phi^{sign}_{r,s}, combines the coefficient
/// identity with the raising relation:
///   d_{r+j} f_j - (j+1) f_{j+1} = r phi_{r+1,s-1}(j) + [plus, j = k-2] 2iy f(z) E_{r,s}.
inline CompositeReport check_composite(const SeriesContext& ctx, BiWeight w, Sign sign, cplx z,
                                       const TruncationParams& t = {}, const FDScheme& sch = {}) {
    const int k = ctx.weight();
    const int n = k - 2;
    const double y = z.imag();
    const auto st = stencil(
        [&](cplx u) {
            const auto c = coeff_decompose(phi(ctx, w, sign, u, t).value, u, k);
            return PolyC(c);  // used as a plain coefficient vector
        },
        z, sch);
    const auto up = coeff_decompose(phi(ctx, BiWeight::make(w.r + 1, w.s - 1), sign, z, t).value, z, k);
    const cplx E = eisenstein_rs(w, z, t).value;
    const cplx fz = eval_form(ctx.form(), z).value;

    CompositeReport rep;
    rep.per_j.resize(n + 1);
    for (int j = 0; j <= n; ++j) {
        const Stencil<cplx> sj{st.f[j], st.fx[j], st.fy[j]};
        cplx lhs = apply_d(sj, w.r + j, y);
        if (j < n) lhs -= double(j + 1) * st.f[j + 1];
        cplx rhs = double(w.r) * up[j];
        if (sign == Sign::Plus && j == n) rhs += cplx(0.0, 2.0 * y) * fz * E;
        rep.per_j[j] = {std::abs(lhs - rhs), std::max(std::abs(lhs), std::abs(rhs))};
        rep.worst.abs = std::max(rep.worst.abs, rep.per_j[j].abs);
        rep.worst.scale = std::max(rep.worst.scale, rep.per_j[j].scale);
    }
    return rep;
}

}  // namespace cuspmi
