#pragma once

// Truncated coset sums over B\Gamma: real-analytic Eisenstein series, the
// polynomial-valued series psi and phi, holomorphic Poincare series and their
// period-twisted analogues, together with truncation-error estimates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <thread>
#include <vector>

#include "cuspmi/core/compensated.hpp"
#include "cuspmi/core/errors.hpp"
#include "cuspmi/core/poly.hpp"
#include "cuspmi/group.hpp"
#include "cuspmi/periods.hpp"
#include "cuspmi/qforms.hpp"

namespace cuspmi {

struct TruncationParams {
    std::int64_t C = 40;
    std::int64_t D = 400;
    std::size_t N = 120;
    int M = 64;
    double h = 1e-3;
    double tol = 1e-6;
    unsigned threads = 1;

    /// C >= 1 and D >= 4 C (|x| + 1) at the evaluation point.
    void validate(cplx z) const {
        if (C < 1) throw std::invalid_argument("TruncationParams: C must be >= 1");
        if (double(D) < 4.0 * double(C) * (std::abs(z.real()) + 1.0))
            throw std::invalid_argument("TruncationParams: D must be >= 4 C (|x| + 1) at the evaluation point");
        require_upper_half_plane(z, "coset sum");
    }
    /// Same parameters with C doubled and D scaled alongside.
    TruncationParams doubled() const {
        TruncationParams t = *this;
        t.C *= 2;
        t.D *= 2;
        return t;
    }
};

template <class T>
struct SeriesValue {
    T value;
    BiWeight weights;
    Sign sign = Sign::Plus;
    TruncationParams trunc;
    double tail_estimate = 0.0;
};

/// sqrt(pi) Gamma((w-1)/2) / Gamma(w/2) = int_R (1 + t^2)^{-w/2} dt.
inline double line_integral_constant(double w) {
    return std::sqrt(pi) * std::exp(std::lgamma(0.5 * (w - 1.0)) - std::lgamma(0.5 * w));
}

/// Integral-comparison estimate of sum |cz+d|^{-w} over the coprime pairs
/// outside the rectangle 0 < c <= C, |d| <= D.
inline double coset_tail(double w, cplx z, std::int64_t C, std::int64_t D) {
    if (w <= 2.0) return std::numeric_limits<double>::infinity();
    const double y = z.imag(), ax = std::abs(z.real()), Cd = double(C), Dd = double(D);
    const double rows = line_integral_constant(w) * std::pow(y, 1.0 - w) * std::pow(Cd, 2.0 - w) / (w - 2.0) +
                        std::pow(y, -w) * std::pow(Cd, 1.0 - w) / (w - 1.0);
    const double cols = 2.0 * Cd * std::pow(Dd - Cd * ax, 1.0 - w) / (w - 1.0);
    return rows + cols;
}

/// Raw result of a coset sum over the rectangle, identity excluded.
struct CosetSum {
    std::vector<cplx> value;
    double amplitude = 0.0;  // max ||term|| |cz+d|^{w_eff}
    double abs_sum = 0.0;    // sum ||term||
};

namespace detail {

inline std::vector<std::int64_t> row_d_values(std::int64_t c, std::int64_t D) {
    std::vector<std::int64_t> ds;
    if (c == 1) ds.push_back(0);
    for (std::int64_t ad = 1; ad <= D; ++ad)
        for (std::int64_t d : {ad, -ad})
            if (std::gcd(c, d) == 1) ds.push_back(d);
    return ds;
}

}  // namespace detail

/// Sum of term(c, d) over 0 < c <= C, |d| <= D, gcd(c, d) = 1, in the order
/// ascending c, ascending |d|, +d before -d. Each c-row is accumulated with
/// compensated summation, rows are reduced in ascending c; rows may be
/// distributed over threads without changing a single bit of the result.
/// term writes `len` coefficients into its output span.
template <class Term>
CosetSum coset_sum(const TruncationParams& t, cplx z, std::size_t len, double w_eff, const Term& term) {
    t.validate(z);
    const std::int64_t C = t.C;
    std::vector<std::vector<cplx>> rows(C + 1);
    std::vector<double> amp(C + 1, 0.0), abss(C + 1, 0.0);
    auto do_row = [&](std::int64_t c) {
        VectorSum acc(len);
        std::vector<cplx> buf(len);
        NeumaierSum asum;
        double a = 0.0;
        for (std::int64_t d : detail::row_d_values(c, t.D)) {
            std::fill(buf.begin(), buf.end(), cplx{0.0, 0.0});
            term(c, d, buf);
            double nrm = 0.0;
            for (const auto& v : buf) nrm = std::max(nrm, std::abs(v));
            acc.add(buf);
            asum.add(nrm);
            a = std::max(a, nrm * std::pow(std::abs(double(c) * z + double(d)), w_eff));
        }
        rows[c] = acc.value();
        amp[c] = a;
        abss[c] = asum.value();
    };
    const unsigned nthreads = std::max(1u, std::min<unsigned>(t.threads, static_cast<unsigned>(C)));
    if (nthreads == 1) {
        for (std::int64_t c = 1; c <= C; ++c) do_row(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nthreads; ++w)
            pool.emplace_back([&, w]() {
                for (std::int64_t c = 1 + w; c <= C; c += nthreads) do_row(c);
            });
        for (auto& th : pool) th.join();
    }
    CosetSum out;
    VectorSum total(len);
    NeumaierSum asum;
    for (std::int64_t c = 1; c <= C; ++c) {
        total.add(rows[c]);
        asum.add(abss[c]);
        out.amplitude = std::max(out.amplitude, amp[c]);
    }
    out.value = total.value();
    out.abs_sum = asum.value();
    return out;
}

inline double roundoff_floor(double abs_sum) { return 16.0 * std::numeric_limits<double>::epsilon() * abs_sum; }

/// E_{r,s}(z) = sum_{B\Gamma} j(g,z)^{-r} j(g,zbar)^{-s}, identity included.
inline SeriesValue<cplx> eisenstein_rs(BiWeight w, cplx z, const TruncationParams& t = {}) {
    if (w.total() <= 2) throw convergence_error("eisenstein_rs: needs r + s > 2");
    const auto sum = coset_sum(t, z, 1, double(w.total()), [&](std::int64_t c, std::int64_t d, std::vector<cplx>& out) {
        const cplx j(double(c) * z.real() + double(d), double(c) * z.imag());
        out[0] = ipow(j, -w.r) * ipow(std::conj(j), -w.s);
    });
    SeriesValue<cplx> v;
    v.value = 1.0 + sum.value[0];
    v.weights = w;
    v.trunc = t;
    v.tail_estimate = coset_tail(w.total(), z, t.C, t.D) + roundoff_floor(sum.abs_sum + 1.0);
    return v;
}

/// Cusp form together with its plus period cocycle and the reduced coset
/// periods up to a cutoff; immutable and shareable across threads.
class SeriesContext {
public:
    SeriesContext(QExpansion h, std::int64_t C)
        : h_(std::make_shared<QExpansion>(std::move(h))),
          r_(std::make_shared<PeriodCocycle>(*h_, Sign::Plus)),
          table_(std::make_shared<CosetPeriodTable>(*r_, C)) {}

    const QExpansion& form() const { return *h_; }
    int weight() const { return h_->weight(); }
    const PeriodCocycle& cocycle() const { return *r_; }
    const CosetPeriodTable& periods() const { return *table_; }
    std::int64_t C() const { return table_->C(); }

    /// r^{sign}(g; X) for the coset (c, d).
    PolyC period(std::int64_t c, std::int64_t d, Sign sign) const {
        PolyC p = table_->at(c, d);
        return sign == Sign::Plus ? p : p.conj();
    }
    PolyC period(const GroupElement& g, Sign sign) const {
        PolyC p = (*r_)(g);
        return sign == Sign::Plus ? p : p.conj();
    }

private:
    std::shared_ptr<const QExpansion> h_;
    std::shared_ptr<const PeriodCocycle> r_;
    std::shared_ptr<const CosetPeriodTable> table_;
};

namespace detail {

inline void require_context(const SeriesContext& ctx, const TruncationParams& t) {
    if (ctx.C() < t.C) throw std::invalid_argument("SeriesContext: period table shorter than the coset cutoff");
}

inline PolyC to_poly(std::vector<cplx> v) { return PolyC(std::move(v)); }

}  // namespace detail

/// psi(z, X) = sum_{B\Gamma} r(g; X) j(g,z)^{-r} j(g,zbar)^{-s}; the identity contributes 0.
inline SeriesValue<PolyC> psi_series(const SeriesContext& ctx, BiWeight w, Sign sign, cplx z,
                                     const TruncationParams& t = {}) {
    const int k = ctx.weight();
    if (w.total() <= k) throw convergence_error("psi_series: needs r + s > k");
    detail::require_context(ctx, t);
    const double w_eff = double(w.total() - k + 2);
    const auto sum = coset_sum(t, z, std::size_t(k - 1), w_eff, [&](std::int64_t c, std::int64_t d, std::vector<cplx>& out) {
        const cplx j(double(c) * z.real() + double(d), double(c) * z.imag());
        const cplx a = ipow(j, -w.r) * ipow(std::conj(j), -w.s);
        const PolyC p = ctx.period(c, d, sign);
        for (int i = 0; i <= k - 2; ++i) out[i] = p[i] * a;
    });
    SeriesValue<PolyC> v;
    v.value = detail::to_poly(sum.value);
    v.weights = w;
    v.sign = sign;
    v.trunc = t;
    v.tail_estimate = sum.amplitude * coset_tail(w_eff, z, t.C, t.D) + roundoff_floor(sum.abs_sum);
    return v;
}

inline SeriesValue<PolyC> psi_series(const QExpansion& h, BiWeight w, Sign sign, cplx z, const TruncationParams& t = {}) {
    return psi_series(SeriesContext(h, t.C), w, sign, z, t);
}

/// phi = psi + F^{sign}(z, X) E_{r,s}(z).
inline SeriesValue<PolyC> phi(const SeriesContext& ctx, BiWeight w, Sign sign, cplx z, const TruncationParams& t = {}) {
    auto v = psi_series(ctx, w, sign, z, t);
    const auto E = eisenstein_rs(w, z, t);
    const PolyC F = eichler_F(ctx.form(), z, sign);
    v.value += F * E.value;
    v.tail_estimate += F.max_abs() * E.tail_estimate;
    return v;
}

inline SeriesValue<PolyC> phi(const QExpansion& h, BiWeight w, Sign sign, cplx z, const TruncationParams& t = {}) {
    return phi(SeriesContext(h, t.C), w, sign, z, t);
}

/// phi as the literal sum of F |_{r,s,2-k} g over the rectangle, identity included.
/// Every image g z must stay above the q-series floor, so only small rectangles
/// are admissible.
inline PolyC phi_direct_sum(const QExpansion& h, BiWeight w, Sign sign, cplx z, const TruncationParams& t) {
    const int k = h.weight();
    const auto F = [&](cplx u) { return eichler_F(h, u, sign); };
    const auto sum = coset_sum(t, z, std::size_t(k - 1), 0.0, [&](std::int64_t c, std::int64_t d, std::vector<cplx>& out) {
        const PolyC p = act_tensor_at(F, complete_bottom_row(c, d), w, k, z);
        for (int i = 0; i <= k - 2; ++i) out[i] = p[i];
    });
    return F(z) + detail::to_poly(sum.value);
}

/// Coefficients c_i with P(X) = sum_i c_i (X - z)^i (X - zbar)^{k-2-i}.
inline std::vector<cplx> coeff_decompose(const PolyC& P, cplx z, int k) {
    require_upper_half_plane(z, "coeff_decompose");
    const int n = k - 2;
    if (n < 0) throw std::invalid_argument("coeff_decompose: k must be >= 2");
    for (std::size_t i = n + 1; i < P.size(); ++i)
        if (P[i] != cplx{0.0, 0.0}) throw std::invalid_argument("coeff_decompose: degree exceeds k-2");
    Eigen::MatrixXcd M(n + 1, n + 1);
    for (int i = 0; i <= n; ++i) {
        const PolyC b = linear_power(z, i, i) * linear_power(std::conj(z), n - i, n - i);
        for (int m = 0; m <= n; ++m) M(m, i) = b[m];
    }
    Eigen::VectorXcd rhs(n + 1);
    for (int m = 0; m <= n; ++m) rhs(m) = m < int(P.size()) ? P[m] : cplx{0.0, 0.0};
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const Eigen::VectorXcd x = lu.solve(rhs);
    if (!x.allFinite()) throw consistency_error("coeff_decompose: singular change of basis");
    return std::vector<cplx>(x.data(), x.data() + n + 1);
}

/// sum_i c_i (X - z)^i (X - zbar)^{k-2-i}.
inline PolyC coeff_assemble(const std::vector<cplx>& c, cplx z, int k) {
    const int n = k - 2;
    PolyC out(n);
    for (int i = 0; i <= n; ++i) out += linear_power(z, i, i) * linear_power(std::conj(z), n - i, n - i) * c[i];
    return out;
}

/// Operator norm (max row sum) of the decomposition map at z; converts
/// monomial-coefficient errors into basis-coefficient errors.
inline double decompose_gain(cplx z, int k) {
    const int n = k - 2;
    double worst = 0.0;
    for (int m = 0; m <= n; ++m) {
        PolyC e(n);
        e[m] = 1.0;
        const auto c = coeff_decompose(e, z, k);
        for (int i = 0; i <= n; ++i) worst = std::max(worst, std::abs(c[i]));
    }
    return worst * (n + 1);
}

inline SeriesValue<cplx> phi_coefficient(const SeriesContext& ctx, BiWeight w, Sign sign, int j, cplx z,
                                         const TruncationParams& t = {}) {
    const int k = ctx.weight();
    if (j < 0 || j > k - 2) throw std::out_of_range("phi_coefficient: j out of range");
    const auto p = phi(ctx, w, sign, z, t);
    SeriesValue<cplx> v;
    v.value = coeff_decompose(p.value, z, k)[j];
    v.weights = BiWeight::make(w.r + j, w.s + k - 2 - j);
    v.sign = sign;
    v.trunc = t;
    v.tail_estimate = p.tail_estimate * decompose_gain(z, k);
    return v;
}

/// All coefficients of phi in the (X - z)^i (X - zbar)^{k-2-i} basis.
inline SeriesValue<std::vector<cplx>> phi_coefficients(const SeriesContext& ctx, BiWeight w, Sign sign, cplx z,
                                                       const TruncationParams& t = {}) {
    const auto p = phi(ctx, w, sign, z, t);
    SeriesValue<std::vector<cplx>> v;
    v.value = coeff_decompose(p.value, z, ctx.weight());
    v.weights = w;
    v.sign = sign;
    v.trunc = t;
    v.tail_estimate = p.tail_estimate * decompose_gain(z, ctx.weight());
    return v;
}

/// (2iy)^{k-2} times the j-th basis coefficient of psi: the coset series
/// sum_{g != 1} sum alpha Lambda c^{m+n+2-k} j^{-p} jbar^{-t} without the y^{2-k}
/// prefactor. Periodic in x; its Fourier modes carry polynomial factors in y^{+-1}.
inline SeriesValue<cplx> psi_series_coefficient(const SeriesContext& ctx, BiWeight w, Sign sign, int j, cplx z,
                                                const TruncationParams& t = {}) {
    const int k = ctx.weight();
    if (j < 0 || j > k - 2) throw std::out_of_range("psi_series_coefficient: j out of range");
    const auto p = psi_series(ctx, w, sign, z, t);
    const cplx norm = ipow(cplx(0.0, 2.0 * z.imag()), k - 2);
    SeriesValue<cplx> v;
    v.value = coeff_decompose(p.value, z, k)[j] * norm;
    v.weights = BiWeight::make(w.r + j - k + 2, w.s - j);
    v.sign = sign;
    v.trunc = t;
    v.tail_estimate = p.tail_estimate * decompose_gain(z, k) * std::abs(norm);
    return v;
}

/// Closed formula for the j-th basis coefficient of phi^+:
///   (-1)^j binom(k-2,j) (2iy)^{2-k} (int_{i inf}^z f(w)(w-zbar)^j (w-z)^{k-2-j} dw) E_{r,s}(z)
///   + (2iy)^{2-k} sum_{g != 1} sum_{m<=j, n<=k-2-j} alpha_{m,n} Lambda(m+n+1, g^{-1} inf)
///       c^{m+n+2-k} j(g,z)^{-(r+j+n+2-k)} j(g,zbar)^{-(s+m-j)},
///   alpha_{m,n} = i^{1-2j-m-n} binom(k-2,j) binom(j,m) binom(k-2-j,n).
/// The minus coefficient is conj of the plus coefficient with (r,s) swapped and j -> k-2-j.
inline SeriesValue<cplx> closed_form_phi_j(const SeriesContext& ctx, const LambdaTable& L, BiWeight w, Sign sign, int j,
                                           cplx z, const TruncationParams& t = {}) {
    const int k = ctx.weight();
    const int n2 = k - 2;
    if (j < 0 || j > n2) throw std::out_of_range("closed_form_phi_j: j out of range");
    if (w.total() <= k) throw convergence_error("closed_form_phi_j: needs r + s > k");
    if (L.C() < t.C) throw std::invalid_argument("closed_form_phi_j: Lambda table shorter than the coset cutoff");
    if (sign == Sign::Minus) {
        auto v = closed_form_phi_j(ctx, L, BiWeight::make(w.s, w.r), Sign::Plus, n2 - j, z, t);
        v.value = std::conj(v.value);
        v.weights = BiWeight::make(w.r + j, w.s + n2 - j);
        v.sign = Sign::Minus;
        return v;
    }
    const double y = z.imag();
    const cplx two_iy(0.0, 2.0 * y);
    const cplx norm = ipow(two_iy, 2 - k);

    // boundary term
    const auto G = centred_primitives(ctx.form(), z, n2).G;
    cplx integral = 0.0;
    for (int tt = 0; tt <= j; ++tt) integral += binom(j, tt) * ipow(two_iy, j - tt) * G[tt + n2 - j];
    const auto E = eisenstein_rs(w, z, t);
    const cplx boundary = ((j % 2) ? -1.0 : 1.0) * binom(n2, j) * norm * integral * E.value;

    // coset term
    std::vector<std::vector<cplx>> alpha(j + 1, std::vector<cplx>(n2 - j + 1));
    for (int m = 0; m <= j; ++m)
        for (int n = 0; n <= n2 - j; ++n)
            alpha[m][n] = ipow_i(1 - 2 * j - m - n) * binom(n2, j) * binom(j, m) * binom(n2 - j, n);
    const double w_eff = double(w.total() - k + 2);
    const auto sum = coset_sum(t, z, 1, w_eff, [&](std::int64_t c, std::int64_t d, std::vector<cplx>& out) {
        const cplx jj(double(c) * z.real() + double(d), double(c) * z.imag());
        const cplx jb = std::conj(jj);
        cplx acc = 0.0;
        for (int m = 0; m <= j; ++m)
            for (int n = 0; n <= n2 - j; ++n)
                acc += alpha[m][n] * L(m + n + 1, c, d) * std::pow(double(c), double(m + n + 2 - k)) *
                       ipow(jj, -(w.r + j + n + 2 - k)) * ipow(jb, -(w.s + m - j));
        out[0] = norm * acc;
    });
    SeriesValue<cplx> v;
    v.value = boundary + sum.value[0];
    v.weights = BiWeight::make(w.r + j, w.s + n2 - j);
    v.sign = sign;
    v.trunc = t;
    v.tail_estimate = sum.amplitude * coset_tail(w_eff, z, t.C, t.D) + roundoff_floor(sum.abs_sum) +
                      std::abs(boundary / E.value) * E.tail_estimate;
    return v;
}

/// Trapezoidal int_0^1 fn(x + iy) e^{-2 pi i l x} dx with M nodes; rejects
/// integrands whose values at x = 0 and x = 1 disagree by more than tol.
template <class Fn>
cplx fourier_coefficient(const Fn& fn, int l, double y, int M, double tol = 1e-8) {
    if (M < 64) throw std::invalid_argument("fourier_coefficient: M must be >= 64");
    if (!(y > 0.0)) throw std::domain_error("fourier_coefficient: y must be positive");
    const cplx f0 = fn(cplx(0.0, y)), f1 = fn(cplx(1.0, y));
    if (std::abs(f1 - f0) > tol * std::max(std::abs(f0), 1e-300))
        throw std::invalid_argument("fourier_coefficient: integrand is not 1-periodic");
    ComplexSum acc;
    acc.add(f0);
    for (int m = 1; m < M; ++m) {
        const double x = double(m) / M;
        const double ang = -2.0 * pi * l * x;
        acc.add(fn(cplx(x, y)) * cplx(std::cos(ang), std::sin(ang)));
    }
    return acc.value() / double(M);
}

/// sum over d mod c, gcd(d, c) = 1, of Lambda(m, -d/c) e^{2 pi i l d / c}.
inline cplx kloosterman_twisted(const LambdaTable& L, std::int64_t c, std::int64_t l, int m) {
    if (c < 1) throw std::invalid_argument("kloosterman_twisted: c must be >= 1");
    ComplexSum acc;
    for (std::int64_t d = 0; d < c; ++d) {
        if (std::gcd(d, c) != 1) continue;
        if (!L.has(c, d)) throw std::out_of_range("kloosterman_twisted: incomplete Lambda table");
        const double ang = 2.0 * pi * double(detail::mod_pos(l * d, c)) / double(c);
        acc.add(L(m, c, d) * cplx(std::cos(ang), std::sin(ang)));
    }
    return acc.value();
}

/// P_n(z) = sum_{B\Gamma} e^{2 pi i n g z} j(g,z)^{-k}; n = 0 gives the weight-k Eisenstein series.
inline SeriesValue<cplx> poincare(int n, int k, cplx z, const TruncationParams& t = {}) {
    if (k < 4) throw std::invalid_argument("poincare: k must be >= 4");
    if (n < 0) throw std::invalid_argument("poincare: n must be >= 0");
    const cplx tpin(0.0, 2.0 * pi * n);
    const auto sum = coset_sum(t, z, 1, double(k), [&](std::int64_t c, std::int64_t d, std::vector<cplx>& out) {
        const GroupElement g = complete_bottom_row(c, d);
        const cplx jj(double(c) * z.real() + double(d), double(c) * z.imag());
        out[0] = std::exp(tpin * mobius(g, z)) * ipow(jj, -k);
    });
    SeriesValue<cplx> v;
    const cplx id = std::exp(tpin * z);
    v.value = id + sum.value[0];
    v.weights = BiWeight::make(k, 0);
    v.trunc = t;
    v.tail_estimate = coset_tail(k, z, t.C, t.D) + roundoff_floor(sum.abs_sum + std::abs(id));
    return v;
}

/// G_{n,h}(z, X) = sum_{B\Gamma} r^{sign}_h(g; X) e^{2 pi i n g z} j(g,z)^{-k}, for k > weight(h).
inline SeriesValue<PolyC> second_order_G(const SeriesContext& ctx, int n, int k, cplx z, Sign sign,
                                         const TruncationParams& t = {}) {
    const int k1 = ctx.weight();
    if (k <= k1) throw std::invalid_argument("second_order_G: needs k > weight of h");
    if (n < 0) throw std::invalid_argument("second_order_G: n must be >= 0");
    detail::require_context(ctx, t);
    const cplx tpin(0.0, 2.0 * pi * n);
    const double w_eff = double(k - k1 + 2);
    const auto sum = coset_sum(t, z, std::size_t(k1 - 1), w_eff, [&](std::int64_t c, std::int64_t d, std::vector<cplx>& out) {
        const GroupElement g = complete_bottom_row(c, d);
        const cplx jj(double(c) * z.real() + double(d), double(c) * z.imag());
        const cplx a = (n == 0 ? cplx(1.0, 0.0) : std::exp(tpin * mobius(g, z))) * ipow(jj, -k);
        const PolyC p = ctx.period(c, d, sign);
        for (int i = 0; i <= k1 - 2; ++i) out[i] = p[i] * a;
    });
    SeriesValue<PolyC> v;
    v.value = detail::to_poly(sum.value);
    v.weights = BiWeight::make(k, 0);
    v.sign = sign;
    v.trunc = t;
    v.tail_estimate = sum.amplitude * coset_tail(w_eff, z, t.C, t.D) + roundoff_floor(sum.abs_sum);
    return v;
}

}  // namespace cuspmi
