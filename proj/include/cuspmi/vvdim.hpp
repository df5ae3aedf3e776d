#pragma once

// Exact arithmetic around the representation rho of SL2(Z) on polynomials of
// degree <= k1 - 2: matrices, trace identities, the Legendre-symbol sequence,
// and the dimension formulas for M_k(rho) and the order-2 space.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cuspmi/core/errors.hpp"
#include "cuspmi/qforms.hpp"

namespace cuspmi {

using IntMatrix = std::vector<std::vector<bigint>>;

inline IntMatrix int_identity(std::size_t n) {
    IntMatrix m(n, std::vector<bigint>(n, 0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

inline IntMatrix mat_mul(const IntMatrix& a, const IntMatrix& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    IntMatrix out(n, std::vector<bigint>(m, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < k; ++t) {
            if (a[i][t] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][t] * b[t][j];
        }
    return out;
}

inline bigint mat_trace(const IntMatrix& a) {
    bigint t = 0;
    for (std::size_t i = 0; i < a.size(); ++i) t += a[i][i];
    return t;
}

inline bigint binom_exact(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    bigint r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// (n | 3) via n mod 3 -> {0: 0, 1: 1, 2: -1}.
inline int legendre3(std::int64_t n) {
    const std::int64_t r = ((n % 3) + 3) % 3;
    return r == 0 ? 0 : (r == 1 ? 1 : -1);
}

struct RhoRep {
    int k1 = 0;
    IntMatrix S, T;
};

inline void require_k1(int k1) {
    if (k1 < 4 || k1 % 2 != 0) throw std::invalid_argument("rho: k1 must be even and >= 4");
}

/// rho(S)_{ij} = (-1)^i [j = k1-2-i], rho(T)_{ij} = (-1)^{i+j} binom(j, i), i, j = 0..k1-2.
inline RhoRep rho_matrices(int k1) {
    require_k1(k1);
    const int n = k1 - 1;
    RhoRep r{k1, IntMatrix(n, std::vector<bigint>(n, 0)), IntMatrix(n, std::vector<bigint>(n, 0))};
    for (int i = 0; i < n; ++i) {
        r.S[i][k1 - 2 - i] = (i % 2) ? -1 : 1;
        for (int j = i; j < n; ++j) r.T[i][j] = ((i + j) % 2 ? -1 : 1) * binom_exact(j, i);
    }
    return r;
}

struct TraceST {
    bigint tr;         // Tr(rho(S) rho(T))
    bigint tr_sq;      // Tr((rho(S) rho(T))^2)
    bigint binom_sum;  // sum_i (-1)^i binom(i, k1-2-i)
    int legendre = 0;  // (k1-1 | 3)
    bool consistent() const { return tr == tr_sq && tr == binom_sum && tr == legendre; }
};

inline TraceST trace_ST(int k1) {
    const auto r = rho_matrices(k1);
    const auto st = mat_mul(r.S, r.T);
    TraceST t;
    t.tr = mat_trace(st);
    t.tr_sq = mat_trace(mat_mul(st, st));
    for (int i = 0; i <= k1 - 2; ++i) t.binom_sum += ((i % 2) ? -1 : 1) * binom_exact(i, k1 - 2 - i);
    t.legendre = legendre3(k1 - 1);
    return t;
}

/// a_n = sum_{i+j=n} (-1)^i binom(i, j) by the direct sum, by the recurrence
/// a_n = -a_{n-1} - a_{n-2}, and by (n+1 | 3).
struct LegendreSeq {
    std::vector<bigint> direct, recurrence;
    std::vector<int> formula;
    bool agree() const {
        for (std::size_t n = 0; n < direct.size(); ++n)
            if (direct[n] != recurrence[n] || direct[n] != formula[n]) return false;
        return true;
    }
};

inline LegendreSeq legendre_seq(int nmax) {
    if (nmax < 2) throw std::invalid_argument("legendre_seq: nmax must be >= 2");
    LegendreSeq s;
    for (int n = 0; n <= nmax; ++n) {
        bigint a = 0;
        for (int i = 0; i <= n; ++i) a += ((i % 2) ? -1 : 1) * binom_exact(i, n - i);
        s.direct.push_back(a);
        s.formula.push_back(legendre3(n + 1));
    }
    s.recurrence = {s.direct[0], s.direct[1]};
    for (int n = 2; n <= nmax; ++n) s.recurrence.push_back(-s.recurrence[n - 1] - s.recurrence[n - 2]);
    return s;
}

struct XiRow {
    int k = 0;
    std::complex<double> value;
    int expected = 0;  // -(k-1 | 3)
    double residual = 0.0;
};

/// xi^k / (1 - xi^2) + xi^{2k} / (1 - xi^{-2}) against -(k-1 | 3), xi = e^{pi i / 3}, even k in 4..kmax.
inline std::vector<XiRow> xi_identity(int kmax) {
    std::vector<XiRow> rows;
    for (int k = 4; k <= kmax; k += 2) {
        // xi^e with e reduced mod 6
        const auto p = [&](int e) { return std::polar(1.0, pi / 3.0 * double(((e % 6) + 6) % 6)); };
        XiRow r;
        r.k = k;
        r.value = p(k) / (1.0 - p(2)) + p(2 * k) / (1.0 - p(-2));
        r.expected = -legendre3(k - 1);
        r.residual = std::abs(r.value - double(r.expected));
        rows.push_back(r);
    }
    return rows;
}

inline void require_dim_args(int k, int k1) {
    require_k1(k1);
    if (k % 2 != 0 || k <= k1) throw std::invalid_argument("dimension formula: needs k > k1 > 2, both even");
}

/// (5+k)/12 (k1-1) + i^{k+k1-2}/4 - (1/3)(k1-1 | 3)(k-1 | 3), exactly; must be a non-negative integer.
inline std::int64_t dim_Mk_rho(int k, int k1) {
    require_dim_args(k, k1);
    const int e = (k + k1 - 2) % 4;  // even, so i^e is +-1
    rational v = rational(5 + k, 12) * (k1 - 1);
    v += rational(e == 0 ? 1 : -1, 4);
    v -= rational(legendre3(k1 - 1) * legendre3(k - 1), 3);
    if (boost::multiprecision::denominator(v) != 1)
        throw consistency_error("dim_Mk_rho: non-integral value at (" + std::to_string(k) + ", " + std::to_string(k1) + ")");
    if (v < 0) throw consistency_error("dim_Mk_rho: negative value");
    return boost::multiprecision::numerator(v).convert_to<std::int64_t>();
}

/// 2 dim(M_k) dim(S_k1) + dim M_k(rho).
inline std::int64_t dim_M2c(int k, int k1) {
    require_dim_args(k, k1);
    return 2 * std::int64_t(dim_modular_forms(k)) * dim_cusp_forms(k1) + dim_Mk_rho(k, k1);
}

struct DimRow {
    int k = 0, k1 = 0;
    std::int64_t mk_rho = 0, m2c = 0;
};

/// All even pairs 4 <= k1 < k <= kmax.
inline std::vector<DimRow> dim_table(int kmax) {
    std::vector<DimRow> rows;
    for (int k1 = 4; k1 <= kmax; k1 += 2)
        for (int k = k1 + 2; k <= kmax; k += 2) rows.push_back({k, k1, dim_Mk_rho(k, k1), dim_M2c(k, k1)});
    return rows;
}

}  // namespace cuspmi
