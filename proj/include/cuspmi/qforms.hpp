#pragma once

// Exact q-expansions of level-one holomorphic modular forms and their numerical
// evaluation. Coefficients are stored as big-integer numerators over one common
// positive denominator, so products stay in integer arithmetic.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cuspmi/core/errors.hpp"
#include "cuspmi/core/poly.hpp"

namespace cuspmi {

using bigint = boost::multiprecision::cpp_int;
using rational = boost::multiprecision::cpp_rational;

class QExpansion {
public:
    QExpansion() = default;

    QExpansion(int weight, std::vector<bigint> numerators, bigint denominator = 1)
        : weight_(weight), num_(std::move(numerators)), den_(std::move(denominator)) {
        if (num_.empty()) throw std::invalid_argument("QExpansion: need at least a(0)");
        if (den_ == 0) throw std::invalid_argument("QExpansion: zero denominator");
        if (den_ < 0) {
            den_ = -den_;
            for (auto& v : num_) v = -v;
        }
        normalize();
        cache_doubles();
    }

    int weight() const { return weight_; }
    /// Highest stored index N (coefficients a(0..N)).
    std::size_t N() const { return num_.size() - 1; }
    bool is_cusp() const { return num_[0] == 0; }

    rational coeff(std::size_t n) const { return rational(num_.at(n), den_); }
    const std::vector<bigint>& numerators() const { return num_; }
    const bigint& denominator() const { return den_; }
    bool is_integral() const { return den_ == 1; }

    /// a(n) as doubles, a(0..N).
    const std::vector<double>& coeffs_double() const { return dbl_; }

    QExpansion truncated(std::size_t n) const {
        std::vector<bigint> v(num_.begin(), num_.begin() + std::min(n, N()) + 1);
        return QExpansion(weight_, std::move(v), den_);
    }

    friend QExpansion operator*(const QExpansion& f, const QExpansion& g) {
        const std::size_t n = std::min(f.N(), g.N());
        std::vector<bigint> out(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            if (f.num_[i] == 0) continue;
            for (std::size_t j = 0; i + j <= n; ++j) out[i + j] += f.num_[i] * g.num_[j];
        }
        return QExpansion(f.weight_ + g.weight_, std::move(out), f.den_ * g.den_);
    }

    /// Linear combination with an integer factor; weights must agree.
    friend QExpansion operator+(const QExpansion& f, const QExpansion& g) {
        if (f.weight_ != g.weight_) throw std::invalid_argument("QExpansion: weight mismatch in sum");
        const std::size_t n = std::min(f.N(), g.N());
        std::vector<bigint> out(n + 1);
        for (std::size_t i = 0; i <= n; ++i) out[i] = f.num_[i] * g.den_ + g.num_[i] * f.den_;
        return QExpansion(f.weight_, std::move(out), f.den_ * g.den_);
    }
    friend QExpansion operator*(const bigint& s, const QExpansion& f) {
        std::vector<bigint> out(f.num_);
        for (auto& v : out) v *= s;
        return QExpansion(f.weight_, std::move(out), f.den_);
    }
    friend QExpansion operator-(const QExpansion& f, const QExpansion& g) { return f + bigint(-1) * g; }

    friend bool operator==(const QExpansion& f, const QExpansion& g) {
        return f.weight_ == g.weight_ && f.num_ == g.num_ && f.den_ == g.den_;
    }

private:
    void normalize() {
        bigint g = den_;
        for (const auto& v : num_) {
            if (g == 1) break;
            if (v != 0) g = boost::multiprecision::gcd(g, v);
        }
        if (g > 1) {
            den_ /= g;
            for (auto& v : num_) v /= g;
        }
    }
    void cache_doubles() {
        dbl_.resize(num_.size());
        const double inv = 1.0 / den_.convert_to<double>();
        for (std::size_t i = 0; i < num_.size(); ++i)
            dbl_[i] = den_ == 1 ? num_[i].convert_to<double>() : rational(num_[i], den_).convert_to<double>();
        (void)inv;
    }

    int weight_ = 0;
    std::vector<bigint> num_{bigint(0)};
    bigint den_{1};
    std::vector<double> dbl_{0.0};
};

/// Bernoulli numbers B_0..B_n (B_1 = -1/2), exact.
inline std::vector<rational> bernoulli_numbers(int n) {
    std::vector<rational> b(n + 1);
    b[0] = 1;
    for (int m = 1; m <= n; ++m) {
        rational acc = 0;
        bigint c = 1;  // binom(m+1, j)
        for (int j = 0; j < m; ++j) {
            acc += rational(c) * b[j];
            c = c * (m + 1 - j) / (j + 1);
        }
        b[m] = -acc / rational(m + 1);
    }
    return b;
}

/// sigma_p(n) for n = 0..N (sigma_p(0) = 0), by a divisor sieve.
inline std::vector<bigint> divisor_power_sums(int p, std::size_t N) {
    std::vector<bigint> s(N + 1, 0);
    for (std::size_t d = 1; d <= N; ++d) {
        const bigint dp = boost::multiprecision::pow(bigint(d), p);
        for (std::size_t m = d; m <= N; m += d) s[m] += dp;
    }
    return s;
}

/// Normalized Eisenstein series E_k = 1 - (2k/B_k) sum sigma_{k-1}(n) q^n.
inline QExpansion eisenstein_q(int k, std::size_t N) {
    if (k < 4 || k % 2 != 0) throw std::invalid_argument("eisenstein_q: k must be even and >= 4");
    const rational factor = -rational(2 * k) / bernoulli_numbers(k)[k];
    const bigint den = boost::multiprecision::denominator(factor);
    const bigint num = boost::multiprecision::numerator(factor);
    const auto sig = divisor_power_sums(k - 1, N);
    std::vector<bigint> c(N + 1);
    c[0] = den;
    for (std::size_t n = 1; n <= N; ++n) c[n] = num * sig[n];
    return QExpansion(k, std::move(c), den);
}

/// Delta = q prod (1 - q^n)^24, computed as q * (eta^3 / q^{1/8})^8 where the
/// cube has the sparse Jacobi expansion sum (-1)^m (2m+1) q^{m(m+1)/2}; the
/// eighth power follows from the recurrence n g_n = sum_t (8t - (n-t)) h_t g_{n-t}.
inline QExpansion delta_q(std::size_t N) {
    if (N < 1) throw std::invalid_argument("delta_q: N must be >= 1");
    std::vector<std::pair<std::size_t, bigint>> h;  // sparse eta^3, h_0 = 1 excluded
    for (std::size_t m = 1; m * (m + 1) / 2 <= N; ++m)
        h.emplace_back(m * (m + 1) / 2, bigint((m % 2 ? -1 : 1) * static_cast<long>(2 * m + 1)));
    std::vector<bigint> g(N, 0);  // g_n = a(n+1)
    g[0] = 1;
    for (std::size_t n = 1; n < N; ++n) {
        bigint acc = 0;
        for (const auto& [t, ht] : h) {
            if (t > n) break;
            acc += bigint(8 * static_cast<long>(t) - static_cast<long>(n - t)) * ht * g[n - t];
        }
        g[n] = acc / n;
    }
    std::vector<bigint> c(N + 1, 0);
    for (std::size_t n = 1; n <= N; ++n) c[n] = g[n - 1];
    return QExpansion(12, std::move(c), 1);
}

/// dim M_k for level one (k even >= 0).
inline int dim_modular_forms(int k) {
    if (k < 0 || k % 2 != 0) return 0;
    if (k == 2) return 0;
    return k / 12 + (k % 12 == 2 ? 0 : 1);
}

/// dim S_k for level one.
inline int dim_cusp_forms(int k) {
    if (k < 12 || k % 2 != 0) return 0;
    return dim_modular_forms(k) - 1;
}

namespace detail {

// Rank of the rows restricted to the first `cols` coefficients, over Q.
inline std::size_t rational_rank(std::vector<std::vector<rational>> rows, std::size_t cols) {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows.size(); ++col) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][col] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank]);
        for (std::size_t r = rank + 1; r < rows.size(); ++r) {
            if (rows[r][col] == 0) continue;
            const rational f = rows[r][col] / rows[rank][col];
            for (std::size_t c = col; c < cols; ++c) rows[r][c] -= f * rows[rank][c];
        }
        ++rank;
    }
    return rank;
}

}  // namespace detail

/// Basis of S_k from {Delta E_4^a E_6^b : 4a + 6b = k - 12}, keeping a linearly
/// independent subset of size dim S_k.
inline std::vector<QExpansion> cusp_basis(int k, std::size_t N) {
    std::vector<QExpansion> out;
    const int dim = dim_cusp_forms(k);
    if (dim == 0) return out;
    const QExpansion delta = delta_q(N);
    const QExpansion e4 = eisenstein_q(4, N), e6 = eisenstein_q(6, N);
    std::vector<std::vector<rational>> rows;
    const std::size_t cols = std::min<std::size_t>(N + 1, static_cast<std::size_t>(dim) + 2);
    for (int b = 0; 6 * b <= k - 12 && static_cast<int>(out.size()) < dim; ++b) {
        const int rest = k - 12 - 6 * b;
        if (rest % 4 != 0) continue;
        QExpansion f = delta;
        for (int i = 0; i < rest / 4; ++i) f = f * e4;
        for (int i = 0; i < b; ++i) f = f * e6;
        std::vector<rational> row(cols);
        for (std::size_t c = 0; c < cols; ++c) row[c] = f.coeff(c);
        rows.push_back(row);
        if (detail::rational_rank(rows, cols) == rows.size())
            out.push_back(std::move(f));
        else
            rows.pop_back();
    }
    if (static_cast<int>(out.size()) != dim) throw consistency_error("cusp_basis: could not reach dim S_k");
    return out;
}

/// Value of a truncated q-series together with an estimate of the neglected tail.
struct FormValue {
    cplx value;
    double tail = 0.0;
};

/// Envelope |a(n)| <= A n^e used for tail estimates: e = k/2 for cusp forms
/// (d(n) n^{(k-1)/2} <= 2 n^{k/2}), e = k - 1 otherwise; A fitted on the stored range.
inline std::pair<double, double> coefficient_envelope(const QExpansion& f) {
    const double e = f.is_cusp() ? 0.5 * f.weight() : f.weight() - 1.0;
    double A = 0.0;
    const auto& a = f.coeffs_double();
    for (std::size_t n = 1; n < a.size(); ++n) A = std::max(A, std::abs(a[n]) / std::pow(double(n), e));
    return {A, e};
}

/// Sum_{n > N} A n^e x^n for 0 < x < 1, summed until negligible.
inline double envelope_tail(double A, double e, std::size_t N, double x) {
    if (A == 0.0) return 0.0;
    double total = 0.0;
    for (std::size_t n = N + 1;; ++n) {
        const double term = A * std::exp(e * std::log(double(n)) + n * std::log(x));
        total += term;
        if (term < 1e-30 * std::max(total, 1e-300) || n > N + 100000) break;
    }
    return total;
}

inline constexpr double default_y_min = 0.05;

/// sum_{n<=N} a(n) e^{2 pi i n z}. Throws precision_error when the tail estimate
/// exceeds rel_tol * max(|value|, tail) or when Im z < y_min.
inline FormValue eval_form(const QExpansion& f, cplx z, double rel_tol = 1e-10, double y_min = default_y_min) {
    if (z.imag() < y_min)
        throw precision_error("eval_form: Im z = " + std::to_string(z.imag()) + " below y_min");
    const cplx q = std::exp(cplx(0.0, 2.0 * pi) * z);
    const auto& a = f.coeffs_double();
    cplx acc{0.0, 0.0};
    for (std::size_t n = a.size(); n-- > 0;) acc = acc * q + a[n];
    const auto [A, e] = coefficient_envelope(f);
    const double tail = envelope_tail(A, e, f.N(), std::abs(q));
    if (tail > rel_tol * std::max(std::abs(acc), 1e-300))
        throw precision_error("eval_form: tail estimate " + std::to_string(tail) + " exceeds tolerance");
    return {acc, tail};
}

/// d/dz of the q-series, term-wise: sum 2 pi i n a(n) q^n.
inline cplx eval_form_derivative(const QExpansion& f, cplx z) {
    const cplx q = std::exp(cplx(0.0, 2.0 * pi) * z);
    const auto& a = f.coeffs_double();
    cplx acc{0.0, 0.0};
    for (std::size_t n = a.size(); n-- > 1;) acc = acc * q + cplx(0.0, 2.0 * pi * n) * a[n];
    return acc * q;
}

/// Named forms used by the CLI and the check suites: "delta", "e4", "e6",
/// "eisenstein:k", "cusp:k:i" (i-th element of cusp_basis(k)).
inline QExpansion form_by_name(const std::string& name, std::size_t N) {
    if (name == "delta") return delta_q(N);
    if (name == "e4") return eisenstein_q(4, N);
    if (name == "e6") return eisenstein_q(6, N);
    auto parts = [&]() {
        std::vector<std::string> v;
        std::size_t start = 0, pos;
        while ((pos = name.find(':', start)) != std::string::npos) {
            v.push_back(name.substr(start, pos - start));
            start = pos + 1;
        }
        v.push_back(name.substr(start));
        return v;
    }();
    try {
        if (parts.size() == 2 && parts[0] == "eisenstein") return eisenstein_q(std::stoi(parts[1]), N);
        if (parts.size() == 3 && parts[0] == "cusp") {
            const auto basis = cusp_basis(std::stoi(parts[1]), N);
            const auto i = static_cast<std::size_t>(std::stoi(parts[2]));
            if (i >= basis.size()) throw std::invalid_argument("form_by_name: cusp index out of range");
            return basis[i];
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("unknown form name '" + name + "'");
}

}  // namespace cuspmi
