#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace cuspmi {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

/// Binomial coefficient as a double. Exact for n <= 56.
inline double binom(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return std::round(r);
}

/// z^e for any integer e, by repeated squaring. Negative e divides once at the end.
inline cplx ipow(cplx z, int e) {
    if (e < 0) return 1.0 / ipow(z, -e);
    cplx result{1.0, 0.0};
    cplx base = z;
    while (e > 0) {
        if (e & 1) result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

/// i^e computed exactly as one of {1, i, -1, -i}.
inline cplx ipow_i(int e) {
    switch (((e % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

/// Polynomial in one formal variable X with complex coefficients, ascending
/// order, with a fixed degree bound (size = bound + 1).
class PolyC {
public:
    PolyC() = default;
    explicit PolyC(std::size_t degree_bound) : c_(degree_bound + 1) {}
    explicit PolyC(std::vector<cplx> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.resize(1);
    }
    PolyC(std::initializer_list<cplx> coeffs) : c_(coeffs) {
        if (c_.empty()) c_.resize(1);
    }

    std::size_t degree_bound() const { return c_.empty() ? 0 : c_.size() - 1; }
    std::size_t size() const { return c_.size(); }
    cplx& operator[](std::size_t i) { return c_[i]; }
    const cplx& operator[](std::size_t i) const { return c_[i]; }
    const std::vector<cplx>& coeffs() const { return c_; }
    std::vector<cplx>& coeffs() { return c_; }

    cplx operator()(cplx x) const {
        cplx acc{0.0, 0.0};
        for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
        return acc;
    }

    PolyC conj() const {
        PolyC out(*this);
        for (auto& v : out.c_) v = std::conj(v);
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    /// X -> P(X + a).
    PolyC shifted(cplx a) const {
        PolyC out(c_);
        const std::size_t n = c_.size();
        // Horner-style Taylor shift, O(n^2).
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = n - 1; j-- > i;) out.c_[j] += a * out.c_[j + 1];
        return out;
    }

    PolyC& operator+=(const PolyC& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    PolyC& operator-=(const PolyC& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    PolyC& operator*=(cplx s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    PolyC& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }

    friend PolyC operator+(PolyC a, const PolyC& b) { return a += b; }
    friend PolyC operator-(PolyC a, const PolyC& b) { return a -= b; }
    friend PolyC operator-(PolyC a) { return a *= -1.0; }
    friend PolyC operator*(PolyC a, cplx s) { return a *= s; }
    friend PolyC operator*(cplx s, PolyC a) { return a *= s; }
    friend PolyC operator*(PolyC a, double s) { return a *= s; }
    friend PolyC operator*(double s, PolyC a) { return a *= s; }

    /// Full product; the degree bound is the sum of the two bounds.
    friend PolyC operator*(const PolyC& a, const PolyC& b) {
        PolyC out(a.degree_bound() + b.degree_bound());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) out.c_[i + j] += a.c_[i] * b.c_[j];
        return out;
    }

private:
    std::vector<cplx> c_{cplx{0.0, 0.0}};
};

/// (X - a)^m as a PolyC of the given degree bound.
inline PolyC linear_power(cplx a, int m, std::size_t bound) {
    PolyC out(bound);
    for (int t = 0; t <= m; ++t) out[t] = binom(m, t) * ipow(-a, m - t);
    return out;
}

/// max_i |a_i - b_i|.
inline double max_abs_diff(const PolyC& a, const PolyC& b) {
    return (a - b).max_abs();
}

/// ||a - b|| / max(||a||, ||b||), or 0 when both vanish.
inline double rel_diff(const PolyC& a, const PolyC& b) {
    const double scale = std::max(a.max_abs(), b.max_abs());
    const double d = max_abs_diff(a, b);
    return scale > 0.0 ? d / scale : d;
}

inline double rel_diff(cplx a, cplx b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    const double d = std::abs(a - b);
    return scale > 0.0 ? d / scale : d;
}

/// Polynomial in n formal variables X_1..X_n (n = 0, 1 or 2 in practice) with
/// complex coefficients, stored densely in row-major order over the per-variable
/// degree bounds. n = 0 is a scalar.
class MultiPoly {
public:
    MultiPoly() : dims_(), c_(1) {}
    explicit MultiPoly(std::vector<std::size_t> degree_bounds) : dims_(std::move(degree_bounds)) {
        std::size_t n = 1;
        for (auto d : dims_) n *= d + 1;
        c_.assign(n, cplx{0.0, 0.0});
    }
    static MultiPoly scalar(cplx v) {
        MultiPoly m;
        m.c_[0] = v;
        return m;
    }
    static MultiPoly from_poly(const PolyC& p) {
        MultiPoly m({p.degree_bound()});
        for (std::size_t i = 0; i < p.size(); ++i) m.c_[i] = p[i];
        return m;
    }

    std::size_t variables() const { return dims_.size(); }
    const std::vector<std::size_t>& degree_bounds() const { return dims_; }
    std::size_t size() const { return c_.size(); }
    cplx& flat(std::size_t i) { return c_[i]; }
    const cplx& flat(std::size_t i) const { return c_[i]; }

    cplx& at(std::size_t i) { return c_[i]; }
    cplx& at(std::size_t i, std::size_t j) { return c_[i * (dims_[1] + 1) + j]; }
    const cplx& at(std::size_t i, std::size_t j) const { return c_[i * (dims_[1] + 1) + j]; }

    PolyC as_poly() const {
        if (dims_.size() != 1) throw std::logic_error("MultiPoly::as_poly: not univariate");
        return PolyC(c_);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Apply a linear map (rows = output coefficient, cols = input coefficient)
    /// along one variable axis.
    template <class Matrix>
    MultiPoly apply_along(std::size_t axis, const Matrix& m) const {
        MultiPoly out(dims_);
        const std::size_t len = dims_[axis] + 1;
        std::size_t inner = 1;
        for (std::size_t a = axis + 1; a < dims_.size(); ++a) inner *= dims_[a] + 1;
        const std::size_t outer = c_.size() / (len * inner);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t in = 0; in < inner; ++in)
                for (std::size_t r = 0; r < len; ++r) {
                    cplx acc{0.0, 0.0};
                    for (std::size_t s = 0; s < len; ++s)
                        acc += m[r][s] * c_[(o * len + s) * inner + in];
                    out.c_[(o * len + r) * inner + in] = acc;
                }
        return out;
    }

    MultiPoly& operator+=(const MultiPoly& o) {
        check_shape(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        check_shape(o);
        for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    MultiPoly& operator*=(cplx s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    MultiPoly& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
    friend MultiPoly operator*(MultiPoly a, cplx s) { return a *= s; }
    friend MultiPoly operator*(cplx s, MultiPoly a) { return a *= s; }
    friend MultiPoly operator*(MultiPoly a, double s) { return a *= s; }
    friend MultiPoly operator*(double s, MultiPoly a) { return a *= s; }

private:
    void check_shape(const MultiPoly& o) const {
        if (o.dims_ != dims_) throw std::invalid_argument("MultiPoly: shape mismatch");
    }

    std::vector<std::size_t> dims_;
    std::vector<cplx> c_;
};

inline double rel_diff(const MultiPoly& a, const MultiPoly& b) {
    const double scale = std::max(a.max_abs(), b.max_abs());
    const double d = (a - b).max_abs();
    return scale > 0.0 ? d / scale : d;
}

}  // namespace cuspmi
