#pragma once

#include <cmath>
#include <complex>
#include <vector>

namespace cuspmi {

// Neumaier variant of Kahan summation. Order dependent by construction; callers
// fix the order to get reproducible sums.
class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

class ComplexSum {
public:
    void add(std::complex<double> z) {
        re_.add(z.real());
        im_.add(z.imag());
    }
    std::complex<double> value() const { return {re_.value(), im_.value()}; }

private:
    NeumaierSum re_, im_;
};

// Component-wise compensated accumulator for fixed-length complex vectors
// (polynomial coefficients).
class VectorSum {
public:
    explicit VectorSum(std::size_t n = 0) : parts_(n) {}

    template <class Vec>
    void add(const Vec& v) {
        if (parts_.size() < v.size()) parts_.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) parts_[i].add(v[i]);
    }
    void add_at(std::size_t i, std::complex<double> z) {
        if (parts_.size() <= i) parts_.resize(i + 1);
        parts_[i].add(z);
    }
    std::vector<std::complex<double>> value() const {
        std::vector<std::complex<double>> out(parts_.size());
        for (std::size_t i = 0; i < parts_.size(); ++i) out[i] = parts_[i].value();
        return out;
    }
    std::size_t size() const { return parts_.size(); }

private:
    std::vector<ComplexSum> parts_;
};

}  // namespace cuspmi
