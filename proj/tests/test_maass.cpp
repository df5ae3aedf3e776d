#include <gtest/gtest.h>

#include "cuspmi/maass.hpp"
#include "oracles.hpp"

using namespace cuspmi;

namespace {

const SeriesContext& ctx12() {
    static const SeriesContext c(delta_q(120), 80);
    return c;
}

/// Delta and its z-derivative from the Eisenstein-ring coefficients.
struct DeltaOracle {
    std::vector<oracle::bigint> a;
    DeltaOracle() : a(oracle::delta_from_eisenstein_numerators(80)) {
        for (auto& v : a) v /= 1728;
    }
    cplx value(cplx z) const { return oracle::eval_series(a, z); }
    cplx derivative(cplx z) const {
        const cplx q = std::exp(cplx(0, 2 * oracle::pi) * z);
        cplx acc = 0.0, qn = 1.0;
        for (std::size_t n = 1; n < a.size(); ++n) {
            qn *= q;
            acc += cplx(0, 2 * oracle::pi * double(n)) * a[n].convert_to<double>() * qn;
        }
        return acc;
    }
};

const auto delta_fn = [](cplx z) { return eval_form(delta_q(120), z, 1e-13).value; };

}  // namespace

TEST(MaassD, PowerOfY) {
    const cplx z(0, 2);
    const auto f = [](cplx u) { return cplx(std::pow(u.imag(), 3), 0.0); };
    for (int r : {-3, 0, 2, 10})
        EXPECT_LE(std::abs(maass_d(f, r, z) - double(r + 3) * 8.0), 1e-7 * 8.0 * (std::abs(r) + 3)) << r;
}

TEST(MaassD, ConstantGivesWeight) {
    const auto one = [](cplx) { return cplx(1.0, 0.0); };
    EXPECT_LE(std::abs(maass_d(one, 7, cplx(0.3, 1.1)) - 7.0), 1e-12);
    EXPECT_LE(std::abs(maass_dbar(one, -4, cplx(0.3, 1.1)) + 4.0), 1e-12);
}

TEST(MaassD, DeltaAgainstSeriesDerivative) {
    const DeltaOracle o;
    for (cplx z : {cplx(0, 2), cplx(0.25, 1.2)}) {
        const cplx want = cplx(0, 2 * z.imag()) * o.derivative(z) + 12.0 * o.value(z);
        EXPECT_LE(oracle::rel(maass_d(delta_fn, 12, z), want), 1e-7);
        EXPECT_LE(oracle::rel(maass_d_holomorphic(delta_q(120), 12, z), want), 1e-12);
    }
}

TEST(MaassDbar, HolomorphicIsScaled) {
    const cplx z(0.1, 1.5);
    const cplx f = delta_fn(z);
    EXPECT_LE(oracle::rel(maass_dbar(delta_fn, 5, z), 5.0 * f), 1e-7);
    EXPECT_LE(std::abs(maass_dbar(delta_fn, 0, z)), 1e-7 * std::abs(f));
}

TEST(MaassDbar, PowerOfY) {
    const cplx z(0, 2);
    const auto f = [](cplx u) { return cplx(std::pow(u.imag(), 3), 0.0); };
    EXPECT_LE(oracle::rel(maass_dbar(f, 4, z), 7.0 * 8.0), 1e-7);
}

TEST(MaassDbar, ConjugateDelta) {
    const DeltaOracle o;
    const cplx z(0.2, 1.3);
    const auto g = [](cplx u) { return std::conj(delta_fn(u)); };
    const cplx want = cplx(0, -2 * z.imag()) * std::conj(o.derivative(z)) + 3.0 * std::conj(o.value(z));
    EXPECT_LE(oracle::rel(maass_dbar(g, 3, z), want), 1e-7);
}

TEST(MaassDbar, HolomorphicTimesPolynomialInY) {
    const DeltaOracle o;
    const cplx z(-0.15, 1.4);
    const double y = z.imag();
    // g = (2 + y - y^2) Delta; dbar_s g = y (1 - 2y) Delta + s g
    const auto g = [](cplx u) { return (2.0 + u.imag() - u.imag() * u.imag()) * delta_fn(u); };
    const cplx want = y * (1.0 - 2.0 * y) * o.value(z) + 6.0 * (2.0 + y - y * y) * o.value(z);
    EXPECT_LE(oracle::rel(maass_dbar(g, 6, z), want), 1e-7);
}

TEST(FDScheme, StencilMustStayInside) {
    const auto f = [](cplx u) { return u; };
    EXPECT_THROW(maass_d(f, 0, cplx(0, 1.5e-3), FDScheme::central4(1e-3)), std::domain_error);
    EXPECT_NO_THROW(maass_d(f, 0, cplx(0, 1.5e-3), FDScheme::central2(1e-3)));
    EXPECT_THROW(maass_d(f, 0, cplx(0, 1), FDScheme::central4(0.0)), std::invalid_argument);
}

TEST(FDScheme, ObservedOrders) {
    // Non-holomorphic f = cos(x) exp(y/2); for holomorphic data the leading
    // errors of i f_x and f_y cancel and the 2nd-order stencil looks 4th-order.
    const cplx z(0.3, 1.0);
    const auto f = [](cplx u) { return cplx(std::cos(u.real()) * std::exp(u.imag() / 2), 0.0); };
    const double y = z.imag();
    const double fx = -std::sin(z.real()) * std::exp(y / 2), fy = std::cos(z.real()) * std::exp(y / 2) / 2;
    const cplx exact = y * cplx(fy, fx);
    auto err = [&](FDScheme s) { return std::abs(maass_d(f, 0, z, s) - exact); };
    const double r2 = err(FDScheme::central2(0.02)) / err(FDScheme::central2(0.01));
    const double r4 = err(FDScheme::central4(0.04)) / err(FDScheme::central4(0.02));
    EXPECT_NEAR(r2, 4.0, 0.2);
    EXPECT_NEAR(r4, 16.0, 0.8);
    EXPECT_EQ(FDScheme{}.order(), 4);
    EXPECT_GT(FDScheme{}.noise_bound(1e-12, 2.0), 1e-12);
}

TEST(Equivariance, TranslationIsExact) {
    const auto f = [](cplx u) { return std::exp(cplx(0, 2) * u) * std::pow(u.imag(), 2) + u; };
    const auto rep = check_equivariance(f, GroupElement::T(), BiWeight::make(4, 2), cplx(0.1, 1.2));
    EXPECT_LE(rep.action.rel(), 1e-12);
}

TEST(Equivariance, InversionOnEisenstein) {
    TruncationParams t;
    const BiWeight w = BiWeight::make(7, 7);
    const auto E = [&](cplx u) { return eisenstein_rs(w, u, t).value; };
    const cplx z(0, 2);
    const double tail = eisenstein_rs(w, z, t).tail_estimate + eisenstein_rs(w, cplx(0, 0.5), t).tail_estimate;
    const auto rep = check_equivariance(E, GroupElement::S(), w, z);
    EXPECT_LE(rep.action.abs, std::max(1e-5, 4 * tail));
    // E_{r,s} is invariant, so both sides also equal r E_{r+1,s-1}.
    EXPECT_LE(oracle::rel(maass_d(E, 7, z), 7.0 * eisenstein_rs(BiWeight::make(8, 6), z, t).value), 1e-7);
}

TEST(Equivariance, CommutationWithPowerOfY) {
    const auto rep = check_equivariance(delta_fn, GroupElement::S(), BiWeight::make(12, 0), cplx(0.05, 1.1), 2);
    EXPECT_LE(rep.commutation.rel(), 1e-7);
    EXPECT_LE(rep.action.rel(), 1e-6);
}

TEST(Keypr, AllFourEquations) {
    const cplx z(0, 2);
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const auto rep = check_keypr(ctx12(), BiWeight::make(10, 10), sg, z);
        EXPECT_LE(rep.d.rel(), 1e-4) << sign_name(sg);
        EXPECT_LE(rep.dbar.rel(), 1e-4) << sign_name(sg);
        EXPECT_GT(rep.d.scale, 0.0);
        EXPECT_GT(rep.dbar.scale, 0.0);
    }
}

TEST(Keypr, InhomogeneousTermIsNotNegligible) {
    // Omitting the Eichler term must break the plus-case raising relation.
    const cplx z(0, 2);
    const BiWeight w = BiWeight::make(10, 10);
    TruncationParams t;
    const auto lhs = maass_d([&](cplx u) { return phi(ctx12(), w, Sign::Plus, u, t).value; }, w.r, z);
    const auto rhs = phi(ctx12(), BiWeight::make(11, 9), Sign::Plus, z, t).value * 10.0;
    EXPECT_GT(rel_diff(lhs, rhs), 1e-2);
}

TEST(Keypr, ResidualShrinksWithFinerTruncationAndStep) {
    const cplx z(0, 2);
    TruncationParams t;
    const auto coarse = check_keypr(ctx12(), BiWeight::make(10, 10), Sign::Plus, z, t, FDScheme::central4(1e-3));
    const auto fine = check_keypr(ctx12(), BiWeight::make(10, 10), Sign::Plus, z, t.doubled(), FDScheme::central4(5e-4));
    EXPECT_LT(fine.d.abs, coarse.d.abs);
}

TEST(Keypr, PreconditionOnWeights) {
    EXPECT_THROW(check_keypr(ctx12(), BiWeight::make(6, 6), Sign::Plus, cplx(0, 2)), std::invalid_argument);
}

TEST(CoeffsIdentity, DegreeZeroIsPlainRaising) {
    const std::vector<std::function<cplx(cplx)>> f{delta_fn};
    const auto res = check_coeffs_identity(f, 12, cplx(0, 1.5));
    ASSERT_EQ(res.size(), 1u);
    EXPECT_LE(res[0].rel(), 1e-9);
}

TEST(CoeffsIdentity, MonomialData) {
    // f_j = y^{a_j} q^{b_j}; d_m f_j = (a_j + m - 4 pi b_j y) f_j.
    const int k = 6;
    const std::vector<int> a{0, 2, -1, 3, 1}, b{1, 0, 2, 1, 3};
    std::vector<std::function<cplx(cplx)>> f;
    for (int j = 0; j <= k - 2; ++j)
        f.push_back([aj = a[j], bj = b[j]](cplx u) {
            return std::pow(u.imag(), aj) * std::exp(cplx(0, 2 * oracle::pi * bj) * u);
        });
    const cplx z(0.2, 1.1);
    const int m = 3;
    double worst = 0.0, scale = 0.0;
    for (const auto& r : check_coeffs_identity(f, m, z)) {
        worst = std::max(worst, r.abs);
        scale = std::max(scale, r.scale);
    }
    EXPECT_LE(worst, 1e-6 * scale);

    // Right side against the symbolic derivative, left side via the assembled polynomial.
    std::vector<cplx> rhs(k - 1);
    for (int j = 0; j <= k - 2; ++j) {
        rhs[j] = (a[j] + m + j - 4 * oracle::pi * b[j] * z.imag()) * f[j](z);
        if (j < k - 2) rhs[j] -= double(j + 1) * f[j + 1](z);
    }
    const auto P = [&](cplx u) {
        std::vector<cplx> c(k - 1);
        for (int j = 0; j <= k - 2; ++j) c[j] = f[j](u);
        return coeff_assemble(c, u, k);
    };
    const auto lhs = oracle::decompose_by_substitution(maass_d(P, m, z).coeffs(), z, k);
    EXPECT_LE(oracle::rel_poly(lhs, rhs), 1e-6);
}

TEST(Composite, PhiCoefficientsOfDelta) {
    const cplx z(0, 2);
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const auto rep = check_composite(ctx12(), BiWeight::make(10, 10), sg, z);
        EXPECT_EQ(rep.per_j.size(), 11u);
        EXPECT_LE(rep.worst.rel(), 1e-3) << sign_name(sg);
    }
}
