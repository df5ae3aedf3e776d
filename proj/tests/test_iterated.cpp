#include <gtest/gtest.h>

#include <random>

#include "cuspmi/iterated.hpp"
#include "oracles.hpp"

using namespace cuspmi;

namespace {

const QExpansion& D120() {
    static const QExpansion d = delta_q(120);
    return d;
}

const SeriesContext& ctx12() {
    static const SeriesContext c(D120(), 80);
    return c;
}

cplx eval2(const MultiPoly& p, cplx x1, cplx x2) {
    const auto& dims = p.degree_bounds();
    cplx acc = 0.0;
    for (std::size_t i = 0; i <= dims[0]; ++i)
        for (std::size_t j = 0; j <= dims[1]; ++j) acc += p.at(i, j) * std::pow(x1, double(i)) * std::pow(x2, double(j));
    return acc;
}

/// 4th-order central difference along x; equals d/dz for holomorphic families.
template <class Fam>
MultiPoly dz(Fam&& F, cplx z, double h = 1e-3) {
    return (F(z - 2.0 * h) - F(z + 2.0 * h) + 8.0 * (F(z + h) - F(z - h))) * (1.0 / (12.0 * h));
}

const IteratedIntegrand& depth2() {
    static const IteratedIntegrand d({D120()});
    return d;
}
const IteratedIntegrand& depth3() {
    static const IteratedIntegrand d({D120(), D120()});
    return d;
}

const auto F2 = [](cplx z) { return iterated_F(depth2(), z).value; };
const auto F3 = [](cplx z) { return iterated_F(depth3(), z).value; };
const std::vector<int> ks2{12}, ks3{12, 12};

}  // namespace

TEST(IteratedF, DepthOneIsConstant) {
    const auto v = iterated_F(IteratedIntegrand{}, cplx(0.3, 0.8));
    EXPECT_EQ(v.value.variables(), 0u);
    EXPECT_EQ(v.value.flat(0), cplx(1.0, 0.0));
}

TEST(IteratedF, Preconditions) {
    EXPECT_THROW(IteratedIntegrand({eisenstein_q(4, 20)}), std::invalid_argument);
    EXPECT_THROW(iterated_F(IteratedIntegrand({D120(), D120(), D120()}), cplx(0, 1)), std::invalid_argument);
    EXPECT_THROW(iterated_F(depth3(), cplx(0, 0.01)), precision_error);
}

TEST(IteratedF, DepthTwoIsEichlerIntegral) {
    const cplx z(0.2, 1.1);
    EXPECT_LE(rel_diff(F2(z).as_poly(), eichler_F(D120(), z)), 1e-15);
}

TEST(IteratedF, DepthTwoDerivative) {
    const cplx z(0.1, 1.0);
    MultiPoly want = MultiPoly::from_poly(linear_power(z, 10, 10) * eval_form(D120(), z).value);
    EXPECT_LE(rel_diff(dz(F2, z), want), 1e-6);
}

TEST(IteratedF, DepthThreeDerivative) {
    for (cplx z : {cplx(0.1, 1.0), cplx(-0.4, 0.7)}) {
        const PolyC outer = linear_power(z, 10, 10) * eval_form(D120(), z).value;
        const PolyC inner = eichler_F(D120(), z);
        MultiPoly want({10, 10});
        for (int i = 0; i <= 10; ++i)
            for (int j = 0; j <= 10; ++j) want.at(i, j) = outer[i] * inner[j];
        EXPECT_LE(rel_diff(dz(F3, z), want), 1e-5);
    }
}

TEST(IteratedF, DepthThreeAgainstVerticalQuadrature) {
    // F_3(z) = -i int_0^inf f(z+it) (z+it-X_1)^10 F_2(z+it; X_2) dt, composite Simpson.
    const cplx z(0.15, 0.9), x1(0.3, 0.0), x2(-0.2, 0.0);
    const int n = 3000;
    const double T = 6.0, h = T / n;
    auto g = [&](double t) {
        const cplx w = z + cplx(0, t);
        return oracle::delta_product(w, 200) * std::pow(w - x1, 10) * eichler_F(D120(), w)(x2);
    };
    cplx acc = g(0.0) + g(T);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * g(i * h);
    const cplx quad = -cplx(0, 1) * acc * h / 3.0;
    EXPECT_LE(oracle::rel(eval2(F3(z), x1, x2), quad), 1e-8);
}

TEST(DotAction, IdentityAndParabolic) {
    const cplx z(0.1, 1.3);
    EXPECT_LE(rel_diff(dot_action_at(F3, GroupElement::identity(), ks3, 2, z), F3(z)), 0.0);
    EXPECT_LE(rel_diff(dot_action_at(F2, GroupElement::T(), ks2, 2, z), F2(z)), 1e-9);
    EXPECT_LE(rel_diff(dot_action_at(F3, GroupElement::T(), ks3, 2, z), F3(z)), 1e-9);
}

TEST(DotAction, ReducesToTensorActionAtDepthTwo) {
    const cplx z(0.05, 1.2);
    const auto fam = [](cplx u) { return eichler_F(D120(), u); };
    const auto g = GroupElement::T() * GroupElement::S();
    EXPECT_LE(rel_diff(dot_action_at(F2, g, ks2, 2, z).as_poly(), act_tensor_at(fam, g, BiWeight::make(0, 0), 12, z)),
              1e-13);
}

TEST(DotAction, RightActionComposition) {
    // Polynomial-valued family in two variables with a nontrivial z-dependence.
    const auto fam = [](cplx z) {
        MultiPoly p({4, 2});
        for (std::size_t i = 0; i <= 4; ++i)
            for (std::size_t j = 0; j <= 2; ++j) p.at(i, j) = std::exp(cplx(0, 1) * z * double(i + 1)) + double(j) * z;
        return p;
    };
    const std::vector<int> ks{6, 4};
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> len(0, 4);
    const cplx z(0.2, 1.4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = oracle::random_word(rng, len(rng)), h = oracle::random_word(rng, len(rng));
        const auto fg = [&](cplx u) { return dot_action_at(fam, g, ks, 4, u); };
        EXPECT_LE(rel_diff(dot_action_at(fg, h, ks, 4, z), dot_action_at(fam, g * h, ks, 4, z)), 1e-9);
    }
}

TEST(OrderCheck, DepthTwoImageIsThePeriod) {
    const auto rep = order_check(F2, 2, {GroupElement::S()}, {cplx(0, 1), cplx(1, 2)}, ks2);
    ASSERT_EQ(rep.entries.size(), 1u);
    EXPECT_LE(rep.worst, 1e-8);
    EXPECT_LE(rel_diff(rep.entries[0].image.as_poly(), PeriodCocycle(D120(), Sign::Plus)(GroupElement::S())), 1e-10);
    const auto rt = order_check(F2, 2, {GroupElement::T()}, {cplx(0, 1), cplx(1, 2)}, ks2);
    EXPECT_LE(rt.entries[0].image.max_abs(), 1e-9 * F2(cplx(0, 1)).max_abs());
}

TEST(OrderCheck, DepthThree) {
    const auto S = GroupElement::S(), TS = GroupElement::T() * GroupElement::S();
    const auto rep = order_check(F3, 3, {S, TS}, {cplx(0, 1), cplx(1, 2)}, ks3);
    EXPECT_EQ(rep.entries.size(), 4u);
    EXPECT_LE(rep.worst, 1e-6);
    for (const auto& e : rep.entries) EXPECT_GT(e.image.max_abs(), 1e-6) << e.witness;
    // F_3 itself is not of order 2.
    EXPECT_GT(order_check(F3, 2, {S}, {cplx(0, 1), cplx(1, 2)}, ks3).worst, 1e-2);
}

TEST(OrderCheck, InnerVariableMustStayInert) {
    // Acting on the trailing coefficient variable as well destroys z-independence.
    const auto S = GroupElement::S();
    const auto first = [&](cplx z) { return dot_action_at(F3, S, ks3, 2, z) - F3(z); };
    const auto both = [&](cplx z) { return dot_action_at(first, S, ks3, 2, z) - first(z); };
    EXPECT_GT(rel_diff(both(cplx(0, 1)), both(cplx(1, 2))), 1e-2);
}

TEST(OrderCheck, FiltrationDepthTwoPassesOrderThree) {
    const auto rep = order_check(F2, 3, {GroupElement::S(), GroupElement::T() * GroupElement::S()},
                                 {cplx(0, 1), cplx(1, 2)}, ks2);
    EXPECT_LE(rep.worst, 1e-8);
    const auto one = [](cplx) { return MultiPoly::scalar(1.0); };
    EXPECT_LE(order_check(one, 2, {GroupElement::S()}, {cplx(0, 1), cplx(1, 2)}, {}).entries[0].image.max_abs(), 0.0);
}

TEST(RealIteratedF2, InversionImage) {
    const BiWeight w = BiWeight::make(10, 10);
    const auto c = real_iterated_F2_image(D120(), w, GroupElement::S(), cplx(0, 2));
    EXPECT_LE(c.residual(), std::max(c.tail, 1e-5 * c.scale()));
    EXPECT_GT(c.scale(), 1e-3);
}

TEST(RealIteratedF2, TranslationInvariant) {
    const BiWeight w = BiWeight::make(8, 6);
    const cplx z(0.3, 1.5);
    const TruncationParams t;
    const auto a = real_iterated_F2(D120(), w, z, t), b = real_iterated_F2(D120(), w, z + 1.0, t);
    EXPECT_LE(rel_diff(a.value, act_poly(b.value, GroupElement::T(), 12)), 1e-9);
}

TEST(RealIteratedF2, CocyclePartIsIndependentOfBasePoint) {
    const BiWeight w = BiWeight::make(10, 10);
    const auto g = GroupElement::T() * GroupElement::S();
    const TruncationParams t;
    auto normalised = [&](cplx z) {
        return real_iterated_F2_image(D120(), w, g, z, t).direct * (1.0 / eisenstein_rs(w, z, t).value);
    };
    EXPECT_LE(rel_diff(normalised(cplx(0, 2)), normalised(cplx(0.5, 1.5))), 1e-5);
}

TEST(PsiBar, InversionAgreesWithClosedForm) {
    const auto c = psi_bar_image(ctx12(), ctx12(), BiWeight::make(10, 10), GroupElement::S(), cplx(0, 2));
    EXPECT_LE(c.residual(), std::max(c.tail, 1e-5 * c.scale()));
    EXPECT_GT(c.scale(), 1e-3);
}

TEST(PsiBar, TranslationGivesZero) {
    const auto c = psi_bar_image(ctx12(), ctx12(), BiWeight::make(10, 10), GroupElement::T(), cplx(0.2, 2));
    EXPECT_LE(c.predicted.max_abs(), 0.0);
    EXPECT_LE(c.direct.max_abs(), 1e-12);
}

TEST(PsiBar, CocycleOverPair) {
    const BiWeight w = BiWeight::make(10, 10);
    const int k = 12;
    const auto S = GroupElement::S(), TS = GroupElement::T() * GroupElement::S();
    const cplx z(0, 2);
    const TruncationParams t;
    const auto sigma = [&](const GroupElement& g, cplx u) { return psi_bar_image(ctx12(), ctx12(), w, g, u, t).direct; };
    const PolyC lhs = sigma(S * TS, z);
    const PolyC rhs = act_poly(sigma(S, mobius(TS, z)), TS, k) * automorphy(TS, z, w) + sigma(TS, z);
    EXPECT_LE(rel_diff(lhs, rhs), 1e-5);
}

TEST(PsiBar, CoefficientCocycleOnRandomWords) {
    const PeriodCocycle rf(D120(), Sign::Plus), rg(D120(), Sign::Minus);
    const auto sigma = [&](const GroupElement& g) { return rf(g) + rg(g); };
    std::mt19937_64 rng(53);
    std::uniform_int_distribution<int> len(1, 6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_word(rng, len(rng)), h = oracle::random_word(rng, len(rng));
        const PolyC lhs = sigma(g * h), a = act_poly(sigma(g), h, 12), b = sigma(h);
        const double scale = std::max({lhs.max_abs(), a.max_abs(), b.max_abs()});
        EXPECT_LE(max_abs_diff(lhs, a + b), 1e-8 * scale) << g.str() << " " << h.str();
    }
}

TEST(MapToMI, LinearityAndRoundTrip) {
    const BiWeight w = BiWeight::make(10, 10);
    const cplx z(0.25, 1.8);
    const TruncationParams t;
    const SeriesContext tripled(bigint(3) * D120(), 80);
    const auto a = map_to_MI(ctx12(), w, Sign::Plus, z, t).value;
    const auto b = map_to_MI(tripled, w, Sign::Plus, z, t).value;
    std::vector<cplx> a3(a);
    for (auto& v : a3) v *= 3.0;
    EXPECT_LE(oracle::rel_poly(b, a3), 1e-10);
    EXPECT_LE(rel_diff(coeff_assemble(a, z, 12), phi(ctx12(), w, Sign::Plus, z, t).value), 1e-10);
    EXPECT_THROW(map_to_MI(ctx12(), BiWeight::make(6, 6), Sign::Plus, z, t), convergence_error);
}

TEST(MapToMI, ComponentsInvariantUnderInversion) {
    const BiWeight w = BiWeight::make(10, 10);
    const int k = 12;
    const cplx z(0.1, 1.6);
    const TruncationParams t;
    for (Sign sg : {Sign::Plus, Sign::Minus}) {
        const auto here = map_to_MI(ctx12(), w, sg, z, t);
        const auto there = map_to_MI(ctx12(), w, sg, mobius(GroupElement::S(), z), t);
        double worst = 0.0, scale = 0.0;
        for (int i = 0; i <= k - 2; ++i) {
            const cplx moved = there.value[i] * automorphy(GroupElement::S(), z, BiWeight::make(w.r + i, w.s + k - 2 - i));
            worst = std::max(worst, std::abs(moved - here.value[i]));
            scale = std::max(scale, std::abs(here.value[i]));
        }
        const double tail = here.tail_estimate + there.tail_estimate * std::pow(std::abs(z), w.total() + k - 2);
        EXPECT_LE(worst, std::max(4 * tail, 1e-5 * scale)) << sign_name(sg);
    }
}
