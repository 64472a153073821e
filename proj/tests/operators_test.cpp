#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace ucont;
using sym::ComplexExpr;
using sym::Expression;

TEST(MultiIndex, OrdersAndSum) {
    auto m = MultiIndex::xx(1, 2) + MultiIndex::time();
    EXPECT_EQ(m.t(), 1);
    EXPECT_EQ(m.spatial(), 2);
    EXPECT_EQ(MultiIndex::x(3, 2)[3], 2);
}

TEST(DiffOperator, ComposeLeibniz) {
    // d1 o (x1^2) = x1^2 d1 + 2 x1
    DiffOperator d1 = DiffOperator::derivative(1, MultiIndex::x(1));
    DiffOperator m = DiffOperator::multiply(1, sym::pow(Expression::x(1), 2));
    DiffOperator c = compose(d1, m);
    DiffOperator e(1);
    e.add(MultiIndex::x(1), sym::pow(Expression::x(1), 2));
    e.add(MultiIndex{}, Expression(2.0) * Expression::x(1));
    EXPECT_TRUE(operators_equal(c, e));
}

TEST(DiffOperator, CommutatorOfDerivativeAndPosition) {
    DiffOperator d1 = DiffOperator::derivative(2, MultiIndex::x(1));
    DiffOperator x1 = DiffOperator::multiply(2, Expression::x(1));
    EXPECT_TRUE(operators_equal(commutator(d1, x1), DiffOperator::identity(2)));
    DiffOperator x2 = DiffOperator::multiply(2, Expression::x(2));
    EXPECT_TRUE(commutator(d1, x2).normalized().empty());
}

TEST(DiffOperator, ApplyMatchesComposition) {
    auto f = fixtures::field(2, {"1 + x1^2/10", "x1*x2/20", "x1*x2/20", "1 + x2^2/10"});
    DiffOperator L = DiffOperator::divergence_form(f);
    ComplexExpr u{parse_expression("exp(-x1^2 - x2^2/2)", 2), parse_expression("x1*x2", 2)};
    ComplexExpr direct = L.apply(u);
    ComplexExpr twice = compose(L, L).apply(u), nested = L.apply(L.apply(u));
    for (auto p : {sym::Point{0, 0.3, -0.2, 0}, sym::Point{0, -1.1, 0.8, 0}}) {
        EXPECT_NEAR(twice.re.evaluate(p), nested.re.evaluate(p), 1e-10);
        EXPECT_NEAR(twice.im.evaluate(p), nested.im.evaluate(p), 1e-10);
        EXPECT_TRUE(std::isfinite(direct.re.evaluate(p)));
    }
}

TEST(DiffOperator, OrderOverflowIsReported) {
    DiffOperator d = DiffOperator::derivative(1, MultiIndex::x(1, 3));
    EXPECT_THROW(compose(d, d), OrderOverflow);
}

TEST(WeightSpec, ValidationMessages) {
    EXPECT_THROW(WeightSpec::scaled_time(1, 0.5, Expression(0.0)).phi(1), ValidationError);
    EXPECT_THROW(WeightSpec::power(1, 1).phi(1), ValidationError);
    EXPECT_THROW(WeightSpec::scaled_time(1, 2, Expression::x(1)).phi(1), ValidationError);
    EXPECT_NO_THROW(WeightSpec::quadratic(0).phi(1));
}

TEST(Conjugation, SplitsIntoSymmetricAndAntisymmetricParts) {
    for (const auto& c : fixtures::t_cases()) {
        Decomposition d = conjugate_decompose(c.f, c.w);
        EXPECT_TRUE(operators_equal(d.S + d.A, conjugated_operator(c.f, d.phi))) << c.name;
    }
}

TEST(Conjugation, ComposedOperatorMatchesDirectProductRule) {
    auto f = fixtures::field(2, {"1 + x1^2/10", "0", "0", "1 + 0.05*exp(-x2^2)"});
    Expression phi = WeightSpec::translated(1.5, 2, parse_expression("t^2", 3)).phi(2);
    ComplexExpr u{parse_expression("exp(-x1^2)*cos(x2 + t)", 2), parse_expression("x1*t", 2)};
    ComplexExpr a = conjugated_operator(f, phi).apply(u), b = direct_conjugation(f, phi, u);
    for (auto p : {sym::Point{0.2, 0.3, -0.4, 0}, sym::Point{0.7, -1.0, 0.5, 0}}) {
        EXPECT_NEAR(a.re.evaluate(p), b.re.evaluate(p), 1e-10 * (1 + std::abs(b.re.evaluate(p))));
        EXPECT_NEAR(a.im.evaluate(p), b.im.evaluate(p), 1e-10 * (1 + std::abs(b.im.evaluate(p))));
    }
}

TEST(TDecomposition, ResidualsVanishOnAllCases) {
    for (const auto& c : fixtures::t_cases()) {
        auto r = verify_T_decomposition(c.f, c.w);
        EXPECT_TRUE(r.passed()) << c.name << "\n" << r.mismatch_text();
        EXPECT_TRUE(r.order_collapse_ok) << c.name;
        ASSERT_EQ(r.terms.size(), 5u);
    }
}

TEST(TDecomposition, PrintedVariantAgreesForIdentityField) {
    auto r = verify_T_decomposition(CoefficientField::identity(2), WeightSpec::quadratic(1), TVariant::Printed);
    EXPECT_TRUE(r.passed());
}

TEST(TDecomposition, PrintedVariantLeavesResidualsForVariableField) {
    auto f = fixtures::field(2, {"1 + x1^2/10", "0", "0", "1 + x2^2/10"});
    auto r = verify_T_decomposition(f, WeightSpec::translated(2, 4, parse_expression("3*t^2*(1-t)^2", 3)), TVariant::Printed);
    EXPECT_FALSE(r.passed());
    EXPECT_TRUE(r.reconstruction_ok);
}

TEST(Specialization, IdentityQuadraticIsExact) {
    for (int n = 1; n <= 3; ++n)
        for (double b : {0.25, 1.0, 1.5}) {
            Decomposition d = conjugate_decompose(CoefficientField::identity(n), WeightSpec::quadratic(b));
            EXPECT_TRUE(operators_equal(commutator(d.S, d.A), fixtures::expected_specialization(n, b))) << "n=" << n << " beta=" << b;
        }
}

TEST(Specialization, MonomialApplicationOracle) {
    for (double b : {0.25, 0.75, 2.0}) EXPECT_LT(fixtures::monomial_oracle_error(b, 20, 42), 1e-10) << b;
}

TEST(Specialization, ScaledTimeSecondOrderPart) {
    // second-order part is -8 (beta/R^2) Laplacian
    const double b = 2, R = 4;
    auto w = WeightSpec::scaled_time(b, R, parse_expression("t^2", 3));
    Decomposition d = conjugate_decompose(CoefficientField::identity(1), w);
    DiffOperator c = commutator(d.S, d.A);
    EXPECT_TRUE(operators_equal(c.spatial_part(2), fixtures::expected_specialization(1, b / (R * R)).spatial_part(2)));
}
