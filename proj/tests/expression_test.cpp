#include <gtest/gtest.h>

#include <cmath>

#include "ucont/parser.hpp"

using namespace ucont;
using sym::Expression;

namespace {

double at(const Expression& e, double t, double x1, double x2 = 0, double x3 = 0) { return e.evaluate({t, x1, x2, x3}); }

}  // namespace

TEST(Parser, EvaluatesArithmetic) {
    auto e = parse_expression("1 + 2*x1 - x2^2/4", 2);
    EXPECT_DOUBLE_EQ(at(e, 0, 3, 2), 1 + 6 - 1);
}

TEST(Parser, UnaryMinusBindsBelowPower) {
    auto e = parse_expression("-x1^2", 1);
    EXPECT_DOUBLE_EQ(at(e, 0, 3), -9);
    EXPECT_DOUBLE_EQ(at(parse_expression("exp(-x1^2)", 1), 0, 1), std::exp(-1.0));
}

TEST(Parser, ScientificAndDecimalNumbers) {
    EXPECT_DOUBLE_EQ(at(parse_expression("2.5e-1*x1", 1), 0, 4), 1.0);
    EXPECT_DOUBLE_EQ(at(parse_expression("x1^-2", 1), 0, 2), 0.25);
}

TEST(Parser, FunctionsAndTime) {
    auto e = parse_expression("sin(t) + cos(x1) + atan(x2)", 2);
    EXPECT_NEAR(at(e, 0.3, 0.7, 2), std::sin(0.3) + std::cos(0.7) + std::atan(2.0), 1e-15);
}

TEST(Parser, RejectsMalformedInput) {
    EXPECT_THROW(parse_expression("", 1), ParseError);
    EXPECT_THROW(parse_expression("1 +", 1), ParseError);
    EXPECT_THROW(parse_expression("(x1", 1), ParseError);
    EXPECT_THROW(parse_expression("log(x1)", 1), ParseError);
    EXPECT_THROW(parse_expression("1 $ 2", 1), ParseError);
}

TEST(Parser, RejectsVariableBeyondDimension) { EXPECT_THROW(parse_expression("x3", 2), ParseError); }

TEST(Parser, ErrorCarriesPosition) {
    try {
        parse_expression("x1 + * 2", 1);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 5u);
    }
}

TEST(Expression, ConstantFolding) {
    Expression e = Expression(2.0) * Expression(3.0) + Expression(1.0);
    ASSERT_TRUE(e.is_constant());
    EXPECT_EQ(e.constant_value(), 7.0);
    EXPECT_TRUE((Expression::x(1) - Expression::x(1)).is_zero());
    EXPECT_TRUE((Expression::x(1) * Expression(0.0)).is_zero());
}

TEST(Expression, DependencyMask) {
    auto e = parse_expression("t*x2", 3);
    EXPECT_TRUE(e.depends_on(0));
    EXPECT_FALSE(e.depends_on(1));
    EXPECT_TRUE(e.depends_on(2));
}

TEST(Expression, DerivativesMatchFiniteDifferences) {
    auto e = parse_expression("exp(-x1^2) * sin(3*x1*x2) + atan(x2)^3 + x1^4*t", 2);
    const double h = 1e-5;
    for (int slot : {0, 1, 2}) {
        sym::Point p{0.4, 0.3, -0.7, 0}, q = p, r = p;
        q[static_cast<std::size_t>(slot)] += h;
        r[static_cast<std::size_t>(slot)] -= h;
        double fd = (e.evaluate(q) - e.evaluate(r)) / (2 * h);
        EXPECT_NEAR(e.derivative(slot).evaluate(p), fd, 1e-8) << "slot " << slot;
    }
}

TEST(Expression, SecondDerivativeIsSymmetric) {
    auto e = parse_expression("exp(x1*x2) * cos(x1 - x2^2)", 2);
    auto a = e.derivative(1).derivative(2), b = e.derivative(2).derivative(1);
    for (double x : {-1.0, 0.2, 0.9})
        EXPECT_NEAR(a.evaluate({0, x, 0.5, 0}), b.evaluate({0, x, 0.5, 0}), 1e-12);
}

TEST(Expression, ExpandCancelsLikeTerms) {
    auto x = Expression::x(1), y = Expression::x(2);
    auto e = sym::expand(sym::pow(x + y, 2) - x * x - Expression(2.0) * x * y - y * y);
    EXPECT_TRUE(e.is_zero()) << e.to_string();
}

TEST(Expression, DivisionByZeroExpressionThrows) { EXPECT_THROW(Expression::x(1) / Expression(0.0), Error); }

TEST(Expression, PrintRoundTrips) {
    auto e = parse_expression("3*x1^2*exp(-x2) + 0.5*t", 2);
    auto back = parse_expression(e.to_string(), 2);
    for (double x : {-0.3, 1.1}) EXPECT_NEAR(at(back, 0.2, x, 0.4), at(e, 0.2, x, 0.4), 1e-14);
}
