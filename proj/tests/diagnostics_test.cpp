#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "ucont/diagnostics.hpp"

using namespace ucont;

namespace {

GaussianPacket packet(cplx s = {1, 0}) {
    GaussianPacket p;
    p.s = s;
    return p;
}

}  // namespace

TEST(WeightedNorm, GaussianClosedForm) {
    // int e^{2 b x^2} e^{-x^2/2} dx = sqrt(pi / (1/2 - 2b))
    Grid g = Grid::cube(1, 1024, 20);
    Field u = packet().sample(g);
    for (double b : {0.0, 0.05, 0.1})
        EXPECT_NEAR(weighted_norm(u, g, b), std::sqrt(std::numbers::pi / (0.5 - 2 * b)), 1e-10);
}

TEST(WeightedNorm, BoundaryMassIsRefused) {
    Grid g = Grid::cube(1, 1024, 20);
    EXPECT_THROW(weighted_norm(packet().sample(g), g, 0.24), BoundaryMassError);
    EXPECT_THROW(weighted_norm(packet().sample(g), g, -1), ValidationError);
}

TEST(WeightedNorm, ZeroStateIsMinusInfinityInLog) {
    Grid g = Grid::cube(1, 64, 4);
    EXPECT_EQ(log_weighted_norm(Field(g.size(), 0), g, 0.1), -std::numeric_limits<double>::infinity());
}

TEST(LogConvexity, ChirpedFreeFlowHoldsInterpolationBound) {
    Grid g = Grid::cube(1, 1024, 20);
    auto tr = sample_free_flow(packet({0.5, -0.5}), g, 0, 1, 65);
    for (double b : {0.05, 0.1, 0.2}) {
        auto c = logconvexity_check(tr, b, 0, 1 + 1e-6);
        EXPECT_FALSE(c.vacuous);
        EXPECT_LE(c.max_ratio, 1 + 1e-6) << b;
        EXPECT_GE(c.min_d2logH, -1e-3) << b;
        EXPECT_EQ(c.csv().rows(), 65u);
    }
}

TEST(LogConvexity, LogHMatchesClosedForm) {
    // H(t) = |s0/s(t)| sqrt(pi / (2 rho(t) - 2 beta)), rho(t) = Re 1/(4 s(t))
    Grid g = Grid::cube(1, 1024, 20);
    auto tr = sample_free_flow(packet(), g, 0, 1, 33);
    auto c = logconvexity_check(tr, 0.05);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        cplx s = cplx(1, 0) + cplx(0, tr.times[k]);
        double rho = (1.0 / (4.0 * s)).real();
        EXPECT_NEAR(c.logH[k], 0.5 * std::log(std::numbers::pi / (2 * rho - 0.1)) + std::log(std::norm(std::pow(1.0 / s, 0.5))), 1e-9);
    }
}

TEST(LogConvexity, VariableCoefficientFloor) {
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    EXPECT_LE(decay_smallness(f, SampleBox::cube(1, 24, 2001)), 0.05);
    Grid g = Grid::cube(1, 2048, 24);
    PropagateOptions o;
    o.steps = 256;
    o.save_every = 4;
    auto tr = propagate({0.0, g, packet({0.5, -0.5}).sample(g)}, f, DissipationParams::schroedinger(), 1.0, o);
    auto c = logconvexity_check(tr, 0.01);
    EXPECT_GE(c.min_d2logH, -1e-3);
}

TEST(DerivativeBound, FiniteRatio) {
    Grid g = Grid::cube(1, 1024, 20);
    auto tr = sample_free_flow(packet({0.5, -0.5}), g, 0, 1, 17);
    auto d = derivative_bound_check(tr, 0.1);
    EXPECT_FALSE(d.vacuous);
    EXPECT_TRUE(std::isfinite(d.ratio));
    EXPECT_GT(d.ratio, 0);
}

TEST(DecaySchedule, HeatFlowMatchesExactRateAtQuarter) {
    // gamma = 1/4 and a = 1, b = 0: alpha(t) = 1/(4(1+t)), the exact rate
    auto s = gaussian_decay_schedule(0.25, DissipationParams::heat(), 1, 1, 1);
    for (double t : {0.0, 0.3, 1.0}) EXPECT_NEAR(s.alpha_at(t), 0.25 / (1 + t), 1e-15);
}

TEST(DecaySchedule, HeatFlowCompanionHolds) {
    Grid g = Grid::cube(1, 1024, 32);
    auto s = gaussian_decay_schedule(0.2, DissipationParams::heat(), 1, 1, 1, 1, 33);
    auto tr = sample_free_flow(packet(), g, 0, 1, 33, {1, 0});
    auto c = decay_companion(tr, s, 0);
    EXPECT_TRUE(c.holds());
    for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_LE(s.alpha_at(tr.times[k]), 1 / (4 * (1 + tr.times[k])));
}

TEST(DecaySchedule, RejectsBadInput) {
    EXPECT_THROW(gaussian_decay_schedule(0, DissipationParams::heat(), 1, 1, 1), ValidationError);
    EXPECT_THROW(gaussian_decay_schedule(0.2, DissipationParams::heat(), 2, 1, 1), ValidationError);
    EXPECT_TRUE(gaussian_decay_schedule(0.2, DissipationParams::schroedinger(), 1, 1, 1).degenerate);
}

TEST(Hardy, RateProductMatchesOracle) {
    Grid g = Grid::cube(1, 8192, 128);
    double prev = 0;
    for (double s : {1.0, 0.5, 0.1, 0.01}) {
        auto h = hardy_point(s, g);
        EXPECT_NEAR(h.product, 1 / (16 * (s * s + 1)), 1e-8) << s;
        EXPECT_NEAR(h.oracle, 1 / (16 * (s * s + 1)), 1e-15);
        EXPECT_LE(h.product, 1.0 / 16);
        EXPECT_GT(h.product, prev);
        prev = h.product;
    }
}

TEST(LowerBound, FreeGaussianPrefersQuadratic) {
    Grid g = Grid::cube(1, 2048, 32);
    auto tr = sample_free_flow(packet(), g, 0, 1, 65);
    auto p = annulus_mass_profile(tr, {2, 2.5, 3, 3.5, 4, 4.5, 5, 5.5, 6});
    EXPECT_EQ(p.label, "ok");
    EXPECT_EQ(p.preferred, 2);
    EXPECT_LT(p.fit(2).relative_residual, 0.05);
    EXPECT_LT(p.fit(2).relative_residual, p.fit(3).relative_residual);
}

TEST(LowerBound, FitRecoversExactExponent) {
    std::vector<double> R{2, 3, 4, 5, 6}, d;
    for (double r : R) d.push_back(3 * std::exp(-0.7 * r * r));
    auto f = fit_lower_bound(R, d, 2);
    EXPECT_NEAR(f.C0, 0.7, 1e-12);
    EXPECT_NEAR(f.relative_residual, 0, 1e-12);
}

TEST(LowerBound, NeedsThreeRadii) {
    Grid g = Grid::cube(1, 256, 16);
    auto tr = sample_free_flow(packet(), g, 0, 1, 5);
    EXPECT_THROW(annulus_mass_profile(tr, {2, 3}), ValidationError);
}

TEST(Persistence, ThresholdOracle) { EXPECT_NEAR(persistence_threshold(1, 1.5), 16 * std::sqrt(2.0) / 3, 1e-13); }

TEST(Persistence, SquareCompletionAgreesWithErfc) {
    auto c = square_completion_check(3, 1, {0, 0.1, 1, 4});
    EXPECT_TRUE(c.passed());
    EXPECT_LT(c.max_quadrature_error, 1e-9);
}

TEST(Trajectory, CsvHasOneRowPerFrame) {
    Grid g = Grid::cube(1, 256, 16);
    auto tr = sample_free_flow(packet(), g, 0, 1, 9);
    EXPECT_EQ(trajectory_csv(tr, 0).rows(), 9u);
}
