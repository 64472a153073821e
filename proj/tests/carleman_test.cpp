#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace ucont;

namespace {

CutoffSpec bump_cutoff() {
    CutoffSpec c;
    c.noise_modes = 0;
    c.r1 = 7.5;
    return c;
}

}  // namespace

TEST(Profile, PlateauShape) {
    PlateauProfile p;
    EXPECT_EQ(p.value(0.05, 0), 0);
    EXPECT_EQ(p.value(0.5, 0), 3);
    EXPECT_EQ(p.value(0.95, 0), 0);
    EXPECT_NEAR(p.value(0.19, 0), 3 * smoothstep(0.5, 0), 1e-15);
}

TEST(Profile, DerivativesMatchFiniteDifferences) {
    PlateauProfile p;
    const double h = 1e-6;
    for (double t : {0.15, 0.2, 0.8, 0.86})
        for (int k : {0, 1}) EXPECT_NEAR(p.value(t, k + 1), (p.value(t + h, k) - p.value(t - h, k)) / (2 * h), 1e-4 * (1 + std::abs(p.value(t, k + 1))));
}

TEST(Profile, SupNormsMatchOracle) {
    // golden-section refined; the second value is the mpmath oracle
    PlateauProfile p;
    EXPECT_NEAR(p.sup_norm(1), 67.67578125, 1e-6);
    EXPECT_NEAR(p.sup_norm(2), 2347.2031702484377, 1e-8);
}

TEST(Profile, SmoothEdgeIsFlatAtEnds) {
    EXPECT_EQ(smooth_edge(0, 0), 0);
    EXPECT_EQ(smooth_edge(1, 0), 1);
    EXPECT_NEAR(smooth_edge(0.5, 0), 0.5, 1e-15);
    EXPECT_NEAR(smooth_edge(1e-3, 1), 0, 1e-12);
}

TEST(TestFunction, AnnulusSupportIsRespected) {
    Grid g = space_time_grid(1, 64, 256, 8);
    CutoffSpec cut;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto tf = make_test_function(SupportMode::Annulus, g, cut, seed);
        auto J = tf.sample(g);
        EXPECT_EQ(tf.support_violations(g, J, 1), 0u);
    }
}

TEST(TestFunction, TranslatedSupportIsRespected) {
    Grid g = space_time_grid(2, 64, 64, 4);
    for (double R : {4.0, 32.0}) {
        CutoffSpec cut;
        cut.R = R;
        auto tf = make_test_function(SupportMode::Translated, g, cut, 5);
        EXPECT_EQ(tf.support_violations(g, tf.sample(g), R), 0u);
    }
}

TEST(TestFunction, SeedDeterminesSample) {
    Grid g = space_time_grid(1, 128, 128, 8);
    CutoffSpec cut;
    auto a = make_test_function(SupportMode::Annulus, g, cut, 9).sample(g);
    auto b = make_test_function(SupportMode::Annulus, g, cut, 9).sample(g);
    auto c = make_test_function(SupportMode::Annulus, g, cut, 10).sample(g);
    EXPECT_EQ(a.f, b.f);
    EXPECT_NE(a.f, c.f);
}

TEST(TestFunction, JetMatchesExpression) {
    Grid g = space_time_grid(1, 128, 128, 8);
    auto tf = make_test_function(SupportMode::Annulus, g, CutoffSpec{}, 4);
    auto J = tf.sample(g);
    auto e = tf.expression();
    auto ex = e.derivative(1);
    double worst = 0, peak = 0;
    for (std::size_t p = 0; p < J.f.size(); p += 7) {
        sym::Point x{g.coord(0, g.index(p, 0)), g.coord(1, g.index(p, 1)), 0, 0};
        worst = std::max(worst, std::abs(J.fx[0][p] - cplx(ex.re.evaluate(x), ex.im.evaluate(x))));
        peak = std::max(peak, std::abs(J.fx[0][p]));
    }
    EXPECT_LT(worst, 1e-10 * peak);
}

TEST(TestFunction, UnresolvedLayerIsRejected) {
    Grid g = space_time_grid(1, 64, 32, 8);
    EXPECT_THROW(make_test_function(SupportMode::Annulus, g, CutoffSpec{}, 1), ResolutionError);
}

TEST(TestFunction, EmptyAdmissibleRegion) {
    Grid g = space_time_grid(1, 64, 256, 2);
    CutoffSpec cut;
    cut.layer = 1.5;
    EXPECT_THROW(make_test_function(SupportMode::Annulus, g, cut, 1), SupportError);
}

TEST(CarlemanCubic, BumpMatchesQuadratureOracle) {
    // oracle: tests/oracles/carleman_bump.py at 30 digits
    Grid g = space_time_grid(1, 256, 1024, 8);
    CutoffSpec cut = bump_cutoff();
    auto tf = make_test_function(SupportMode::Annulus, g, cut, 1);
    const double beta1 = beta1_threshold(1, cut.phi_sup(2), 1, 1);
    EXPECT_NEAR(beta1, 48.447942889749589, 1e-9);
    auto r = carleman_sides_cubic(tf, g, CoefficientField::identity(1), beta1, 1);
    EXPECT_NEAR(r.lhs / 17929337.122375481, 1, 1e-9);
    EXPECT_NEAR(r.rhs / 404097514888.26921, 1, 1e-9);
    EXPECT_NEAR(r.slack / 22538.341051324368, 1, 1e-9);
    EXPECT_TRUE(r.pass);
    EXPECT_FALSE(r.exploratory);
}

TEST(CarlemanCubic, SlackIsScaleInvariant) {
    Grid g = space_time_grid(1, 64, 256, 8);
    CutoffSpec a;
    CutoffSpec b = a;
    b.amplitude = 1e3;
    auto ra = carleman_sides_cubic(make_test_function(SupportMode::Annulus, g, a, 3), g, CoefficientField::identity(1), 60, 1);
    auto rb = carleman_sides_cubic(make_test_function(SupportMode::Annulus, g, b, 3), g, CoefficientField::identity(1), 60, 1);
    EXPECT_NEAR(ra.slack / rb.slack, 1, 1e-12);
}

TEST(CarlemanCubic, ConjugationIdentity) {
    Grid g = space_time_grid(1, 64, 256, 8);
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    auto tf = make_test_function(SupportMode::Annulus, g, CutoffSpec{}, 2);
    EXPECT_LT(conjugation_identity_error(tf, g, f, 40, 2), 1e-9);
}

TEST(CarlemanCubic, ModeMismatchIsRejected) {
    Grid g = space_time_grid(2, 64, 64, 4);
    CutoffSpec cut;
    cut.R = 4;
    auto tf = make_test_function(SupportMode::Translated, g, cut, 1);
    EXPECT_THROW(carleman_sides_cubic(tf, g, CoefficientField::identity(2), 10, 4), SupportError);
}

TEST(CarlemanCubic, SweepFrontierScalesLikeCube) {
    SweepConfig s;
    s.R_values = {4, 8, 16, 32};
    s.rule = BetaRule::Frontier;
    s.samples = 10;
    s.nt = 128;
    s.nx = 256;
    auto r = carleman_sweep(s);
    EXPECT_NEAR(r.frontier_exponent, 3, 0.2);
    EXPECT_EQ(r.failures, 0u);
}

TEST(CarlemanCubic, SweepRejectsSmallR) {
    SweepConfig s;
    s.R_values = {0.5};
    EXPECT_THROW(carleman_sweep(s), ValidationError);
}

TEST(CarlemanTranslated, SweepFrontierScalesLikeSquare) {
    SweepConfig s;
    s.mode = SupportMode::Translated;
    s.field = TransversalField(2, sym::Expression(1.0), {parse_expression("1 + 0.05*exp(-x2^2)", 2)}).field();
    s.R_values = {4, 8, 16, 32};
    s.rule = BetaRule::Frontier;
    s.samples = 8;
    s.nt = 64;
    s.nx = 64;
    s.half_width = 4;
    auto r = carleman_sweep(s);
    EXPECT_NEAR(r.frontier_exponent, 2, 0.2);
    EXPECT_GT(r.c0, 0);
    EXPECT_TRUE(r.all_pass());
}

TEST(Pairing, SymmetricAndAntisymmetricParts) {
    auto s = fixtures::pairing_setup();
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    auto setup = carleman_setup(SupportMode::Annulus, f, 2, s.cut, s.grid);
    for (std::uint64_t k = 0; k < 4; ++k) {
        auto a = make_test_function(SupportMode::Annulus, s.grid, s.cut, 2 * k + 1).sample(s.grid);
        auto b = make_test_function(SupportMode::Annulus, s.grid, s.cut, 2 * k + 2).sample(s.grid);
        auto d = symmetry_defect(setup, a, b, 3, s.grid.cell_volume());
        EXPECT_LT(d.symmetric, 1e-7);
        EXPECT_LT(d.antisymmetric, 1e-7);
    }
}

TEST(Fit, LogLogRecoversPowerLaw) {
    auto [k, c] = loglog_fit({1, 2, 4, 8}, {3, 24, 192, 1536});
    EXPECT_NEAR(k, 3, 1e-12);
    EXPECT_NEAR(c, std::log(3.0), 1e-12);
}

TEST(Sweep, CsvIsDeterministic) {
    SweepConfig s;
    s.R_values = {1, 2};
    s.samples = 6;
    s.nt = 64;
    s.nx = 256;
    EXPECT_EQ(carleman_sweep(s).csv().str(), carleman_sweep(s).csv().str());
}
