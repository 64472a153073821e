#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"
#include "ucont/evolution.hpp"

using namespace ucont;

namespace {

GaussianPacket packet(int n = 1, cplx s = {1, 0}) {
    GaussianPacket p;
    p.n = n;
    p.s = s;
    return p;
}

double relative_error(const Field& u, const Field& v, const Grid& g) { return l2_distance(u, v, g) / std::sqrt(mass(v, g)); }

Field step_run(const CoefficientField& f, const Grid& g, int steps) {
    PropagateOptions o;
    o.steps = steps;
    return propagate({0.0, g, packet().sample(g)}, f, DissipationParams::schroedinger(), 1.0, o).frames.back();
}

}  // namespace

TEST(GaussianPacket, ClosedFormMassIsConserved) {
    auto p = packet(2, {0.5, -0.5});
    auto q = free_flow_closed_form(p, 1.3);
    EXPECT_NEAR(q.mass(), p.mass(), 1e-13 * p.mass());
}

TEST(GaussianPacket, HeatFlowRate) {
    auto q = free_flow_closed_form(packet(), 1.0, {1, 0});
    EXPECT_NEAR(q.modulus_rate(), 1.0 / 8, 1e-15);
}

TEST(GaussianPacket, RejectsNonDecayingData) { EXPECT_THROW(packet(1, {0, 1}).validate(), ValidationError); }

TEST(Propagate, FreeFlowMatchesClosedForm) {
    Grid g = Grid::cube(1, 1024, 20);
    auto p = packet();
    Field u = step_run(CoefficientField::identity(1), g, 100);
    EXPECT_LT(relative_error(u, free_flow_closed_form(p, 1.0).sample(g), g), 1e-6);
}

TEST(Propagate, FreeFlowInTwoDimensions) {
    Grid g = Grid::cube(2, 128, 12);
    auto p = packet(2);
    PropagateOptions o;
    o.steps = 20;
    auto tr = propagate({0.0, g, p.sample(g)}, CoefficientField::identity(2), DissipationParams::schroedinger(), 1.0, o);
    EXPECT_LT(relative_error(tr.frames.back(), free_flow_closed_form(p, 1.0).sample(g), g), 1e-8);
}

TEST(Propagate, SecondOrderWithPotential) {
    Grid g = Grid::cube(1, 1024, 20);
    auto f = CoefficientField::identity(1, parse_expression("0.5*exp(-x1^2)", 1));
    Field ref = step_run(f, g, 6400);
    double e1 = l2_distance(step_run(f, g, 50), ref, g), e2 = l2_distance(step_run(f, g, 100), ref, g);
    EXPECT_GT(e1 / e2, 3.6);
    EXPECT_LT(e1 / e2, 4.4);
}

TEST(Propagate, SecondOrderWithVariableCoefficient) {
    Grid g = Grid::cube(1, 1024, 20);
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"});
    Field ref = step_run(f, g, 3200);
    double e1 = l2_distance(step_run(f, g, 50), ref, g), e2 = l2_distance(step_run(f, g, 100), ref, g);
    EXPECT_GT(e1 / e2, 3.6);
    EXPECT_LT(e1 / e2, 4.4);
}

TEST(Propagate, HeatFlowMatchesClosedForm) {
    Grid g = Grid::cube(1, 1024, 32);
    auto p = packet();
    PropagateOptions o;
    o.steps = 10;
    auto tr = propagate({0.0, g, p.sample(g)}, CoefficientField::identity(1), DissipationParams::heat(), 1.0, o);
    EXPECT_LT(relative_error(tr.frames.back(), free_flow_closed_form(p, 1.0, {1, 0}).sample(g), g), 1e-10);
}

TEST(Propagate, SaveEveryControlsFrames) {
    Grid g = Grid::cube(1, 256, 16);
    PropagateOptions o;
    o.steps = 40;
    o.save_every = 10;
    auto tr = propagate({0.0, g, packet().sample(g)}, CoefficientField::identity(1), DissipationParams::schroedinger(), 1.0, o);
    ASSERT_EQ(tr.size(), 5u);
    EXPECT_DOUBLE_EQ(tr.times[2], 0.5);
}

TEST(Propagate, UnresolvedDataIsRejected) {
    Grid g = Grid::cube(1, 64, 16);
    auto p = packet(1, {0.01, 0});
    EXPECT_THROW(propagate({0.0, g, p.sample(g)}, CoefficientField::identity(1), DissipationParams::schroedinger(), 0.1), ResolutionError);
}

TEST(Propagate, RejectsBackwardParabolic) {
    Grid g = Grid::cube(1, 256, 16);
    EXPECT_THROW(propagate({0.0, g, packet().sample(g)}, CoefficientField::identity(1), DissipationParams{-1, 1}, 1.0), ValidationError);
}

TEST(Regularized, DistanceDecreasesWithEps) {
    Grid g = Grid::cube(1, 1024, 20);
    PropagateOptions o;
    o.steps = 200;
    o.save_every = 20;
    auto f = CoefficientField::identity(1);
    auto tr = propagate({0.0, g, packet().sample(g)}, f, DissipationParams::schroedinger(), 1.0, o);
    double prev = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        auto r = regularized_flow(tr, f, eps, o);
        ASSERT_EQ(r.size(), tr.size());
        double d = l2_distance(r.frames.back(), tr.frames.back(), g);
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_THROW(regularized_flow(tr, f, 0.0), ValidationError);
}

TEST(Regularized, SemigroupComposition) {
    Grid g = Grid::cube(1, 512, 16);
    auto f = fixtures::field(1, {"1 + 0.05*exp(-x1^2)"}, "0.2*exp(-x1^2)");
    Propagator P(f, g, DissipationParams::regularized(1e-2));
    PropagateOptions full, half;
    full.steps = 200;
    half.steps = 100;
    Field u0 = packet().sample(g);
    Field direct = P.run(u0, 0, 1, full).frames.back();
    Field mid = P.run(u0, 0, 0.5, half).frames.back();
    Field twice = P.run(mid, 0.5, 1, half).frames.back();
    EXPECT_LT(relative_error(twice, direct, g), 1e-7);
}

TEST(Checkpoint, RoundTrip) {
    Grid g = Grid::cube(2, 64, 10);
    PropagateOptions o;
    o.steps = 4;
    o.save_every = 2;
    auto tr = propagate({0.0, g, packet(2).sample(g)}, CoefficientField::identity(2), DissipationParams::schroedinger(), 0.5, o);
    auto path = (std::filesystem::temp_directory_path() / "ucont_checkpoint_test.uctr").string();
    write_checkpoint(tr, path);
    auto back = read_checkpoint(path);
    std::filesystem::remove(path);
    ASSERT_EQ(back.size(), tr.size());
    EXPECT_EQ(back.grid.N, tr.grid.N);
    EXPECT_EQ(back.times, tr.times);
    for (std::size_t k = 0; k < tr.size(); ++k)
        for (std::size_t p = 0; p < tr.frames[k].size(); ++p) EXPECT_NEAR(std::abs(back.frames[k][p] - tr.frames[k][p]), 0, 1e-6);
}

TEST(Checkpoint, RejectsForeignFile) {
    auto path = (std::filesystem::temp_directory_path() / "ucont_not_a_checkpoint.bin").string();
    {
        std::ofstream os(path, std::ios::binary);
        os << "not a checkpoint";
    }
    EXPECT_THROW(read_checkpoint(path), Error);
    std::filesystem::remove(path);
}
