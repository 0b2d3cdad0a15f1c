#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace edc;
using testing_util::random_wave;
using testing_util::tol;

namespace {

const TimeGrid grid = TimeGrid::over_period(1e-6, 1000);

SubWave unit_pulse() { return make_rect_pulse(grid, 0.5e-6); }

TEST(BeamSplit, DividesUnitPulse)
{
    const auto out = beam_split(unit_pulse(), SubWave(grid));
    EXPECT_NEAR(norm(out.first), 0.5, tol);
    EXPECT_NEAR(norm(out.second), 0.5, tol);
}

TEST(BeamSplit, EqualInputsInterfere)
{
    const SubWave w = unit_pulse();
    const auto out = beam_split(w, w);
    EXPECT_LT(max_abs_diff(out.first, Complex(std::sqrt(2.0)) * w), tol);
    EXPECT_TRUE(out.second.is_zero());
}

TEST(BeamSplit, ZeroInZeroOut)
{
    const auto out = beam_split(SubWave(grid), SubWave(grid));
    EXPECT_TRUE(out.first.is_zero());
    EXPECT_TRUE(out.second.is_zero());
}

TEST(RecombineBs2, DarkD1AtZeroPhase)
{
    const auto arms = beam_split(unit_pulse(), SubWave(grid));
    const auto out = recombine_bs2(arms.first, arms.second, 0.0);
    EXPECT_NEAR(norm(out.first), 0.0, tol);
    EXPECT_NEAR(norm(out.second), 1.0, tol);
}

TEST(RecombineBs2, BrightD1AtPi)
{
    // (e^{i pi} w - w)/sqrt2 = -sqrt2 w carries 2 * 1/2; the other port cancels.
    const auto arms = beam_split(unit_pulse(), SubWave(grid));
    const auto out = recombine_bs2(arms.first, arms.second, std::numbers::pi);
    EXPECT_NEAR(norm(out.first), 1.0, tol);
    EXPECT_NEAR(norm(out.second), 0.0, tol);
}

TEST(RecombineBs2, ZeroInZeroOut)
{
    const auto out = recombine_bs2(SubWave(grid), SubWave(grid), 1.3);
    EXPECT_TRUE(out.first.is_zero());
    EXPECT_TRUE(out.second.is_zero());
}

TEST(RecombineBs2, SingleInputMatchesBeamSplitColumn)
{
    std::mt19937_64 rng(3);
    const SubWave a = random_wave(grid, rng);
    const auto r = recombine_bs2(a, SubWave(grid), 0.0);
    const auto s = beam_split(a, SubWave(grid));
    EXPECT_LT(max_abs_diff(r.first, s.first), tol);
    EXPECT_LT(max_abs_diff(r.second, s.second), tol);
}

TEST(ApplyPhase, IdentityAndInvolution)
{
    std::mt19937_64 rng(5);
    const SubWave w = random_wave(grid, rng);
    EXPECT_EQ(max_abs_diff(apply_phase(w, 0.0), w), 0.0);
    EXPECT_LT(max_abs_diff(apply_phase(apply_phase(w, std::numbers::pi), std::numbers::pi), w), tol);
}

TEST(ApplyPhase, PreservesNorm)
{
    std::mt19937_64 rng(6);
    const TimeGrid g(64, 0.1);
    for (int k = 0; k < 100; ++k) {
        const SubWave w = random_wave(g, rng);
        const double phi = testing_util::uniform(rng, -10.0, 10.0);
        EXPECT_NEAR(norm(apply_phase(w, phi)), norm(w), tol * norm(w));
    }
}

TEST(Reflect, Identity)
{
    std::mt19937_64 rng(8);
    const SubWave w = random_wave(grid, rng);
    EXPECT_EQ(max_abs_diff(reflect(w), w), 0.0);
}

TEST(Unitarity, RandomPairs)
{
    std::mt19937_64 rng(13);
    const TimeGrid g(64, 1.0 / 64.0);
    for (int k = 0; k < 1000; ++k) {
        const SubWave a = random_wave(g, rng);
        const SubWave b = random_wave(g, rng);
        const double in = norm(a) + norm(b);
        const auto s = beam_split(a, b);
        const auto r = recombine_bs2(a, b, testing_util::uniform(rng, 0.0, testing_util::two_pi));
        ASSERT_NEAR(norm(s.first) + norm(s.second), in, tol * in);
        ASSERT_NEAR(norm(r.first) + norm(r.second), in, tol * in);
    }
}

TEST(Linearity, Superposition)
{
    std::mt19937_64 rng(17);
    const TimeGrid g(32, 1.0);
    const GateTimeline gate = GateTimeline::square_wave(16.0, 0.5, 3.0);
    for (int k = 0; k < 50; ++k) {
        const SubWave a1 = random_wave(g, rng), a2 = random_wave(g, rng);
        const SubWave b1 = random_wave(g, rng), b2 = random_wave(g, rng);
        const double phi = testing_util::uniform(rng, 0.0, testing_util::two_pi);

        const auto s_sum = beam_split(a1 + b1, a2 + b2);
        const auto s_a = beam_split(a1, a2);
        const auto s_b = beam_split(b1, b2);
        EXPECT_LT(max_abs_diff(s_sum.first, s_a.first + s_b.first), tol);
        EXPECT_LT(max_abs_diff(s_sum.second, s_a.second + s_b.second), tol);

        const auto r_sum = recombine_bs2(a1 + b1, a2 + b2, phi);
        const auto r_a = recombine_bs2(a1, a2, phi);
        const auto r_b = recombine_bs2(b1, b2, phi);
        EXPECT_LT(max_abs_diff(r_sum.first, r_a.first + r_b.first), tol);
        EXPECT_LT(max_abs_diff(r_sum.second, r_a.second + r_b.second), tol);

        EXPECT_LT(max_abs_diff(apply_phase(a1 + b1, phi), apply_phase(a1, phi) + apply_phase(b1, phi)), tol);

        const auto g_sum = gated_route(a1 + b1, gate);
        const auto g_a = gated_route(a1, gate);
        const auto g_b = gated_route(b1, gate);
        EXPECT_LT(max_abs_diff(g_sum.transmitted, g_a.transmitted + g_b.transmitted), tol);
        EXPECT_LT(max_abs_diff(g_sum.reflected, g_a.reflected + g_b.reflected), tol);
    }
}

TEST(GateTimelineTest, Validation)
{
    EXPECT_NO_THROW(GateTimeline(1.0, {{0.0, 0.25}, {0.5, 0.75}}));
    EXPECT_THROW(GateTimeline(1.0, {{0.5, 0.75}, {0.0, 0.25}}), ConfigError);
    EXPECT_THROW(GateTimeline(1.0, {{0.0, 0.5}, {0.4, 0.75}}), ConfigError);
    EXPECT_THROW(GateTimeline(1.0, {{0.0, 1.5}}), ConfigError);
    EXPECT_THROW(GateTimeline(1.0, {{-0.1, 0.5}}), ConfigError);
    EXPECT_THROW(GateTimeline(1.0, {{0.3, 0.3}}), ConfigError);
    EXPECT_THROW(GateTimeline(0.0, {}), ConfigError);
}

TEST(GateTimelineTest, SquareWaveWraps)
{
    const GateTimeline g = GateTimeline::square_wave(1.0, 0.5, 0.75);
    ASSERT_EQ(g.high_intervals().size(), 2u);
    EXPECT_TRUE(g.is_high(0.0));
    EXPECT_TRUE(g.is_high(0.2));
    EXPECT_FALSE(g.is_high(0.25));
    EXPECT_FALSE(g.is_high(0.7));
    EXPECT_TRUE(g.is_high(0.8));
    EXPECT_TRUE(g.is_high(1.2));
}

TEST(GatedRoute, AllHigh)
{
    const SubWave w = unit_pulse();
    const auto r = gated_route(w, GateTimeline(1e-6, {{0.0, 1e-6}}));
    EXPECT_EQ(max_abs_diff(r.transmitted, w), 0.0);
    EXPECT_TRUE(r.reflected.is_zero());
}

TEST(GatedRoute, AllLow)
{
    const SubWave w = unit_pulse();
    const auto r = gated_route(w, GateTimeline(1e-6, {}));
    EXPECT_TRUE(r.transmitted.is_zero());
    EXPECT_EQ(max_abs_diff(r.reflected, w), 0.0);
}

TEST(GatedRoute, HighOverFirstHalfOfPulse)
{
    const SubWave w = unit_pulse();
    const auto r = gated_route(w, GateTimeline::square_wave(1e-6, 0.5, -0.25e-6));
    EXPECT_NEAR(norm(r.transmitted), 0.5, tol);
    EXPECT_NEAR(norm(r.reflected), 0.5, tol);
}

TEST(GatedRoute, IsPartition)
{
    std::mt19937_64 rng(19);
    for (int k = 0; k < 50; ++k) {
        const SubWave w = random_wave(grid, rng);
        const double delay = testing_util::uniform(rng, 0.0, 1e-6);
        const double duty = testing_util::uniform(rng, 0.0, 1.0);
        const auto r = gated_route(w, GateTimeline::square_wave(1e-6, duty, delay));
        EXPECT_EQ(max_abs_diff(r.transmitted + r.reflected, w), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i)
            EXPECT_TRUE(r.transmitted[i] == Complex{} || r.reflected[i] == Complex{});
    }
}

TEST(GatedRoute, RejectsPartialPeriodGrid)
{
    const SubWave w(TimeGrid(750, 1e-9));
    EXPECT_THROW(gated_route(w, GateTimeline(1e-6, {})), ConfigError);
}

TEST(ElementSpecTest, PortArity)
{
    for (ElementKind k : {ElementKind::beam_splitter, ElementKind::phase_shifter, ElementKind::mirror,
                          ElementKind::gated_router}) {
        ElementSpec e;
        e.kind = k;
        const std::size_t ins = k == ElementKind::beam_splitter ? 2 : 1;
        const std::size_t outs = k == ElementKind::beam_splitter || k == ElementKind::gated_router ? 2 : 1;
        EXPECT_EQ(e.inputs().size(), ins) << to_string(k);
        EXPECT_EQ(e.outputs().size(), outs) << to_string(k);
        EXPECT_EQ(parse_element_kind(to_string(k)), k);
    }
    EXPECT_FALSE(parse_element_kind("lens"));
}

} // namespace
