#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace edc;
using namespace edc::bench;
using testing_util::bench_text;
using testing_util::tol;

namespace {

BenchProgram load(const std::string& text)
{
    const auto r = parse(text);
    if (!r.ok()) {
        std::string all;
        for (const auto& d : r.diagnostics) all += d.render();
        throw std::runtime_error(all);
    }
    return *r.program;
}

const char* closed_text = R"(source laser { rate = 1 MHz; duty = 50%; }
element BS1 : beam_splitter { }
element PS : phase_shifter { phi = 0.7; }
element BS2 : beam_splitter { }
detector D1
detector D2
connect laser.out -> BS1.in1
connect vacuum.out -> BS1.in2
connect BS1.out1 -> PS.in
connect PS.out -> BS2.in1
connect BS1.out2 -> BS2.in2
connect BS2.out1 -> D1.in
connect BS2.out2 -> D2.in
)";

TEST(Topology, ShippedFilesInferTheirMode)
{
    for (const auto& m : testing_util::shipped_benches) {
        const auto b = to_experiment_config(load(bench_text(m)));
        EXPECT_EQ(to_string(b.config.mode), m);
    }
}

TEST(Topology, BenchBinding)
{
    const auto b = to_experiment_config(load(bench_text("edc_bench")));
    EXPECT_EQ(b.config.mode, Mode::edc_bench);
    EXPECT_EQ(b.detector_names, (std::array<std::string, 4>{"D1", "D2", "D3", "D4"}));
    EXPECT_DOUBLE_EQ(b.nominal_td_frac, 0.5);
    EXPECT_DOUBLE_EQ(b.config.td_frac, 0.5);
    EXPECT_DOUBLE_EQ(b.config.period_T, 1e-6);
    const auto n = run(b.config).norms();
    EXPECT_NEAR(n[0], 0.0, tol);
    EXPECT_NEAR(n[1], 0.5, tol);
    EXPECT_NEAR(n[2], 0.25, tol);
    EXPECT_NEAR(n[3], 0.25, tol);
}

TEST(Topology, BenchSignalTimingMatchesSimulatedGate)
{
    // Moving S2 earlier by 100 ns lengthens the passed front by a fifth of the pulse.
    std::string text = bench_text("edc_bench");
    text.replace(text.find("delay = 750 ns"), 14, "delay = 650 ns");
    const auto b = to_experiment_config(load(text));
    EXPECT_NEAR(b.nominal_td_frac, 0.3, 1e-15);
    const GateTimeline from_file = load(text).find_signal("S2")->timeline();
    const auto a = run_edc_bench(b.config, from_file).norms();
    const auto g = run_edc_bench(b.config).norms();
    for (std::size_t d = 0; d < detector_count; ++d) EXPECT_NEAR(a[d], g[d], tol);
}

TEST(Topology, ConceptualNominalDelay)
{
    const auto b = to_experiment_config(load(bench_text("edc_conceptual")));
    EXPECT_EQ(b.config.mode, Mode::edc_conceptual);
    EXPECT_DOUBLE_EQ(b.nominal_td_frac, 0.5);
    const auto n = run(b.config).norms();
    EXPECT_NEAR(n[0], 0.25, tol);
    EXPECT_NEAR(n[1], 0.75, tol);
}

TEST(Topology, OverridesPhiAndTd)
{
    const auto b = to_experiment_config(load(bench_text("edc_bench")), 1.2, 0.1);
    EXPECT_EQ(b.config.phi, 1.2);
    EXPECT_EQ(b.config.td_frac, 0.1);
}

TEST(Topology, CanonicalClosedMzi)
{
    const auto b = to_experiment_config(load(closed_text));
    EXPECT_EQ(b.config.mode, Mode::closed);
    EXPECT_DOUBLE_EQ(b.nominal_phi, 0.7);
    EXPECT_DOUBLE_EQ(b.config.phi, 0.7);
}

TEST(Topology, PhaseOnArmTwoIsNegative)
{
    std::string text = closed_text;
    text.replace(text.find("connect BS1.out1 -> PS.in"), 25, "connect BS1.out2 -> PS.in");
    text.replace(text.find("connect BS1.out2 -> BS2.in2"), 27, "connect BS1.out1 -> BS2.in2");
    const auto b = to_experiment_config(load(text));
    EXPECT_EQ(b.config.mode, Mode::closed);
    EXPECT_DOUBLE_EQ(b.config.phi, -0.7);
}

TEST(Topology, OpenMzi)
{
    const auto b = to_experiment_config(load(bench_text("open")));
    EXPECT_EQ(b.config.mode, Mode::open);
    EXPECT_EQ(b.detector_names[0], "D1");
}

TEST(Topology, WheelerChoice)
{
    std::string text = bench_text("wheeler_delayed");
    EXPECT_TRUE(to_experiment_config(load(text)).config.insert_bs2);
    text.replace(text.find("choice = insert"), 15, "choice = omit");
    const auto b = to_experiment_config(load(text));
    EXPECT_EQ(b.config.mode, Mode::wheeler_delayed);
    EXPECT_FALSE(b.config.insert_bs2);
}

TEST(Topology, UnrecognizedNamesClosestMode)
{
    // Three detectors on a splitter chain matches nothing; the signature is nearest to open.
    const char* text = R"(source laser { rate = 1 MHz; duty = 50%; }
element BS1 : beam_splitter { }
element BS3 : beam_splitter { }
detector D1
detector D2
detector D3
connect laser.out -> BS1.in1
connect vacuum.out -> BS1.in2
connect BS1.out1 -> BS3.in1
connect vacuum.out -> BS3.in2
connect BS1.out2 -> D1.in
connect BS3.out1 -> D2.in
connect BS3.out2 -> D3.in
)";
    try {
        to_experiment_config(load(text));
        FAIL() << "expected TopologyError";
    } catch (const TopologyError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("unrecognized topology"), std::string::npos) << msg;
        EXPECT_NE(msg.find("closest known mode is"), std::string::npos) << msg;
    }
}

TEST(Topology, BenchWithSplitSignalsRejected)
{
    std::string text = bench_text("edc_bench");
    text.replace(text.find("element EOM3 : gated_router { signal = S2; }"), 44,
                 "element EOM3 : gated_router { signal = S1; }");
    try {
        to_experiment_config(load(text));
        FAIL() << "expected TopologyError";
    } catch (const TopologyError& e) {
        EXPECT_NE(std::string(e.what()).find("edc_bench"), std::string::npos) << e.what();
    }
}

TEST(Topology, SourceDutyMustBeHalf)
{
    std::string text = closed_text;
    text.replace(text.find("duty = 50%"), 10, "duty = 40%");
    EXPECT_THROW(to_experiment_config(load(text)), TopologyError);
}

TEST(Topology, ProgrammaticProgramRoundTrips)
{
    BenchProgram p = load(closed_text);
    ElementSpec m9;
    m9.name = "M9";
    p.elements.push_back(m9);
    p.wiring.push_back({{"vacuum", "out"}, {"M9", "in"}});
    const auto again = parse(format(p));
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(*again.program, p);
}

} // namespace
