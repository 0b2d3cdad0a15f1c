#pragma once

// Interferometer wiring for the five experiment modes.
//
// Every mode starts from a unit rectangular pulse of length T/2 at the start of a grid spanning
// one signal period T, splits it at BS1, and carries the arm sub-waves to the detectors. Arms
// have equal length, so propagation between elements is instantaneous.

#include "edc/error.hpp"
#include "edc/mode.hpp"
#include "edc/optics.hpp"
#include "edc/wave.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace edc {

struct ExperimentConfig {
    Mode mode = Mode::closed;
    double phi = 0.0;
    /// Insertion delay as a fraction of the pulse length T/2; edc modes only.
    double td_frac = 0.0;
    double period_T = 1e-6;
    std::size_t samples_per_period = 1000;
    std::uint64_t n_photons = 100000;
    std::uint64_t seed = 42;
    /// wheeler_delayed only: whether BS2 ends up inserted.
    bool insert_bs2 = true;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Where the insertion instant landed after snapping t_d to the grid.
struct InsertionAlignment {
    std::size_t pulse_samples = 0;
    std::size_t insertion_sample = 0;
    double requested_td_frac = 0.0;
    double effective_td_frac = 0.0;

    [[nodiscard]] double rounding() const noexcept { return effective_td_frac - requested_td_frac; }
};

/// Checks every config invariant and reports how t_d was rounded.
inline InsertionAlignment validate(const ExperimentConfig& cfg)
{
    if (!std::isfinite(cfg.phi)) throw ConfigError("phi must be finite");
    if (!(cfg.period_T > 0.0) || !std::isfinite(cfg.period_T)) throw ConfigError("period must be positive");
    if (cfg.samples_per_period < 2) throw ConfigError("samples_per_period must be at least 2");
    if (cfg.samples_per_period % 2 != 0)
        throw ConfigError("samples_per_period must be even so the T/2 pulse is sample-aligned");
    if (cfg.n_photons < 1) throw ConfigError("n_photons must be at least 1");
    if (!(cfg.td_frac >= 0.0 && cfg.td_frac <= 1.0)) throw ConfigError("td_frac must lie in [0, 1]");
    if (!is_edc(cfg.mode) && cfg.td_frac != 0.0)
        throw ConfigError("td_frac applies only to edc modes");

    InsertionAlignment a;
    a.pulse_samples = cfg.samples_per_period / 2;
    a.requested_td_frac = cfg.td_frac;
    a.insertion_sample = static_cast<std::size_t>(std::llround(cfg.td_frac * static_cast<double>(a.pulse_samples)));
    a.effective_td_frac = static_cast<double>(a.insertion_sample) / static_cast<double>(a.pulse_samples);
    return a;
}

/// Passed (front) and gated (back) parts of each arm just before the exit point.
struct ArmParts {
    std::array<SubWave, 2> passed;
    std::array<SubWave, 2> gated;
};

struct PropagationResult {
    Mode mode;
    std::array<SubWave, detector_count> detector_waves;
    std::optional<ArmParts> arms;

    [[nodiscard]] const SubWave& at(Detector d) const noexcept { return detector_waves[index(d)]; }

    [[nodiscard]] DetectorProbs norms() const noexcept
    {
        DetectorProbs p{};
        for (std::size_t i = 0; i < detector_count; ++i) p[i] = norm(detector_waves[i]);
        return p;
    }
};

namespace detail {

struct InFlight {
    TimeGrid grid;
    InsertionAlignment alignment;
    SubWave arm1; ///< after BS1, before the phase shifter
    SubWave arm2;

    [[nodiscard]] double insertion_time() const noexcept { return grid.time_at(alignment.insertion_sample); }
    [[nodiscard]] SubWave zero(const char* label) const { return SubWave(grid, label); }
};

inline InFlight launch(const ExperimentConfig& cfg)
{
    const InsertionAlignment a = validate(cfg);
    const TimeGrid grid = TimeGrid::over_period(cfg.period_T, cfg.samples_per_period);
    const SubWave source = make_rect_pulse(grid, grid.dt() * static_cast<double>(a.pulse_samples));
    auto [arm1, arm2] = beam_split(source, SubWave(grid, "vacuum"));
    return {grid, a, arm1.relabeled("arm1"), arm2.relabeled("arm2")};
}

inline void require_mode(const ExperimentConfig& cfg, Mode expected)
{
    if (cfg.mode != expected)
        throw ConfigError(std::string("config mode is ") + std::string(to_string(cfg.mode)) + ", expected " +
                          std::string(to_string(expected)));
}

inline PropagationResult open_outputs(Mode mode, const InFlight& f, double phi)
{
    return {mode,
            {apply_phase(f.arm1, phi).relabeled("D1"), f.arm2.relabeled("D2"), f.zero("D3"), f.zero("D4")},
            std::nullopt};
}

inline PropagationResult closed_outputs(Mode mode, const InFlight& f, double phi)
{
    auto [out1, out2] = recombine_bs2(f.arm1, f.arm2, phi);
    return {mode, {out1.relabeled("D1"), out2.relabeled("D2"), f.zero("D3"), f.zero("D4")}, std::nullopt};
}

} // namespace detail

/// BS2 absent: each arm goes straight to its detector.
inline PropagationResult run_open(const ExperimentConfig& cfg)
{
    detail::require_mode(cfg, Mode::open);
    return detail::open_outputs(Mode::open, detail::launch(cfg), cfg.phi);
}

/// BS2 present for the whole pulse.
inline PropagationResult run_closed(const ExperimentConfig& cfg)
{
    detail::require_mode(cfg, Mode::closed);
    return detail::closed_outputs(Mode::closed, detail::launch(cfg), cfg.phi);
}

/// Called once the photon is inside the interferometer; returns whether to insert BS2.
using InsertionChooser = std::function<bool(const SubWave& arm1, const SubWave& arm2)>;

/// Wheeler's delayed choice: the BS2 decision is taken after BS1 has acted.
inline PropagationResult run_wheeler_delayed(const ExperimentConfig& cfg, const InsertionChooser& choose)
{
    detail::require_mode(cfg, Mode::wheeler_delayed);
    const detail::InFlight f = detail::launch(cfg);
    const bool insert = choose ? choose(f.arm1, f.arm2) : cfg.insert_bs2;
    return insert ? detail::closed_outputs(Mode::wheeler_delayed, f, cfg.phi)
                  : detail::open_outputs(Mode::wheeler_delayed, f, cfg.phi);
}

inline PropagationResult run_wheeler_delayed(const ExperimentConfig& cfg)
{
    return run_wheeler_delayed(cfg, nullptr);
}

/// BS2 inserted while the pulse crosses the exit point. Front parts exit unrecombined to D1/D2
/// (arm 1 keeps its phase), back parts are recombined by BS2 onto the same two detectors.
inline PropagationResult run_edc_conceptual(const ExperimentConfig& cfg)
{
    detail::require_mode(cfg, Mode::edc_conceptual);
    const detail::InFlight f = detail::launch(cfg);
    const double t_cut = f.insertion_time();
    auto [p1, w1] = split_at_time(f.arm1, t_cut);
    auto [p2, w2] = split_at_time(f.arm2, t_cut);

    const SubWave out1_p = apply_phase(p1, cfg.phi);
    const SubWave& out2_p = p2;
    auto [out1_w, out2_w] = recombine_bs2(w1, w2, cfg.phi);

    return {Mode::edc_conceptual,
            {(out1_p + out1_w).relabeled("D1"), (out2_p + out2_w).relabeled("D2"), f.zero("D3"), f.zero("D4")},
            ArmParts{{p1, p2}, {w1, w2}}};
}

/// Control signal shared by both arm routers: 50% duty, high until the insertion instant.
inline GateTimeline bench_gate(const ExperimentConfig& cfg)
{
    const InsertionAlignment a = validate(cfg);
    const TimeGrid grid = TimeGrid::over_period(cfg.period_T, cfg.samples_per_period);
    const double t_d = grid.dt() * static_cast<double>(a.insertion_sample);
    return GateTimeline::square_wave(cfg.period_T, 0.5, t_d - 0.5 * cfg.period_T);
}

/// Four-detector bench: gated routers in both arms send the front parts to D3/D4 and reflect the
/// back parts into BS2, whose outputs reach D1/D2.
inline PropagationResult run_edc_bench(const ExperimentConfig& cfg, const GateTimeline& gate)
{
    detail::require_mode(cfg, Mode::edc_bench);
    const detail::InFlight f = detail::launch(cfg);
    auto [tx1, rx1] = gated_route(f.arm1, gate);
    auto [tx2, rx2] = gated_route(f.arm2, gate);
    auto [out1, out2] = recombine_bs2(rx1, rx2, cfg.phi);
    return {Mode::edc_bench,
            {out1.relabeled("D1"), out2.relabeled("D2"), tx1.relabeled("D3"), tx2.relabeled("D4")},
            ArmParts{{tx1, tx2}, {rx1, rx2}}};
}

inline PropagationResult run_edc_bench(const ExperimentConfig& cfg) { return run_edc_bench(cfg, bench_gate(cfg)); }

/// Dispatch on `cfg.mode`.
inline PropagationResult run(const ExperimentConfig& cfg)
{
    switch (cfg.mode) {
    case Mode::open: return run_open(cfg);
    case Mode::closed: return run_closed(cfg);
    case Mode::wheeler_delayed: return run_wheeler_delayed(cfg);
    case Mode::edc_conceptual: return run_edc_conceptual(cfg);
    case Mode::edc_bench: return run_edc_bench(cfg);
    }
    throw ConfigError("unknown mode");
}

} // namespace edc
