#pragma once

// Structural recognition of the five experiment topologies in a parsed bench program.

#include "edc/bench.hpp"
#include "edc/error.hpp"
#include "edc/experiment.hpp"
#include "edc/mode.hpp"

#include <array>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <utility>

namespace edc::bench {

struct BenchBinding {
    ExperimentConfig config;
    /// Declared detector names in D1..D4 order; empty for detectors the mode does not use.
    std::array<std::string, detector_count> detector_names;
    /// Phase set on the program's phase shifters (arm 1 minus arm 2).
    double nominal_phi = 0.0;
    /// Transmitted fraction of the pulse implied by the program's own signal timing.
    double nominal_td_frac = 0.0;
};

namespace detail {

struct Chain {
    Endpoint end;     ///< first non-passthrough input reached
    double phase = 0; ///< accumulated phase-shifter phase
    bool found = false;
};

class Topology {
public:
    explicit Topology(const BenchProgram& p) : prog_(p)
    {
        for (const auto& c : p.wiring) next_[{c.from.node, c.from.port}] = c.to;
    }

    /// Follows mirrors and phase shifters from an output port.
    [[nodiscard]] Chain follow(const std::string& node, const std::string& port) const
    {
        Chain ch;
        std::string n = node;
        std::string pt = port;
        for (std::size_t guard = 0; guard <= prog_.elements.size(); ++guard) {
            const auto it = next_.find({n, pt});
            if (it == next_.end()) return ch;
            const Endpoint& to = it->second;
            const ElementSpec* el = prog_.find_element(to.node);
            if (el && (el->kind == ElementKind::mirror || el->kind == ElementKind::phase_shifter)) {
                if (el->kind == ElementKind::phase_shifter) ch.phase += el->phase;
                n = el->name;
                pt = "out";
                continue;
            }
            ch.end = to;
            ch.found = true;
            return ch;
        }
        return ch;
    }

    [[nodiscard]] const ElementSpec* element(const Endpoint& e) const { return prog_.find_element(e.node); }
    [[nodiscard]] bool detector(const Chain& c) const { return c.found && prog_.is_detector(c.end.node); }

    [[nodiscard]] const ElementSpec* kind_at(const Chain& c, ElementKind k) const
    {
        if (!c.found) return nullptr;
        const ElementSpec* el = element(c.end);
        return el && el->kind == k ? el : nullptr;
    }

    /// The one input of `bs` not fed from `taken`, and whether it is vacuum.
    [[nodiscard]] bool other_input_is_vacuum(const ElementSpec& bs, const std::string& taken_port) const
    {
        const std::string other = taken_port == "in1" ? "in2" : "in1";
        for (const auto& c : prog_.wiring)
            if (c.to.node == bs.name && c.to.port == other) return c.from.node == vacuum_node;
        return false;
    }

    [[nodiscard]] std::size_t count(ElementKind k) const
    {
        std::size_t n = 0;
        for (const auto& e : prog_.elements) n += e.kind == k;
        return n;
    }

private:
    const BenchProgram& prog_;
    std::map<std::pair<std::string, std::string>, Endpoint> next_;
};

[[noreturn]] inline void reject(const BenchProgram& p, const std::string& reason)
{
    struct Signature {
        Mode mode;
        std::size_t splitters, routers, detectors;
    };
    constexpr std::array<Signature, 5> known{{{Mode::open, 1, 0, 2},
                                              {Mode::closed, 2, 0, 2},
                                              {Mode::wheeler_delayed, 2, 0, 2},
                                              {Mode::edc_conceptual, 2, 0, 2},
                                              {Mode::edc_bench, 2, 2, 4}}};
    const Topology t(p);
    const std::size_t bs = t.count(ElementKind::beam_splitter);
    const std::size_t gr = t.count(ElementKind::gated_router);
    const std::size_t det = p.detectors.size();
    auto dist = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };
    const Signature* best = &known[0];
    std::size_t best_d = static_cast<std::size_t>(-1);
    for (const auto& s : known) {
        const std::size_t d = dist(s.splitters, bs) + dist(s.routers, gr) + dist(s.detectors, det);
        if (d < best_d) {
            best_d = d;
            best = &s;
        }
    }
    throw TopologyError("unrecognized topology: " + reason + "; closest known mode is " +
                        std::string(to_string(best->mode)) + " (" + std::to_string(best->splitters) +
                        " beam splitters, " + std::to_string(best->routers) + " gated routers, " +
                        std::to_string(best->detectors) + " detectors)");
}

// Fraction of the source pulse that falls in the high phase of `gate`, exact over rationals.
inline Rational high_overlap_fraction(const BenchProgram& p, const Signal& gate)
{
    const Rational T = p.source.period;
    const Signal* carve = p.source.signal.empty() ? nullptr : p.find_signal(p.source.signal);
    const Rational pulse_start = carve ? carve->delay : Rational(0);
    const Rational pulse_len = p.source.duty * T;

    auto intervals = [&](Rational start, Rational len) {
        std::vector<std::pair<Rational, Rational>> iv;
        // Normalise start into [0, T).
        while (start < 0) start += T;
        while (start >= T) start -= T;
        const Rational end = start + len;
        if (end <= T) {
            iv.emplace_back(start, end);
        } else {
            iv.emplace_back(start, T);
            iv.emplace_back(Rational(0), end - T);
        }
        return iv;
    };
    Rational overlap = 0;
    for (const auto& [a0, a1] : intervals(pulse_start, pulse_len))
        for (const auto& [b0, b1] : intervals(gate.delay, gate.duty * T)) {
            const Rational lo = a0 > b0 ? a0 : b0;
            const Rational hi = a1 < b1 ? a1 : b1;
            if (hi > lo) overlap += hi - lo;
        }
    return overlap / pulse_len;
}

} // namespace detail

/// Infers the experiment mode from the wiring and binds `phi` and `td_frac` into a config.
/// Throws TopologyError naming the closest known mode when nothing matches.
inline BenchBinding to_experiment_config(const BenchProgram& p, std::optional<double> phi = std::nullopt,
                                         std::optional<double> td_frac = std::nullopt)
{
    using detail::reject;
    const detail::Topology t(p);
    if (p.source.duty != Rational(1, 2)) reject(p, "source duty must be 50%");
    if (p.source.normalization != 1.0) reject(p, "source must carry a single normalized photon (norm = 1)");

    const detail::Chain entry = t.follow(p.source.name, "out");
    const ElementSpec* bs1 = t.kind_at(entry, ElementKind::beam_splitter);
    if (!bs1) reject(p, "the source must feed a beam splitter");
    if (!t.other_input_is_vacuum(*bs1, entry.end.port)) reject(p, "the input beam splitter's second port must be vacuum");
    if (entry.phase != 0.0) reject(p, "a phase shifter before the input beam splitter has no effect on a single input");

    const detail::Chain arm1 = t.follow(bs1->name, "out1");
    const detail::Chain arm2 = t.follow(bs1->name, "out2");

    BenchBinding b;
    b.nominal_phi = arm1.phase - arm2.phase;
    ExperimentConfig& cfg = b.config;
    cfg.period_T = to_double(p.source.period);
    cfg.samples_per_period = p.source.samples;
    cfg.phi = phi.value_or(b.nominal_phi);

    auto bind_output_splitter = [&](const ElementSpec& bs2, const detail::Chain& a1, const detail::Chain& a2) {
        if (a1.end.port == a2.end.port) reject(p, "both arms enter the same port of " + bs2.name);
        const detail::Chain o1 = t.follow(bs2.name, "out1");
        const detail::Chain o2 = t.follow(bs2.name, "out2");
        if (!t.detector(o1) || !t.detector(o2) || o1.end.node == o2.end.node)
            reject(p, "the output beam splitter must feed two distinct detectors");
        if (o1.phase != 0.0 || o2.phase != 0.0) reject(p, "phase shifters after the output beam splitter are not modeled");
        b.detector_names[0] = o1.end.node;
        b.detector_names[1] = o2.end.node;
    };

    std::size_t used_detectors = 2;
    if (t.detector(arm1) && t.detector(arm2)) {
        if (arm1.end.node == arm2.end.node) reject(p, "both arms end on one detector");
        cfg.mode = Mode::open;
        b.detector_names = {arm1.end.node, arm2.end.node, "", ""};
    } else if (const ElementSpec* bs2 = t.kind_at(arm1, ElementKind::beam_splitter);
               bs2 && t.kind_at(arm2, ElementKind::beam_splitter) == bs2) {
        bind_output_splitter(*bs2, arm1, arm2);
        switch (bs2->insertion) {
        case Insertion::fixed: cfg.mode = Mode::closed; break;
        case Insertion::choice_insert:
        case Insertion::choice_omit:
            cfg.mode = Mode::wheeler_delayed;
            cfg.insert_bs2 = bs2->insertion == Insertion::choice_insert;
            break;
        case Insertion::signal: {
            cfg.mode = Mode::edc_conceptual;
            if (const Signal* s = p.find_signal(bs2->signal))
                b.nominal_td_frac = to_double(detail::high_overlap_fraction(p, *s));
            break;
        }
        }
    } else if (const ElementSpec* r1 = t.kind_at(arm1, ElementKind::gated_router)) {
        const ElementSpec* r2 = t.kind_at(arm2, ElementKind::gated_router);
        if (!r2 || r2 == r1) reject(p, "both arms need their own gated router");
        if (r1->signal != r2->signal) reject(p, "the arm routers must share one control signal (in-phase)");
        const detail::Chain pass1 = t.follow(r1->name, "pass");
        const detail::Chain pass2 = t.follow(r2->name, "pass");
        if (!t.detector(pass1) || !t.detector(pass2) || pass1.end.node == pass2.end.node)
            reject(p, "router pass ports must feed two distinct detectors");
        const detail::Chain refl1 = t.follow(r1->name, "refl");
        const detail::Chain refl2 = t.follow(r2->name, "refl");
        const ElementSpec* bs2 = t.kind_at(refl1, ElementKind::beam_splitter);
        if (!bs2 || t.kind_at(refl2, ElementKind::beam_splitter) != bs2)
            reject(p, "router reflect ports must meet at one output beam splitter");
        if (bs2->insertion != Insertion::fixed) reject(p, "the output beam splitter behind gated routers must be fixed");
        bind_output_splitter(*bs2, refl1, refl2);
        b.nominal_phi += refl1.phase - refl2.phase;
        cfg.phi = phi.value_or(b.nominal_phi);
        b.detector_names[2] = pass1.end.node;
        b.detector_names[3] = pass2.end.node;
        cfg.mode = Mode::edc_bench;
        used_detectors = 4;
        if (const Signal* s = p.find_signal(r1->signal)) b.nominal_td_frac = to_double(detail::high_overlap_fraction(p, *s));
    } else {
        reject(p, "arms from the input beam splitter do not reach detectors, one output beam splitter, or two gated routers");
    }

    if (p.detectors.size() != used_detectors)
        reject(p, std::to_string(p.detectors.size()) + " detectors declared but the wiring uses " +
                      std::to_string(used_detectors));
    const std::size_t expected_elements =
        cfg.mode == Mode::open ? 1 : cfg.mode == Mode::edc_bench ? 4 : 2;
    const std::size_t active = t.count(ElementKind::beam_splitter) + t.count(ElementKind::gated_router);
    if (active != expected_elements) reject(p, "extra beam splitters or routers outside the recognized paths");

    if (is_edc(cfg.mode)) cfg.td_frac = td_frac.value_or(b.nominal_td_frac);
    validate(cfg);
    return b;
}

} // namespace edc::bench
