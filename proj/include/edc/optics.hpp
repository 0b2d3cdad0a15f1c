#pragma once

// Optical element transforms acting on SubWaves.

#include "edc/error.hpp"
#include "edc/wave.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edc {

inline const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

struct WavePair {
    SubWave first;
    SubWave second;
};

/// Input beam splitter (Hadamard): out1 = (in1 + in2)/sqrt2, out2 = (in1 - in2)/sqrt2.
inline WavePair beam_split(const SubWave& in1, const SubWave& in2)
{
    require_same_grid(in1, in2);
    std::vector<Complex> o1(in1.size());
    std::vector<Complex> o2(in1.size());
    for (std::size_t i = 0; i < in1.size(); ++i) {
        o1[i] = (in1[i] + in2[i]) * inv_sqrt2;
        o2[i] = (in1[i] - in2[i]) * inv_sqrt2;
    }
    return {SubWave(in1.grid(), std::move(o1), "bs.out1"), SubWave(in1.grid(), std::move(o2), "bs.out2")};
}

/// Output beam splitter with the arm-1 phase folded in:
/// out1 = (e^{i phi} in1 - in2)/sqrt2, out2 = (e^{i phi} in1 + in2)/sqrt2.
inline WavePair recombine_bs2(const SubWave& in1, const SubWave& in2, double phi)
{
    require_same_grid(in1, in2);
    const Complex phase = std::polar(1.0, phi);
    std::vector<Complex> o1(in1.size());
    std::vector<Complex> o2(in1.size());
    for (std::size_t i = 0; i < in1.size(); ++i) {
        const Complex a = phase * in1[i];
        o1[i] = (a - in2[i]) * inv_sqrt2;
        o2[i] = (a + in2[i]) * inv_sqrt2;
    }
    return {SubWave(in1.grid(), std::move(o1), "bs2.out1"), SubWave(in1.grid(), std::move(o2), "bs2.out2")};
}

inline SubWave apply_phase(const SubWave& w, double phi)
{
    if (phi == 0.0) return w;
    return std::polar(1.0, phi) * w;
}

/// Lossless mirror; equal arm lengths make it an identity on the sampled envelope.
inline SubWave reflect(const SubWave& w) { return w; }

/// Periodic high/low control signal. Intervals are [start, end) offsets within one period.
class GateTimeline {
public:
    using Interval = std::pair<double, double>;

    GateTimeline(double period, std::vector<Interval> high_intervals)
        : period_(period), high_(std::move(high_intervals))
    {
        if (!(period_ > 0.0) || !std::isfinite(period_)) throw ConfigError("gate period must be positive");
        double last_end = 0.0;
        for (const auto& [start, end] : high_) {
            if (!(start >= 0.0) || !(end <= period_) || !(start < end))
                throw ConfigError("gate interval must satisfy 0 <= start < end <= period");
            if (start < last_end) throw ConfigError("gate intervals must be sorted and non-overlapping");
            last_end = end;
        }
    }

    /// Square wave high on [delay, delay + duty*period), wrapped into one period.
    static GateTimeline square_wave(double period, double duty, double delay)
    {
        if (!(duty >= 0.0 && duty <= 1.0)) throw ConfigError("duty cycle must lie in [0, 1]");
        if (!(period > 0.0)) throw ConfigError("gate period must be positive");
        double start = std::fmod(delay, period);
        if (start < 0.0) start += period;
        const double width = duty * period;
        std::vector<Interval> iv;
        if (width <= 0.0) return GateTimeline(period, {});
        if (width >= period) return GateTimeline(period, {{0.0, period}});
        const double end = start + width;
        if (end <= period) {
            iv.emplace_back(start, end);
        } else {
            iv.emplace_back(0.0, end - period);
            iv.emplace_back(start, period);
        }
        return GateTimeline(period, std::move(iv));
    }

    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] const std::vector<Interval>& high_intervals() const noexcept { return high_; }

    /// Gate level at time `t`. `tol` absorbs rounding at sample-aligned edges.
    [[nodiscard]] bool is_high(double t, double tol = 0.0) const noexcept
    {
        double phase = std::fmod(t, period_);
        if (phase < 0.0) phase += period_;
        if (phase > period_ - tol) phase = 0.0;
        for (const auto& [start, end] : high_)
            if (phase >= start - tol && phase < end - tol) return true;
        return false;
    }

private:
    double period_;
    std::vector<Interval> high_;
};

struct RoutedWave {
    SubWave transmitted; ///< gate high: router lifted, toward the open-path detectors
    SubWave reflected;   ///< gate low: toward the output beam splitter
};

/// Ideal electro-optic router. The grid must span a whole number of gate periods.
inline RoutedWave gated_route(const SubWave& w, const GateTimeline& gates)
{
    const TimeGrid& g = w.grid();
    const double cycles = g.span() / gates.period();
    if (std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles) || std::round(cycles) < 1.0)
        throw ConfigError("grid span is not a whole number of gate periods");
    const double tol = 1e-9 * g.dt();
    std::vector<Complex> tx(w.size(), Complex{});
    std::vector<Complex> rx(w.size(), Complex{});
    for (std::size_t i = 0; i < w.size(); ++i) (gates.is_high(g.time_at(i), tol) ? tx : rx)[i] = w[i];
    return {SubWave(g, std::move(tx), w.label() + ".pass"), SubWave(g, std::move(rx), w.label() + ".refl")};
}

enum class ElementKind { beam_splitter, phase_shifter, mirror, gated_router };

constexpr std::string_view to_string(ElementKind k) noexcept
{
    switch (k) {
    case ElementKind::beam_splitter: return "beam_splitter";
    case ElementKind::phase_shifter: return "phase_shifter";
    case ElementKind::mirror: return "mirror";
    case ElementKind::gated_router: return "gated_router";
    }
    return "?";
}

inline std::optional<ElementKind> parse_element_kind(std::string_view s) noexcept
{
    for (ElementKind k : {ElementKind::beam_splitter, ElementKind::phase_shifter, ElementKind::mirror,
                          ElementKind::gated_router})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// Port names are fixed per kind, which keeps the arity invariants true by construction.
inline std::vector<std::string> in_ports(ElementKind k)
{
    if (k == ElementKind::beam_splitter) return {"in1", "in2"};
    return {"in"};
}

inline std::vector<std::string> out_ports(ElementKind k)
{
    switch (k) {
    case ElementKind::beam_splitter: return {"out1", "out2"};
    case ElementKind::gated_router: return {"pass", "refl"};
    default: return {"out"};
    }
}

/// How a beam splitter is put in place. Only the output beam splitter uses anything but `fixed`.
enum class Insertion { fixed, signal, choice_insert, choice_omit };

struct ElementSpec {
    std::string name;
    ElementKind kind = ElementKind::mirror;
    double phase = 0.0;        // phase_shifter
    std::string signal;        // gated_router gate, or beam_splitter insertion signal
    Insertion insertion = Insertion::fixed; // beam_splitter

    [[nodiscard]] std::vector<std::string> inputs() const { return in_ports(kind); }
    [[nodiscard]] std::vector<std::string> outputs() const { return out_ports(kind); }

    friend bool operator==(const ElementSpec&, const ElementSpec&) = default;
};

} // namespace edc
