#pragma once

#include "edc/error.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace edc {

enum class Mode { open, closed, wheeler_delayed, edc_conceptual, edc_bench };

inline constexpr std::array<Mode, 5> all_modes{Mode::open, Mode::closed, Mode::wheeler_delayed,
                                               Mode::edc_conceptual, Mode::edc_bench};

constexpr std::string_view to_string(Mode m) noexcept
{
    switch (m) {
    case Mode::open: return "open";
    case Mode::closed: return "closed";
    case Mode::wheeler_delayed: return "wheeler_delayed";
    case Mode::edc_conceptual: return "edc_conceptual";
    case Mode::edc_bench: return "edc_bench";
    }
    return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) noexcept
{
    for (Mode m : all_modes)
        if (to_string(m) == s) return m;
    return std::nullopt;
}

constexpr bool is_edc(Mode m) noexcept { return m == Mode::edc_conceptual || m == Mode::edc_bench; }

/// Output detectors. D1/D2 sit behind the output beam splitter, D3/D4 behind the gated routers.
enum class Detector : std::size_t { D1 = 0, D2 = 1, D3 = 2, D4 = 3 };

inline constexpr std::size_t detector_count = 4;

constexpr std::string_view to_string(Detector d) noexcept
{
    constexpr std::array<std::string_view, detector_count> names{"D1", "D2", "D3", "D4"};
    return names[static_cast<std::size_t>(d)];
}

constexpr std::size_t index(Detector d) noexcept { return static_cast<std::size_t>(d); }

/// Probability (or count) per detector, indexed by `index(Detector)`.
using DetectorProbs = std::array<double, detector_count>;

} // namespace edc
