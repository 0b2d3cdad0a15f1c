#pragma once

// In-memory form of a `.bench` optical-bench description and its canonical text rendering.

#include "edc/optics.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace edc::bench {

/// Exact timing quantity (seconds, or a dimensionless fraction) kept until grid binding.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

struct PulseSource {
    std::string name;
    Rational period{0};
    Rational duty{1, 2};
    double normalization = 1.0;
    std::size_t samples = 1000;
    std::string signal; ///< optional carving signal

    friend bool operator==(const PulseSource&, const PulseSource&) = default;
};

struct Signal {
    std::string name;
    Rational period{0};
    Rational duty{1, 2};
    Rational delay{0};

    [[nodiscard]] GateTimeline timeline() const
    {
        return GateTimeline::square_wave(to_double(period), to_double(duty), to_double(delay));
    }

    friend bool operator==(const Signal&, const Signal&) = default;
};

struct Endpoint {
    std::string node;
    std::string port;

    friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct Connection {
    Endpoint from;
    Endpoint to;

    friend bool operator==(const Connection&, const Connection&) = default;
};

enum class SweepVariable { phi, td_frac };

struct Sweep {
    SweepVariable variable = SweepVariable::phi;
    double start = 0.0;
    double stop = 0.0;
    std::size_t steps = 2;
    std::optional<double> fixed;

    friend bool operator==(const Sweep&, const Sweep&) = default;
};

/// Name of the implicit zero-amplitude input feeding unused beam-splitter ports.
inline constexpr const char* vacuum_node = "vacuum";

struct BenchProgram {
    PulseSource source;
    std::vector<Signal> signals;
    std::vector<ElementSpec> elements;
    std::vector<std::string> detectors;
    std::vector<Connection> wiring;
    std::vector<Sweep> sweeps;

    [[nodiscard]] const Signal* find_signal(const std::string& name) const
    {
        for (const auto& s : signals)
            if (s.name == name) return &s;
        return nullptr;
    }

    [[nodiscard]] const ElementSpec* find_element(const std::string& name) const
    {
        for (const auto& e : elements)
            if (e.name == name) return &e;
        return nullptr;
    }

    [[nodiscard]] bool is_detector(const std::string& name) const
    {
        for (const auto& d : detectors)
            if (d == name) return true;
        return false;
    }

    friend bool operator==(const BenchProgram&, const BenchProgram&) = default;
};

namespace detail {

inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Exact decimal text of `r` if its expansion terminates within 40 digits.
inline std::optional<std::string> terminating_decimal(Rational r)
{
    using boost::multiprecision::cpp_int;
    const bool negative = r < 0;
    if (negative) r = -r;
    int digits = 0;
    while (denominator(r) != 1) {
        if (++digits > 40) return std::nullopt;
        r *= 10;
    }
    std::string s = numerator(r).str();
    if (digits > 0) {
        if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
        s.insert(s.size() - static_cast<std::size_t>(digits), ".");
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    return negative ? "-" + s : s;
}

inline std::string format_rational(const Rational& r)
{
    if (auto d = terminating_decimal(r)) return *d;
    return numerator(r).str() + "/" + denominator(r).str();
}

inline std::string format_duration(const Rational& seconds)
{
    const Rational ns = seconds * 1000000000;
    if (auto d = terminating_decimal(ns)) return *d + " ns";
    return format_rational(seconds) + " s";
}

inline std::string format_period(const Rational& period)
{
    const Rational ns = period * 1000000000;
    if (auto d = terminating_decimal(ns)) return "period = " + *d + " ns";
    const Rational hz = Rational(1) / period;
    if (auto d = terminating_decimal(hz)) return "rate = " + *d + " Hz";
    return "period = " + format_rational(period) + " s";
}

inline std::string format_fraction(const Rational& f)
{
    if (auto d = terminating_decimal(f * 100)) return *d + "%";
    return format_rational(f);
}

} // namespace detail

inline std::string_view to_string(SweepVariable v) noexcept { return v == SweepVariable::phi ? "phi" : "td_frac"; }

/// Canonical text: sections in a fixed order, one key per line, exact values.
inline std::string format(const BenchProgram& p)
{
    using namespace detail;
    std::ostringstream os;
    const auto& s = p.source;
    os << "source " << s.name << " {\n"
       << "    " << format_period(s.period) << ";\n"
       << "    duty = " << format_fraction(s.duty) << ";\n"
       << "    norm = " << format_double(s.normalization) << ";\n"
       << "    samples = " << s.samples << ";\n";
    if (!s.signal.empty()) os << "    signal = " << s.signal << ";\n";
    os << "}\n";

    for (const auto& sig : p.signals) {
        os << "\nsignal " << sig.name << " {\n"
           << "    " << format_period(sig.period) << ";\n"
           << "    duty = " << format_fraction(sig.duty) << ";\n"
           << "    delay = " << format_duration(sig.delay) << ";\n"
           << "}\n";
    }

    if (!p.elements.empty()) os << "\n";
    for (const auto& e : p.elements) {
        os << "element " << e.name << " : " << to_string(e.kind) << " {";
        switch (e.kind) {
        case ElementKind::phase_shifter: os << " phi = " << format_double(e.phase) << "; "; break;
        case ElementKind::gated_router: os << " signal = " << e.signal << "; "; break;
        case ElementKind::beam_splitter:
            if (e.insertion == Insertion::signal)
                os << " insert = " << e.signal << "; ";
            else if (e.insertion == Insertion::choice_insert)
                os << " choice = insert; ";
            else if (e.insertion == Insertion::choice_omit)
                os << " choice = omit; ";
            else
                os << " ";
            break;
        case ElementKind::mirror: os << " "; break;
        }
        os << "}\n";
    }

    if (!p.detectors.empty()) os << "\n";
    for (const auto& d : p.detectors) os << "detector " << d << "\n";

    if (!p.wiring.empty()) os << "\n";
    for (const auto& c : p.wiring)
        os << "connect " << c.from.node << "." << c.from.port << " -> " << c.to.node << "." << c.to.port << "\n";

    for (const auto& sw : p.sweeps) {
        os << "\nsweep " << to_string(sw.variable) << " {\n"
           << "    start = " << format_double(sw.start) << ";\n"
           << "    stop = " << format_double(sw.stop) << ";\n"
           << "    steps = " << sw.steps << ";\n";
        if (sw.fixed) os << "    fixed = " << format_double(*sw.fixed) << ";\n";
        os << "}\n";
    }
    return os.str();
}

} // namespace edc::bench
