#pragma once

// Wave packets sampled on a uniform time grid.
//
// A SubWave holds complex amplitudes a_i at times origin + i*dt. Norms follow the integral
// convention sum |a_i|^2 * dt so probabilities do not depend on the grid resolution.

#include "edc/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace edc {

using Complex = std::complex<double>;

/// Absolute tolerance used for amplitude and norm equalities.
inline constexpr double amplitude_tolerance = 1e-12;

namespace detail {

// Neumaier-compensated accumulator; grids may carry 10^6 samples.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline bool is_finite(Complex z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

} // namespace detail

class TimeGrid {
public:
    TimeGrid(std::size_t n_samples, double dt, double origin = 0.0)
        : n_samples_(n_samples), dt_(dt), origin_(origin)
    {
        if (n_samples < 2) throw ConfigError("time grid needs at least 2 samples");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time grid step must be positive");
        if (!std::isfinite(origin)) throw ConfigError("time grid origin must be finite");
    }

    /// Grid covering one period with `samples` samples starting at t = 0.
    static TimeGrid over_period(double period, std::size_t samples)
    {
        if (!(period > 0.0)) throw ConfigError("period must be positive");
        return TimeGrid(samples, period / static_cast<double>(samples));
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_samples_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double origin() const noexcept { return origin_; }
    [[nodiscard]] double span() const noexcept { return dt_ * static_cast<double>(n_samples_); }
    [[nodiscard]] double time_at(std::size_t i) const noexcept
    {
        return origin_ + dt_ * static_cast<double>(i);
    }

    /// Number of samples covered by `duration`; throws unless it is a whole number.
    [[nodiscard]] std::size_t samples_in(double duration) const
    {
        const double x = duration / dt_;
        const double k = std::round(x);
        if (!std::isfinite(x) || std::abs(x - k) > 1e-9 * std::max(1.0, std::abs(x)))
            throw ConfigError("duration is not aligned to the sample grid");
        return static_cast<std::size_t>(k);
    }

    /// Sample index of the boundary at time `t`, in [0, size()].
    [[nodiscard]] std::size_t boundary_index(double t) const
    {
        const double x = (t - origin_) / dt_;
        const double k = std::round(x);
        if (!std::isfinite(x) || std::abs(x - k) > 1e-9 * std::max(1.0, std::abs(x)))
            throw ConfigError("time is not aligned to a sample boundary");
        if (k < 0.0 || k > static_cast<double>(n_samples_))
            throw ConfigError("time lies outside the grid");
        return static_cast<std::size_t>(k);
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::size_t n_samples_;
    double dt_;
    double origin_;
};

/// One path's wave-function segment. Immutable once built.
class SubWave {
public:
    /// All-zero wave on `grid`.
    explicit SubWave(TimeGrid grid, std::string label = {})
        : grid_(grid), amps_(grid.size(), Complex{}), label_(std::move(label))
    {
    }

    SubWave(TimeGrid grid, std::vector<Complex> amps, std::string label = {})
        : grid_(grid), amps_(std::move(amps)), label_(std::move(label))
    {
        if (amps_.size() != grid_.size()) throw GridError("amplitude count does not match grid size");
        for (const Complex& a : amps_)
            if (!detail::is_finite(a)) throw ConfigError("non-finite amplitude");
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const Complex> amps() const noexcept { return amps_; }
    [[nodiscard]] const Complex& operator[](std::size_t i) const noexcept { return amps_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return amps_.size(); }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }

    [[nodiscard]] SubWave relabeled(std::string label) const
    {
        SubWave w = *this;
        w.label_ = std::move(label);
        return w;
    }

    [[nodiscard]] bool is_zero() const noexcept
    {
        for (const Complex& a : amps_)
            if (a != Complex{}) return false;
        return true;
    }

private:
    TimeGrid grid_;
    std::vector<Complex> amps_;
    std::string label_;
};

inline void require_same_grid(const SubWave& a, const SubWave& b)
{
    if (a.grid() != b.grid()) throw GridError("sub-waves live on different time grids");
}

/// Unit-norm rectangular pulse occupying [origin, origin + duration).
inline SubWave make_rect_pulse(const TimeGrid& grid, double duration, std::string label = "source")
{
    if (!(duration > 0.0)) throw ConfigError("pulse duration must be positive");
    const std::size_t count = grid.samples_in(duration);
    if (count == 0 || count > grid.size()) throw ConfigError("pulse duration exceeds the grid span");
    const Complex level{1.0 / std::sqrt(static_cast<double>(count) * grid.dt()), 0.0};
    std::vector<Complex> amps(grid.size(), Complex{});
    std::fill_n(amps.begin(), count, level);
    return SubWave(grid, std::move(amps), std::move(label));
}

inline double norm(const SubWave& w) noexcept
{
    detail::CompensatedSum s;
    for (const Complex& a : w.amps()) s.add(std::norm(a));
    return s.value() * w.grid().dt();
}

/// sum conj(a_i) * b_i * dt.
inline Complex inner_product(const SubWave& a, const SubWave& b)
{
    require_same_grid(a, b);
    detail::CompensatedSum re;
    detail::CompensatedSum im;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Complex z = std::conj(a[i]) * b[i];
        re.add(z.real());
        im.add(z.imag());
    }
    const double dt = a.grid().dt();
    return {re.value() * dt, im.value() * dt};
}

struct SplitWave {
    SubWave front;
    SubWave back;
};

/// Partition `w` at `t_cut`: samples strictly before go to `front`, the sample at t_cut and
/// everything after go to `back`.
inline SplitWave split_at_time(const SubWave& w, double t_cut)
{
    const std::size_t k = w.grid().boundary_index(t_cut);
    std::vector<Complex> front(w.size(), Complex{});
    std::vector<Complex> back(w.size(), Complex{});
    for (std::size_t i = 0; i < w.size(); ++i) (i < k ? front : back)[i] = w[i];
    return {SubWave(w.grid(), std::move(front), w.label() + ".front"),
            SubWave(w.grid(), std::move(back), w.label() + ".back")};
}

/// Samplewise a + b.
inline SubWave operator+(const SubWave& a, const SubWave& b)
{
    require_same_grid(a, b);
    std::vector<Complex> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return SubWave(a.grid(), std::move(out), a.label());
}

inline SubWave operator-(const SubWave& a, const SubWave& b)
{
    require_same_grid(a, b);
    std::vector<Complex> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return SubWave(a.grid(), std::move(out), a.label());
}

inline SubWave operator*(Complex c, const SubWave& w)
{
    std::vector<Complex> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = c * w[i];
    return SubWave(w.grid(), std::move(out), w.label());
}

/// Largest samplewise |a_i - b_i|.
inline double max_abs_diff(const SubWave& a, const SubWave& b)
{
    require_same_grid(a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace edc
