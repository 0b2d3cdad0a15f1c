#pragma once

// Collapse sampling and count estimators.

#include "edc/analytic.hpp"
#include "edc/error.hpp"
#include "edc/experiment.hpp"
#include "edc/mode.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

namespace edc {

using DetectorCounts = std::array<std::uint64_t, detector_count>;

/// Counter-based uniform stream: the draw for photon `i` depends only on (seed, i), so any
/// partition of photon indices across workers yields the same counts.
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t seed) noexcept : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

    [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept
    {
        return mix(key_ + (counter + 1) * golden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    [[nodiscard]] constexpr double uniform(std::uint64_t counter) const noexcept
    {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

    // SplitMix64 finalizer.
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
};

struct DetectionRecord {
    DetectorCounts counts{};
    std::uint64_t n_photons = 0;
    DetectorProbs probs{};
    std::uint64_t seed = 0;

    [[nodiscard]] std::uint64_t total() const noexcept
    {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

inline constexpr double conservation_tolerance = 1e-9;

namespace detail {

// Cumulative thresholds over renormalized probabilities. The last detector with nonzero
// probability absorbs u values past the final threshold, so zero-probability detectors are
// never chosen.
class CategoricalTable {
public:
    explicit CategoricalTable(const DetectorProbs& probs)
    {
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw ConservationError("detector probabilities must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > conservation_tolerance)
            throw ConservationError("detector probabilities sum to " + std::to_string(sum) + ", not 1");
        double acc = 0.0;
        for (std::size_t i = 0; i < detector_count; ++i) {
            acc += probs[i] / sum;
            cum_[i] = acc;
            if (probs[i] > 0.0) last_nonzero_ = i;
        }
    }

    [[nodiscard]] std::size_t pick(double u) const noexcept
    {
        for (std::size_t i = 0; i < last_nonzero_; ++i)
            if (u < cum_[i]) return i;
        return last_nonzero_;
    }

private:
    std::array<double, detector_count> cum_{};
    std::size_t last_nonzero_ = 0;
};

inline DetectorCounts sample_range(const CategoricalTable& table, const CounterRng& rng, std::uint64_t begin,
                                   std::uint64_t end)
{
    DetectorCounts c{};
    for (std::uint64_t i = begin; i < end; ++i) ++c[table.pick(rng.uniform(i))];
    return c;
}

} // namespace detail

/// One categorical draw per photon over the detector probabilities. `workers == 0` picks the
/// hardware concurrency; the result never depends on it.
inline DetectionRecord sample_clicks(const DetectorProbs& probs, std::uint64_t n_photons, std::uint64_t seed,
                                     unsigned workers = 1)
{
    if (n_photons < 1) throw ConfigError("n_photons must be at least 1");
    const detail::CategoricalTable table(probs);
    const CounterRng rng(seed);

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    const std::uint64_t chunks = std::min<std::uint64_t>(workers, n_photons);

    DetectionRecord rec{{}, n_photons, probs, seed};
    if (chunks <= 1) {
        rec.counts = detail::sample_range(table, rng, 0, n_photons);
        return rec;
    }
    std::vector<DetectorCounts> partial(chunks);
    {
        std::vector<std::jthread> pool;
        pool.reserve(chunks);
        for (std::uint64_t k = 0; k < chunks; ++k) {
            const std::uint64_t begin = n_photons * k / chunks;
            const std::uint64_t end = n_photons * (k + 1) / chunks;
            pool.emplace_back([&, k, begin, end] { partial[k] = detail::sample_range(table, rng, begin, end); });
        }
    }
    for (const auto& c : partial)
        for (std::size_t d = 0; d < detector_count; ++d) rec.counts[d] += c[d];
    return rec;
}

inline DetectionRecord sample_clicks(const PropagationResult& result, std::uint64_t n_photons, std::uint64_t seed,
                                     unsigned workers = 1)
{
    return sample_clicks(result.norms(), n_photons, seed, workers);
}

/// A count ratio with its binomial standard error sqrt(p(1-p)/n).
struct Ratio {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t denominator = 0;
};

/// nullopt when the denominator is zero.
using Estimate = std::optional<Ratio>;

inline Estimate ratio(std::uint64_t num, std::uint64_t den)
{
    if (den == 0) return std::nullopt;
    const double p = static_cast<double>(num) / static_cast<double>(den);
    return Ratio{p, std::sqrt(p * (1.0 - p) / static_cast<double>(den)), den};
}

struct EstimatorSet {
    Estimate r_w_pair;  ///< N1 / (N1 + N2)
    Estimate r_w_total; ///< N1 / Nt
    Estimate r_p;       ///< N3 / (N3 + N4)
    Estimate p_w_hat;   ///< (N1 + N2) / Nt
    Estimate p_p_hat;   ///< (N3 + N4) / Nt
};

inline EstimatorSet estimators(const DetectionRecord& rec)
{
    if (rec.n_photons < 1) throw ConfigError("record holds no photons");
    const auto& n = rec.counts;
    const std::uint64_t total = rec.total();
    const std::uint64_t wave = n[0] + n[1];
    const std::uint64_t particle = n[2] + n[3];
    EstimatorSet e;
    e.r_w_pair = ratio(n[0], wave);
    e.r_w_total = ratio(n[0], total);
    e.r_p = ratio(n[2], particle);
    e.p_w_hat = ratio(wave, total);
    e.p_p_hat = ratio(particle, total);
    // Complementary by construction; compute one side from the other so the pair sums to one.
    if (e.p_w_hat && e.p_p_hat && e.p_w_hat->value + e.p_p_hat->value != 1.0) {
        if (wave >= particle)
            e.p_w_hat->value = 1.0 - e.p_p_hat->value;
        else
            e.p_p_hat->value = 1.0 - e.p_w_hat->value;
    }
    return e;
}

enum class FitStatus { pass, fail, insufficient_statistics };

struct ChiSquareReport {
    FitStatus status = FitStatus::insufficient_statistics;
    double statistic = 0.0;
    unsigned degrees_of_freedom = 0;
    double p_value = 1.0;
    double significance = 0.001;
    /// Counts landed on a detector the prediction gives zero probability.
    bool impossible_counts = false;
};

inline constexpr double default_significance = 0.001;

/// Pearson goodness of fit over detectors with non-negligible expected probability.
inline ChiSquareReport chi_square_check(const DetectionRecord& rec, const DetectorProbs& expected,
                                        double significance = default_significance)
{
    ChiSquareReport rep;
    rep.significance = significance;
    const double n = static_cast<double>(rec.total());
    unsigned cells = 0;
    for (std::size_t d = 0; d < detector_count; ++d) {
        if (expected[d] <= amplitude_tolerance) {
            if (rec.counts[d] != 0) rep.impossible_counts = true;
            continue;
        }
        const double e = expected[d] * n;
        if (e < 5.0) return rep;
        const double diff = static_cast<double>(rec.counts[d]) - e;
        rep.statistic += diff * diff / e;
        ++cells;
    }
    if (cells == 0) return rep;
    if (rep.impossible_counts) {
        rep.status = FitStatus::fail;
        rep.p_value = 0.0;
        return rep;
    }
    rep.degrees_of_freedom = cells - 1;
    if (rep.degrees_of_freedom == 0) {
        rep.p_value = 1.0;
    } else {
        const boost::math::chi_squared dist(rep.degrees_of_freedom);
        rep.p_value = boost::math::cdf(boost::math::complement(dist, rep.statistic));
    }
    rep.status = rep.p_value >= significance ? FitStatus::pass : FitStatus::fail;
    return rep;
}

/// Compares against the four-detector split when the mode uses D3/D4, else against (p1, p2).
inline ChiSquareReport chi_square_check(const DetectionRecord& rec, const AnalyticPrediction& pred, Mode mode,
                                        double significance = default_significance)
{
    const DetectorProbs expected =
        mode == Mode::edc_bench ? pred.bench_norms : DetectorProbs{pred.p1, pred.p2, 0.0, 0.0};
    return chi_square_check(rec, expected, significance);
}

} // namespace edc
