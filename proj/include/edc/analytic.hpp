#pragma once

// Closed-form detection probabilities. Nothing here touches sampled waves; this is the oracle the
// propagation and Monte Carlo paths are checked against.

#include "edc/error.hpp"
#include "edc/mode.hpp"

#include <cmath>

namespace edc {

struct AnalyticPrediction {
    double p1 = 0.0;  ///< D1, passed and gated parts on the same two detectors
    double p2 = 0.0;  ///< D2, same setting
    double p_w = 0.0; ///< interfering fraction
    double p_p = 0.0; ///< non-interfering fraction
    double r_w = 0.0; ///< D1 share of all four-detector counts
    double r_p = 0.0; ///< D3 share of D3+D4
    DetectorProbs bench_norms{}; ///< four-detector split (D1, D2, D3, D4)
};

inline AnalyticPrediction predict(double phi, double p_p)
{
    if (!(p_p >= 0.0 && p_p <= 1.0)) throw DomainError("p_p must lie in [0, 1]");
    const double s = std::sin(phi / 2.0);
    const double c = std::cos(phi / 2.0);
    const double half_cos = std::cos(phi) / 2.0;

    AnalyticPrediction out;
    out.p_p = p_p;
    out.p_w = 1.0 - p_p;
    out.p1 = s * s + half_cos * p_p;
    out.p2 = c * c - half_cos * p_p;
    out.r_p = 0.5;
    out.r_w = out.p_w / 2.0 * (1.0 - std::cos(phi));
    out.bench_norms = {out.p_w * s * s, out.p_w * c * c, p_p / 2.0, p_p / 2.0};
    return out;
}

/// Passed fraction for a uniform pulse: P_p = 2 t_d / T, which is the td fraction itself.
inline double p_p_from_delay(double td_frac)
{
    if (!(td_frac >= 0.0 && td_frac <= 1.0)) throw DomainError("td_frac must lie in [0, 1]");
    return td_frac;
}

/// Non-interfering fraction implied by a mode. `insert_bs2` matters only for wheeler_delayed.
inline double p_p_for_mode(Mode mode, double td_frac, bool insert_bs2 = true)
{
    switch (mode) {
    case Mode::open: return 1.0;
    case Mode::closed: return 0.0;
    case Mode::wheeler_delayed: return insert_bs2 ? 0.0 : 1.0;
    case Mode::edc_conceptual:
    case Mode::edc_bench: return p_p_from_delay(td_frac);
    }
    return 0.0;
}

/// Expected probability at each of the four detectors.
inline DetectorProbs detector_probabilities(Mode mode, double phi, double td_frac, bool insert_bs2 = true)
{
    const AnalyticPrediction pred = predict(phi, p_p_for_mode(mode, td_frac, insert_bs2));
    if (mode == Mode::edc_bench) return pred.bench_norms;
    return {pred.p1, pred.p2, 0.0, 0.0};
}

} // namespace edc
