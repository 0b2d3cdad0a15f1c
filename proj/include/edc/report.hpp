#pragma once

// Sweep points, result rows, and their CSV/JSON serializations.

#include "edc/analytic.hpp"
#include "edc/bench.hpp"
#include "edc/error.hpp"
#include "edc/experiment.hpp"
#include "edc/measurement.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace edc {

struct CsvRow {
    Mode mode = Mode::closed;
    double phi = 0.0;
    double td_frac = 0.0; ///< effective value after grid alignment
    double p_p_analytic = 0.0;
    double p1_analytic = 0.0;
    double p2_analytic = 0.0;
    DetectorCounts counts{};
    std::uint64_t n_photons = 0;
    Estimate r_w_pair;
    Estimate r_w_total;
    Estimate r_p;
    Estimate p_w_hat;
    Estimate p_p_hat;
    std::uint64_t seed = 0;
};

inline constexpr std::array<std::string_view, 17> csv_columns{
    "mode", "phi",      "td_frac",   "p_p_analytic", "p1_analytic", "p2_analytic", "n1",      "n2",  "n3",
    "n4",   "n_photons", "r_w_pair", "r_w_total",    "r_p",         "p_w_hat",     "p_p_hat", "seed"};

/// Largest allowed gap between propagated detector norms and the closed forms.
inline constexpr double oracle_tolerance = 1e-9;

/// Propagates, checks against the oracle, samples, and estimates one configuration.
inline CsvRow evaluate_point(const ExperimentConfig& cfg, unsigned workers = 1)
{
    const InsertionAlignment align = validate(cfg);
    const double td = is_edc(cfg.mode) ? align.effective_td_frac : 0.0;
    const DetectorProbs norms = run(cfg).norms();
    const DetectorProbs expected = detector_probabilities(cfg.mode, cfg.phi, td, cfg.insert_bs2);
    for (std::size_t d = 0; d < detector_count; ++d)
        if (std::abs(norms[d] - expected[d]) > oracle_tolerance)
            throw CheckFailure("propagated norm at " + std::string(to_string(static_cast<Detector>(d))) + " is " +
                               std::to_string(norms[d]) + ", closed form gives " + std::to_string(expected[d]));

    const DetectionRecord rec = sample_clicks(norms, cfg.n_photons, cfg.seed, workers);
    const EstimatorSet est = estimators(rec);
    const double p_p = p_p_for_mode(cfg.mode, td, cfg.insert_bs2);

    CsvRow row;
    row.mode = cfg.mode;
    row.phi = cfg.phi;
    row.td_frac = td;
    row.p_p_analytic = p_p;
    row.p1_analytic = expected[0];
    row.p2_analytic = expected[1];
    row.counts = rec.counts;
    row.n_photons = rec.n_photons;
    row.r_w_pair = est.r_w_pair;
    row.r_w_total = est.r_w_total;
    row.r_p = est.r_p;
    row.p_w_hat = est.p_w_hat;
    row.p_p_hat = est.p_p_hat;
    row.seed = cfg.seed;
    return row;
}

using bench::SweepVariable;

struct SweepSpec {
    SweepVariable variable = SweepVariable::phi;
    double start = 0.0;
    double stop = 2.0 * std::numbers::pi;
    std::size_t steps = 101;
    double fixed = 0.0; ///< value of the variable not being swept

    [[nodiscard]] std::vector<double> values() const
    {
        std::vector<double> v(steps);
        for (std::size_t i = 0; i < steps; ++i)
            v[i] = i + 1 == steps ? stop
                                  : start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1);
        return v;
    }
};

inline void validate(const SweepSpec& s, Mode mode)
{
    if (s.steps < 2) throw ConfigError("sweep needs at least 2 steps");
    if (!(s.start < s.stop)) throw ConfigError("sweep start must be below stop");
    const bool td_swept = s.variable == SweepVariable::td_frac;
    if (td_swept && (s.start < 0.0 || s.stop > 1.0)) throw ConfigError("td_frac sweep range must lie in [0, 1]");
    if (td_swept && !is_edc(mode)) throw ConfigError("td_frac can only be swept in edc modes");
    if (!td_swept && is_edc(mode) && !(s.fixed >= 0.0 && s.fixed <= 1.0))
        throw ConfigError("fixed td_frac must lie in [0, 1]");
    if (!std::isfinite(s.start) || !std::isfinite(s.stop) || !std::isfinite(s.fixed))
        throw ConfigError("sweep bounds must be finite");
}

/// Expands sweeps into per-row configs. Row k gets seed base.seed + k.
inline std::vector<ExperimentConfig> sweep_configs(const std::vector<SweepSpec>& sweeps, const ExperimentConfig& base)
{
    std::vector<ExperimentConfig> out;
    for (const auto& s : sweeps) {
        validate(s, base.mode);
        for (double v : s.values()) {
            ExperimentConfig cfg = base;
            if (s.variable == SweepVariable::phi) {
                cfg.phi = v;
                cfg.td_frac = is_edc(base.mode) ? s.fixed : 0.0;
            } else {
                cfg.td_frac = v;
                cfg.phi = s.fixed;
            }
            cfg.seed = base.seed + out.size();
            validate(cfg);
            out.push_back(cfg);
        }
    }
    return out;
}

/// Preset `fig2`: phase sweeps of the single-pair EDC at several passed fractions.
inline std::vector<SweepSpec> fig2_preset()
{
    std::vector<SweepSpec> s;
    for (double p_p : {0.0, 0.25, 0.5, 0.75, 1.0})
        s.push_back({SweepVariable::phi, 0.0, 2.0 * std::numbers::pi, 101, p_p});
    return s;
}
inline constexpr Mode fig2_mode = Mode::edc_conceptual;

/// Preset `fig4`: insertion-delay sweep of the four-detector bench at phi = 0.
inline std::vector<SweepSpec> fig4_preset() { return {{SweepVariable::td_frac, 0.0, 1.0, 21, 0.0}}; }
inline constexpr Mode fig4_mode = Mode::edc_bench;

/// Evaluates rows on up to `workers` threads; output order follows `configs`.
inline std::vector<CsvRow> run_rows(const std::vector<ExperimentConfig>& configs, unsigned workers = 1)
{
    std::vector<CsvRow> rows(configs.size());
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1 || configs.size() <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) rows[i] = evaluate_point(configs[i], workers);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(configs.size());
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < std::min<std::size_t>(workers, configs.size()); ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < configs.size(); i = next++) {
                    try {
                        rows[i] = evaluate_point(configs[i], 1);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

namespace detail {

inline std::string number(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string number(const Estimate& e) { return e ? number(e->value) : std::string("NA"); }

inline nlohmann::ordered_json json_value(const Estimate& e)
{
    return e ? nlohmann::ordered_json(e->value) : nlohmann::ordered_json(nullptr);
}

} // namespace detail

/// Header plus one line per row. Undefined estimators print as NA.
inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows)
{
    for (std::size_t i = 0; i < csv_columns.size(); ++i) os << (i ? "," : "") << csv_columns[i];
    os << "\n";
    using detail::number;
    for (const auto& r : rows) {
        os << to_string(r.mode) << ',' << number(r.phi) << ',' << number(r.td_frac) << ',' << number(r.p_p_analytic)
           << ',' << number(r.p1_analytic) << ',' << number(r.p2_analytic) << ',' << r.counts[0] << ','
           << r.counts[1] << ',' << r.counts[2] << ',' << r.counts[3] << ',' << r.n_photons << ','
           << number(r.r_w_pair) << ',' << number(r.r_w_total) << ',' << number(r.r_p) << ',' << number(r.p_w_hat)
           << ',' << number(r.p_p_hat) << ',' << r.seed << "\n";
    }
}

/// Same fields as the CSV, as an array of objects; undefined estimators become null.
inline nlohmann::ordered_json to_json(const std::vector<CsvRow>& rows)
{
    auto out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["mode"] = std::string(to_string(r.mode));
        o["phi"] = r.phi;
        o["td_frac"] = r.td_frac;
        o["p_p_analytic"] = r.p_p_analytic;
        o["p1_analytic"] = r.p1_analytic;
        o["p2_analytic"] = r.p2_analytic;
        o["n1"] = r.counts[0];
        o["n2"] = r.counts[1];
        o["n3"] = r.counts[2];
        o["n4"] = r.counts[3];
        o["n_photons"] = r.n_photons;
        o["r_w_pair"] = detail::json_value(r.r_w_pair);
        o["r_w_total"] = detail::json_value(r.r_w_total);
        o["r_p"] = detail::json_value(r.r_p);
        o["p_w_hat"] = detail::json_value(r.p_w_hat);
        o["p_p_hat"] = detail::json_value(r.p_p_hat);
        o["seed"] = r.seed;
        out.push_back(std::move(o));
    }
    return out;
}

} // namespace edc
