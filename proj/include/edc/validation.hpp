#pragma once

// Built-in self-check suite: propagation against the closed forms over randomized configs, plus
// statistical checks of the sampler.

#include "edc/analytic.hpp"
#include "edc/experiment.hpp"
#include "edc/measurement.hpp"
#include "edc/optics.hpp"
#include "edc/report.hpp"
#include "edc/wave.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace edc {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;

    [[nodiscard]] bool all_passed() const
    {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return !checks.empty();
    }

    [[nodiscard]] nlohmann::ordered_json to_json() const
    {
        nlohmann::ordered_json j;
        j["passed"] = all_passed();
        auto arr = nlohmann::ordered_json::array();
        for (const auto& c : checks) arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        j["checks"] = std::move(arr);
        return j;
    }
};

struct ValidationOptions {
    std::uint64_t seed = 42;
    std::size_t samples_per_period = 1000;
    /// Propagation under test; replaceable so a broken implementation can be shown to fail.
    std::function<PropagationResult(const ExperimentConfig&)> propagate = [](const ExperimentConfig& c) { return run(c); };
};

namespace detail {

inline std::string fmt_double(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

inline CheckResult oracle_check(const std::string& name, Mode mode, std::size_t trials, const ValidationOptions& opt,
                                std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> td_dist(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    double worst = 0.0;
    for (std::size_t k = 0; k < trials; ++k) {
        ExperimentConfig cfg;
        cfg.mode = mode;
        cfg.phi = phi_dist(rng);
        cfg.samples_per_period = opt.samples_per_period;
        cfg.td_frac = is_edc(mode) ? td_dist(rng) : 0.0;
        cfg.insert_bs2 = coin(rng);
        const InsertionAlignment a = validate(cfg);
        const DetectorProbs got = opt.propagate(cfg).norms();
        const DetectorProbs want = detector_probabilities(mode, cfg.phi, a.effective_td_frac, cfg.insert_bs2);
        for (std::size_t d = 0; d < detector_count; ++d) worst = std::max(worst, std::abs(got[d] - want[d]));
    }
    return {name, worst <= amplitude_tolerance,
            std::to_string(trials) + " configs, max |norm - closed form| = " + fmt_double(worst)};
}

inline SubWave random_wave(const TimeGrid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<Complex> a(g.size());
    for (auto& z : a) z = {n(rng), n(rng)};
    return SubWave(g, std::move(a));
}

} // namespace detail

inline ValidationReport run_validation(const ValidationOptions& opt = {})
{
    ValidationReport rep;
    std::mt19937_64 rng(opt.seed);

    rep.checks.push_back(detail::oracle_check("oracle.edc_conceptual", Mode::edc_conceptual, 200, opt, rng));
    rep.checks.push_back(detail::oracle_check("oracle.edc_bench", Mode::edc_bench, 200, opt, rng));
    rep.checks.push_back(detail::oracle_check("oracle.closed", Mode::closed, 50, opt, rng));
    rep.checks.push_back(detail::oracle_check("oracle.open", Mode::open, 50, opt, rng));
    rep.checks.push_back(detail::oracle_check("oracle.wheeler_delayed", Mode::wheeler_delayed, 50, opt, rng));

    // Conservation, per-arm half-norm split, and p/w orthogonality.
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_sum = 0.0;
        double worst_half = 0.0;
        double worst_inner = 0.0;
        for (int k = 0; k < 200; ++k) {
            ExperimentConfig cfg;
            cfg.mode = k % 2 ? Mode::edc_bench : Mode::edc_conceptual;
            cfg.phi = 2.0 * std::numbers::pi * u(rng);
            cfg.td_frac = u(rng);
            cfg.samples_per_period = opt.samples_per_period;
            const PropagationResult r = opt.propagate(cfg);
            double total = 0.0;
            for (double p : r.norms()) total += p;
            worst_sum = std::max(worst_sum, std::abs(total - 1.0));
            if (!r.arms) {
                worst_half = worst_inner = INFINITY;
                continue;
            }
            for (int arm = 0; arm < 2; ++arm) {
                worst_half = std::max(worst_half, std::abs(norm(r.arms->passed[arm]) + norm(r.arms->gated[arm]) - 0.5));
                worst_inner = std::max(worst_inner, std::abs(inner_product(r.arms->passed[arm], r.arms->gated[arm])));
            }
        }
        rep.checks.push_back({"conservation", worst_sum <= amplitude_tolerance,
                              "200 edc configs, max |sum - 1| = " + detail::fmt_double(worst_sum)});
        rep.checks.push_back({"arm_half_norm", worst_half <= amplitude_tolerance,
                              "max |P^p + P^w - 1/2| = " + detail::fmt_double(worst_half)});
        rep.checks.push_back({"passed_gated_orthogonal", worst_inner == 0.0,
                              "max |<p|w>| = " + detail::fmt_double(worst_inner)});
    }

    // Unitarity of both beam splitters on random inputs.
    {
        const TimeGrid g(64, 1.0 / 64.0);
        std::uniform_real_distribution<double> phi_dist(0.0, 2.0 * std::numbers::pi);
        double worst = 0.0;
        for (int k = 0; k < 200; ++k) {
            const SubWave a = detail::random_wave(g, rng);
            const SubWave b = detail::random_wave(g, rng);
            const double in = norm(a) + norm(b);
            const auto s = beam_split(a, b);
            const auto r = recombine_bs2(a, b, phi_dist(rng));
            worst = std::max({worst, std::abs(norm(s.first) + norm(s.second) - in) / in,
                              std::abs(norm(r.first) + norm(r.second) - in) / in});
        }
        rep.checks.push_back({"unitarity", worst <= amplitude_tolerance,
                              "200 random pairs, max relative norm change = " + detail::fmt_double(worst)});
    }

    // Chi-square self-consistency of the sampler on a bench config.
    {
        ExperimentConfig cfg;
        cfg.mode = Mode::edc_bench;
        cfg.phi = 2.1;
        cfg.td_frac = 0.3;
        cfg.samples_per_period = opt.samples_per_period;
        const InsertionAlignment a = validate(cfg);
        const DetectorProbs expected = detector_probabilities(cfg.mode, cfg.phi, a.effective_td_frac);
        const DetectorProbs probs = opt.propagate(cfg).norms();
        int passes = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            try {
                const DetectionRecord rec = sample_clicks(probs, 100000, opt.seed * 1000 + s);
                passes += chi_square_check(rec, expected).status == FitStatus::pass;
            } catch (const ConservationError&) {
            }
        }
        rep.checks.push_back({"chi_square_self_consistency", passes >= 99, std::to_string(passes) + "/100 seeds pass at 0.001"});
    }

    // r_p flatness across the insertion delay.
    {
        ExperimentConfig base;
        base.mode = fig4_mode;
        base.seed = opt.seed;
        base.samples_per_period = opt.samples_per_period;
        bool ok = true;
        double worst_sigma = 0.0;
        try {
            for (const auto& cfg : sweep_configs(fig4_preset(), base)) {
                const DetectionRecord rec = sample_clicks(opt.propagate(cfg).norms(), cfg.n_photons, cfg.seed);
                const EstimatorSet e = estimators(rec);
                if (!e.r_p) continue;
                const double sigma = std::sqrt(0.25 / static_cast<double>(e.r_p->denominator));
                worst_sigma = std::max(worst_sigma, std::abs(e.r_p->value - 0.5) / sigma);
            }
        } catch (const Error&) {
            ok = false;
        }
        ok = ok && worst_sigma <= 5.0;
        rep.checks.push_back({"r_p_flatness", ok, "max |r_p - 1/2| = " + detail::fmt_double(worst_sigma) + " sigma"});
    }

    // Sampling does not depend on worker count.
    {
        const DetectorProbs probs{0.1, 0.2, 0.3, 0.4};
        const auto a = sample_clicks(probs, 200001, opt.seed, 1);
        const auto b = sample_clicks(probs, 200001, opt.seed, 7);
        rep.checks.push_back({"sampling_determinism", a.counts == b.counts, "1 vs 7 workers"});
    }
    return rep;
}

} // namespace edc
