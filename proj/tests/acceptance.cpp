// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "helpers.hpp"
#include "process.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace edc;
using testing_util::two_pi;

namespace {

constexpr double amp_tol = 1e-12;
constexpr double max_seconds_fig2 = 5.0;
constexpr double max_seconds_fig4 = 10.0;
constexpr double slope_tol = 0.02;
constexpr double intercept_tol = 0.01;
constexpr double sigma_bound = 5.0;
constexpr double chi_significance = 0.001;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig cfg_of(Mode m, double phi, double td)
{
    return testing_util::edc_config(m, phi, td);
}

std::vector<double> phi_grid(std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = two_pi * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

Verdict fig2_closed_form()
{
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t points = 0;
    for (double p_p : {0.0, 0.25, 0.5, 0.75, 1.0})
        for (double phi : phi_grid(100)) {
            const auto n = run(cfg_of(Mode::edc_conceptual, phi, p_p)).norms();
            const double p1 = std::pow(std::sin(phi / 2), 2) + std::cos(phi) / 2 * p_p;
            worst = std::max({worst, std::abs(n[0] - p1), std::abs(n[1] - (1.0 - p1))});
            ++points;
        }
    const double secs = seconds_since(t0);
    return {worst <= amp_tol && secs < max_seconds_fig2,
            std::to_string(points) + " points, max deviation " + sci(worst) + ", " + sci(secs) + " s"};
}

Verdict quarter_point()
{
    const auto n = run(cfg_of(Mode::edc_conceptual, 0.0, 0.5)).norms();
    const double dev = std::max(std::abs(n[0] - 0.25), std::abs(n[1] - 0.75));
    return {dev <= amp_tol, "P1 = " + sci(n[0]) + ", P2 = " + sci(n[1])};
}

Verdict open_closed_limits()
{
    double worst = 0.0;
    double flat = 0.0;
    for (double phi : phi_grid(50)) {
        const auto e1 = run(cfg_of(Mode::edc_conceptual, phi, 1.0));
        const auto op = run(cfg_of(Mode::open, phi, 0.0));
        const auto e0 = run(cfg_of(Mode::edc_conceptual, phi, 0.0));
        const auto cl = run(cfg_of(Mode::closed, phi, 0.0));
        for (std::size_t d = 0; d < detector_count; ++d)
            worst = std::max({worst, max_abs_diff(e1.detector_waves[d], op.detector_waves[d]),
                              max_abs_diff(e0.detector_waves[d], cl.detector_waves[d])});
        flat = std::max({flat, std::abs(e1.norms()[0] - 0.5), std::abs(e1.norms()[1] - 0.5)});
    }
    const double d1_dark = norm(run(cfg_of(Mode::edc_conceptual, 0.0, 0.0)).at(Detector::D1));
    const bool ok = worst <= amp_tol && flat <= amp_tol && d1_dark <= amp_tol;
    return {ok, "max samplewise deviation " + sci(worst) + ", max |P - 1/2| at td=1 " + sci(flat) +
                    ", D1 at td=0, phi=0: " + sci(d1_dark)};
}

Verdict fig4_linearity()
{
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig base = cfg_of(fig4_mode, 0.0, 0.0);
    base.n_photons = 100000;
    const auto rows = run_rows(sweep_configs(fig4_preset(), base));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        const double x = r.td_frac;
        const double y = r.p_p_hat ? r.p_p_hat->value : NAN;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    const double secs = seconds_since(t0);
    const bool ok = rows.size() == 21 && std::abs(slope - 1.0) <= slope_tol && std::abs(intercept) <= intercept_tol &&
                    secs < max_seconds_fig4;
    return {ok, "slope " + sci(slope) + ", intercept " + sci(intercept) + ", " + sci(secs) + " s"};
}

Verdict fig4_flatness()
{
    ExperimentConfig base = cfg_of(fig4_mode, 0.0, 0.0);
    base.n_photons = 100000;
    const auto rows = run_rows(sweep_configs(fig4_preset(), base));
    bool ok = rows.size() == 21;
    double worst_sigma = 0.0;
    std::uint64_t n1 = 0;
    std::size_t undefined = 0;
    for (const auto& r : rows) {
        n1 += r.counts[0];
        // td = 0 passes nothing, so N3 + N4 = 0 and r_p has no denominator.
        if (!r.r_p) {
            ++undefined;
            ok = ok && r.td_frac == 0.0 && r.counts[2] + r.counts[3] == 0;
            continue;
        }
        const double se = std::sqrt(0.25 / static_cast<double>(r.r_p->denominator));
        worst_sigma = std::max(worst_sigma, std::abs(r.r_p->value - 0.5) / se);
        ok = ok && predict(r.phi, r.p_p_analytic).r_w == 0.0;
    }
    ok = ok && worst_sigma <= sigma_bound && n1 == 0;
    return {ok, "max |r_p - 1/2| = " + sci(worst_sigma) + " sigma over " + std::to_string(rows.size() - undefined) +
                    " defined points (td=0 has no particle counts), total N1 = " + std::to_string(n1)};
}

Verdict half_norm_relation()
{
    std::mt19937_64 rng(1401);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Mode m = k % 2 ? Mode::edc_bench : Mode::edc_conceptual;
        const auto r = run(cfg_of(m, testing_util::uniform(rng, 0, two_pi), testing_util::uniform(rng, 0, 1)));
        for (int a = 0; a < 2; ++a)
            worst = std::max(worst, std::abs(norm(r.arms->passed[a]) + norm(r.arms->gated[a]) - 0.5));
    }
    return {worst <= amp_tol, "200 configs, max |P^p + P^w - 1/2| = " + sci(worst)};
}

Verdict orthogonality()
{
    std::mt19937_64 rng(1301);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Mode m = k % 2 ? Mode::edc_bench : Mode::edc_conceptual;
        const auto r = run(cfg_of(m, testing_util::uniform(rng, 0, two_pi), testing_util::uniform(rng, 0, 1)));
        for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(inner_product(r.arms->passed[a], r.arms->gated[a])));
    }
    return {worst == 0.0, "200 configs, max |<p|w>| = " + sci(worst)};
}

Verdict unitarity()
{
    std::mt19937_64 rng(801);
    const TimeGrid g(64, 1.0 / 64.0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const SubWave a = testing_util::random_wave(g, rng);
        const SubWave b = testing_util::random_wave(g, rng);
        const double in = norm(a) + norm(b);
        const auto s = beam_split(a, b);
        const auto r = recombine_bs2(a, b, testing_util::uniform(rng, 0, two_pi));
        worst = std::max({worst, std::abs(norm(s.first) + norm(s.second) - in) / in,
                          std::abs(norm(r.first) + norm(r.second) - in) / in});
    }
    return {worst <= amp_tol, "1000 random pairs, max relative norm change " + sci(worst)};
}

Verdict monte_carlo_soundness()
{
    std::mt19937_64 rng(901);
    const double phi = testing_util::uniform(rng, 0, two_pi);
    const double td = testing_util::uniform(rng, 0.05, 0.95);
    const ExperimentConfig cfg = cfg_of(Mode::edc_bench, phi, td);
    const double eff = validate(cfg).effective_td_frac;
    const auto pred = predict(phi, eff);
    const auto probs = run(cfg).norms();
    int passes = 0;
    for (std::uint64_t s = 0; s < 100; ++s)
        passes += chi_square_check(sample_clicks(probs, 100000, 5000 + s), pred, Mode::edc_bench, chi_significance)
                      .status == FitStatus::pass;
    return {passes >= 99, "phi = " + sci(phi) + ", td_frac = " + sci(eff) + ": " + std::to_string(passes) +
                              "/100 seeds pass"};
}

Verdict determinism()
{
    const std::vector<std::string> invocations{
        "sweep --preset fig4 --photons 100000",
        "sweep --preset fig2 --photons 20000 --seed 11",
        "sweep --mode edc_conceptual --var td_frac --fixed 1.3 --steps 17 --photons 30000",
        "sweep --bench '" + std::string(BENCH_DIR) + "/closed.bench' --photons 5000",
    };
    for (const auto& args : invocations) {
        const auto a = proc::edcsim(args);
        const auto b = proc::edcsim(args);
        const auto c = proc::edcsim(args + " --threads 3");
        const auto d = proc::edcsim(args + " --threads 8");
        if (a.status != 0 || a.out.empty()) return {false, "'" + args + "' exited " + std::to_string(a.status) + ": " + a.err};
        if (a.out != b.out || a.out != c.out || a.out != d.out) return {false, "'" + args + "' output differs"};
    }
    return {true, std::to_string(invocations.size()) + " sweeps byte-identical across reruns and 1/3/8 threads"};
}

Verdict parser()
{
    for (const auto& m : testing_util::shipped_benches) {
        const auto r = bench::parse(testing_util::bench_text(m));
        if (!r.ok()) return {false, m + ".bench does not parse"};
        const auto again = bench::parse(bench::format(*r.program));
        if (!again.ok() || !(*again.program == *r.program)) return {false, m + ".bench does not round-trip"};
    }
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(TEST_DATA_DIR) / "malformed")) {
        const std::string text = testing_util::read_file(e.path());
        const auto r = bench::parse(text);
        ++files;
        bool positioned = false;
        std::size_t lines = 1;
        for (std::size_t i = 0; i < text.size(); ++i)
            if (text[i] == '\n' || (text[i] == '\r' && (i + 1 >= text.size() || text[i + 1] != '\n'))) ++lines;
        for (const auto& d : r.diagnostics)
            positioned |= d.severity == bench::Severity::error && d.line >= 1 && d.line <= lines && d.column >= 1;
        if (r.ok() || !positioned) return {false, e.path().filename().string() + " lacks a positioned error"};
    }
    return {files > 0, "5 shipped files round-trip, " + std::to_string(files) + " malformed files diagnosed"};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"fig2 closed forms", fig2_closed_form},
        {"quarter point", quarter_point},
        {"open/closed limits", open_closed_limits},
        {"fig4 linearity", fig4_linearity},
        {"fig4 flatness", fig4_flatness},
        {"half-norm relation", half_norm_relation},
        {"p/w orthogonality", orthogonality},
        {"unitarity", unitarity},
        {"monte carlo soundness", monte_carlo_soundness},
        {"determinism", determinism},
        {"parser round-trip and diagnostics", parser},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << (v.pass ? "PASS" : "FAIL") << " " << i + 1 << " " << criteria[i].first << ": " << v.detail << "\n";
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed ? 1 : 0;
}
