#pragma once

#include "edc/edc.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <random>
#include <vector>

namespace testing_util {

inline constexpr double tol = 1e-12;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline edc::SubWave random_wave(const edc::TimeGrid& g, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<edc::Complex> a(g.size());
    for (auto& z : a) z = {n(rng), n(rng)};
    return edc::SubWave(g, std::move(a));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline edc::ExperimentConfig edc_config(edc::Mode mode, double phi, double td, std::size_t samples = 1000)
{
    edc::ExperimentConfig c;
    c.mode = mode;
    c.phi = phi;
    c.td_frac = td;
    c.samples_per_period = samples;
    return c;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const std::vector<std::string> shipped_benches{"open", "closed", "wheeler_delayed", "edc_conceptual",
                                                      "edc_bench"};

inline std::string bench_text(const std::string& mode)
{
    return read_file(std::filesystem::path(BENCH_DIR) / (mode + ".bench"));
}

} // namespace testing_util
