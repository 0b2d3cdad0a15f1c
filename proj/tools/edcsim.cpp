// edcsim: run, sweep and validate interferometer experiments from flags or .bench files.
//
// Exit codes: 0 success, 1 a scientific check failed, 2 the invocation was invalid.

#include "edc/edc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_usage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("EDC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("EDC_SEED is not an unsigned integer: ") + env);
        }
    }
    return 42;
}

struct CommonOptions {
    std::string mode;
    std::optional<double> phi;
    std::optional<double> td_frac;
    std::uint64_t photons = 100000;
    std::optional<std::uint64_t> seed;
    std::size_t samples = 1000;
    std::string choice = "insert";
    std::string bench;
    std::string out;
    std::string format = "csv";
    unsigned threads = 1;
};

void add_common(CLI::App& cmd, CommonOptions& o)
{
    cmd.add_option("--mode", o.mode, "open, closed, wheeler_delayed, edc_conceptual or edc_bench")
        ->check(CLI::IsMember({"open", "closed", "wheeler_delayed", "edc_conceptual", "edc_bench"}));
    cmd.add_option("--phi", o.phi, "phase in radians");
    cmd.add_option("--td-frac", o.td_frac, "insertion delay as a fraction of the pulse length")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--photons", o.photons, "photons per point")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", o.seed, "master seed (default: $EDC_SEED or 42)");
    cmd.add_option("--samples", o.samples, "samples per signal period (even)")->check(CLI::Range(2, 100000000));
    cmd.add_option("--choice", o.choice, "wheeler_delayed: insert or omit BS2")
        ->check(CLI::IsMember({"insert", "omit"}));
    cmd.add_option("--bench", o.bench, "bench description file")->check(CLI::ExistingFile);
    cmd.add_option("--out", o.out, "output file (default: stdout)");
    cmd.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("--threads", o.threads, "worker threads; results do not depend on it")->check(CLI::Range(1, 1024));
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

edc::bench::BenchProgram load_bench(const std::string& path)
{
    const auto result = edc::bench::parse(read_file(path));
    for (const auto& d : result.diagnostics) std::cerr << d.render(path);
    if (!result.ok()) throw UsageError(path + ": " + std::to_string(result.error_count()) + " error(s)");
    return *result.program;
}

struct Resolved {
    edc::ExperimentConfig config;
    std::optional<edc::bench::BenchProgram> program;
    edc::bench::BenchBinding binding;
};

Resolved resolve(const CommonOptions& o)
{
    Resolved r;
    if (!o.bench.empty()) {
        if (!o.mode.empty()) throw UsageError("--mode cannot be combined with --bench; the mode follows the wiring");
        r.program = load_bench(o.bench);
        try {
            r.binding = edc::bench::to_experiment_config(*r.program, o.phi, o.td_frac);
        } catch (const edc::TopologyError& e) {
            throw UsageError(o.bench + ": " + e.what());
        }
        r.config = r.binding.config;
    } else {
        if (o.mode.empty()) throw UsageError("give --mode or --bench");
        r.config.mode = *edc::parse_mode(o.mode);
        r.config.phi = o.phi.value_or(0.0);
        r.config.td_frac = o.td_frac.value_or(0.0);
        r.config.samples_per_period = o.samples;
        r.config.insert_bs2 = o.choice == "insert";
    }
    r.config.n_photons = o.photons;
    r.config.seed = o.seed.value_or(default_seed());
    try {
        edc::validate(r.config);
    } catch (const edc::ConfigError& e) {
        throw UsageError(e.what());
    }
    return r;
}

void emit(const CommonOptions& o, const std::vector<edc::CsvRow>& rows)
{
    std::ostringstream buf;
    if (o.format == "json")
        buf << edc::to_json(rows).dump(2) << "\n";
    else
        edc::write_csv(buf, rows);
    if (o.out.empty()) {
        std::cout << buf.str();
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw UsageError("cannot write " + o.out);
    f << buf.str();
}

int cmd_run(const CommonOptions& o)
{
    const Resolved r = resolve(o);
    emit(o, {edc::evaluate_point(r.config, o.threads)});
    return exit_ok;
}

struct SweepOptions {
    std::string preset;
    std::string variable;
    std::optional<double> start;
    std::optional<double> stop;
    std::size_t steps = 101;
    std::optional<double> fixed;
};

int cmd_sweep(CommonOptions o, const SweepOptions& s)
{
    std::vector<edc::SweepSpec> specs;
    if (!s.preset.empty()) {
        if (!s.variable.empty()) throw UsageError("--preset cannot be combined with --var");
        if (!o.bench.empty()) throw UsageError("--preset cannot be combined with --bench");
        const edc::Mode preset_mode = s.preset == "fig2" ? edc::fig2_mode : edc::fig4_mode;
        if (!o.mode.empty() && *edc::parse_mode(o.mode) != preset_mode)
            throw UsageError("preset " + s.preset + " runs in mode " + std::string(edc::to_string(preset_mode)));
        o.mode = std::string(edc::to_string(preset_mode));
        specs = s.preset == "fig2" ? edc::fig2_preset() : edc::fig4_preset();
    }
    const Resolved r = resolve(o);

    if (!s.variable.empty()) {
        edc::SweepSpec spec;
        spec.variable = s.variable == "phi" ? edc::SweepVariable::phi : edc::SweepVariable::td_frac;
        const bool phi_swept = spec.variable == edc::SweepVariable::phi;
        spec.start = s.start.value_or(0.0);
        spec.stop = s.stop.value_or(phi_swept ? 2.0 * std::numbers::pi : 1.0);
        spec.steps = s.steps;
        spec.fixed = s.fixed.value_or(phi_swept ? r.config.td_frac : r.config.phi);
        specs.push_back(spec);
    } else if (specs.empty() && r.program) {
        for (const auto& sw : r.program->sweeps) {
            const bool phi_swept = sw.variable == edc::SweepVariable::phi;
            specs.push_back({sw.variable, sw.start, sw.stop, sw.steps,
                             sw.fixed.value_or(phi_swept ? r.config.td_frac : r.config.phi)});
        }
    }
    if (specs.empty()) throw UsageError("nothing to sweep: give --preset, --var, or a bench file with sweep blocks");

    std::vector<edc::ExperimentConfig> configs;
    try {
        configs = edc::sweep_configs(specs, r.config);
    } catch (const edc::ConfigError& e) {
        throw UsageError(e.what());
    }
    emit(o, edc::run_rows(configs, o.threads));
    return exit_ok;
}

int cmd_validate(std::optional<std::uint64_t> seed, std::size_t samples, const std::string& out)
{
    edc::ValidationOptions opt;
    opt.seed = seed.value_or(default_seed());
    opt.samples_per_period = samples;
    const edc::ValidationReport rep = edc::run_validation(opt);
    for (const auto& c : rep.checks)
        std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    const std::string summary = rep.to_json().dump(2) + "\n";
    if (out.empty()) {
        std::cout << summary;
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw UsageError("cannot write " + out);
        f << summary;
    }
    return rep.all_passed() ? exit_ok : exit_check_failed;
}

int cmd_check(const std::vector<std::string>& files)
{
    bool ok = true;
    for (const auto& path : files) {
        const auto result = edc::bench::parse(read_file(path));
        for (const auto& d : result.diagnostics) std::cerr << d.render(path);
        if (!result.ok()) {
            ok = false;
            continue;
        }
        try {
            const auto b = edc::bench::to_experiment_config(*result.program);
            std::cout << path << ": ok, mode " << edc::to_string(b.config.mode) << "\n";
        } catch (const edc::TopologyError& e) {
            std::cerr << path << ": " << e.what() << "\n";
            ok = false;
        }
    }
    return ok ? exit_ok : exit_usage;
}

int cmd_format(const std::string& file)
{
    std::cout << edc::bench::format(load_bench(file));
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Time-resolved single-photon Mach-Zehnder simulator"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    auto* run = app.add_subcommand("run", "evaluate one configuration");
    add_common(*run, run_opts);

    CommonOptions sweep_opts;
    SweepOptions sweep_spec;
    auto* sweep = app.add_subcommand("sweep", "sweep phi or td_frac and emit one row per point");
    add_common(*sweep, sweep_opts);
    sweep->add_option("--preset", sweep_spec.preset, "fig2 or fig4")->check(CLI::IsMember({"fig2", "fig4"}));
    sweep->add_option("--var", sweep_spec.variable, "phi or td_frac")->check(CLI::IsMember({"phi", "td_frac"}));
    sweep->add_option("--start", sweep_spec.start, "first value (inclusive)");
    sweep->add_option("--stop", sweep_spec.stop, "last value (inclusive)");
    sweep->add_option("--steps", sweep_spec.steps, "number of points")->check(CLI::Range(2, 1000000));
    sweep->add_option("--fixed", sweep_spec.fixed, "value of the variable not swept");

    std::optional<std::uint64_t> validate_seed;
    std::size_t validate_samples = 1000;
    std::string validate_out;
    auto* validate = app.add_subcommand("validate", "run the built-in oracle and statistics checks");
    validate->add_option("--seed", validate_seed, "seed for randomized configs");
    validate->add_option("--samples", validate_samples, "samples per signal period")->check(CLI::Range(2, 100000000));
    validate->add_option("--out", validate_out, "write the JSON summary here");

    std::vector<std::string> check_files;
    auto* check = app.add_subcommand("check", "parse bench files and report diagnostics and mode");
    check->add_option("files", check_files, "bench files")->required()->check(CLI::ExistingFile);

    std::string format_file;
    auto* format = app.add_subcommand("format", "print a bench file in canonical form");
    format->add_option("file", format_file, "bench file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*sweep) return cmd_sweep(sweep_opts, sweep_spec);
        if (*validate) return cmd_validate(validate_seed, validate_samples, validate_out);
        if (*check) return cmd_check(check_files);
        if (*format) return cmd_format(format_file);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const edc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const edc::Error& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return exit_check_failed;
    }
    return exit_usage;
}
