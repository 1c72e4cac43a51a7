#include "memsim/analysis.hpp"
#include "memsim/circuit.hpp"
#include "memsim/device_config.hpp"
#include "memsim/error.hpp"
#include "memsim/sweep.hpp"
#include "memsim/transient.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace memsim;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kSolver = 3, kIo = 4 };

struct GlobalOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool no_caps = false;
    std::string mode;
};

struct DeviceChoice {
    std::string device;
    std::string config;
};

DeviceSpec load_choice(const DeviceChoice& choice) {
    if (!choice.config.empty() && !choice.device.empty())
        throw ConfigError("give either --device or --config, not both");
    DeviceSpec spec;
    if (!choice.config.empty()) {
        spec = load_device_spec(choice.config);
    } else {
        spec = builtin_device(choice.device.empty() ? "bfo" : choice.device);
    }
    return spec;
}

void apply_globals(const GlobalOptions& g, DeviceSpec& spec) {
    if (g.seed) spec.seed = *g.seed;
    if (!g.mode.empty()) spec.numeric.transport_mode = parse_transport_mode(g.mode);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

void write_manifest(const fs::path& path, const std::string& command, const DeviceSpec& spec,
                    const std::vector<std::string>& run_lines) {
    std::ofstream out = open_output(path);
    out << "# memsim " << command << "\n";
    for (const auto& line : run_lines) out << "# " << line << "\n";
    out << "#\n" << serialize(spec);
    finish(out, path);
}

std::string text_of(double v) { return format_double(v); }

// ----------------------------------------------------------------- preset / validate

int cmd_preset(const std::string& name) {
    std::cout << serialize(builtin_device(name));
    return kOk;
}

int cmd_validate(const std::string& path) {
    std::string text;
    if (path == "-") {
        text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    } else {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file '" + path + "'");
        text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    try {
        parse_device_spec(text);
    } catch (const ValidationError& e) {
        for (const Violation& v : e.violations())
            std::cerr << "invalid: " << v.field << ": " << v.constraint << "\n";
        return kUsage;
    }
    std::cout << "OK\n";
    return kOk;
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
    DeviceChoice choice;
    double vmax = 0.0;
    double freq = 0.0;
    int cycles = 0;
    long field_step = -1;
    long particle_every = 0;
};

int cmd_simulate(const GlobalOptions& g, const SimulateArgs& a) {
    DeviceSpec spec = load_choice(a.choice);
    apply_globals(g, spec);
    if (a.cycles > 0) spec.numeric.cycles = a.cycles;
    require_valid(spec);
    const Waveform wave = waveform_for(spec, a.vmax, a.freq);

    const fs::path dir = prepare_dir(g.out_dir);
    std::ofstream field_out, particle_out;
    const fs::path field_path = dir / "field.csv";
    const fs::path particle_path = dir / "particles.csv";
    if (a.field_step >= 0) {
        field_out = open_output(field_path);
        field_out << "x,rho,phi,E\n";
    }
    if (a.particle_every > 0) {
        particle_out = open_output(particle_path);
        particle_out << "step,kind,index,x\n";
    }

    RunOptions options;
    options.capacitors = !g.no_caps;
    options.log = [](const std::string& msg) { std::cerr << "memsim: " << msg << "\n"; };
    if (a.field_step >= 0 || a.particle_every > 0) {
        options.observer = [&](const StepView& view) {
            const long step = static_cast<long>(view.step);
            if (step == a.field_step) {
                for (int k = 0; k < view.grid.nodes; ++k) {
                    const auto i = static_cast<std::size_t>(k);
                    field_out << format_double(k * view.grid.dx) << ','
                              << format_double(view.grid.charge_density[i]) << ','
                              << format_double(view.grid.potential[i]) << ','
                              << format_double(view.grid.field[i]) << '\n';
                }
            }
            if (a.particle_every > 0 && step % a.particle_every == 0) {
                for (std::size_t i = 0; i < view.ensemble.mobile.size(); ++i)
                    particle_out << step << ",mobile," << i << ','
                                 << format_double(view.ensemble.mobile[i]) << '\n';
                for (std::size_t i = 0; i < view.ensemble.fixed.size(); ++i)
                    particle_out << step << ",fixed," << i << ','
                                 << format_double(view.ensemble.fixed[i]) << '\n';
            }
        };
    }

    const TraceSet trace = run_transient(spec, wave, options);
    const Metrics metrics = summarize(trace, a.freq, a.vmax);

    const fs::path trace_path = dir / "trace.csv";
    std::ofstream trace_out = open_output(trace_path);
    write_trace_csv(trace_out, trace);
    finish(trace_out, trace_path);

    const fs::path metrics_path = dir / "metrics.csv";
    std::ofstream metrics_out = open_output(metrics_path);
    write_metrics_header(metrics_out);
    write_metrics_row(metrics_out, metrics);
    finish(metrics_out, metrics_path);

    if (a.field_step >= 0) finish(field_out, field_path);
    if (a.particle_every > 0) finish(particle_out, particle_path);

    write_manifest(dir / "manifest.txt", "simulate", spec,
                   {"vmax = " + text_of(a.vmax), "freq = " + text_of(a.freq),
                    "dt = " + text_of(wave.dt), "caps = " + std::string(g.no_caps ? "off" : "on"),
                    "mode = " + std::string(to_string(spec.numeric.transport_mode)),
                    "seed = " + std::to_string(spec.seed)});
    return kOk;
}

// ----------------------------------------------------------------- sweep

struct SweepArgs {
    DeviceChoice choice;
    std::string axis = "amplitude";
    std::vector<double> values;
    double vmax = NAN;
    double freq = 0.0;
    std::string caps = "on";
    int workers = 1;
};

int cmd_sweep(const GlobalOptions& g, const SweepArgs& a) {
    DeviceSpec spec = load_choice(a.choice);
    apply_globals(g, spec);
    require_valid(spec);

    SweepPlan plan;
    if (a.axis == "amplitude") plan.axis = SweepAxis::amplitude;
    else if (a.axis == "frequency") plan.axis = SweepAxis::frequency;
    else throw ConfigError("unknown sweep axis '" + a.axis + "'");
    plan.values = a.values;
    plan.fixed_amplitude = a.vmax;
    plan.fixed_frequency = a.freq;
    if (g.no_caps) plan.caps = CapsSetting::off;
    else if (a.caps == "on") plan.caps = CapsSetting::on;
    else if (a.caps == "off") plan.caps = CapsSetting::off;
    else if (a.caps == "both") plan.caps = CapsSetting::both;
    else throw ConfigError("unknown caps setting '" + a.caps + "'");
    plan.workers = resolve_workers(a.workers);
    validate_plan(plan);

    const fs::path dir = prepare_dir(g.out_dir);
    std::mutex io_mutex;
    std::string io_failure;
    auto sink = [&](const SweepPoint& p, const TraceSet& trace) {
        const fs::path path = dir / ("trace_" + std::to_string(p.index) + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (out) write_trace_csv(out, trace);
        out.flush();
        if (!out) {
            std::lock_guard lock(io_mutex);
            io_failure = "write failed for '" + path.string() + "'";
        }
    };
    const std::vector<SweepPoint> points = run_sweep(spec, plan, sink);
    if (!io_failure.empty()) throw IoError(io_failure);

    const fs::path table_path = dir / "sweep.csv";
    std::ofstream table = open_output(table_path);
    write_sweep_table(table, points);
    finish(table, table_path);

    std::string values;
    for (double v : plan.values) values += (values.empty() ? "" : ",") + text_of(v);
    write_manifest(dir / "manifest.txt", "sweep", spec,
                   {"axis = " + a.axis, "values = " + values, "vmax = " + text_of(a.vmax),
                    "freq = " + text_of(a.freq), "caps = " + a.caps,
                    "workers = " + std::to_string(plan.workers),
                    "seed = " + std::to_string(spec.seed)});

    std::size_t failed = 0;
    for (const SweepPoint& p : points) {
        if (p.error.empty()) continue;
        ++failed;
        std::cerr << "memsim: point " << p.index << " failed: " << p.error << "\n";
    }
    return failed == points.size() ? kSolver : kOk;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string trace;
    double freq = 0.0;
    double vmax = NAN;
    int harmonics = -1;
    bool spectrum = false;
    bool attractor = false;
    bool metrics = false;
};

int cmd_analyze(const GlobalOptions& g, const AnalyzeArgs& a) {
    TraceSet trace;
    {
        std::ifstream in(a.trace);
        if (!in) throw IoError("cannot open trace '" + a.trace + "'");
        trace = read_trace_csv(in);
    }
    if (trace.size() < 2) throw InsufficientDataError("trace has fewer than two samples");
    if (!(a.freq > 0.0)) throw RangeError("--freq must be positive");
    const double dt = trace.time[1] - trace.time[0];
    const bool all = !a.spectrum && !a.attractor && !a.metrics;
    const fs::path dir = prepare_dir(g.out_dir);

    // Same window as summarize(): drop the first period when more than two exist.
    const std::size_t per_period = samples_per_period(a.freq, dt);
    std::span<const double> current(trace.current);
    if (current.size() / per_period > 2) current = current.subspan(per_period);
    const Spectrum spectrum = dft_spectrum(current, a.freq, dt, a.harmonics);
    if (all || a.spectrum) {
        const fs::path path = dir / "spectrum.csv";
        std::ofstream out = open_output(path);
        write_spectrum_csv(out, spectrum);
        finish(out, path);
    }
    if ((all || a.attractor) && !trace.q.empty()) {
        const fs::path path = dir / "attractor.csv";
        std::ofstream out = open_output(path);
        write_attractor_csv(out, attractor(trace.q, dt, a.freq));
        finish(out, path);
    }
    if (all || a.metrics) {
        double vmax = a.vmax;
        if (std::isnan(vmax)) {
            vmax = 0.0;
            for (double v : trace.device_voltage) vmax = std::max(vmax, std::abs(v));
        }
        const fs::path path = dir / "metrics.csv";
        std::ofstream out = open_output(path);
        write_metrics_header(out);
        write_metrics_row(out, summarize(trace, a.freq, vmax));
        finish(out, path);
    }
    try {
        std::printf("thd = %.12g\n", thd(spectrum, a.harmonics));
    } catch (const UndefinedThdError&) {
        std::printf("thd = undefined\n");
    }
    return kOk;
}

// ----------------------------------------------------------------- inductance

struct InductanceArgs {
    double length = 0.0;
    double carrier_density = 0.0;
    double area = 0.0;
    double collision_rate = 0.0;
};

int cmd_inductance(const InductanceArgs& a) {
    const InductanceDiagnostic d =
        kinetic_inductance_diagnostic(a.length, a.carrier_density, a.area, a.collision_rate);
    std::printf("illustrative kinetic inductance (not part of the circuit model)\n");
    std::printf("L = %.6e H\n", d.inductance);
    std::printf("R = %.6e Ohm\n", d.resistance);
    return kOk;
}

void add_device_options(CLI::App* cmd, DeviceChoice& choice) {
    cmd->add_option("--device", choice.device, "built-in preset (bfo, dbmd)");
    cmd->add_option("--config", choice.config, "device config file");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memsim: interface-type memristive device simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "random seed");
    app.add_flag("--no-caps", g.no_caps, "disable the capacitive branches");
    app.add_option("--mode", g.mode, "particle transport: det or stoch")
        ->check(CLI::IsMember({"det", "stoch", "deterministic", "stochastic"}));

    std::string preset_name;
    auto* preset = app.add_subcommand("preset", "print a built-in device config");
    preset->add_option("name", preset_name)->required();

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a config file ('-' reads stdin)");
    validate_cmd->add_option("path", validate_path)->required();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run one sinusoidal drive");
    add_device_options(simulate, sim.choice);
    simulate->add_option("--vmax", sim.vmax, "drive amplitude, V")->required();
    simulate->add_option("--freq", sim.freq, "drive frequency, Hz")->required();
    simulate->add_option("--cycles", sim.cycles, "number of drive periods");
    simulate->add_option("--field-step", sim.field_step, "write field.csv at this step");
    simulate->add_option("--particle-every", sim.particle_every,
                         "write particle positions every N steps");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "run a drive sweep");
    add_device_options(sweep, sw.choice);
    sweep->add_option("--axis", sw.axis, "amplitude or frequency")
        ->check(CLI::IsMember({"amplitude", "frequency"}));
    sweep->add_option("--values", sw.values, "comma-separated sweep values")
        ->required()
        ->delimiter(',');
    sweep->add_option("--vmax", sw.vmax, "fixed amplitude for frequency sweeps, V");
    sweep->add_option("--freq", sw.freq, "fixed frequency for amplitude sweeps, Hz");
    sweep->add_option("--caps", sw.caps, "on, off or both")
        ->check(CLI::IsMember({"on", "off", "both"}));
    sweep->add_option("--workers", sw.workers, "worker threads");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "spectrum, attractor and loop metrics of a trace");
    analyze->add_option("trace", an.trace)->required();
    analyze->add_option("--freq", an.freq, "drive frequency, Hz")->required();
    analyze->add_option("--vmax", an.vmax, "drive amplitude recorded in metrics, V");
    analyze->add_option("--harmonics", an.harmonics, "number of harmonics");
    analyze->add_flag("--spectrum", an.spectrum, "write spectrum.csv");
    analyze->add_flag("--attractor", an.attractor, "write attractor.csv");
    analyze->add_flag("--metrics", an.metrics, "write metrics.csv");

    InductanceArgs ind;
    auto* inductance =
        app.add_subcommand("inductance", "illustrative Drude kinetic inductance estimate");
    inductance->add_option("--length", ind.length, "conductor length, m")->required();
    inductance->add_option("--carrier-density", ind.carrier_density, "m^-3")->required();
    inductance->add_option("--area", ind.area, "cross-section, m^2")->required();
    inductance->add_option("--collision-rate", ind.collision_rate, "1/s")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*preset) return cmd_preset(preset_name);
        if (*validate_cmd) return cmd_validate(validate_path);
        if (*simulate) return cmd_simulate(g, sim);
        if (*sweep) return cmd_sweep(g, sw);
        if (*analyze) return cmd_analyze(g, an);
        if (*inductance) return cmd_inductance(ind);
    } catch (const IoError& e) {
        std::cerr << "memsim: " << e.what() << "\n";
        return kIo;
    } catch (const ConfigError& e) {
        std::cerr << "memsim: " << e.what() << "\n";
        return kUsage;
    } catch (const TimestepError& e) {
        std::cerr << "memsim: " << e.what() << "\n";
        return kUsage;
    } catch (const RangeError& e) {
        std::cerr << "memsim: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "memsim: " << e.what() << "\n";
        return kSolver;
    }
    return kUsage;
}
