#pragma once

#include "memsim/circuit.hpp"
#include "memsim/device_config.hpp"
#include "memsim/field_solver.hpp"
#include "memsim/kinetics.hpp"

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace memsim {

struct Waveform {
    double amplitude = 0.0; // V
    double frequency = 0.0; // Hz
    int cycles = 1;
    double dt = 0.0; // s

    double period() const { return 1.0 / frequency; }
    /// cycles * period / dt, rounded.
    std::size_t sample_count() const;
    double voltage_at(double t) const;
};

/// Checks f > 0, cycles >= 1 and dt <= period / 100; throws TimestepError or RangeError.
Waveform sine_waveform(double amplitude, double frequency, int cycles, double dt);

/// Sampled V(t_n) = V_max sin(2 pi f n dt) for n = 0 .. sample_count-1.
std::vector<double> waveform_samples(const Waveform& wave);

/// Waveform for `spec`: dt from numeric.timestep, else period / steps_per_period.
Waveform waveform_for(const DeviceSpec& spec, double amplitude, double frequency);

struct TraceSet {
    double frequency = 0.0; // drive frequency, Hz (not a column)
    std::vector<double> time;
    std::vector<double> device_voltage;
    std::vector<double> current;
    std::vector<double> q;
    std::vector<double> impedance;  // |Z|
    std::vector<double> reactance;  // X_C of the series capacitance
    std::vector<double> mobility;   // mean |v|/|E|
    std::vector<double> velocity;   // mean |v|
    std::vector<std::vector<double>> layer_voltage;     // [layer][sample]
    std::vector<std::vector<double>> layer_capacitance; // [layer][sample]

    std::size_t size() const { return time.size(); }
    std::size_t layer_count() const { return layer_voltage.size(); }
    void reserve(std::size_t n, std::size_t layers);
};

/// Everything a per-step observer may want to look at.
struct StepView {
    std::size_t step;
    double time;
    const ParticleEnsemble& ensemble;
    const GridField& grid;
    const CircuitState& circuit;
};

struct RunOptions {
    bool capacitors = true;
    std::optional<std::uint64_t> seed; // overrides spec.seed
    std::optional<TransportMode> mode; // overrides spec.numeric.transport_mode
    /// Called after every recorded step (including the initial state, step 0).
    std::function<void(const StepView&)> observer;
    /// Receives one-line diagnostics (solver saturation and similar).
    std::function<void(const std::string&)> log;
};

/// Runs the coupled particle / field / circuit loop for the whole waveform.
/// Solver failures are rethrown as SimulationError carrying step and time.
TraceSet run_transient(const DeviceSpec& spec, const Waveform& wave, const RunOptions& options = {});

void write_trace_csv(std::ostream& out, const TraceSet& trace);
/// Reads a trace CSV. Only t, V_dev and I are required; missing optional
/// columns stay empty. Throws IoError naming the line or the missing column.
TraceSet read_trace_csv(std::istream& in);

/// Shortest round-trip formatting used by every CSV writer.
std::string format_double(double value);

} // namespace memsim
