#include "memsim/transient.hpp"

#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace memsim {

std::size_t Waveform::sample_count() const {
    return static_cast<std::size_t>(std::llround(cycles * period() / dt));
}

double Waveform::voltage_at(double t) const {
    return amplitude * std::sin(2.0 * phys::kPi * frequency * t);
}

Waveform sine_waveform(double amplitude, double frequency, int cycles, double dt) {
    if (!(frequency > 0.0) || !std::isfinite(frequency))
        throw RangeError("drive frequency must be positive");
    if (!std::isfinite(amplitude)) throw RangeError("drive amplitude must be finite");
    if (cycles < 1) throw RangeError("at least one cycle is required");
    if (!(dt > 0.0)) throw TimestepError("timestep must be positive");
    if (dt > 1.0 / frequency / 100.0 * (1.0 + 1e-12))
        throw TimestepError("timestep " + format_double(dt) + " s is coarser than period/100");
    return Waveform{amplitude, frequency, cycles, dt};
}

std::vector<double> waveform_samples(const Waveform& wave) {
    std::vector<double> v(wave.sample_count());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = wave.voltage_at(n * wave.dt);
    return v;
}

Waveform waveform_for(const DeviceSpec& spec, double amplitude, double frequency) {
    if (!(frequency > 0.0)) throw RangeError("drive frequency must be positive");
    const double dt = spec.numeric.timestep ? *spec.numeric.timestep
                                            : 1.0 / frequency / spec.numeric.steps_per_period;
    return sine_waveform(amplitude, frequency, spec.numeric.cycles, dt);
}

void TraceSet::reserve(std::size_t n, std::size_t layers) {
    for (auto* column : {&time, &device_voltage, &current, &q, &impedance, &reactance, &mobility,
                         &velocity})
        column->reserve(n);
    layer_voltage.assign(layers, {});
    layer_capacitance.assign(layers, {});
    for (auto& c : layer_voltage) c.reserve(n);
    for (auto& c : layer_capacitance) c.reserve(n);
}

namespace {

// Potential split into a linear ramp carrying the boundary data and a
// grounded part carrying the space charge. Only the grounded part is
// relaxed by SOR. Its starting guess is either the exact tridiagonal
// solution or the previous solution extrapolated linearly in time; the
// latter needs hundreds of sweeps per step on a 512-node grid.
class FieldSolver {
public:
    FieldSolver(GridField& grid, const SorSettings& settings, PoissonStart start)
        : grid_(grid), settings_(settings), start_(start), charge_part_(grid.nodes, 0.0),
          previous_(grid.nodes, 0.0), guess_(grid.nodes, 0.0) {}

    int solve(double left, double right) {
        const int n = grid_.nodes;
        if (start_ == PoissonStart::direct) {
            solve_poisson_tridiagonal(grid_.charge_density, 0.0, 0.0, grid_.permittivity, grid_.dx,
                                      guess_);
        } else if (have_history_) {
            for (int i = 0; i < n; ++i) guess_[i] = 2.0 * charge_part_[i] - previous_[i];
        } else {
            guess_ = charge_part_;
        }
        previous_ = charge_part_;
        charge_part_ = guess_;
        const SorReport report = solve_poisson_in_place(grid_.charge_density, 0.0, 0.0,
                                                        grid_.permittivity, grid_.dx, settings_,
                                                        charge_part_);
        have_history_ = true;
        for (int i = 0; i < n; ++i) {
            const double s = static_cast<double>(i) / (n - 1);
            grid_.potential[i] = charge_part_[i] + left + (right - left) * s;
        }
        electric_field(grid_.potential, grid_.dx, grid_.field);
        return report.iterations;
    }

private:
    GridField& grid_;
    SorSettings settings_;
    PoissonStart start_;
    std::vector<double> charge_part_, previous_, guess_;
    bool have_history_ = false;
};

double series_of(const CircuitState& state) {
    double inverse = 0.0;
    for (const LayerState& l : state.layers) {
        if (!(l.capacitance > 0.0)) return 0.0;
        inverse += 1.0 / l.capacitance;
    }
    return inverse > 0.0 ? 1.0 / inverse : 0.0;
}

void record(TraceSet& trace, double t, const CircuitState& circuit, double q,
            const TransportStats& stats, double frequency) {
    trace.time.push_back(t);
    trace.device_voltage.push_back(circuit.device_voltage);
    trace.current.push_back(circuit.current);
    trace.q.push_back(q);
    trace.impedance.push_back(std::abs(circuit.device_voltage) /
                              std::max(std::abs(circuit.current), kCurrentFloor));
    const double c = series_of(circuit);
    trace.reactance.push_back(c > 0.0 ? 1.0 / (2.0 * phys::kPi * frequency * c)
                                      : std::numeric_limits<double>::infinity());
    trace.mobility.push_back(stats.mean_mobility);
    trace.velocity.push_back(stats.mean_speed);
    for (std::size_t k = 0; k < circuit.layers.size(); ++k) {
        trace.layer_voltage[k].push_back(circuit.layers[k].voltage);
        trace.layer_capacitance[k].push_back(circuit.layers[k].capacitance);
    }
}

} // namespace

TraceSet run_transient(const DeviceSpec& spec, const Waveform& wave, const RunOptions& options) {
    require_valid(spec);
    const std::size_t samples = wave.sample_count();
    const std::size_t oxide = spec.oxide_index();
    const TransportMode mode = options.mode.value_or(spec.numeric.transport_mode);
    NetworkOptions network;
    network.capacitors = options.capacitors;

    ParticleEnsemble ensemble = init_ensemble(spec, options.seed.value_or(spec.seed));
    GridField grid = GridField::make(spec.numeric.grid_points, spec.oxide_length(),
                                     spec.oxide_permittivity());
    const double interface = reference_interface(ensemble, spec.charge_number);

    // The fixed background never moves; deposit it once.
    GridField background = grid;
    deposit_positions(ensemble.fixed, -ensemble.particle_charge, spec.device_area, background);
    auto deposit = [&] {
        grid.charge_density = background.charge_density;
        deposit_positions(ensemble.mobile, ensemble.particle_charge, spec.device_area, grid);
    };

    FieldSolver field(grid, SorSettings{spec.numeric.poisson_tol, spec.numeric.poisson_max_iter},
                      spec.numeric.poisson_start);

    TraceSet trace;
    trace.frequency = wave.frequency;
    trace.reserve(samples, spec.layers.size());

    std::size_t step = 0;
    double t = 0.0;
    bool warned = false;
    try {
        deposit();
        field.solve(0.0, 0.0);
        CircuitState circuit =
            CircuitState::initial(spec, effective_oxide_width(ensemble, interface, grid.dx));
        if (!options.capacitors)
            for (LayerState& l : circuit.layers) l.capacitance = 0.0;
        record(trace, 0.0, circuit, 0.0, transport_stats(ensemble, grid, spec), wave.frequency);
        if (options.observer) options.observer(StepView{0, 0.0, ensemble, grid, circuit});

        for (step = 1; step < samples; ++step) {
            t = step * wave.dt;
            deposit();
            field.solve(circuit.layers[oxide].voltage, 0.0);
            const TransportStats stats = advance_particles(ensemble, grid, wave.dt, mode, spec);
            const double q = internal_state(ensemble);
            const double width = effective_oxide_width(ensemble, interface, grid.dx);
            circuit = solve_network_step(wave.voltage_at(t), circuit, q, width, wave.dt, spec, network);
            if (circuit.saturated && !warned && options.log) {
                options.log("exponential saturation cap reached at step " + std::to_string(step));
                warned = true;
            }
            record(trace, t, circuit, q, stats, wave.frequency);
            if (options.observer) options.observer(StepView{step, t, ensemble, grid, circuit});
        }
    } catch (const SimulationError&) {
        throw;
    } catch (const Error& e) {
        throw SimulationError(step, t, e.what());
    }
    return trace;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, result.ptr);
}

void write_trace_csv(std::ostream& out, const TraceSet& trace) {
    const std::size_t layers = trace.layer_count();
    out << "t,V_dev,I,q,Z_abs,X_C,mobility,velocity";
    for (std::size_t k = 0; k < layers; ++k) out << ",V_layer" << k;
    for (std::size_t k = 0; k < layers; ++k) out << ",C_layer" << k;
    out << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << format_double(trace.time[i]) << ',' << format_double(trace.device_voltage[i]) << ','
            << format_double(trace.current[i]) << ',' << format_double(trace.q[i]) << ','
            << format_double(trace.impedance[i]) << ',' << format_double(trace.reactance[i]) << ','
            << format_double(trace.mobility[i]) << ',' << format_double(trace.velocity[i]);
        for (std::size_t k = 0; k < layers; ++k) out << ',' << format_double(trace.layer_voltage[k][i]);
        for (std::size_t k = 0; k < layers; ++k)
            out << ',' << format_double(trace.layer_capacitance[k][i]);
        out << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

TraceSet read_trace_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw IoError("empty trace file", 1);
    const std::vector<std::string> header = split_csv_line(line);

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
    for (const char* required : {"t", "V_dev", "I"})
        if (!index.count(required))
            throw IoError(std::string("trace is missing required column '") + required + "'", 1);

    TraceSet trace;
    std::vector<std::pair<std::vector<double>*, std::size_t>> columns = {
        {&trace.time, index["t"]}, {&trace.device_voltage, index["V_dev"]}, {&trace.current, index["I"]}};
    const std::pair<const char*, std::vector<double>*> optional[] = {
        {"q", &trace.q},           {"Z_abs", &trace.impedance}, {"X_C", &trace.reactance},
        {"mobility", &trace.mobility}, {"velocity", &trace.velocity}};
    for (const auto& [name, column] : optional)
        if (index.count(name)) columns.emplace_back(column, index[name]);
    for (std::size_t k = 0;; ++k) {
        const auto v = index.find("V_layer" + std::to_string(k));
        if (v == index.end()) break;
        trace.layer_voltage.emplace_back();
        trace.layer_capacitance.emplace_back();
    }
    for (std::size_t k = 0; k < trace.layer_voltage.size(); ++k) {
        columns.emplace_back(&trace.layer_voltage[k], index["V_layer" + std::to_string(k)]);
        const auto c = index.find("C_layer" + std::to_string(k));
        if (c != index.end()) columns.emplace_back(&trace.layer_capacitance[k], c->second);
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw IoError("expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()),
                          line_no);
        for (auto& [column, pos] : columns) {
            const std::string& text = fields[pos];
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(text.c_str(), &end);
            if (text.empty() || *end != '\0')
                throw IoError("cannot parse '" + text + "' in column '" + header[pos] + "'", line_no);
            column->push_back(v);
        }
    }
    return trace;
}

} // namespace memsim
