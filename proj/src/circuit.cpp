#include "memsim/circuit.hpp"

#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace memsim {

using phys::kElementaryCharge;

double effective_parameter(double base, double lambda, double q) {
    const double value = base * (1.0 + lambda * q);
    const double floor = 1e-3 * base;
    return base >= 0.0 ? std::max(value, floor) : std::min(value, floor);
}

CurrentSlope schottky_current(double voltage, ElectronVolts barrier, double ideality,
                              double richardson, double device_area, double temperature) {
    const double vt = thermal_voltage(temperature);
    CurrentSlope out;
    const double saturation = device_area * richardson * temperature * temperature *
                              exp_capped(-barrier.value / vt, &out.saturated);
    const double x = voltage / (ideality * vt);
    if (x <= 700.0) {
        out.current = saturation * std::expm1(x);
        out.slope = saturation * std::exp(x) / (ideality * vt);
    } else {
        out.current = saturation * (exp_capped(x) - 1.0);
        out.slope = saturation * exp_capped_slope(x) / (ideality * vt);
        out.saturated = true;
    }
    return out;
}

CurrentSlope tunnel_current(double voltage, ElectronVolts barrier, double width, double beta,
                            double device_area) {
    if (!(width > 0.0)) throw NonPhysicalError("tunnel barrier width must be positive");
    const double phi = barrier.joules();
    const double u = kElementaryCharge * std::abs(voltage);
    if (!(phi > 0.0) || !(phi + u > 0.0))
        throw NonPhysicalError("effective tunnel barrier is not positive");

    const double bd = beta * width;
    const double a = 4.0 * phys::kPi * bd * std::sqrt(2.0 * phys::kElectronMass) / phys::kPlanck;
    const double prefactor =
        device_area * kElementaryCharge / (2.0 * phys::kPi * phys::kPlanck * bd * bd);
    const double root0 = std::sqrt(phi);
    const double root1 = std::sqrt(phi + u);

    // I = P [phi e^{-a sqrt(phi)} - (phi+u) e^{-a sqrt(phi+u)}], written so the
    // small-bias difference does not cancel.
    const double base = phi * std::exp(-a * root0);
    const double s = std::log1p(u / phi) - a * u / (root1 + root0);
    const double magnitude = -prefactor * base * std::expm1(s);

    CurrentSlope out;
    out.current = voltage < 0.0 ? -magnitude : magnitude;
    out.slope = kElementaryCharge * prefactor * std::exp(-a * root1) * (0.5 * a * root1 - 1.0);
    return out;
}

CurrentSlope ohmic_current(double voltage, double conductivity, double length,
                           double device_area) {
    const double g = conductivity * device_area / length;
    return {g * voltage, g, false};
}

double depletion_width(double voltage, ElectronVolts barrier, double carrier_density,
                       double rel_permittivity, double temperature) {
    const double vt = thermal_voltage(temperature);
    const double k = 2.0 * phys::kVacuumPermittivity * rel_permittivity /
                     (kElementaryCharge * carrier_density);
    const double zero_bias = std::sqrt(k * std::max(barrier.value - vt, barrier.value));
    const double width = std::sqrt(k * std::max(barrier.value - voltage - vt, 0.0));
    return std::max(width, 1e-3 * zero_bias);
}

double parallel_plate_capacitance(double rel_permittivity, double device_area, double r_c,
                                  double width) {
    return phys::kVacuumPermittivity * rel_permittivity * device_area * r_c / width;
}

double quantum_capacitance(double density_of_states, double device_area) {
    return kElementaryCharge * kElementaryCharge * density_of_states * device_area;
}

double series_capacitance(double a, double b) { return a * b / (a + b); }

EffectiveLayer effective_layer(const LayerSpec& layer, double voltage, double q,
                               double oxide_width, double temperature) {
    EffectiveLayer eff;
    switch (layer.kind) {
    case LayerKind::schottky: {
        eff.barrier = {effective_parameter(layer.barrier_height.value, layer.lambda_barrier, q)};
        eff.ideality = effective_parameter(layer.ideality, layer.lambda_ideality, q);
        const double base = depletion_width(layer.polarity * voltage, eff.barrier,
                                            layer.carrier_density, layer.rel_permittivity,
                                            temperature);
        eff.width = effective_parameter(base, layer.lambda_width, q);
        break;
    }
    case LayerKind::tunnel:
        eff.barrier = {effective_parameter(layer.barrier_height.value, layer.lambda_barrier, q)};
        eff.width = effective_parameter(layer.length, layer.lambda_width, q);
        break;
    case LayerKind::oxide:
        eff.width = oxide_width;
        break;
    }
    return eff;
}

double layer_capacitance(const LayerSpec& layer, const EffectiveLayer& eff, double device_area) {
    const double plate = parallel_plate_capacitance(layer.rel_permittivity, device_area,
                                                    layer.capacitance_factor, eff.width);
    if (layer.kind != LayerKind::tunnel) return plate;
    return series_capacitance(plate, quantum_capacitance(layer.density_of_states, device_area));
}

CurrentSlope layer_current(const LayerSpec& layer, const EffectiveLayer& eff, double voltage,
                           const DeviceSpec& spec) {
    switch (layer.kind) {
    case LayerKind::schottky: {
        const double p = layer.polarity;
        CurrentSlope c = schottky_current(p * voltage, eff.barrier, eff.ideality, layer.richardson,
                                          spec.device_area, spec.temperature);
        c.current *= p;
        return c;
    }
    case LayerKind::tunnel:
        return tunnel_current(voltage, eff.barrier, eff.width, layer.correction_factor,
                              spec.device_area);
    case LayerKind::oxide:
        return ohmic_current(voltage, layer.conductivity, layer.length, spec.device_area);
    }
    return {};
}

CircuitState CircuitState::initial(const DeviceSpec& spec, double oxide_width) {
    CircuitState s;
    s.layers.resize(spec.layers.size());
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        LayerState& l = s.layers[k];
        l.effective = effective_layer(spec.layers[k], 0.0, 0.0, oxide_width, spec.temperature);
        l.capacitance = layer_capacitance(spec.layers[k], l.effective, spec.device_area);
    }
    return s;
}

namespace {

struct Workspace {
    std::vector<double> voltage, coef, history, current, slope;
};

} // namespace

CircuitState solve_network_step(double device_voltage, const CircuitState& prev, double q,
                                double oxide_width, double dt, const DeviceSpec& spec,
                                const NetworkOptions& options) {
    const std::size_t m = spec.layers.size();
    if (prev.layers.size() != m) throw Error("circuit state does not match the layer stack");
    if (!(dt > 0.0)) throw TimestepError("timestep must be positive");
    const bool trapezoidal = spec.numeric.integrator == Integrator::trapezoidal;
    const double tol = spec.numeric.newton_tol;

    CircuitState next;
    next.layers.resize(m);
    next.device_voltage = device_voltage;
    next.q = q;

    Workspace w;
    w.voltage.resize(m);
    w.coef.resize(m);
    w.history.resize(m);
    w.current.resize(m);
    w.slope.resize(m);

    for (std::size_t k = 0; k < m; ++k) {
        const LayerState& p = prev.layers[k];
        LayerState& n = next.layers[k];
        n.effective = effective_layer(spec.layers[k], p.voltage, q, oxide_width, spec.temperature);
        n.capacitance =
            options.capacitors ? layer_capacitance(spec.layers[k], n.effective, spec.device_area)
                               : 0.0;
        w.coef[k] = (trapezoidal ? 2.0 : 1.0) * n.capacitance / dt;
        w.history[k] = w.coef[k] * p.voltage + (trapezoidal ? p.capacitive_current : 0.0);
    }

    auto evaluate = [&](const std::vector<double>& v) {
        for (std::size_t k = 0; k < m; ++k) {
            const CurrentSlope c = layer_current(spec.layers[k], next.layers[k].effective, v[k], spec);
            w.current[k] = c.current;
            w.slope[k] = c.slope;
            next.saturated = next.saturated || c.saturated;
        }
    };
    auto residual_scales = [&](const std::vector<double>& v, double current,
                               std::vector<double>& scales) {
        for (std::size_t k = 0; k < m; ++k) {
            const double cap = w.coef[k] * v[k] - w.history[k];
            scales[k] = std::max({std::abs(current), std::abs(w.current[k]), std::abs(cap),
                                  w.coef[k] * (std::abs(v[k]) + std::abs(prev.layers[k].voltage)),
                                  kCurrentFloor});
            if (trapezoidal) scales[k] = std::max(scales[k], std::abs(prev.layers[k].capacitive_current));
        }
    };
    const double sum_scale = std::max(1.0, std::abs(device_voltage));
    std::vector<double> scales(m), r(m);
    auto merit = [&](const std::vector<double>& v, double current,
                     const std::vector<double>& sc) {
        double worst = 0.0, sum = -device_voltage;
        for (std::size_t k = 0; k < m; ++k) {
            const double rk = w.current[k] + w.coef[k] * v[k] - w.history[k] - current;
            worst = std::max(worst, std::abs(rk) / sc[k]);
            sum += v[k];
        }
        return std::max(worst, std::abs(sum) / sum_scale);
    };

    // Initial guess: previous partition, with the change in drive shared out
    // according to the small-signal impedances of the previous state.
    double previous_total = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        w.voltage[k] = prev.layers[k].voltage;
        previous_total += w.voltage[k];
    }
    evaluate(w.voltage);
    {
        double total_impedance = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            total_impedance += 1.0 / std::max(w.slope[k] + w.coef[k], 1e-300);
        const double change = device_voltage - previous_total;
        for (std::size_t k = 0; k < m; ++k)
            w.voltage[k] += change / std::max(w.slope[k] + w.coef[k], 1e-300) / total_impedance;
    }
    evaluate(w.voltage);
    double current = 0.0;
    {
        // Start the branch current from the layer with the largest impedance.
        std::size_t stiff = 0;
        for (std::size_t k = 1; k < m; ++k)
            if (w.slope[k] + w.coef[k] < w.slope[stiff] + w.coef[stiff]) stiff = k;
        current = w.current[stiff] + w.coef[stiff] * w.voltage[stiff] - w.history[stiff];
    }

    std::vector<double> trial(m), step(m), g(m);
    std::ostringstream trace;
    double phi = 0.0;
    for (int iter = 0; iter <= spec.numeric.newton_max_iter; ++iter) {
        residual_scales(w.voltage, current, scales);
        bool converged = true;
        double sum = -device_voltage;
        for (std::size_t k = 0; k < m; ++k) {
            r[k] = w.current[k] + w.coef[k] * w.voltage[k] - w.history[k] - current;
            if (std::abs(r[k]) > tol * scales[k]) converged = false;
            sum += w.voltage[k];
        }
        if (std::abs(sum) > tol * sum_scale) converged = false;
        phi = merit(w.voltage, current, scales);
        if (converged) {
            next.iterations = iter;
            next.current = current;
            for (std::size_t k = 0; k < m; ++k) {
                LayerState& n = next.layers[k];
                n.voltage = w.voltage[k];
                n.resistive_current = w.current[k];
                n.capacitive_current = w.coef[k] * w.voltage[k] - w.history[k];
            }
            return next;
        }
        if (iter == spec.numeric.newton_max_iter) break;
        trace << (iter ? ", " : "") << phi;

        // Schur complement of the bordered system
        //   g_k dV_k - dI = -r_k,   sum dV_k = -r_s.
        double inv_sum = 0.0, weighted = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            g[k] = w.slope[k] + w.coef[k];
            if (!std::isfinite(g[k]))
                throw SingularJacobianError("non-finite circuit Jacobian; try a smaller timestep");
            g[k] = std::max(g[k], 1e-300);
            inv_sum += 1.0 / g[k];
            weighted += r[k] / g[k];
        }
        if (!std::isfinite(inv_sum) || inv_sum <= 0.0)
            throw SingularJacobianError("singular circuit Jacobian; try a smaller timestep");
        const double d_current = (weighted - sum) / inv_sum;
        for (std::size_t k = 0; k < m; ++k) step[k] = (d_current - r[k]) / g[k];

        // Halve the step until the scaled residual drops, at most 40 times.
        double alpha = 1.0;
        for (int halving = 0; halving <= 40; ++halving) {
            for (std::size_t k = 0; k < m; ++k) trial[k] = w.voltage[k] + alpha * step[k];
            evaluate(trial);
            const double trial_current = current + alpha * d_current;
            const double trial_merit = merit(trial, trial_current, scales);
            if (trial_merit < phi || halving == 40) {
                w.voltage = trial;
                current = trial_current;
                break;
            }
            alpha *= 0.5;
        }
    }
    throw ConvergenceError("circuit Newton did not converge in " +
                               std::to_string(spec.numeric.newton_max_iter) +
                               " iterations (scaled residual " + std::to_string(phi) +
                               "; history " + trace.str() + ")",
                           phi, spec.numeric.newton_max_iter);
}

InductanceDiagnostic kinetic_inductance_diagnostic(double length, double carrier_density,
                                                   double device_area, double collision_rate) {
    if (!(carrier_density > 0.0) || !(device_area > 0.0))
        throw RangeError("carrier density and device area must be positive");
    InductanceDiagnostic d;
    d.inductance = phys::kElectronMass * length /
                   (kElementaryCharge * kElementaryCharge * carrier_density * device_area);
    d.resistance = d.inductance * collision_rate;
    return d;
}

} // namespace memsim
