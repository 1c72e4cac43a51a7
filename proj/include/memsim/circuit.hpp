#pragma once

#include "memsim/device_config.hpp"

#include <vector>

namespace memsim {

/// Current floor used when scaling relative residuals near I = 0.
inline constexpr double kCurrentFloor = 1e-15; // A

/// base * (1 + lambda q), never below 1e-3 * base.
double effective_parameter(double base, double lambda, double q);

struct CurrentSlope {
    double current = 0.0; // A
    double slope = 0.0;   // dI/dV, S
    bool saturated = false;
};

/// Thermionic emission over a barrier, forward for positive V.
CurrentSlope schottky_current(double voltage, ElectronVolts barrier, double ideality,
                              double richardson, double device_area, double temperature);

/// Simmons tunnelling through a rectangular barrier; odd in V.
/// Throws NonPhysicalError when the barrier or width is not positive.
CurrentSlope tunnel_current(double voltage, ElectronVolts barrier, double width, double beta,
                            double device_area);

CurrentSlope ohmic_current(double voltage, double conductivity, double length,
                           double device_area);

/// Depletion width at junction voltage V (forward positive), radicand
/// floored at 0. Result is floored at 1e-3 of the zero-bias width.
double depletion_width(double voltage, ElectronVolts barrier, double carrier_density,
                       double rel_permittivity, double temperature);

double parallel_plate_capacitance(double rel_permittivity, double device_area, double r_c,
                                  double width);
/// Quantum capacitance e^2 D(E) A_d, D(E) an areal density of states.
double quantum_capacitance(double density_of_states, double device_area);
double series_capacitance(double a, double b);

/// State-modulated quantities of one layer at internal state q.
struct EffectiveLayer {
    ElectronVolts barrier{};
    double ideality = 1.0;
    double width = 0.0; // d_SC_eff, d_TB_eff or d_ox_eff, m
};

/// Effective barrier, ideality and width for `layer`. For schottky layers
/// the width is the depletion width at the junction voltage `voltage`;
/// for the oxide it is `oxide_width` (from the particle ensemble).
EffectiveLayer effective_layer(const LayerSpec& layer, double voltage, double q,
                               double oxide_width, double temperature);

/// Parallel-plate capacitance of a layer at its effective width; tunnel layers
/// add the quantum capacitance in series.
double layer_capacitance(const LayerSpec& layer, const EffectiveLayer& eff, double device_area);

/// Resistive current of `layer` at layer voltage V (device polarity).
CurrentSlope layer_current(const LayerSpec& layer, const EffectiveLayer& eff, double voltage,
                           const DeviceSpec& spec);

struct LayerState {
    double voltage = 0.0;
    double resistive_current = 0.0;
    double capacitive_current = 0.0;
    double capacitance = 0.0;
    EffectiveLayer effective;
};

struct CircuitState {
    std::vector<LayerState> layers;
    double device_voltage = 0.0;
    double current = 0.0;
    double q = 0.0;
    int iterations = 0;
    bool saturated = false;

    /// Zero-bias state for `spec` at q = 0.
    static CircuitState initial(const DeviceSpec& spec, double oxide_width);
};

struct NetworkOptions {
    bool capacitors = true;
};

/// Implicit series-network step: every layer carries the device current
///   I = I_res,k(V_k) + I_C,k,  sum_k V_k = V_dev,
/// solved by damped Newton on (V_1..V_m, I). Capacitances are evaluated at
/// the previous layer voltages and the current q.
CircuitState solve_network_step(double device_voltage, const CircuitState& prev, double q,
                                double oxide_width, double dt, const DeviceSpec& spec,
                                const NetworkOptions& options = {});

struct InductanceDiagnostic {
    double inductance = 0.0; // H
    double resistance = 0.0; // Ohm
};

/// Drude kinetic inductance L = m l / (e^2 n A) and R = L gamma.
InductanceDiagnostic kinetic_inductance_diagnostic(double length, double carrier_density,
                                                   double device_area, double collision_rate);

} // namespace memsim
