#pragma once

#include <cmath>

namespace memsim {

/// CODATA 2018 exact / recommended values, SI units.
namespace phys {
inline constexpr double kElementaryCharge = 1.602176634e-19;    // C
inline constexpr double kBoltzmann = 1.380649e-23;              // J/K
inline constexpr double kPlanck = 6.62607015e-34;               // J s
inline constexpr double kElectronMass = 9.1093837015e-31;       // kg
inline constexpr double kVacuumPermittivity = 8.8541878128e-12; // F/m
inline constexpr double kPi = 3.14159265358979323846;
} // namespace phys

/// Free-electron Richardson constant, A m^-2 K^-2.
inline constexpr double kFreeElectronRichardson = 1.20173e6;

/// Energy quantity entered and reported in electron-volts.
///
/// Configuration files and presets carry barrier heights and activation
/// energies in eV; `joules()` is the only place the conversion happens.
struct ElectronVolts {
    double value = 0.0;

    constexpr double joules() const { return value * phys::kElementaryCharge; }

    friend constexpr bool operator==(ElectronVolts, ElectronVolts) = default;
};

/// k_B T / e in volts.
inline double thermal_voltage(double temperature) {
    return phys::kBoltzmann * temperature / phys::kElementaryCharge;
}

/// exp(x) with the argument capped at +/-700. Above the cap the function
/// continues linearly so it stays finite and strictly increasing.
inline double exp_capped(double x, bool* saturated = nullptr) {
    constexpr double cap = 700.0;
    if (x > cap) {
        if (saturated) *saturated = true;
        return std::exp(cap) * (1.0 + (x - cap));
    }
    if (x < -cap) {
        if (saturated) *saturated = true;
        return std::exp(-cap);
    }
    return std::exp(x);
}

/// Derivative of exp_capped.
inline double exp_capped_slope(double x) {
    constexpr double cap = 700.0;
    if (x > cap) return std::exp(cap);
    if (x < -cap) return 0.0;
    return std::exp(x);
}

} // namespace memsim
