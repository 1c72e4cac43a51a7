#pragma once

#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memsim {

enum class LayerKind { schottky, tunnel, oxide };
enum class TransportMode { deterministic, stochastic };

/// How the per-particle weight is formed from the defect density.
/// `count`: w = rho * A_d * l_ox / N_p (real particles per simulated one).
/// `areal`: w = rho * l_ox * dx / N_p (per unit area, no device area).
enum class WeightForm { count, areal };

enum class Integrator { backward_euler, trapezoidal };

/// Starting guess for the per-step SOR solve: the exact tridiagonal
/// solution (`direct`), or the previous step's potential extrapolated in
/// time (`previous`).
enum class PoissonStart { direct, previous };

/// One layer of the series stack, listed from the top electrode down.
///
/// Which fields are meaningful depends on `kind`:
///   schottky - barrier_height, ideality, richardson, carrier_density
///   tunnel   - length (barrier width), barrier_height, correction_factor,
///              density_of_states
///   oxide    - length, conductivity, activation_low/high
/// rel_permittivity, capacitance_factor and the lambdas apply to all.
struct LayerSpec {
    LayerKind kind = LayerKind::oxide;
    double length = 0.0; // m
    ElectronVolts barrier_height{};
    double ideality = 1.0;
    double richardson = kFreeElectronRichardson; // A m^-2 K^-2
    double carrier_density = 0.0;                // m^-3
    double correction_factor = 1.0;              // beta
    double density_of_states = 1.0e35;           // J^-1 m^-2
    double conductivity = 0.0;                   // S/m
    double rel_permittivity = 1.0;
    double lambda_width = 0.0;     // lambda_d (schottky) / lambda_t (tunnel)
    double lambda_barrier = 0.0;   // lambda_Phi
    double lambda_ideality = 0.0;  // lambda_n
    double capacitance_factor = 1.0; // r_C
    ElectronVolts activation_low{};  // U_A at the top-side end of the oxide
    ElectronVolts activation_high{}; // U_A at the bottom-side end
    /// +1 when the junction is forward biased by a positive device voltage.
    int polarity = +1;

    bool operator==(const LayerSpec&) const = default;
};

struct NumericOptions {
    int grid_points = 512;
    int particle_count = 1000;
    /// Used when `timestep` is unset: dt = period / steps_per_period.
    int steps_per_period = 5000;
    std::optional<double> timestep; // s
    double poisson_tol = 1e-8;
    int poisson_max_iter = 200000;
    double newton_tol = 1e-10;
    int newton_max_iter = 200;
    TransportMode transport_mode = TransportMode::deterministic;
    int cycles = 5;
    WeightForm weight_form = WeightForm::count;
    Integrator integrator = Integrator::backward_euler;
    PoissonStart poisson_start = PoissonStart::direct;

    bool operator==(const NumericOptions&) const = default;
};

struct DeviceSpec {
    std::string name;
    double temperature = 298.0;     // K
    double device_area = 0.0;       // m^2
    std::vector<LayerSpec> layers;  // top electrode first
    double lattice_constant = 0.0;  // m
    double phonon_frequency = 0.0;  // Hz
    int charge_number = 0;
    double defect_density = 0.0;    // m^-3
    NumericOptions numeric;
    std::uint64_t seed = 1;

    bool operator==(const DeviceSpec&) const = default;

    /// Index of the (first) oxide layer. Throws ConfigError when absent.
    std::size_t oxide_index() const;
    const LayerSpec& oxide() const { return layers[oxide_index()]; }
    double oxide_length() const { return oxide().length; }
    double oxide_permittivity() const {
        return oxide().rel_permittivity * phys::kVacuumPermittivity;
    }
    double thermal_voltage() const { return memsim::thermal_voltage(temperature); }
};

std::vector<std::string> preset_names();

/// Preset parameter sets for the Au/BiFeO3/Pt ("bfo") and the
/// Au/NbxOy/Al2O3/Nb double-barrier ("dbmd") devices.
DeviceSpec builtin_device(std::string_view name);

DeviceSpec parse_device_spec(std::string_view text);
DeviceSpec load_device_spec(const std::filesystem::path& path);

/// Config-file text for `spec`; parse_device_spec(serialize(s)) == s.
std::string serialize(const DeviceSpec& spec);

std::vector<Violation> validate(const DeviceSpec& spec);

/// Throws ValidationError when validate() reports anything.
void require_valid(const DeviceSpec& spec);

std::string_view to_string(LayerKind kind);
std::string_view to_string(TransportMode mode);
TransportMode parse_transport_mode(std::string_view text);

} // namespace memsim
