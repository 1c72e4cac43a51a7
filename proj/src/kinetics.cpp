#include "memsim/kinetics.hpp"

#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace memsim {

namespace {

constexpr double kSinhCap = 700.0;
constexpr double kMobilityFieldFloor = 1.0; // V/m

// Per-run constants of the hopping law, hoisted out of the particle loops.
struct DriftLaw {
    double prefactor;   // nu0 d, m/s
    double field_scale; // |z| d / V_T, m/V
    double sign;        // sign(z)
    double u_low;       // eV
    double u_slope;     // eV/m
    double inv_kt;      // 1/eV

    explicit DriftLaw(const DeviceSpec& spec) {
        const LayerSpec& ox = spec.oxide();
        const double vt = spec.thermal_voltage();
        prefactor = spec.phonon_frequency * spec.lattice_constant;
        field_scale = std::abs(spec.charge_number) * spec.lattice_constant / vt;
        sign = spec.charge_number > 0 ? 1.0 : -1.0;
        u_low = ox.activation_low.value;
        u_slope = (ox.activation_high.value - ox.activation_low.value) / ox.length;
        inv_kt = 1.0 / vt;
    }

    double velocity(double field, double activation) const {
        const double arg = field_scale * field;
        if (std::abs(arg) > kSinhCap)
            throw NonPhysicalError("drift field " + std::to_string(field) +
                                   " V/m exceeds the hopping-law range (sinh argument > 700)");
        return sign * prefactor * std::exp(-activation * inv_kt) * std::sinh(arg);
    }

    double velocity_at(double field, double x) const { return velocity(field, u_low + u_slope * x); }
};

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ParticleEnsemble init_ensemble(const DeviceSpec& spec, std::uint64_t seed) {
    const int count = spec.numeric.particle_count;
    const double length = spec.oxide_length();

    ParticleEnsemble e;
    e.length = length;
    e.rng.seed(seed);
    e.mobile.resize(count);
    for (double& x : e.mobile) x = length * uniform01(e.rng);
    e.fixed.resize(count);
    for (int i = 0; i < count; ++i) e.fixed[i] = (i + 0.5) * length / count;

    if (spec.numeric.weight_form == WeightForm::count) {
        e.weight = spec.defect_density * spec.device_area * length / count;
    } else {
        const double dx = length / (spec.numeric.grid_points - 1);
        e.weight = spec.defect_density * length * dx / count;
    }
    e.particle_charge = spec.charge_number * phys::kElementaryCharge * e.weight;
    e.initial_mean = mean(e.mobile);
    return e;
}

void deposit_positions(const std::vector<double>& positions, double charge, double device_area,
                       GridField& grid) {
    const double dx = grid.dx;
    const int n = grid.nodes;
    const double density = charge / (device_area * dx);
    const double span = grid.length();
    for (double x : positions) {
        if (!(x >= 0.0 && x <= span))
            throw Error("particle at x = " + std::to_string(x) + " m lies outside the oxide");
        const double s = x / dx;
        int i = static_cast<int>(s);
        if (i >= n - 1) i = n - 2;
        const double frac = s - i;
        grid.charge_density[i] += density * (1.0 - frac);
        grid.charge_density[i + 1] += density * frac;
    }
}

void deposit_charge(const ParticleEnsemble& ensemble, double device_area, GridField& grid) {
    std::fill(grid.charge_density.begin(), grid.charge_density.end(), 0.0);
    deposit_positions(ensemble.fixed, -ensemble.particle_charge, device_area, grid);
    deposit_positions(ensemble.mobile, ensemble.particle_charge, device_area, grid);
}

ElectronVolts activation_energy_at(double x, const DeviceSpec& spec) {
    const LayerSpec& ox = spec.oxide();
    if (!(x >= 0.0 && x <= ox.length))
        throw RangeError("position " + std::to_string(x) + " m outside the oxide [0, " +
                         std::to_string(ox.length) + "]");
    const double low = ox.activation_low.value;
    const double high = ox.activation_high.value;
    if (low == high) return {low};
    return {low + (high - low) * x / ox.length};
}

double drift_velocity(double field, ElectronVolts activation, const DeviceSpec& spec) {
    return DriftLaw(spec).velocity(field, activation.value);
}

TransportStats transport_stats(const ParticleEnsemble& ensemble, const GridField& grid,
                               const DeviceSpec& spec) {
    const DriftLaw law(spec);
    double speed = 0.0;
    double mobility = 0.0;
    std::size_t counted = 0;
    for (double x : ensemble.mobile) {
        const double field = interpolate_at(grid.field, grid.dx, x);
        const double v = std::abs(law.velocity_at(field, x));
        speed += v;
        if (std::abs(field) >= kMobilityFieldFloor) {
            mobility += v / std::abs(field);
            ++counted;
        }
    }
    TransportStats stats;
    if (!ensemble.mobile.empty()) stats.mean_speed = speed / ensemble.mobile.size();
    if (counted) stats.mean_mobility = mobility / counted;
    return stats;
}

TransportStats advance_particles(ParticleEnsemble& ensemble, const GridField& grid, double dt,
                                 TransportMode mode, const DeviceSpec& spec) {
    const DriftLaw law(spec);
    const double length = ensemble.length;
    const double hop = spec.lattice_constant;
    double speed = 0.0;
    double mobility = 0.0;
    std::size_t counted = 0;

    for (std::size_t i = 0; i < ensemble.mobile.size(); ++i) {
        double& x = ensemble.mobile[i];
        const double field = interpolate_at(grid.field, grid.dx, x);
        const double v = law.velocity_at(field, x);
        speed += std::abs(v);
        if (std::abs(field) >= kMobilityFieldFloor) {
            mobility += std::abs(v) / std::abs(field);
            ++counted;
        }

        if (mode == TransportMode::deterministic) {
            x += v * dt;
        } else {
            const double p = std::abs(v) * dt / hop;
            if (p > 1.0)
                throw TimestepError("hop probability " + std::to_string(p) + " > 1 for particle " +
                                    std::to_string(i) + "; reduce the timestep");
            // One draw per particle per step keeps the stream position independent of outcomes.
            const double u = uniform01(ensemble.rng);
            if (u < p) x += v > 0.0 ? hop : -hop;
        }
        x = std::clamp(x, 0.0, length);
    }

    TransportStats stats;
    if (!ensemble.mobile.empty()) stats.mean_speed = speed / ensemble.mobile.size();
    if (counted) stats.mean_mobility = mobility / counted;
    return stats;
}

double internal_state(const ParticleEnsemble& ensemble) {
    const double q = 2.0 * (mean(ensemble.mobile) - ensemble.initial_mean) / ensemble.length;
    return std::clamp(q, -1.0, 1.0);
}

double reference_interface(const ParticleEnsemble& ensemble, int charge_number) {
    return charge_number > 0 ? ensemble.length : 0.0;
}

double effective_oxide_width(const ParticleEnsemble& ensemble, double interface, double dx) {
    auto mean_distance = [interface](const std::vector<double>& xs) {
        double sum = 0.0;
        for (double x : xs) sum += std::abs(x - interface);
        return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
    };
    const double separation = std::abs(mean_distance(ensemble.mobile) - mean_distance(ensemble.fixed));
    return std::max(separation, dx);
}

} // namespace memsim
