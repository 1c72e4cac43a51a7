#pragma once

#include "memsim/device_config.hpp"
#include "memsim/field_solver.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace memsim {

/// Mobile defects plus the immobile counter-charges that keep the oxide neutral.
struct ParticleEnsemble {
    std::vector<double> mobile; // m, in [0, length]
    std::vector<double> fixed;  // m, uniformly spaced, never move
    double weight = 0.0;        // real defects per simulated particle
    double particle_charge = 0.0; // C per simulated mobile particle (fixed ones carry the negative)
    double length = 0.0;          // oxide thickness, m
    double initial_mean = 0.0;    // mean mobile position at initialisation
    std::mt19937_64 rng;
};

/// Portable uniform draw in [0, 1) built from the top 53 bits of the generator.
double uniform01(std::mt19937_64& rng);

ParticleEnsemble init_ensemble(const DeviceSpec& spec, std::uint64_t seed);

/// Cloud-in-cell deposit of both populations into grid.charge_density
/// (node volume A_d dx). Throws Error if a particle sits outside the oxide.
void deposit_charge(const ParticleEnsemble& ensemble, double device_area, GridField& grid);

/// Deposit of a single population; used to cache the fixed background.
void deposit_positions(const std::vector<double>& positions, double charge, double device_area,
                       GridField& grid);

/// Linear activation-energy ramp across the oxide, U_A_low at x = 0.
ElectronVolts activation_energy_at(double x, const DeviceSpec& spec);

/// Hopping drift velocity for field E at activation energy U_A. Positive
/// values point towards increasing x. Throws NonPhysicalError when the sinh
/// argument exceeds 700.
double drift_velocity(double field, ElectronVolts activation, const DeviceSpec& spec);

struct TransportStats {
    double mean_speed = 0.0;    // m/s
    double mean_mobility = 0.0; // m^2/(V s)
};

/// Mean |v| and mean |v|/|E| over the mobile particles; particles sitting
/// in fields weaker than 1 V/m are left out of the mobility average.
TransportStats transport_stats(const ParticleEnsemble& ensemble, const GridField& grid,
                               const DeviceSpec& spec);

/// Moves mobile particles for one step in the field stored in `grid.field`.
/// Returns the transport statistics evaluated before the move.
TransportStats advance_particles(ParticleEnsemble& ensemble, const GridField& grid, double dt,
                                 TransportMode mode, const DeviceSpec& spec);

/// q = 2 (mean - initial mean) / l_ox, clamped to [-1, 1].
double internal_state(const ParticleEnsemble& ensemble);

/// Position of the interface the mobile defects drift towards under positive
/// bias: the bottom side (x = l) for positive charge, the top (x = 0) otherwise.
double reference_interface(const ParticleEnsemble& ensemble, int charge_number);

/// |d_eff,mobile - d_eff,fixed|, floored at one grid spacing.
double effective_oxide_width(const ParticleEnsemble& ensemble, double interface, double dx);

} // namespace memsim
