#include "memsim/device_config.hpp"
#include "memsim/error.hpp"
#include "memsim/field_solver.hpp"
#include "memsim/kinetics.hpp"

#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace memsim;

namespace {

GridField uniform_field_grid(const DeviceSpec& spec, double field) {
    GridField g = GridField::make(spec.numeric.grid_points, spec.oxide_length(),
                                  spec.oxide_permittivity());
    std::fill(g.field.begin(), g.field.end(), field);
    return g;
}

double total_charge(const GridField& g, double area) {
    return std::accumulate(g.charge_density.begin(), g.charge_density.end(), 0.0) * area * g.dx;
}

} // namespace

TEST_CASE("ensemble initialisation") {
    const DeviceSpec spec = builtin_device("bfo");
    const ParticleEnsemble a = init_ensemble(spec, 42);
    const ParticleEnsemble b = init_ensemble(spec, 42);
    const ParticleEnsemble c = init_ensemble(spec, 43);
    REQUIRE(a.mobile.size() == 1000);
    REQUIRE(a.fixed.size() == 1000);
    for (double x : a.mobile) {
        CHECK(x >= 0.0);
        CHECK(x <= spec.oxide_length());
    }
    CHECK(a.mobile == b.mobile);
    CHECK(a.mobile != c.mobile);
    CHECK(a.fixed == c.fixed);
    CHECK(a.weight == doctest::Approx(oracle::kBfoParticleWeight).epsilon(1e-12));
    CHECK(a.particle_charge == doctest::Approx(2 * 1.602176634e-19 * oracle::kBfoParticleWeight));
}

TEST_CASE("uniform01 stays in [0, 1)") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(rng);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("cloud-in-cell deposit") {
    GridField g = GridField::make(11, 10e-9, 1.0);
    const double area = 1e-12, charge = 1e-18;
    const double node_density = charge / (area * g.dx);

    SUBCASE("particle on a node") {
        deposit_positions({3e-9}, charge, area, g);
        CHECK(g.charge_density[3] == doctest::Approx(node_density));
        CHECK(g.charge_density[2] == doctest::Approx(0.0).scale(node_density));
        CHECK(g.charge_density[4] == doctest::Approx(0.0).scale(node_density));
    }
    SUBCASE("particle midway between nodes") {
        deposit_positions({3.5e-9}, charge, area, g);
        CHECK(g.charge_density[3] == doctest::Approx(0.5 * node_density));
        CHECK(g.charge_density[4] == doctest::Approx(0.5 * node_density));
    }
    SUBCASE("particle on the last node") {
        deposit_positions({10e-9}, charge, area, g);
        CHECK(g.charge_density[10] == doctest::Approx(node_density));
    }
    SUBCASE("outside the oxide") {
        CHECK_THROWS_AS(deposit_positions({11e-9}, charge, area, g), Error);
    }
}

TEST_CASE("deposit conserves charge and the paired ensemble is neutral") {
    const DeviceSpec spec = builtin_device("bfo");
    const ParticleEnsemble e = init_ensemble(spec, 1);
    GridField g = GridField::make(spec.numeric.grid_points, spec.oxide_length(),
                                  spec.oxide_permittivity());
    deposit_positions(e.mobile, e.particle_charge, spec.device_area, g);
    const double mobile_total = e.particle_charge * e.mobile.size();
    CHECK(total_charge(g, spec.device_area) == doctest::Approx(mobile_total).epsilon(1e-12));

    deposit_charge(e, spec.device_area, g);
    CHECK(std::abs(total_charge(g, spec.device_area)) <= 1e-12 * mobile_total);
}

TEST_CASE("drift velocity") {
    DeviceSpec spec = builtin_device("bfo");
    const ElectronVolts ua{0.55};
    CHECK(drift_velocity(1e7, ua, spec) ==
          doctest::Approx(oracle::kDriftVelocityBfo).epsilon(1e-10));
    CHECK(drift_velocity(0.0, ua, spec) == 0.0);
    for (double e : {1e3, 1e6, 3e7}) {
        CAPTURE(e);
        CHECK(drift_velocity(-e, ua, spec) == doctest::Approx(-drift_velocity(e, ua, spec)));
        CHECK(drift_velocity(e, ua, spec) > 0.0);
    }
    CHECK_THROWS_AS(drift_velocity(1e11, ua, spec), NonPhysicalError);

    spec.charge_number = -2;
    CHECK(drift_velocity(1e7, ua, spec) == doctest::Approx(-oracle::kDriftVelocityBfo).epsilon(1e-10));
}

TEST_CASE("activation energy ramp") {
    const DeviceSpec spec = builtin_device("bfo");
    const double l = spec.oxide_length();
    CHECK(activation_energy_at(0.0, spec).value == doctest::Approx(0.55));
    CHECK(activation_energy_at(l, spec).value == doctest::Approx(0.76));
    CHECK(activation_energy_at(0.5 * l, spec).value == doctest::Approx(0.655));
    CHECK_THROWS_AS(activation_energy_at(-1e-9, spec), RangeError);
    CHECK_THROWS_AS(activation_energy_at(2 * l, spec), RangeError);

    const DeviceSpec flat = builtin_device("dbmd");
    CHECK(activation_energy_at(0.3 * flat.oxide_length(), flat).value == 0.76);
}

TEST_CASE("deterministic step moves each particle by v dt") {
    const DeviceSpec spec = builtin_device("bfo");
    ParticleEnsemble e = init_ensemble(spec, 3);
    const GridField g = uniform_field_grid(spec, 1e7);
    const std::vector<double> before = e.mobile;
    const double dt = 1e-3;
    advance_particles(e, g, dt, TransportMode::deterministic, spec);
    for (std::size_t i = 0; i < before.size(); ++i) {
        const double v = drift_velocity(1e7, activation_energy_at(before[i], spec), spec);
        const double expected = std::min(before[i] + v * dt, spec.oxide_length());
        CHECK(e.mobile[i] == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("stochastic hops match the drift on average") {
    DeviceSpec spec = builtin_device("bfo");
    spec.numeric.particle_count = 1;
    ParticleEnsemble e = init_ensemble(spec, 11);
    const double start = 0.5 * spec.oxide_length();
    const double field = 1e7;
    const GridField g = uniform_field_grid(spec, field);
    const double v = drift_velocity(field, activation_energy_at(start, spec), spec);
    const double hop = spec.lattice_constant;
    const double dt = 0.3 * hop / v;
    const double p = v * dt / hop;

    const int draws = 100000;
    int hops = 0;
    for (int k = 0; k < draws; ++k) {
        e.mobile[0] = start;
        advance_particles(e, g, dt, TransportMode::stochastic, spec);
        if (e.mobile[0] > start) ++hops;
    }
    const double mean_displacement = hop * hops / draws;
    const double standard_error = hop * std::sqrt(p * (1 - p) / draws);
    CHECK(std::abs(mean_displacement - v * dt) < 3.0 * standard_error);
}

TEST_CASE("stochastic step rejects hop probabilities above one") {
    const DeviceSpec spec = builtin_device("bfo");
    ParticleEnsemble e = init_ensemble(spec, 1);
    const GridField g = uniform_field_grid(spec, 1e7);
    CHECK_THROWS_AS(advance_particles(e, g, 1e6, TransportMode::stochastic, spec), TimestepError);
}

TEST_CASE("internal state") {
    ParticleEnsemble e;
    e.length = 100e-9;
    e.mobile = {40e-9, 60e-9};
    e.initial_mean = 50e-9;
    CHECK(internal_state(e) == doctest::Approx(0.0));
    e.mobile = {70e-9, 80e-9};
    CHECK(internal_state(e) == doctest::Approx(0.5));
    e.mobile = {0.0, 0.0};
    CHECK(internal_state(e) == doctest::Approx(-1.0));
    e.initial_mean = 0.0;
    e.mobile = {100e-9, 100e-9};
    CHECK(internal_state(e) == 1.0); // clamped from 2
}

TEST_CASE("effective oxide width") {
    ParticleEnsemble e;
    e.length = 100e-9;
    e.fixed = {25e-9, 75e-9};
    SUBCASE("mobile coincide with fixed: floored at dx") {
        e.mobile = e.fixed;
        CHECK(effective_oxide_width(e, 0.0, 1e-9) == 1e-9);
    }
    SUBCASE("mobile piled at the reference interface") {
        e.mobile = {100e-9, 100e-9};
        CHECK(effective_oxide_width(e, 100e-9, 1e-9) == doctest::Approx(50e-9));
        CHECK(effective_oxide_width(e, 0.0, 1e-9) == doctest::Approx(50e-9));
    }
    CHECK(reference_interface(e, 2) == 100e-9);
    CHECK(reference_interface(e, -2) == 0.0);
}

TEST_CASE("transport statistics") {
    DeviceSpec spec = builtin_device("bfo");
    ParticleEnsemble e = init_ensemble(spec, 9);

    const GridField zero = uniform_field_grid(spec, 0.0);
    const TransportStats still = transport_stats(e, zero, spec);
    CHECK(still.mean_speed == 0.0);
    CHECK(still.mean_mobility == 0.0);

    const GridField strong = uniform_field_grid(spec, 1e7);
    const TransportStats s1 = transport_stats(e, strong, spec);
    CHECK(s1.mean_speed > 0.0);
    CHECK(s1.mean_mobility == doctest::Approx(s1.mean_speed / 1e7));

    spec.phonon_frequency *= 2.0;
    const TransportStats s2 = transport_stats(e, strong, spec);
    CHECK(s2.mean_speed == doctest::Approx(2.0 * s1.mean_speed).epsilon(1e-12));

    ParticleEnsemble moved = e;
    const TransportStats reported = advance_particles(moved, strong, 1e-3, TransportMode::deterministic, spec);
    CHECK(reported.mean_speed == doctest::Approx(s2.mean_speed).epsilon(1e-14));
}
