#include "memsim/device_config.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

using namespace memsim;

namespace {

bool has_violation(const std::vector<Violation>& list, const std::string& field,
                   const std::string& constraint) {
    return std::any_of(list.begin(), list.end(), [&](const Violation& v) {
        return v.field.find(field) != std::string::npos && v.constraint == constraint;
    });
}

std::string without_line(const std::string& text, const std::string& key) {
    std::string out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        if (line.rfind(key + " ", 0) != 0) out += line + "\n";
        pos = end + 1;
    }
    return out;
}

} // namespace

TEST_CASE("bfo preset carries the tabulated values") {
    const DeviceSpec s = builtin_device("bfo");
    CHECK(s.defect_density == doctest::Approx(8e22).epsilon(1e-15));
    CHECK(s.device_area == doctest::Approx(4e-8).epsilon(1e-15));
    CHECK(s.temperature == 298.0);
    CHECK(s.phonon_frequency == 1e12);
    CHECK(s.lattice_constant == doctest::Approx(0.56e-9).epsilon(1e-15));
    CHECK(s.charge_number == 2);
    REQUIRE(s.layers.size() == 3);
    CHECK(s.layers[0].kind == LayerKind::schottky);
    CHECK(s.layers[0].barrier_height.value == 0.75);
    CHECK(s.layers[0].ideality == 4.0);
    CHECK(s.layers[0].lambda_width == 0.3);
    CHECK(s.layers[1].kind == LayerKind::oxide);
    CHECK(s.layers[1].length == doctest::Approx(600e-9).epsilon(1e-15));
    CHECK(s.layers[1].rel_permittivity == 52.0);
    CHECK(s.layers[1].conductivity == 7e-4);
    CHECK(s.layers[1].activation_low.value == 0.55);
    CHECK(s.layers[1].activation_high.value == 0.76);
    CHECK(s.layers[2].kind == LayerKind::schottky);
    CHECK(s.layers[2].barrier_height.value == 0.85);
    CHECK(s.layers[2].ideality == 4.42);
    CHECK(s.layers[2].lambda_width == -0.9);
}

TEST_CASE("dbmd preset carries the tabulated values") {
    const DeviceSpec s = builtin_device("dbmd");
    CHECK(s.device_area == doctest::Approx(625e-12).epsilon(1e-15));
    CHECK(s.defect_density == doctest::Approx(5e26).epsilon(1e-15));
    CHECK(s.charge_number == -2);
    REQUIRE(s.layers.size() == 3);
    CHECK(s.layers[0].kind == LayerKind::schottky);
    CHECK(s.layers[0].barrier_height.value == 0.96);
    CHECK(s.layers[0].ideality == 4.2);
    CHECK(s.layers[0].lambda_width == -0.7);
    CHECK(s.layers[1].kind == LayerKind::oxide);
    CHECK(s.layers[1].length == doctest::Approx(2.5e-9).epsilon(1e-15));
    CHECK(s.layers[1].conductivity == 1e-4);
    CHECK(s.layers[1].rel_permittivity == 42.0);
    CHECK(s.layers[1].activation_low.value == 0.76);
    CHECK(s.layers[1].activation_high.value == 0.76);
    CHECK(s.layers[2].kind == LayerKind::tunnel);
    CHECK(s.layers[2].length == doctest::Approx(1.1e-9).epsilon(1e-15));
    CHECK(s.layers[2].barrier_height.value == 3.2);
    CHECK(s.layers[2].lambda_width == 0.1);
}

TEST_CASE("unknown preset names are rejected with their own error") {
    CHECK_THROWS_AS(builtin_device("xyz"), NoSuchPreset);
}

TEST_CASE("both presets validate cleanly") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        CHECK(validate(builtin_device(name)).empty());
    }
}

TEST_CASE("serialize then parse round-trips every field") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const DeviceSpec s = builtin_device(name);
        CHECK(parse_device_spec(serialize(s)) == s);
    }
    DeviceSpec tweaked = builtin_device("bfo");
    tweaked.seed = 0xfeedfacecafebeefULL;
    tweaked.numeric.timestep = 1.25e-4;
    tweaked.numeric.transport_mode = TransportMode::stochastic;
    tweaked.numeric.weight_form = WeightForm::areal;
    tweaked.numeric.integrator = Integrator::trapezoidal;
    tweaked.numeric.poisson_start = PoissonStart::previous;
    tweaked.layers[0].lambda_ideality = 0.125;
    CHECK(parse_device_spec(serialize(tweaked)) == tweaked);
}

TEST_CASE("load_device_spec reads a preset file") {
    const auto path = std::filesystem::temp_directory_path() / "memsim_test_bfo.conf";
    {
        std::ofstream out(path);
        out << serialize(builtin_device("bfo"));
    }
    CHECK(load_device_spec(path) == builtin_device("bfo"));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_device_spec(path), IoError);
}

TEST_CASE("negative permittivity is a validation error naming the constraint") {
    std::string text = serialize(builtin_device("bfo"));
    const std::size_t pos = text.find("rel_permittivity = 52");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("rel_permittivity = 52").size(), "rel_permittivity = -1");
    try {
        parse_device_spec(text);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(has_violation(e.violations(), "rel_permittivity", "ε_r ≥ 1"));
    }
}

TEST_CASE("a missing device_area names the A_d symbol") {
    const std::string text = without_line(serialize(builtin_device("bfo")), "device_area");
    try {
        parse_device_spec(text);
        FAIL("expected a missing-key error");
    } catch (const MissingKeyError& e) {
        CHECK(e.key() == "device_area");
        CHECK(std::string(e.what()).find("A_d") != std::string::npos);
    }
}

TEST_CASE("parse errors carry line and column") {
    std::string text = "name = x\ntemperature = abc\n";
    try {
        parse_device_spec(text);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 15);
    }
    const std::string preset = serialize(builtin_device("bfo"));
    CHECK_THROWS_AS(parse_device_spec(preset + "bogus_key = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_device_spec("name = x\nname = y\n"), ParseError);
}

TEST_CASE("validate reports r_C = 0 on its own") {
    DeviceSpec s = builtin_device("bfo");
    s.layers[1].capacitance_factor = 0.0;
    const auto v = validate(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].constraint == "r_C ∈ (0,1]");
}

TEST_CASE("validate requires an oxide layer") {
    DeviceSpec s = builtin_device("bfo");
    s.layers.clear();
    CHECK(has_violation(validate(s), "layers", "at least one oxide layer"));
}

TEST_CASE("validate checks the remaining invariants") {
    DeviceSpec s = builtin_device("bfo");
    s.device_area = 0.0;
    s.temperature = -1.0;
    s.charge_number = 0;
    s.layers[0].ideality = 0.5;
    s.layers[1].activation_low = {0.9};
    s.numeric.grid_points = 4;
    s.numeric.particle_count = 0;
    s.numeric.cycles = 0;
    const auto v = validate(s);
    CHECK(has_violation(v, "device_area", "A_d > 0"));
    CHECK(has_violation(v, "temperature", "T > 0"));
    CHECK(has_violation(v, "charge_number", "z ≠ 0"));
    CHECK(has_violation(v, "ideality", "n_SC ≥ 1"));
    CHECK(has_violation(v, "activation", "U_A_low ≤ U_A_high"));
    CHECK(has_violation(v, "grid_points", "N_g ≥ 8"));
    CHECK(has_violation(v, "particle_count", "N_p ≥ 1"));
    CHECK(has_violation(v, "cycles", "cycles ≥ 1"));
}

TEST_CASE("transport mode names") {
    CHECK(parse_transport_mode("det") == TransportMode::deterministic);
    CHECK(parse_transport_mode("stochastic") == TransportMode::stochastic);
    CHECK_THROWS_AS(parse_transport_mode("random"), ConfigError);
}
