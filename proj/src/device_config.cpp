#include "memsim/device_config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace memsim {

namespace {

std::string join_violations(const std::vector<Violation>& violations) {
    std::string out = "invalid device spec:";
    for (const auto& v : violations) out += "\n  " + v.field + ": " + v.constraint;
    return out;
}

} // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : ConfigError(join_violations(violations)), violations_(std::move(violations)) {}

std::size_t DeviceSpec::oxide_index() const {
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (layers[i].kind == LayerKind::oxide) return i;
    throw ConfigError("device '" + name + "' has no oxide layer");
}

std::string_view to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::schottky: return "schottky";
    case LayerKind::tunnel: return "tunnel";
    case LayerKind::oxide: return "oxide";
    }
    return "?";
}

std::string_view to_string(TransportMode mode) {
    return mode == TransportMode::deterministic ? "deterministic" : "stochastic";
}

TransportMode parse_transport_mode(std::string_view text) {
    if (text == "deterministic" || text == "det") return TransportMode::deterministic;
    if (text == "stochastic" || text == "stoch") return TransportMode::stochastic;
    throw ConfigError("unknown transport mode '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// Presets
//
// Tabulated values are entered exactly as printed, converted to SI.
// Parameters the tables do not list (Richardson constants, carrier densities,
// barrier/ideality rate constants, r_C, D(E), beta, the Al2O3 permittivity
// and the DBMD phonon frequency) are calibration inputs; see README.

namespace {

DeviceSpec bfo_preset() {
    DeviceSpec s;
    s.name = "bfo";
    s.temperature = 298.0;
    s.phonon_frequency = 1.0e12;
    s.lattice_constant = 0.56e-9;
    s.device_area = 0.04e-6;       // 0.04 mm^2
    s.defect_density = 8.0e16 * 1e6; // 8e16 cm^-3
    s.charge_number = +2;            // oxygen vacancies

    LayerSpec top;
    top.kind = LayerKind::schottky;
    top.barrier_height = {0.75};
    top.ideality = 4.0;
    top.lambda_width = 0.3;
    top.rel_permittivity = 52.0;
    top.carrier_density = 1.0e24;
    top.richardson = 1.0e13;
    top.lambda_barrier = 0.3;
    top.capacitance_factor = 1.0;
    top.polarity = +1;

    LayerSpec oxide;
    oxide.kind = LayerKind::oxide;
    oxide.length = 600e-9;
    oxide.conductivity = 7.0e-4;
    oxide.rel_permittivity = 52.0;
    oxide.activation_low = {0.55};
    oxide.activation_high = {0.76};
    oxide.capacitance_factor = 0.05;

    LayerSpec bottom = top;
    bottom.barrier_height = {0.85};
    bottom.ideality = 4.42;
    bottom.lambda_width = -0.9;
    bottom.lambda_barrier = -0.9;
    bottom.richardson = 1.0e14;
    bottom.polarity = -1;

    s.layers = {top, oxide, bottom};
    return s;
}

DeviceSpec dbmd_preset() {
    DeviceSpec s;
    s.name = "dbmd";
    s.temperature = 298.0;
    s.phonon_frequency = 1.0e4; // effective attempt rate, not tabulated
    s.lattice_constant = 2.5e-10;
    s.device_area = 625e-12;          // 625 um^2
    s.defect_density = 5.0e20 * 1e6;  // 5e20 cm^-3
    s.charge_number = -2;             // oxygen ions

    LayerSpec sc;
    sc.kind = LayerKind::schottky;
    sc.barrier_height = {0.96};
    sc.ideality = 4.2;
    sc.lambda_width = -0.7;
    sc.rel_permittivity = 42.0;
    sc.carrier_density = 1.0e26;
    sc.richardson = 1.0e19;
    sc.lambda_barrier = 0.0;
    sc.capacitance_factor = 1.0;
    sc.polarity = +1;

    LayerSpec oxide;
    oxide.kind = LayerKind::oxide;
    oxide.length = 2.5e-9;
    oxide.conductivity = 1.0e-4;
    oxide.rel_permittivity = 42.0;
    oxide.activation_low = {0.76};
    oxide.activation_high = {0.76};
    oxide.capacitance_factor = 1.0;

    LayerSpec tb;
    tb.kind = LayerKind::tunnel;
    tb.length = 1.1e-9;
    tb.barrier_height = {3.2};
    tb.lambda_width = 0.1;
    tb.rel_permittivity = 9.0;
    tb.correction_factor = 0.83;
    tb.density_of_states = 1.0e34;
    tb.capacitance_factor = 1.0;

    s.layers = {sc, oxide, tb};
    return s;
}

} // namespace

std::vector<std::string> preset_names() { return {"bfo", "dbmd"}; }

DeviceSpec builtin_device(std::string_view name) {
    if (name == "bfo") return bfo_preset();
    if (name == "dbmd") return dbmd_preset();
    throw NoSuchPreset(std::string(name));
}

// ---------------------------------------------------------------------------
// Config grammar

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;
    bool used = false;
};

struct Section {
    std::string name; // "" for the top level, "layer.N" otherwise
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

const std::map<std::string, std::string>& symbols() {
    static const std::map<std::string, std::string> table = {
        {"name", "name"},
        {"temperature", "T"},
        {"device_area", "A_d"},
        {"lattice_constant", "d"},
        {"phonon_frequency", "ν0"},
        {"charge_number", "z"},
        {"defect_density", "ρ"},
        {"kind", "layer kind"},
        {"length", "l"},
        {"barrier_height", "Φ"},
        {"ideality", "n_SC"},
        {"carrier_density", "n"},
        {"conductivity", "σ"},
        {"rel_permittivity", "ε_r"},
        {"activation_low", "U_A_low"},
        {"activation_high", "U_A_high"},
    };
    return table;
}

std::string symbol_for(const std::string& key) {
    const auto it = symbols().find(key);
    return it == symbols().end() ? key : it->second;
}

class Reader {
public:
    explicit Reader(Section& section) : section_(section) {}

    bool has(const std::string& key) const { return section_.entries.count(key) != 0; }

    const Entry& entry(const std::string& key) {
        const auto it = section_.entries.find(key);
        if (it == section_.entries.end()) {
            const std::string where = section_.name.empty() ? "" : "[" + section_.name + "] ";
            throw MissingKeyError(where + key, symbol_for(key));
        }
        it->second.used = true;
        return it->second;
    }

    std::string text(const std::string& key) { return entry(key).value; }

    double number(const std::string& key) {
        const Entry& e = entry(key);
        const char* begin = e.value.c_str();
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0' || errno == ERANGE)
            throw ParseError(e.line, e.column, "expected a number for '" + key + "', got '" +
                                                   e.value + "'");
        return v;
    }

    double number_or(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }

    long long integer(const std::string& key) {
        const Entry& e = entry(key);
        long long v = 0;
        const auto* first = e.value.data();
        const auto* last = first + e.value.size();
        if (!e.value.empty() && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw ParseError(e.line, e.column, "expected an integer for '" + key + "', got '" +
                                                   e.value + "'");
        return v;
    }

    std::uint64_t unsigned_integer(const std::string& key) {
        const Entry& e = entry(key);
        std::uint64_t v = 0;
        const auto* first = e.value.data();
        const auto* last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            throw ParseError(e.line, e.column, "expected an unsigned integer for '" + key +
                                                   "', got '" + e.value + "'");
        return v;
    }

    int int_or(const std::string& key, int fallback) {
        return has(key) ? static_cast<int>(integer(key)) : fallback;
    }

    [[noreturn]] void bad_value(const std::string& key, const std::string& expected) {
        const Entry& e = entry(key);
        throw ParseError(e.line, e.column,
                         "expected " + expected + " for '" + key + "', got '" + e.value + "'");
    }

    void reject_unused() const {
        for (const auto& [key, e] : section_.entries)
            if (!e.used)
                throw ParseError(e.line, 1,
                                 "unknown key '" + key + "'" +
                                     (section_.name.empty() ? "" : " in [" + section_.name + "]"));
    }

private:
    Section& section_;
};

std::vector<Section> tokenize(std::string_view text) {
    std::vector<Section> sections(1);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const std::size_t indent = static_cast<std::size_t>(line.data() - raw.data());

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(line_no, indent + 1, "unterminated section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name.rfind("layer.", 0) != 0 || name.size() == 6 ||
                !std::all_of(name.begin() + 6, name.end(),
                             [](char c) { return c >= '0' && c <= '9'; }))
                throw ParseError(line_no, indent + 2,
                                 "unknown section '" + name + "' (expected [layer.N])");
            for (const auto& s : sections)
                if (s.name == name)
                    throw ParseError(line_no, indent + 2, "duplicate section [" + name + "]");
            sections.push_back(Section{name, line_no, {}});
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, indent + 1, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value_raw = line.substr(eq + 1);
        const std::string_view value = trim(value_raw);
        if (key.empty()) throw ParseError(line_no, indent + 1, "empty key");
        const std::size_t value_col =
            indent + eq + 1 + static_cast<std::size_t>(value.data() - value_raw.data()) + 1;
        if (value.empty()) throw ParseError(line_no, value_col, "empty value for '" + key + "'");

        auto& entries = sections.back().entries;
        if (entries.count(key))
            throw ParseError(line_no, indent + 1, "duplicate key '" + key + "'");
        entries.emplace(key, Entry{std::string(value), line_no, value_col, false});
    }
    return sections;
}

LayerSpec read_layer(Reader& r, bool before_oxide) {
    LayerSpec layer;
    const std::string kind = r.text("kind");
    if (kind == "schottky")
        layer.kind = LayerKind::schottky;
    else if (kind == "tunnel")
        layer.kind = LayerKind::tunnel;
    else if (kind == "oxide")
        layer.kind = LayerKind::oxide;
    else
        r.bad_value("kind", "one of schottky, tunnel, oxide");

    layer.rel_permittivity = r.number("rel_permittivity");
    layer.capacitance_factor = r.number_or("capacitance_factor", layer.capacitance_factor);
    layer.lambda_width = r.number_or("lambda_width", 0.0);
    layer.lambda_barrier = r.number_or("lambda_barrier", 0.0);

    switch (layer.kind) {
    case LayerKind::schottky:
        layer.barrier_height = {r.number("barrier_height")};
        layer.ideality = r.number("ideality");
        layer.carrier_density = r.number("carrier_density");
        layer.richardson = r.number_or("richardson", kFreeElectronRichardson);
        layer.lambda_ideality = r.number_or("lambda_ideality", 0.0);
        if (r.has("polarity")) {
            const std::string p = r.text("polarity");
            if (p == "forward")
                layer.polarity = +1;
            else if (p == "reverse")
                layer.polarity = -1;
            else
                r.bad_value("polarity", "forward or reverse");
        } else {
            layer.polarity = before_oxide ? +1 : -1;
        }
        break;
    case LayerKind::tunnel:
        layer.length = r.number("length");
        layer.barrier_height = {r.number("barrier_height")};
        layer.correction_factor = r.number_or("correction_factor", 1.0);
        layer.density_of_states = r.number_or("density_of_states", layer.density_of_states);
        break;
    case LayerKind::oxide:
        layer.length = r.number("length");
        layer.conductivity = r.number("conductivity");
        layer.activation_low = {r.number("activation_low")};
        layer.activation_high = {r.number("activation_high")};
        break;
    }
    r.reject_unused();
    return layer;
}

} // namespace

DeviceSpec parse_device_spec(std::string_view text) {
    auto sections = tokenize(text);

    DeviceSpec spec;
    Reader top(sections.front());
    spec.name = top.text("name");
    spec.temperature = top.number("temperature");
    spec.device_area = top.number("device_area");
    spec.lattice_constant = top.number("lattice_constant");
    spec.phonon_frequency = top.number("phonon_frequency");
    spec.charge_number = static_cast<int>(top.integer("charge_number"));
    spec.defect_density = top.number("defect_density");
    if (top.has("seed")) spec.seed = top.unsigned_integer("seed");

    NumericOptions& num = spec.numeric;
    num.grid_points = top.int_or("grid_points", num.grid_points);
    num.particle_count = top.int_or("particle_count", num.particle_count);
    num.steps_per_period = top.int_or("steps_per_period", num.steps_per_period);
    if (top.has("timestep")) num.timestep = top.number("timestep");
    num.poisson_tol = top.number_or("poisson_tol", num.poisson_tol);
    num.poisson_max_iter = top.int_or("poisson_max_iter", num.poisson_max_iter);
    num.newton_tol = top.number_or("newton_tol", num.newton_tol);
    num.newton_max_iter = top.int_or("newton_max_iter", num.newton_max_iter);
    num.cycles = top.int_or("cycles", num.cycles);
    if (top.has("transport_mode")) {
        const std::string m = top.text("transport_mode");
        if (m == "deterministic")
            num.transport_mode = TransportMode::deterministic;
        else if (m == "stochastic")
            num.transport_mode = TransportMode::stochastic;
        else
            top.bad_value("transport_mode", "deterministic or stochastic");
    }
    if (top.has("weight_form")) {
        const std::string w = top.text("weight_form");
        if (w == "count")
            num.weight_form = WeightForm::count;
        else if (w == "areal")
            num.weight_form = WeightForm::areal;
        else
            top.bad_value("weight_form", "count or areal");
    }
    if (top.has("integrator")) {
        const std::string i = top.text("integrator");
        if (i == "backward_euler")
            num.integrator = Integrator::backward_euler;
        else if (i == "trapezoidal")
            num.integrator = Integrator::trapezoidal;
        else
            top.bad_value("integrator", "backward_euler or trapezoidal");
    }
    if (top.has("poisson_start")) {
        const std::string p = top.text("poisson_start");
        if (p == "direct")
            num.poisson_start = PoissonStart::direct;
        else if (p == "previous")
            num.poisson_start = PoissonStart::previous;
        else
            top.bad_value("poisson_start", "direct or previous");
    }
    top.reject_unused();

    // Layer sections must be numbered 0..N-1; file order does not matter.
    std::vector<Section*> ordered(sections.size() - 1, nullptr);
    for (std::size_t i = 1; i < sections.size(); ++i) {
        const std::size_t index = std::stoul(sections[i].name.substr(6));
        if (index >= ordered.size() || ordered[index])
            throw ParseError(sections[i].line, 1,
                             "layer sections must be numbered 0.." +
                                 std::to_string(ordered.size() - 1));
        ordered[index] = &sections[i];
    }
    bool seen_oxide = false;
    for (Section* section : ordered) {
        Reader r(*section);
        LayerSpec layer = read_layer(r, !seen_oxide);
        seen_oxide = seen_oxide || layer.kind == LayerKind::oxide;
        spec.layers.push_back(layer);
    }

    require_valid(spec);
    return spec;
}

DeviceSpec load_device_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_device_spec(buffer.str());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string num(double v) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, result.ptr);
}

void kv(std::ostream& os, std::string_view key, const std::string& value,
        std::string_view unit = {}) {
    os << key << " = " << value;
    if (!unit.empty()) os << "  # " << unit;
    os << '\n';
}

} // namespace

std::string serialize(const DeviceSpec& spec) {
    std::ostringstream os;
    os << "# memsim device configuration\n";
    kv(os, "name", spec.name);
    kv(os, "temperature", num(spec.temperature), "K");
    kv(os, "device_area", num(spec.device_area), "m^2");
    kv(os, "lattice_constant", num(spec.lattice_constant), "m");
    kv(os, "phonon_frequency", num(spec.phonon_frequency), "Hz");
    kv(os, "charge_number", std::to_string(spec.charge_number));
    kv(os, "defect_density", num(spec.defect_density), "m^-3");
    kv(os, "seed", std::to_string(spec.seed));

    const NumericOptions& n = spec.numeric;
    os << "\n# numerics\n";
    kv(os, "grid_points", std::to_string(n.grid_points));
    kv(os, "particle_count", std::to_string(n.particle_count));
    kv(os, "steps_per_period", std::to_string(n.steps_per_period));
    if (n.timestep) kv(os, "timestep", num(*n.timestep), "s");
    kv(os, "poisson_tol", num(n.poisson_tol));
    kv(os, "poisson_max_iter", std::to_string(n.poisson_max_iter));
    kv(os, "newton_tol", num(n.newton_tol));
    kv(os, "newton_max_iter", std::to_string(n.newton_max_iter));
    kv(os, "transport_mode", std::string(to_string(n.transport_mode)));
    kv(os, "cycles", std::to_string(n.cycles));
    kv(os, "weight_form", n.weight_form == WeightForm::count ? "count" : "areal");
    kv(os, "integrator",
       n.integrator == Integrator::backward_euler ? "backward_euler" : "trapezoidal");
    kv(os, "poisson_start", n.poisson_start == PoissonStart::direct ? "direct" : "previous");

    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        os << "\n[layer." << i << "]\n";
        kv(os, "kind", std::string(to_string(l.kind)));
        switch (l.kind) {
        case LayerKind::schottky:
            kv(os, "barrier_height", num(l.barrier_height.value), "eV");
            kv(os, "ideality", num(l.ideality));
            kv(os, "richardson", num(l.richardson), "A m^-2 K^-2");
            kv(os, "carrier_density", num(l.carrier_density), "m^-3");
            kv(os, "polarity", l.polarity > 0 ? "forward" : "reverse");
            kv(os, "lambda_ideality", num(l.lambda_ideality));
            break;
        case LayerKind::tunnel:
            kv(os, "length", num(l.length), "m");
            kv(os, "barrier_height", num(l.barrier_height.value), "eV");
            kv(os, "correction_factor", num(l.correction_factor));
            kv(os, "density_of_states", num(l.density_of_states), "J^-1 m^-2");
            break;
        case LayerKind::oxide:
            kv(os, "length", num(l.length), "m");
            kv(os, "conductivity", num(l.conductivity), "S/m");
            kv(os, "activation_low", num(l.activation_low.value), "eV");
            kv(os, "activation_high", num(l.activation_high.value), "eV");
            break;
        }
        kv(os, "rel_permittivity", num(l.rel_permittivity));
        kv(os, "capacitance_factor", num(l.capacitance_factor));
        kv(os, "lambda_width", num(l.lambda_width));
        kv(os, "lambda_barrier", num(l.lambda_barrier));
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const DeviceSpec& spec) {
    std::vector<Violation> out;
    auto check = [&](bool ok, std::string field, std::string constraint) {
        if (!ok) out.push_back({std::move(field), std::move(constraint)});
    };
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };

    check(positive(spec.temperature), "temperature", "T > 0");
    check(positive(spec.device_area), "device_area", "A_d > 0");
    check(positive(spec.defect_density), "defect_density", "ρ > 0");
    check(positive(spec.phonon_frequency), "phonon_frequency", "ν0 > 0");
    check(positive(spec.lattice_constant), "lattice_constant", "d > 0");
    check(spec.charge_number != 0, "charge_number", "z ≠ 0");

    const bool has_oxide = std::any_of(spec.layers.begin(), spec.layers.end(),
                                       [](const LayerSpec& l) { return l.kind == LayerKind::oxide; });
    check(has_oxide, "layers", "at least one oxide layer");

    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        const std::string p = "layer." + std::to_string(i) + ".";
        check(std::isfinite(l.rel_permittivity) && l.rel_permittivity >= 1.0,
              p + "rel_permittivity", "ε_r ≥ 1");
        check(std::isfinite(l.capacitance_factor) && l.capacitance_factor > 0.0 &&
                  l.capacitance_factor <= 1.0,
              p + "capacitance_factor", "r_C ∈ (0,1]");
        check(std::isfinite(l.lambda_width) && std::isfinite(l.lambda_barrier) &&
                  std::isfinite(l.lambda_ideality),
              p + "lambda", "λ finite");
        switch (l.kind) {
        case LayerKind::schottky:
            check(positive(l.barrier_height.value), p + "barrier_height", "Φ > 0");
            check(std::isfinite(l.ideality) && l.ideality >= 1.0, p + "ideality", "n_SC ≥ 1");
            check(positive(l.richardson), p + "richardson", "A* > 0");
            check(positive(l.carrier_density), p + "carrier_density", "n > 0");
            check(l.polarity == 1 || l.polarity == -1, p + "polarity", "polarity = ±1");
            break;
        case LayerKind::tunnel:
            check(positive(l.length), p + "length", "d_TB > 0");
            check(positive(l.barrier_height.value), p + "barrier_height", "Φ_TB > 0");
            check(positive(l.correction_factor), p + "correction_factor", "β > 0");
            check(positive(l.density_of_states), p + "density_of_states", "D(E) > 0");
            break;
        case LayerKind::oxide:
            check(positive(l.length), p + "length", "l_ox > 0");
            check(positive(l.conductivity), p + "conductivity", "σ > 0");
            check(std::isfinite(l.activation_low.value) && std::isfinite(l.activation_high.value) &&
                      l.activation_low.value <= l.activation_high.value,
                  p + "activation", "U_A_low ≤ U_A_high");
            break;
        }
    }

    const NumericOptions& n = spec.numeric;
    check(n.grid_points >= 8, "grid_points", "N_g ≥ 8");
    check(n.particle_count >= 1, "particle_count", "N_p ≥ 1");
    check(n.steps_per_period >= 100, "steps_per_period", "Δt ≤ period/100");
    if (n.timestep) check(positive(*n.timestep), "timestep", "Δt > 0");
    check(positive(n.poisson_tol), "poisson_tol", "tolerance > 0");
    check(positive(n.newton_tol), "newton_tol", "tolerance > 0");
    check(n.poisson_max_iter >= 1, "poisson_max_iter", "≥ 1");
    check(n.newton_max_iter >= 1, "newton_max_iter", "≥ 1");
    check(n.cycles >= 1, "cycles", "cycles ≥ 1");
    return out;
}

void require_valid(const DeviceSpec& spec) {
    auto violations = validate(spec);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

} // namespace memsim
