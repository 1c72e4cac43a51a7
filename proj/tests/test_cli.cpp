#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string output;
};

Result run(const std::string& args) {
    const std::string command = std::string(MEMSIM_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buffer{};
    std::size_t n;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) r.output.append(buffer.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("memsim_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_tone(const fs::path& path, double third) {
    std::ofstream out(path);
    out << "t,V_dev,I\n";
    const int per_period = 200;
    for (int n = 0; n < 3 * per_period; ++n) {
        const double t = n * 0.01 / 2; // f0 = 1 Hz, dt = 5 ms
        const double w = 2.0 * 3.14159265358979323846 * t;
        out << t << ',' << std::sin(w) << ',' << std::sin(w) + third * std::sin(3 * w) << '\n';
    }
}

double read_thd(const std::string& output) {
    const auto pos = output.find("thd = ");
    REQUIRE(pos != std::string::npos);
    return std::stod(output.substr(pos + 6));
}

} // namespace

TEST_CASE("preset output validates") {
    const fs::path dir = scratch_dir("preset");
    const Result preset = run("preset dbmd");
    REQUIRE(preset.status == 0);
    {
        std::ofstream out(dir / "dbmd.conf");
        out << preset.output;
    }
    const Result check = run("validate " + (dir / "dbmd.conf").string());
    CHECK(check.status == 0);
    CHECK(check.output.find("OK") != std::string::npos);
    CHECK(run("preset bfo | " + std::string(MEMSIM_CLI_PATH) + " validate -").status == 0);
}

TEST_CASE("bad input exits with status 2") {
    CHECK(run("preset nope").status == 2);
    CHECK(run("simulate --device bfo").status == 2); // --vmax and --freq missing
    const fs::path dir = scratch_dir("invalid");
    {
        std::ofstream out(dir / "bad.conf");
        out << "name = x\ntemperature = -3\n";
    }
    CHECK(run("validate " + (dir / "bad.conf").string()).status == 2);
}

TEST_CASE("simulate is reproducible") {
    const fs::path dir = scratch_dir("simulate");
    const Result preset = run("preset dbmd");
    std::string config = preset.output;
    for (const auto& [key, value] : {std::pair<std::string, std::string>{"grid_points", "32"},
                                     {"particle_count", "100"},
                                     {"steps_per_period", "200"}}) {
        const auto pos = config.find(key + " = ");
        REQUIRE(pos != std::string::npos);
        const auto end = config.find('\n', pos);
        config.replace(pos, end - pos, key + " = " + value);
    }
    {
        std::ofstream out(dir / "small.conf");
        out << config;
    }
    const std::string base = "simulate --config " + (dir / "small.conf").string() +
                             " --vmax 3 --freq 1 --cycles 2";
    REQUIRE(run("--out " + (dir / "a").string() + " " + base).status == 0);
    REQUIRE(run("--out " + (dir / "b").string() + " " + base).status == 0);
    for (const char* file : {"trace.csv", "metrics.csv", "manifest.txt"}) {
        CAPTURE(file);
        REQUIRE(fs::exists(dir / "a" / file));
        CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
    }
    // The manifest is itself a loadable config.
    CHECK(run("validate " + (dir / "a" / "manifest.txt").string()).status == 0);
}

TEST_CASE("analyze reports THD of a trace") {
    const fs::path dir = scratch_dir("analyze");
    write_tone(dir / "pure.csv", 0.0);
    write_tone(dir / "third.csv", 0.1);
    const Result pure = run("--out " + dir.string() + " analyze " + (dir / "pure.csv").string() + " --freq 1");
    REQUIRE(pure.status == 0);
    CHECK(read_thd(pure.output) < 1e-6);
    CHECK(fs::exists(dir / "spectrum.csv"));
    CHECK(fs::exists(dir / "attractor.csv") == false); // trace has no q column
    const Result third = run("--out " + dir.string() + " analyze " + (dir / "third.csv").string() + " --freq 1");
    REQUIRE(third.status == 0);
    CHECK(read_thd(third.output) == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("a trace without a current column is an I/O error") {
    const fs::path dir = scratch_dir("missing");
    {
        std::ofstream out(dir / "bad.csv");
        out << "t,V_dev\n0,0\n0.01,1\n";
    }
    const Result r = run("analyze " + (dir / "bad.csv").string() + " --freq 1");
    CHECK(r.status == 4);
    CHECK(r.output.find("'I'") != std::string::npos);
}

TEST_CASE("inductance diagnostic is labelled as illustrative") {
    const Result r = run("inductance --length 2.5e-9 --carrier-density 1e26 --area 625e-12 --collision-rate 1e13");
    CHECK(r.status == 0);
    CHECK(r.output.find("illustrative") != std::string::npos);
}
