#pragma once

#include "memsim/analysis.hpp"
#include "memsim/device_config.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace memsim {

enum class SweepAxis { amplitude, frequency };
enum class CapsSetting { on, off, both };

struct SweepPlan {
    SweepAxis axis = SweepAxis::amplitude;
    std::vector<double> values; // strictly increasing
    double fixed_amplitude = 0.0; // used when sweeping frequency
    double fixed_frequency = 0.0; // used when sweeping amplitude
    CapsSetting caps = CapsSetting::on;
    int workers = 1;
    std::optional<TransportMode> mode;
};

struct SweepPoint {
    std::size_t index = 0;
    double amplitude = 0.0;
    double frequency = 0.0;
    bool capacitors = true;
    std::uint64_t seed = 0;
    std::optional<Metrics> metrics;
    std::string error; // non-empty when the point failed
};

/// Throws ConfigError when values are empty or not strictly increasing,
/// workers < 1, or the fixed drive value is missing.
void validate_plan(const SweepPlan& plan);

/// Points in sweep order; with caps = both every value appears caps-on then caps-off.
std::vector<SweepPoint> plan_points(const DeviceSpec& spec, const SweepPlan& plan);

/// MEMSIM_WORKERS, when set to a positive integer, replaces `requested`.
int resolve_workers(int requested);

/// Runs every point on `workers` threads. Point i uses seed spec.seed ^ i.
/// `sink` (optional) receives each finished trace on the worker thread.
/// Failures are stored in the point instead of aborting the sweep.
std::vector<SweepPoint> run_sweep(
    const DeviceSpec& spec, const SweepPlan& plan,
    const std::function<void(const SweepPoint&, const TraceSet&)>& sink = {});

void write_sweep_table(std::ostream& out, const std::vector<SweepPoint>& points);

} // namespace memsim
