#include "memsim/sweep.hpp"

#include "memsim/error.hpp"
#include "memsim/transient.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <thread>

namespace memsim {

void validate_plan(const SweepPlan& plan) {
    if (plan.values.empty()) throw ConfigError("sweep needs at least one value");
    for (std::size_t i = 1; i < plan.values.size(); ++i)
        if (!(plan.values[i] > plan.values[i - 1]))
            throw ConfigError("sweep values must be strictly increasing");
    if (plan.workers < 1) throw ConfigError("sweep needs at least one worker");
    if (plan.axis == SweepAxis::amplitude && !(plan.fixed_frequency > 0.0))
        throw ConfigError("amplitude sweep needs a positive --freq");
    if (plan.axis == SweepAxis::frequency) {
        if (!std::isfinite(plan.fixed_amplitude)) throw ConfigError("frequency sweep needs --vmax");
        for (double f : plan.values)
            if (!(f > 0.0)) throw ConfigError("sweep frequencies must be positive");
    }
}

std::vector<SweepPoint> plan_points(const DeviceSpec& spec, const SweepPlan& plan) {
    validate_plan(plan);
    std::vector<SweepPoint> points;
    for (double value : plan.values) {
        std::vector<bool> caps;
        if (plan.caps != CapsSetting::off) caps.push_back(true);
        if (plan.caps != CapsSetting::on) caps.push_back(false);
        for (bool c : caps) {
            SweepPoint p;
            p.index = points.size();
            p.amplitude = plan.axis == SweepAxis::amplitude ? value : plan.fixed_amplitude;
            p.frequency = plan.axis == SweepAxis::frequency ? value : plan.fixed_frequency;
            p.capacitors = c;
            p.seed = spec.seed ^ static_cast<std::uint64_t>(p.index);
            points.push_back(p);
        }
    }
    return points;
}

int resolve_workers(int requested) {
    if (const char* env = std::getenv("MEMSIM_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    }
    return requested;
}

std::vector<SweepPoint> run_sweep(const DeviceSpec& spec, const SweepPlan& plan,
                                  const std::function<void(const SweepPoint&, const TraceSet&)>& sink) {
    std::vector<SweepPoint> points = plan_points(spec, plan);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            SweepPoint& p = points[i];
            try {
                RunOptions options;
                options.capacitors = p.capacitors;
                options.seed = p.seed;
                options.mode = plan.mode;
                const TraceSet trace = run_transient(spec, waveform_for(spec, p.amplitude, p.frequency), options);
                p.metrics = summarize(trace, p.frequency, p.amplitude);
                if (sink) sink(p, trace);
            } catch (const std::exception& e) {
                p.error = e.what();
            }
        }
    };

    const int workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(points.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return points;
}

void write_sweep_table(std::ostream& out, const std::vector<SweepPoint>& points) {
    out << "index,caps,seed,status,f_hz,V_max,loop_area,lobe1,lobe2,V_cross_fall,V_cross_rise,thd\n";
    for (const SweepPoint& p : points) {
        out << p.index << ',' << (p.capacitors ? "on" : "off") << ',' << p.seed << ','
            << (p.error.empty() ? "ok" : "failed") << ',';
        if (p.metrics) {
            write_metrics_row(out, *p.metrics);
        } else {
            out << format_double(p.frequency) << ',' << format_double(p.amplitude) << ",,,,,,\n";
        }
    }
}

} // namespace memsim
