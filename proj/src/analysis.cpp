#include "memsim/analysis.hpp"

#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace memsim {

std::size_t samples_per_period(double f0, double dt) {
    if (!(f0 > 0.0) || !(dt > 0.0)) throw RangeError("frequency and timestep must be positive");
    const double exact = 1.0 / (f0 * dt);
    const double rounded = std::round(exact);
    if (rounded < 1.0 || std::abs(exact - rounded) > 1e-6 * rounded)
        throw RangeError("sampling is not coherent: " + format_double(exact) +
                         " samples per period");
    return static_cast<std::size_t>(rounded);
}

int default_harmonics(std::size_t per_period) {
    return static_cast<int>(std::min<std::size_t>(50, per_period / 2));
}

Spectrum dft_spectrum(std::span<const double> x, double f0, double dt, int harmonics) {
    const std::size_t p = samples_per_period(f0, dt);
    const std::size_t periods = x.size() / p;
    if (periods < 2)
        throw InsufficientDataError("spectrum needs at least two whole periods, got " +
                                    std::to_string(periods));
    const int k_max = harmonics < 0 ? default_harmonics(p) : harmonics;
    if (static_cast<std::size_t>(k_max) > p / 2)
        throw RangeError("harmonic count " + std::to_string(k_max) + " exceeds Nyquist (" +
                         std::to_string(p / 2) + ")");

    const std::size_t first = x.size() - periods * p;
    const std::size_t count = periods * p;

    // e^{-i 2 pi j / p}; harmonic k at sample n uses entry (k n) mod p.
    std::vector<std::complex<double>> twiddle(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double angle = -2.0 * phys::kPi * static_cast<double>(j) / static_cast<double>(p);
        twiddle[j] = {std::cos(angle), std::sin(angle)};
    }

    Spectrum s;
    s.fundamental = f0;
    s.periods = periods;
    s.bins.resize(static_cast<std::size_t>(k_max) + 1);
    double largest = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        std::complex<double> sum = 0.0;
        std::size_t phase = (static_cast<std::size_t>(k) * (first % p)) % p;
        for (std::size_t n = 0; n < count; ++n) {
            sum += x[first + n] * twiddle[phase];
            phase += static_cast<std::size_t>(k);
            if (phase >= p) phase -= p;
        }
        SpectrumBin& b = s.bins[static_cast<std::size_t>(k)];
        b.k = k;
        b.frequency = k * f0;
        b.coefficient = sum / static_cast<double>(count);
        const double magnitude = std::abs(b.coefficient);
        const bool nyquist = p % 2 == 0 && static_cast<std::size_t>(k) == p / 2;
        if (k == 0 || nyquist) {
            b.amplitude = magnitude;
            b.power = magnitude * magnitude;
        } else {
            b.amplitude = 2.0 * magnitude;
            b.power = 0.5 * b.amplitude * b.amplitude;
        }
        largest = std::max(largest, b.amplitude);
    }
    for (SpectrumBin& b : s.bins) {
        if (largest > 0.0 && b.amplitude >= 1e-6 * largest) {
            double deg = std::arg(b.coefficient) * 180.0 / phys::kPi + 90.0;
            while (deg > 180.0) deg -= 360.0;
            while (deg <= -180.0) deg += 360.0;
            b.phase_deg = deg;
        }
    }
    return s;
}

double spectrum_power(const Spectrum& spectrum) {
    double total = 0.0;
    for (const SpectrumBin& b : spectrum.bins) total += b.power;
    return total;
}

double thd(const Spectrum& spectrum, int harmonics) {
    const int k_max = harmonics < 0 ? static_cast<int>(spectrum.bins.size()) - 1 : harmonics;
    if (k_max < 1 || static_cast<std::size_t>(k_max) >= spectrum.bins.size())
        throw RangeError("THD harmonic count outside the computed spectrum");
    double largest = 0.0;
    for (const SpectrumBin& b : spectrum.bins) largest = std::max(largest, b.amplitude);
    const double fundamental = spectrum.bins[1].amplitude;
    if (!(fundamental > 0.0) || fundamental <= 1e-12 * largest)
        throw UndefinedThdError("THD undefined: the fundamental vanishes");
    double sum = 0.0;
    for (int k = 2; k <= k_max; ++k) {
        const double a = spectrum.bins[static_cast<std::size_t>(k)].amplitude;
        sum += a * a;
    }
    return std::sqrt(sum) / fundamental;
}

// ---------------------------------------------------------------------------
// Loop geometry

namespace {

struct Point {
    double v, i;
};

double shoelace(const std::vector<Point>& poly) {
    double twice = 0.0;
    for (std::size_t a = 0; a < poly.size(); ++a) {
        const Point& p = poly[a];
        const Point& q = poly[(a + 1) % poly.size()];
        twice += p.v * q.i - q.v * p.i;
    }
    return 0.5 * twice;
}

// Sutherland-Hodgman clip against the half-plane sign * (v - cut) >= 0.
std::vector<Point> clip(const std::vector<Point>& poly, double cut, double sign) {
    std::vector<Point> out;
    const std::size_t n = poly.size();
    for (std::size_t a = 0; a < n; ++a) {
        const Point& p = poly[a];
        const Point& q = poly[(a + 1) % n];
        const double dp = sign * (p.v - cut);
        const double dq = sign * (q.v - cut);
        if (dp >= 0.0) out.push_back(p);
        if ((dp >= 0.0) != (dq >= 0.0)) {
            const double s = dp / (dp - dq);
            out.push_back({cut, p.i + s * (q.i - p.i)});
        }
    }
    return out;
}

// Samples of one sweep branch in time order, walking cyclically from `from` to `to`.
std::vector<Point> branch_path(std::span<const double> v, std::span<const double> i,
                               std::size_t from, std::size_t to) {
    std::vector<Point> path;
    const std::size_t n = v.size();
    for (std::size_t a = from;; a = (a + 1) % n) {
        path.push_back({v[a], i[a]});
        if (a == to) break;
    }
    return path;
}

std::pair<std::size_t, std::size_t> extremes(std::span<const double> v) {
    const auto hi = std::max_element(v.begin(), v.end()) - v.begin();
    const auto lo = std::min_element(v.begin(), v.end()) - v.begin();
    return {static_cast<std::size_t>(hi), static_cast<std::size_t>(lo)};
}

std::vector<Point> sorted_by_voltage(std::vector<Point> path) {
    std::stable_sort(path.begin(), path.end(), [](const Point& a, const Point& b) { return a.v < b.v; });
    return path;
}

double interpolate_branch(const std::vector<Point>& sorted, double v) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v,
                               [](const Point& p, double x) { return p.v < x; });
    if (it == sorted.begin()) return sorted.front().i;
    if (it == sorted.end()) return sorted.back().i;
    const Point& b = *it;
    const Point& a = *(it - 1);
    if (b.v == a.v) return 0.5 * (a.i + b.i);
    return a.i + (b.i - a.i) * (v - a.v) / (b.v - a.v);
}

void check_pair(std::span<const double> v, std::span<const double> i, std::size_t minimum) {
    if (v.size() != i.size()) throw RangeError("voltage and current samples differ in length");
    if (v.size() < minimum)
        throw InsufficientDataError("need at least " + std::to_string(minimum) + " samples");
}

} // namespace

LoopArea hysteresis_area(std::span<const double> v, std::span<const double> i) {
    check_pair(v, i, 3);
    LoopArea out;
    const auto [vmin_it, vmax_it] = std::minmax_element(v.begin(), v.end());
    const auto [imin_it, imax_it] = std::minmax_element(i.begin(), i.end());
    const double v_range = *vmax_it - *vmin_it;
    const double i_range = *imax_it - *imin_it;
    out.closed_by_segment = std::abs(v.back() - v.front()) > 0.01 * v_range ||
                            std::abs(i.back() - i.front()) > 0.01 * i_range;

    // Pinch: crossing of the two branches nearest V = 0.
    const auto [hi, lo] = extremes(v);
    const auto falling = sorted_by_voltage(branch_path(v, i, hi, lo));
    const auto rising = sorted_by_voltage(branch_path(v, i, lo, hi));
    std::vector<double> grid;
    for (const Point& p : falling) grid.push_back(p.v);
    for (const Point& p : rising) grid.push_back(p.v);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double pinch = 0.5 * (*vmin_it + *vmax_it);
    bool found = false;
    double best = 0.0;
    double prev_v = 0.0, prev_d = 0.0;
    for (std::size_t a = 0; a < grid.size(); ++a) {
        const double d = interpolate_branch(falling, grid[a]) - interpolate_branch(rising, grid[a]);
        if (a > 0 && ((prev_d < 0.0 && d > 0.0) || (prev_d > 0.0 && d < 0.0))) {
            const double cross = prev_v + (grid[a] - prev_v) * prev_d / (prev_d - d);
            if (!found || std::abs(cross) < std::abs(best)) {
                best = cross;
                found = true;
            }
        }
        prev_v = grid[a];
        prev_d = d;
    }
    if (found) pinch = best;
    out.pinch_voltage = pinch;

    std::vector<Point> poly(v.size());
    for (std::size_t a = 0; a < v.size(); ++a) poly[a] = {v[a], i[a]};
    const auto left = clip(poly, pinch, -1.0);
    const auto right = clip(poly, pinch, +1.0);
    out.lobe1 = left.size() >= 3 ? std::abs(shoelace(left)) : 0.0;
    out.lobe2 = right.size() >= 3 ? std::abs(shoelace(right)) : 0.0;
    out.total = out.lobe1 + out.lobe2;
    return out;
}

std::optional<double> zero_crossing(std::span<const double> v, std::span<const double> i,
                                    Branch branch) {
    check_pair(v, i, 2);
    const auto [hi, lo] = extremes(v);
    const auto path = branch == Branch::falling ? branch_path(v, i, hi, lo) : branch_path(v, i, lo, hi);
    for (std::size_t a = 0; a + 1 < path.size(); ++a) {
        const Point& p = path[a];
        const Point& q = path[a + 1];
        if (p.i == 0.0) return p.v;
        if ((p.i < 0.0) != (q.i < 0.0) && q.i != 0.0) return p.v + (q.v - p.v) * p.i / (p.i - q.i);
        if (q.i == 0.0) return q.v;
    }
    return std::nullopt;
}

std::vector<AttractorPoint> attractor(std::span<const double> q, double dt, double f0) {
    if (q.size() < 3) throw InsufficientDataError("attractor needs at least 3 samples");
    const std::size_t n = q.size();
    std::vector<AttractorPoint> out(n);
    for (std::size_t a = 0; a < n; ++a) {
        double d;
        if (a == 0)
            d = (q[1] - q[0]) / dt;
        else if (a == n - 1)
            d = (q[n - 1] - q[n - 2]) / dt;
        else
            d = (q[a + 1] - q[a - 1]) / (2.0 * dt);
        out[a] = {static_cast<int>(std::floor(static_cast<double>(a) * dt * f0 + 1e-9)), q[a], d};
    }
    return out;
}

double linear_fit_r2(std::span<const double> x, std::span<const double> y) {
    check_pair(x, y, 2);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        sxx += (x[a] - mx) * (x[a] - mx);
        sxy += (x[a] - mx) * (y[a] - my);
        syy += (y[a] - my) * (y[a] - my);
    }
    if (syy == 0.0) return 1.0;
    if (sxx == 0.0) return 0.0;
    return sxy * sxy / (sxx * syy);
}

std::pair<std::size_t, std::size_t> final_cycle(std::size_t samples, std::size_t per_period) {
    if (samples < per_period) throw InsufficientDataError("trace shorter than one period");
    return {samples - per_period, samples};
}

Metrics summarize(const TraceSet& trace, double f0, double amplitude) {
    if (trace.size() < 2) throw InsufficientDataError("trace has fewer than two samples");
    const double dt = trace.time[1] - trace.time[0];
    const std::size_t p = samples_per_period(f0, dt);
    const auto [first, last] = final_cycle(trace.size(), p);
    const std::span<const double> v(trace.device_voltage.data() + first, last - first);
    const std::span<const double> i(trace.current.data() + first, last - first);

    Metrics m;
    m.frequency = f0;
    m.amplitude = amplitude;
    m.loop = hysteresis_area(v, i);
    m.crossing_fall = zero_crossing(v, i, Branch::falling);
    m.crossing_rise = zero_crossing(v, i, Branch::rising);

    const std::size_t periods = trace.size() / p;
    if (periods >= 2) {
        const std::size_t used = periods >= 3 ? periods - 1 : periods;
        const std::span<const double> tail(trace.current.data() + trace.size() - used * p, used * p);
        try {
            m.thd = thd(dft_spectrum(tail, f0, dt));
        } catch (const UndefinedThdError&) {
        }
    }
    return m;
}

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

} // namespace

void write_metrics_header(std::ostream& out) {
    out << "f_hz,V_max,loop_area,lobe1,lobe2,V_cross_fall,V_cross_rise,thd\n";
}

void write_metrics_row(std::ostream& out, const Metrics& m) {
    out << format_double(m.frequency) << ',' << format_double(m.amplitude) << ','
        << format_double(m.loop.total) << ',' << format_double(m.loop.lobe1) << ','
        << format_double(m.loop.lobe2) << ',' << optional_cell(m.crossing_fall) << ','
        << optional_cell(m.crossing_rise) << ',' << optional_cell(m.thd) << '\n';
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
    out << "k,freq_hz,amplitude,phase_deg,phase_present\n";
    for (const SpectrumBin& b : spectrum.bins)
        out << b.k << ',' << format_double(b.frequency) << ',' << format_double(b.amplitude) << ','
            << (b.phase_deg ? format_double(*b.phase_deg) : "") << ',' << (b.phase_deg ? 1 : 0)
            << '\n';
}

void write_attractor_csv(std::ostream& out, const std::vector<AttractorPoint>& points) {
    out << "cycle,q,dqdt\n";
    for (const AttractorPoint& p : points)
        out << p.cycle << ',' << format_double(p.q) << ',' << format_double(p.dqdt) << '\n';
}

} // namespace memsim
