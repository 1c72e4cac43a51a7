#pragma once

#include "memsim/transient.hpp"

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace memsim {

struct SpectrumBin {
    int k = 0;
    double frequency = 0.0; // Hz
    double amplitude = 0.0; // one-sided
    double power = 0.0;     // contribution to the mean square
    std::complex<double> coefficient; // of exp(+i 2 pi k f0 t)
    std::optional<double> phase_deg;  // (-180, 180], relative to the drive sine
};

struct Spectrum {
    double fundamental = 0.0;
    std::size_t periods = 0;
    std::vector<SpectrumBin> bins; // k = 0..K

    double amplitude(int k) const { return bins.at(static_cast<std::size_t>(k)).amplitude; }
};

/// Samples per drive period; throws RangeError unless 1/(f0 dt) is an integer.
std::size_t samples_per_period(double f0, double dt);

/// Default harmonic count: min(50, samples_per_period / 2).
int default_harmonics(std::size_t samples_per_period);

/// Direct-summation Fourier coefficients at k f0, k = 0..K (K < 0 picks the
/// default), over the trailing whole periods of `x`. Sample n sits at
/// t = n dt. Throws InsufficientDataError for fewer than two periods.
Spectrum dft_spectrum(std::span<const double> x, double f0, double dt, int harmonics = -1);

/// Sum of bin powers; equals the mean square of a band-limited periodic signal.
double spectrum_power(const Spectrum& spectrum);

/// sqrt(sum_{k=2..K} |I_k|^2) / |I_1|. Throws UndefinedThdError when the
/// fundamental vanishes.
double thd(const Spectrum& spectrum, int harmonics = -1);

struct LoopArea {
    double total = 0.0;
    double lobe1 = 0.0; // V below the pinch
    double lobe2 = 0.0; // V above the pinch
    double pinch_voltage = 0.0;
    bool closed_by_segment = false; // end points were more than 1% of the range apart
};

/// Shoelace area of one closed (V, I) cycle, cut into two lobes by the
/// vertical line through the branch crossing nearest V = 0 (the middle of
/// the V range when the branches never cross).
LoopArea hysteresis_area(std::span<const double> v, std::span<const double> i);

enum class Branch { rising, falling };

/// Voltage where I changes sign on the selected sweep branch of one cycle
/// (falling: from the V maximum to the V minimum; rising: the rest). The
/// first sign change along the branch is interpolated linearly.
std::optional<double> zero_crossing(std::span<const double> v, std::span<const double> i,
                                    Branch branch);

struct AttractorPoint {
    int cycle = 0;
    double q = 0.0;
    double dqdt = 0.0;
};

/// (q, dq/dt) for every sample; sample n belongs to cycle floor(n dt f0).
std::vector<AttractorPoint> attractor(std::span<const double> q, double dt, double f0);

/// Coefficient of determination of the least-squares line y = a + b x.
double linear_fit_r2(std::span<const double> x, std::span<const double> y);

/// Index range [first, last) of the final whole drive period of a trace.
std::pair<std::size_t, std::size_t> final_cycle(std::size_t samples, std::size_t per_period);

struct Metrics {
    double frequency = 0.0;
    double amplitude = 0.0;
    LoopArea loop;
    std::optional<double> crossing_fall;
    std::optional<double> crossing_rise;
    std::optional<double> thd;
};

/// Final-cycle loop metrics plus THD of the current over every period but
/// the first (all periods when only two exist).
Metrics summarize(const TraceSet& trace, double f0, double amplitude);

void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const Metrics& m);
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);
void write_attractor_csv(std::ostream& out, const std::vector<AttractorPoint>& points);

} // namespace memsim
