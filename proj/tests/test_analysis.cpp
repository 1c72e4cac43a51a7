#include "memsim/analysis.hpp"
#include "memsim/error.hpp"
#include "memsim/units.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace memsim;

namespace {

constexpr double kTwoPi = 2.0 * phys::kPi;

struct Sampled {
    std::vector<double> x;
    double dt;
};

template <class F>
Sampled sample(F f, double f0, int per_period, int periods, double offset = 0.0) {
    Sampled s{{}, 1.0 / (f0 * per_period)};
    for (int n = 0; n < per_period * periods; ++n) s.x.push_back(f((n + offset) * s.dt));
    return s;
}

} // namespace

TEST_CASE("samples per period must be an integer") {
    CHECK(samples_per_period(2.0, 0.005) == 100);
    CHECK_THROWS_AS(samples_per_period(3.0, 0.01), RangeError);
    CHECK(default_harmonics(100) == 50);
    CHECK(default_harmonics(40) == 20);
}

TEST_CASE("pure tone has one bin and zero THD") {
    const double f0 = 5.0;
    const auto s = sample([&](double t) { return 2.0 * std::sin(kTwoPi * f0 * t); }, f0, 200, 3);
    const Spectrum sp = dft_spectrum(s.x, f0, s.dt);
    CHECK(sp.amplitude(1) == doctest::Approx(2.0).epsilon(1e-12));
    for (int k = 2; k < 50; ++k) CHECK(sp.amplitude(k) < 1e-12);
    CHECK(sp.bins[1].phase_deg.has_value());
    CHECK(*sp.bins[1].phase_deg == doctest::Approx(0.0).scale(1.0));
    CHECK(thd(sp) < 1e-12);
}

TEST_CASE("ten percent third harmonic") {
    const double f0 = 1.0;
    const auto s = sample(
        [&](double t) { return std::sin(kTwoPi * f0 * t) + 0.1 * std::sin(3 * kTwoPi * f0 * t); }, f0,
        256, 2);
    const Spectrum sp = dft_spectrum(s.x, f0, s.dt);
    CHECK(sp.amplitude(3) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(thd(sp) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("spectrum power equals the mean square") {
    const double f0 = 1.0;
    const auto s = sample(
        [&](double t) {
            return 0.3 + std::cos(kTwoPi * f0 * t) - 0.4 * std::sin(2 * kTwoPi * f0 * t) +
                   0.05 * std::cos(7 * kTwoPi * f0 * t + 0.2);
        },
        f0, 64, 4);
    double mean_square = 0.0;
    for (double v : s.x) mean_square += v * v;
    mean_square /= s.x.size();
    CHECK(spectrum_power(dft_spectrum(s.x, f0, s.dt)) == doctest::Approx(mean_square).epsilon(1e-12));
}

TEST_CASE("spectrum is linear and THD is scale invariant") {
    const double f0 = 1.0;
    const auto a = sample([&](double t) { return std::sin(kTwoPi * t) + 0.2 * std::cos(2 * kTwoPi * t); }, f0, 128, 2);
    const auto b = sample([&](double t) { return std::cos(kTwoPi * t) - 0.1 * std::sin(5 * kTwoPi * t); }, f0, 128, 2);
    std::vector<double> mix(a.x.size()), scaled(a.x.size());
    for (std::size_t n = 0; n < mix.size(); ++n) {
        mix[n] = 3.0 * a.x[n] - 2.0 * b.x[n];
        scaled[n] = 1e-9 * a.x[n];
    }
    const Spectrum sa = dft_spectrum(a.x, f0, a.dt), sb = dft_spectrum(b.x, f0, b.dt);
    const Spectrum sm = dft_spectrum(mix, f0, a.dt);
    for (std::size_t k = 0; k < sm.bins.size(); ++k) {
        const auto expected = 3.0 * sa.bins[k].coefficient - 2.0 * sb.bins[k].coefficient;
        CHECK(std::abs(sm.bins[k].coefficient - expected) <= 1e-12);
    }
    CHECK(thd(dft_spectrum(scaled, f0, a.dt)) == doctest::Approx(thd(sa)).epsilon(1e-12));
}

TEST_CASE("square wave THD") {
    const double f0 = 1.0;
    const auto s = sample([&](double t) { return std::sin(kTwoPi * f0 * t) >= 0.0 ? 1.0 : -1.0; }, f0,
                          101, 2, 0.5);
    const double value = thd(dft_spectrum(s.x, f0, s.dt, 50));
    CAPTURE(value);
    CHECK(std::abs(value - 0.4834) <= 0.002);
}

TEST_CASE("spectrum errors") {
    const auto one = sample([](double t) { return std::sin(kTwoPi * t); }, 1.0, 100, 1);
    CHECK_THROWS_AS(dft_spectrum(one.x, 1.0, one.dt), InsufficientDataError);
    const std::vector<double> flat(200, 1.0);
    CHECK_THROWS_AS(thd(dft_spectrum(flat, 1.0, 0.01)), UndefinedThdError);
    CHECK_THROWS_AS(dft_spectrum(flat, 1.0, 0.01, 80), RangeError);
}

TEST_CASE("loop area of a circle") {
    std::vector<double> v, i;
    const int n = 4000;
    for (int a = 0; a < n; ++a) {
        v.push_back(std::cos(kTwoPi * a / n));
        i.push_back(std::sin(kTwoPi * a / n));
    }
    const LoopArea loop = hysteresis_area(v, i);
    CHECK(loop.total == doctest::Approx(phys::kPi).epsilon(1e-5));

    // Traversal direction and starting sample do not matter.
    std::vector<double> rv(v.rbegin(), v.rend()), ri(i.rbegin(), i.rend());
    CHECK(hysteresis_area(rv, ri).total == doctest::Approx(loop.total).epsilon(1e-12));
    std::vector<double> sv, si;
    for (int a = 0; a < n; ++a) {
        sv.push_back(v[(a + 1234) % n]);
        si.push_back(i[(a + 1234) % n]);
    }
    CHECK(hysteresis_area(sv, si).total == doctest::Approx(loop.total).epsilon(1e-9));
}

TEST_CASE("a resistor encloses no area") {
    std::vector<double> v, i;
    for (int a = 0; a < 1000; ++a) {
        v.push_back(3.0 * std::sin(kTwoPi * a / 1000));
        i.push_back(v.back() / 1e4);
    }
    CHECK(hysteresis_area(v, i).total < 1e-15);
}

TEST_CASE("pinched loop splits into two lobes") {
    // Figure-eight: I = V (1 + 0.5 cos wt) changes branch ordering at V = 0.
    std::vector<double> v, i;
    const int n = 2000;
    for (int a = 0; a < n; ++a) {
        const double w = kTwoPi * a / n;
        v.push_back(std::sin(w));
        i.push_back(std::sin(w) * (1.0 + 0.5 * std::cos(w)));
    }
    const LoopArea loop = hysteresis_area(v, i);
    CHECK(loop.pinch_voltage == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(loop.lobe1 == doctest::Approx(loop.lobe2).epsilon(1e-6));
    CHECK(loop.total == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("zero crossings") {
    const double delta = 0.3;
    std::vector<double> v, i;
    const int n = 10000;
    for (int a = 0; a < n; ++a) {
        const double w = kTwoPi * a / n;
        v.push_back(std::sin(w));
        i.push_back(std::sin(w + delta));
    }
    const auto fall = zero_crossing(v, i, Branch::falling);
    const auto rise = zero_crossing(v, i, Branch::rising);
    REQUIRE(fall);
    REQUIRE(rise);
    CHECK(*fall == doctest::Approx(std::sin(delta)).epsilon(1e-6));
    CHECK(*rise == doctest::Approx(-std::sin(delta)).epsilon(1e-6));

    std::vector<double> positive(v.size(), 1.0);
    CHECK_FALSE(zero_crossing(v, positive, Branch::falling).has_value());
}

TEST_CASE("attractor") {
    const double f0 = 2.0, dt = 0.001;
    std::vector<double> q;
    for (int n = 0; n < 1000; ++n) q.push_back(std::sin(kTwoPi * f0 * n * dt));
    const auto pts = attractor(q, dt, f0);
    REQUIRE(pts.size() == 1000);
    CHECK(pts[0].cycle == 0);
    CHECK(pts[499].cycle == 0);
    CHECK(pts[500].cycle == 1);
    CHECK(pts[250].dqdt == doctest::Approx(kTwoPi * f0 * std::cos(kTwoPi * f0 * 0.25)).scale(kTwoPi * f0).epsilon(1e-4));
    CHECK(pts[125].dqdt == doctest::Approx(0.0).scale(kTwoPi * f0).epsilon(1e-4));
    CHECK_THROWS_AS(attractor(std::vector<double>{1.0, 2.0}, dt, f0), InsufficientDataError);
}

TEST_CASE("linear fit R^2") {
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7}, noisy{1, 2, 1, 2};
    CHECK(linear_fit_r2(x, y) == doctest::Approx(1.0));
    CHECK(linear_fit_r2(x, noisy) < 0.5);
}
