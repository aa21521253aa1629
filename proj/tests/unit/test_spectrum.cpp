#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "bangbang/analysis.hpp"
#include "bangbang/coupling.hpp"
#include "bangbang/error.hpp"
#include "helpers.hpp"

using namespace bangbang;
using testing::ca40;
using testing::khz;

namespace {

PopulationTrace cosine_trace(double omega, std::size_t n, double dt, double t0 = 0.0) {
    PopulationTrace t;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = t0 + dt * static_cast<double>(i);
        t.probe_times.push_back(ti);
        t.p_down.push_back(0.5 + 0.4 * std::cos(omega * ti));
        t.sigma.push_back(0.01 + 0.001 * static_cast<double>(i % 7));
    }
    t.shots = 1000;
    return t;
}

std::size_t argmax_nondc(const RabiSpectrum& s) {
    return static_cast<std::size_t>(std::max_element(s.magnitude.begin() + 1, s.magnitude.end()) - s.magnitude.begin());
}

}  // namespace

TEST_CASE("on-grid cosine puts its weight in one bin") {
    const std::size_t n = 200;
    const double dt = 0.4e-6;
    const double omega = constants::two_pi * 20.0 / (n * dt);
    const auto s = rabi_spectrum(cosine_trace(omega, n, dt));
    CHECK(s.omega.size() == n / 2 + 1);
    CHECK(s.bin_width() == doctest::Approx(constants::two_pi / (n * dt)));
    const auto k = argmax_nondc(s);
    CHECK(k == 20);
    CHECK(s.magnitude[k] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.magnitude[0] == doctest::Approx(0.5).epsilon(1e-12));
    for (std::size_t j = 1; j < s.omega.size(); ++j)
        if (j != 20) CHECK(s.magnitude[j] < 1e-12);
}

TEST_CASE("constant trace has empty non-DC bins") {
    PopulationTrace t;
    for (int i = 0; i < 64; ++i) {
        t.probe_times.push_back(1e-6 * (i + 1));
        t.p_down.push_back(0.73);
        t.sigma.push_back(0.0);
    }
    const auto s = rabi_spectrum(t, {4, false});
    CHECK(s.magnitude[0] == doctest::Approx(0.73));
    CHECK(s.omega.size() == 64 * 4 / 2 + 1);
    // Padding by 4 leaves the DC image zero on every fourth bin.
    for (std::size_t k = 4; k < s.omega.size(); k += 4) CHECK(s.magnitude[k] < 1e-14);
    const auto r = rabi_spectrum(t, {1, true});
    for (double m : r.magnitude) CHECK(m < 1e-14);
    CHECK_THROWS_AS(fit_lorentzian(r), DomainError);
}

TEST_CASE("DFT is linear in the trace") {
    const auto t = cosine_trace(khz(160), 150, 0.4e-6, 1.4e-6);
    auto scaled = t;
    for (auto& v : scaled.p_down) v *= 0.6;
    for (auto& v : scaled.sigma) v *= 0.6;
    for (bool rm : {false, true}) {
        const auto a = rabi_spectrum(t, {3, rm}), b = rabi_spectrum(scaled, {3, rm});
        for (std::size_t k = 0; k < a.omega.size(); ++k) {
            CHECK(std::abs(b.magnitude[k] - 0.6 * a.magnitude[k]) <= 1e-12 * a.magnitude[k] + 1e-15);
            CHECK(std::abs(b.sigma[k] - 0.6 * a.sigma[k]) <= 1e-12 * a.sigma[k] + 1e-15);
        }
    }
}

TEST_CASE("per-bin sigma is the linear propagation of the trace sigma") {
    const auto t = cosine_trace(khz(100), 40, 0.5e-6, 2e-6);
    const std::size_t n = t.size(), pad = 2, m = n * pad;
    for (bool rm : {false, true}) {
        const auto s = rabi_spectrum(t, {static_cast<int>(pad), rm});
        for (std::size_t k = 0; k < s.omega.size(); ++k) {
            // d X_k / d x_j for X_k = (1/n) sum_i (x_i - rm * mean) e^{-2 pi i k i / m}
            double var = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                std::complex<double> c = std::polar(1.0, -2.0 * M_PI * double(k) * double(j) / double(m)) / double(n);
                if (rm)
                    for (std::size_t i = 0; i < n; ++i) c -= std::polar(1.0, -2.0 * M_PI * double(k) * double(i) / double(m)) / double(n * n);
                var += std::norm(c) * t.sigma[j] * t.sigma[j];
            }
            CHECK(std::abs(s.sigma[k] - std::sqrt(var)) <= 1e-10 * std::sqrt(var) + 1e-15);
        }
    }
}

TEST_CASE("non-uniform probe grid is rejected") {
    auto t = cosine_trace(khz(100), 40, 0.5e-6);
    t.probe_times[10] += 0.1e-6;
    CHECK_THROWS_AS(rabi_spectrum(t), DomainError);
    CHECK_THROWS_AS(rabi_spectrum(cosine_trace(khz(100), 3, 0.5e-6)), DomainError);
    CHECK_THROWS_AS(rabi_spectrum(cosine_trace(khz(100), 30, 0.5e-6), {0, false}), DomainError);
}

TEST_CASE("Lorentzian self-fit") {
    RabiSpectrum s;
    const double c = khz(163.3), w = khz(7.1);
    for (int k = 0; k < 200; ++k) {
        const double om = khz(2.0) * k;
        s.omega.push_back(om);
        s.magnitude.push_back(lorentzian(om, c, w, 0.08, 0.004));
        s.sigma.push_back(0.0);
    }
    const auto fit = fit_lorentzian(s, {12});
    CHECK(fit.center == doctest::Approx(c).epsilon(1e-6));
    CHECK(fit.width == doctest::Approx(w).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(0.08).epsilon(1e-6));
    CHECK(fit.offset == doctest::Approx(0.004).epsilon(1e-5));
    CHECK(lorentzian(c + w, c, w, 2.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("off-grid cosine: fitted center within one bin") {
    const std::size_t n = 198;
    const double dt = 0.4e-6;
    for (double f : {141.7e3, 163.3e3, 187.9e3, 206.1e3}) {
        const double omega = constants::two_pi * f;
        for (int pad : {1, 8}) {
            const auto s = rabi_spectrum(cosine_trace(omega, n, dt, 1.4e-6), {pad, true});
            const auto fit = fit_lorentzian(s);
            CHECK(std::abs(fit.center - omega) < constants::two_pi / (n * dt));
            CHECK(fit.sigma_center >= 0.0);
            CHECK(std::isfinite(fit.sigma_center));
        }
    }
}

TEST_CASE("carrier trace at x_d = 660 nm has one dominant peak near the mean Rabi frequency") {
    const auto p = ca40(2.35);
    SequenceConfig c;
    c.protocol = {660e-9, 0.0, 1, true};
    c.probe_phase = ProbePhase::while_displaced;
    c.drive = {0, khz(205), 0.0, 0.0};
    c.nbar_th = 0.2;
    const auto times = linspace(1.4e-6, 80e-6, 197);
    const auto tr = simulate_sequence(c, p, times, 1000, 3);
    const auto s = rabi_spectrum(tr, {8, true});
    const auto k = argmax_nondc(s);
    std::vector<double> rest(s.magnitude.begin() + 1, s.magnitude.end());
    std::sort(rest.begin(), rest.end());
    CHECK(s.magnitude[k] > 3.0 * rest[rest.size() / 2]);
    const double mr = mean_rabi({0.2, displacement_alpha(660e-9, p)}, c.drive, c.env, p);
    const auto fit = fit_lorentzian(s);
    CHECK(fit.center == doctest::Approx(mr).epsilon(0.01));
}
