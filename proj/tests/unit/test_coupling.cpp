#include <doctest.h>

#include <cmath>

#include "bangbang/commands.hpp"
#include "bangbang/coupling.hpp"
#include "bangbang/error.hpp"
#include "bangbang/fockmath.hpp"
#include "helpers.hpp"

using namespace bangbang;
using testing::ca40;
using testing::khz;
using testing::mhz;

namespace {

// Term-by-term sum in the sideband-indexed convention.
double stark_reference(std::int64_t n, int s, const StarkEnvironment& env, double eta, double rabi0, double w) {
    double total = 0.0;
    for (int sp = s - env.sum_cutoff; sp <= s + env.sum_cutoff; ++sp) {
        if (n + sp < 0) continue;
        const double om = rabi_frequency(n, sp, eta, rabi0);
        if (sp != s) total += om * om / (2.0 * w * (sp - s));
        const double omw = om / env.coupling_ratio;
        total += omw * omw / (4.0 * (env.delta_secondary + w * (sp - s)));
    }
    return total;
}

StarkEnvironment no_stark() {
    StarkEnvironment env;
    env.enabled = false;
    return env;
}

}  // namespace

TEST_CASE("low-n Rabi frequencies") {
    const double eta = 0.044, r0 = khz(200);
    CHECK(rabi_frequency(0, 0, eta, r0) == doctest::Approx(std::exp(-eta * eta / 2) * r0).epsilon(1e-14));
    CHECK(rabi_frequency(0, 0, eta, 1.0) == doctest::Approx(0.999032).epsilon(1e-6));
    CHECK(rabi_frequency(1, 0, eta, r0) == doctest::Approx(std::exp(-eta * eta / 2) * (1 - eta * eta) * r0).epsilon(1e-14));
    CHECK(rabi_frequency(0, 1, eta, r0) == doctest::Approx(std::exp(-eta * eta / 2) * eta * r0).epsilon(1e-14));
    CHECK(rabi_frequency(3, 0, 0.0, r0) == r0);
    CHECK(rabi_frequency(3, 2, 0.0, r0) == 0.0);
    CHECK_THROWS_AS(rabi_frequency(2, -3, eta, r0), DomainError);
    CHECK_THROWS_AS(rabi_frequency(-1, 3, eta, r0), DomainError);
}

TEST_CASE("ground-state s = 5 pi time is about two minutes") {
    const double eta = 0.044, r0 = khz(204.3);
    const double om = rabi_frequency(0, 5, eta, r0);
    const double hand = r0 * std::exp(-eta * eta / 2) * std::pow(eta, 5) / std::sqrt(120.0);
    CHECK(om == doctest::Approx(hand).epsilon(1e-13));
    CHECK(om / constants::two_pi == doctest::Approx(3.1e-3).epsilon(0.02));
    CHECK(M_PI / om == doctest::Approx(160.0).epsilon(0.03));
}

TEST_CASE("matrix element is symmetric under n <-> n + s") {
    for (double eta : {0.044, 0.1, 0.3})
        for (int s = -6; s <= 6; ++s)
            for (int n = std::max(0, -s); n <= 200; ++n)
                CHECK(rabi_frequency(n, s, eta, 1.0) == doctest::Approx(rabi_frequency(n + s, -s, eta, 1.0)).epsilon(1e-12));
}

TEST_CASE("large-n Rabi frequencies follow J_|s|(2 eta sqrt n)") {
    const double eta = 0.044;
    for (std::int64_t n : {1000, 2500, 10000, 40000})
        for (int s = -5; s <= 5; ++s) {
            const double j = fock::bessel_j(std::abs(s), 2.0 * eta * std::sqrt(static_cast<double>(n)));
            if (std::abs(j) < 0.05) continue;
            CHECK(std::abs(rabi_frequency(n, s, eta, 1.0) - std::abs(j)) < 0.01);
        }
}

TEST_CASE("Stark shift agrees with the term-by-term sum") {
    const auto p = ca40(2.35);
    const StarkEnvironment env;
    for (int s : {0, 1, 3, 5})
        for (std::int64_t n : {0, 1, 7, 300, 5000}) {
            const double v = ac_stark_shift(n, s, env, p.lamb_dicke(), khz(220), p.trap_freq());
            CHECK(v == doctest::Approx(stark_reference(n, s, env, p.lamb_dicke(), khz(220), p.trap_freq())).epsilon(1e-11));
        }
}

TEST_CASE("as-printed convention: the main-transition sum cancels") {
    StarkEnvironment env;
    env.convention = StarkConvention::as_printed;
    env.delta_secondary = 1e30;
    const auto p = ca40(2.35);
    for (int s : {0, 2, 5})
        for (std::int64_t n : {30, 4000})
            CHECK(std::abs(ac_stark_shift(n, s, env, p.lamb_dicke(), khz(220), p.trap_freq())) < 1e-18 * khz(220));
}

TEST_CASE("ground-state first sideband Stark shift") {
    const double eta = 0.044, r0 = khz(211), w = mhz(2.35);
    StarkEnvironment env;
    env.convention = StarkConvention::as_printed;
    // Every numerator is Omega_{0,1} ~ eta Omega0.
    CHECK(std::abs(ac_stark_shift(0, 1, env, eta, r0, w)) < 1e-3 * r0);
    // Indexed numerators keep the unsuppressed carrier term -Omega_{0,0}^2 / (2 w_m).
    env.convention = StarkConvention::sideband_indexed;
    const double carrier = -std::pow(rabi_frequency(0, 0, eta, r0), 2) / (2.0 * w);
    CHECK(ac_stark_shift(0, 1, env, eta, r0, w) == doctest::Approx(carrier).epsilon(0.02));
}

TEST_CASE("nearly resonant secondary sidebands") {
    const StarkEnvironment env;
    CHECK(nearest_secondary_resonance(4, env, mhz(2.35)) == -7);
    CHECK(nearest_secondary_resonance(5, env, mhz(2.35)) == -6);
    for (int s = 0; s <= 5; ++s) {
        const int best = nearest_secondary_resonance(s, env, mhz(2.35));
        for (int sp = s - 20; sp <= s + 20; ++sp)
            CHECK(std::abs(env.delta_secondary + mhz(2.35) * (best - s)) <= std::abs(env.delta_secondary + mhz(2.35) * (sp - s)));
    }
}

TEST_CASE("exact secondary resonance raises") {
    StarkEnvironment env;
    env.delta_secondary = 1e8;
    try {
        (void)ac_stark_shift(50, 4, env, 0.05, 1e6, 1e7);
        FAIL("expected a resonance error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("s'=-6") != std::string::npos);
    }
}

TEST_CASE("Stark shift changes sign across a secondary resonance") {
    const StarkEnvironment env;
    const double eta = 0.044, r0 = khz(226);
    const double w_res = env.delta_secondary / 11.0;  // s = 4 against s' = -7
    // At high n the s' = -7 coupling is order one and dominates near resonance.
    const double below = ac_stark_shift(5000, 4, env, eta, r0, w_res * (1 - 1e-6));
    const double above = ac_stark_shift(5000, 4, env, eta, r0, w_res * (1 + 1e-6));
    CHECK(below * above < 0.0);
}

TEST_CASE("Stark sum cutoff is converged at 20") {
    const auto p = ca40(2.35);
    StarkEnvironment e20, e30;
    e30.sum_cutoff = 30;
    for (int s = 0; s <= 5; ++s) {
        const auto d = table2_drive(s);
        for (double a : {0.0, 40.0, 100.0}) {
            const double m20 = mean_rabi({0.21, a}, d, e20, p), m30 = mean_rabi({0.21, a}, d, e30, p);
            CHECK(std::abs(m20 - m30) < 1e-3 * m30);
        }
    }
}

TEST_CASE("total detuning") {
    const auto p = ca40(2.35);
    SidebandDrive d{2, khz(218), 0.0, 0.0};
    CHECK(total_detuning(10, d, no_stark(), p) == 0.0);
    const StarkEnvironment env;
    const double base = total_detuning(10, d, env, p);
    d.detune_off = khz(-4);
    CHECK(total_detuning(10, d, env, p) == doctest::Approx(base + khz(-4)).epsilon(1e-13));
    CHECK(table2_drive(5).detune_off == doctest::Approx(khz(-32)));
    CHECK(table2_drive(5).rabi0 == doctest::Approx(khz(226)));
    CHECK(table2_drive(0).rabi0 == doctest::Approx(khz(205)));
}

TEST_CASE("mean Rabi frequency") {
    const auto p = ca40(2.35);
    for (int s = 0; s <= 3; ++s) {
        const SidebandDrive d{s, khz(210), 0.0, 0.0};
        CHECK(mean_rabi({0.0, 0.0}, d, no_stark(), p) == doctest::Approx(rabi_frequency(0, s, p.lamb_dicke(), khz(210))).epsilon(1e-13));
    }
    // Direct weighted sum over the distribution.
    const SidebandDrive d{1, khz(211), khz(4), 0.0};
    const StarkEnvironment env;
    const auto dist = displaced_thermal_pmf({0.2, 12.0});
    double ref = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const auto n = dist.n_min() + static_cast<std::int64_t>(i);
        ref += dist.weights()[i] * std::hypot(rabi_frequency(n, 1, p.lamb_dicke(), khz(211)), total_detuning(n, d, env, p));
    }
    CHECK(mean_rabi({0.2, 12.0}, d, env, p) == doctest::Approx(ref / dist.captured_mass()).epsilon(1e-12));
}

TEST_CASE("mean Rabi frequency is continuous in x_d") {
    const auto p = ca40(2.35);
    const StarkEnvironment env;
    const auto d = table2_drive(0);
    for (double xd = 100e-9; xd < 1.5e-6; xd += 97e-9) {
        const double a = mean_rabi({0.21, displacement_alpha(xd, p)}, d, env, p);
        const double b = mean_rabi({0.21, displacement_alpha(xd + 1e-9, p)}, d, env, p);
        CHECK(std::abs(a - b) < 0.01 * d.rabi0);
    }
}

TEST_CASE("coupling table matches the scalar functions") {
    const auto p = ca40(2.35);
    const StarkEnvironment env;
    for (int s : {0, 2, 5}) {
        CouplingTable t(p.lamb_dicke(), s, env, p.trap_freq());
        for (std::int64_t n : {0, 3, 800, 12000}) {
            CHECK(t.rabi_ratio(n) == doctest::Approx(rabi_frequency(n, s, p.lamb_dicke(), 1.0)).epsilon(1e-11));
            CHECK(khz(220) * khz(220) * t.stark_coefficient(n) ==
                  doctest::Approx(ac_stark_shift(n, s, env, p.lamb_dicke(), khz(220), p.trap_freq())).epsilon(1e-10));
        }
    }
}

TEST_CASE("drive and environment validation") {
    CHECK_THROWS_AS((SidebandDrive{0, -1.0, 0.0, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((SidebandDrive{0, 1.0, 0.0, -1.0}.validate()), DomainError);
    StarkEnvironment env;
    env.sum_cutoff = 4;
    CHECK_THROWS_AS(env.validate(), DomainError);
    env = {};
    env.coupling_ratio = 0.0;
    CHECK_THROWS_AS(env.validate(), DomainError);
}
