#include <doctest.h>

#include <cmath>

#include "bangbang/error.hpp"
#include "bangbang/oscillator.hpp"
#include "helpers.hpp"

using namespace bangbang;
using testing::ca40;
using testing::mhz;

TEST_CASE("ground-state extent of 40Ca+ at 2.3505 MHz") {
    // hbar and u typed in independently of the constants table.
    const double mass = 39.962590863 - 5.48579909065e-4;
    const double x0 = std::sqrt(1.054571817e-34 / (2.0 * mass * 1.66053906660e-27 * 2.0 * M_PI * 2.3505e6));
    CHECK(ground_state_extent(ca40()) == doctest::Approx(x0).epsilon(1e-12));
    CHECK(ground_state_extent(ca40()) == doctest::Approx(7.33e-9).epsilon(1e-3));
    CHECK(ca40().ground_state_extent() == ground_state_extent(ca40()));
}

TEST_CASE("quadrupling the trap frequency halves x0") {
    const double m = constants::ca40_ion_mass_u;
    CHECK(ground_state_extent(m, 4.0 * mhz(2.0)) == doctest::Approx(0.5 * ground_state_extent(m, mhz(2.0))).epsilon(1e-14));
}

TEST_CASE("x0 stays in 7 to 7.5 nm over the experimental trap frequencies") {
    for (double f = 2.35; f <= 2.5301; f += 0.01) {
        const double x0 = ground_state_extent(ca40(f));
        CHECK(x0 > 7.0e-9);
        CHECK(x0 < 7.5e-9);
    }
}

TEST_CASE("Lamb-Dicke parameter") {
    const auto p = ca40();
    CHECK(p.lamb_dicke() == doctest::Approx(2.0 * M_PI * std::cos(M_PI / 4) / 729e-9 * p.ground_state_extent()).epsilon(1e-14));
    CHECK(std::abs(p.lamb_dicke() - 0.0447) < 5e-5);
    CHECK(std::abs(p.lamb_dicke() - 0.044) < 1e-3);
    CHECK(std::abs(p.with_beam_angle(M_PI / 2).lamb_dicke()) < 1e-17);
    CHECK(p.wavevector_projection() == doctest::Approx(2.0 * M_PI / 729e-9 * std::cos(M_PI / 4)));
}

TEST_CASE("eta scales as 1/sqrt(w)") {
    const auto p = ca40(2.0);
    for (double k : {0.5, 1.7, 3.0, 9.0}) {
        CHECK(p.with_trap_freq(k * p.trap_freq()).lamb_dicke() == doctest::Approx(p.lamb_dicke() / std::sqrt(k)).epsilon(1e-13));
    }
}

TEST_CASE("derived fields follow input changes") {
    const auto p = ca40(2.35);
    const auto q = p.with_trap_freq(mhz(2.53));
    CHECK(q == OscillatorParams(constants::ca40_ion_mass_u, mhz(2.53), 729e-9, M_PI / 4));
    CHECK(q.ground_state_extent() < p.ground_state_extent());
}

TEST_CASE("invalid oscillator input") {
    CHECK_THROWS_AS(OscillatorParams(0.0, mhz(1), 729e-9, 0.3), DomainError);
    CHECK_THROWS_AS(OscillatorParams(40.0, -1.0, 729e-9, 0.3), DomainError);
    CHECK_THROWS_AS(OscillatorParams(40.0, mhz(1), 0.0, 0.3), DomainError);
    CHECK_THROWS_AS(OscillatorParams(40.0, mhz(1), 729e-9, 2.0), DomainError);
    CHECK_THROWS_AS(ground_state_extent(40.0, 0.0), DomainError);
    CHECK_THROWS_AS(displacement_alpha(-1e-9, ca40()), DomainError);
    CHECK_THROWS_AS(residual_alpha(-1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("displacement alpha") {
    CHECK(displacement_alpha(75.0e-9, ca40()) == doctest::Approx(5.12).epsilon(2e-3));
    CHECK(displacement_alpha(0.0, ca40()) == 0.0);
    CHECK(std::abs(displacement_alpha(1.5e-6, ca40(2.35)) - 102.0) < 1.0);
    const double a1 = displacement_alpha(13e-9, ca40());
    CHECK(displacement_alpha(7.0 * 13e-9, ca40()) == doctest::Approx(7.0 * a1).epsilon(1e-14));
}

TEST_CASE("residual alpha after a round trip") {
    const double w = mhz(2.3505);
    const double a0 = 5.11;
    CHECK(residual_alpha(a0, 2.0 * M_PI / w, w) < 1e-14);
    CHECK(residual_alpha(a0, M_PI / w, w) == doctest::Approx(2.0 * a0).epsilon(1e-15));
    CHECK(residual_alpha(a0, 0.5 * M_PI / w, w) == doctest::Approx(7.227).epsilon(1e-4));
    CHECK(residual_alpha(a0, 0.0, w) == 0.0);
}

TEST_CASE("residual alpha: periodic, symmetric, bounded, equal to the cosine form") {
    const double w = mhz(2.53);
    const double T = 2.0 * M_PI / w;
    const double a0 = 3.3;
    for (int i = 0; i <= 200; ++i) {
        const double dt = T * i / 200.0;
        const double r = residual_alpha(a0, dt, w);
        CHECK(r >= 0.0);
        CHECK(r <= 2.0 * a0 * (1 + 1e-15));
        CHECK(residual_alpha(a0, dt + 3.0 * T, w) == doctest::Approx(r).epsilon(1e-8).scale(a0));
        CHECK(residual_alpha(a0, T - dt, w) == doctest::Approx(r).epsilon(1e-9).scale(a0));
        CHECK(r == doctest::Approx(a0 * std::sqrt(2.0 * (1.0 - std::cos(w * dt)))).epsilon(1e-7).scale(a0));
    }
}

TEST_CASE("displacement protocol") {
    DisplacementProtocol p;
    p.x_d = 1e-6;
    p.dwell_time = 1.234e-6;
    p.hold_periods = 3;
    CHECK_NOTHROW(p.validate());
    const double w = mhz(2.35);
    CHECK(p.effective_dwell(w) == 1.234e-6);
    p.trigger_exact_period = true;
    CHECK(p.effective_dwell(w) == doctest::Approx(3.0 * 2.0 * M_PI / w).epsilon(1e-15));
    p.x_d = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p.x_d = 0.0;
    p.hold_periods = -1;
    CHECK_THROWS_AS(p.validate(), DomainError);
}
