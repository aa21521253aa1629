#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "bangbang/error.hpp"
#include "bangbang/states.hpp"

using namespace bangbang;

namespace {

double poisson(double mean, std::int64_t n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(n) * std::log(mean) - mean - std::lgamma(static_cast<double>(n) + 1.0));
}

// |<n|D(alpha)|m>|^2 from the alternating j-sum of the normally ordered
// displacement; well conditioned for the small alpha and indices used here.
double overlap_by_series(int n, int m, double alpha) {
    double amp = 0.0;
    for (int j = std::max(0, m - n); j <= m; ++j) {
        const double term = std::pow(-1.0, j) * std::pow(alpha, n - m + 2 * j) /
                            (std::tgamma(j + 1.0) * std::tgamma(m - j + 1.0) * std::tgamma(n - m + j + 1.0));
        amp += term;
    }
    amp *= std::sqrt(std::tgamma(n + 1.0) * std::tgamma(m + 1.0)) * std::exp(-0.5 * alpha * alpha);
    return amp * amp;
}

}  // namespace

TEST_CASE("thermal pmf") {
    CHECK(thermal_pmf(0.0, 0) == 1.0);
    CHECK(thermal_pmf(0.0, 3) == 0.0);
    CHECK(thermal_pmf(1.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(thermal_pmf(1.0, 2) == doctest::Approx(0.125).epsilon(1e-15));
    double sum = 0.0;
    for (int n = 0; n <= 200; ++n) sum += thermal_pmf(0.2, n);
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK_THROWS_AS(thermal_pmf(-0.1, 0), DomainError);
}

TEST_CASE("thermal cutoff bounds the tail") {
    for (double nbar : {0.0, 0.2, 2.0, 30.0})
        for (double tail : {1e-3, 1e-10}) {
            const auto M = thermal_cutoff(nbar, tail);
            CHECK(std::pow(nbar / (nbar + 1.0), static_cast<double>(M + 1)) <= tail * (1 + 1e-12));
            if (M > 0) CHECK(std::pow(nbar / (nbar + 1.0), static_cast<double>(M)) > tail);
        }
}

TEST_CASE("displacement overlap") {
    for (double a : {0.3, 1.0, 2.5})
        for (int n = 0; n < 12; ++n) CHECK(displacement_overlap_sq(n, 0, a) == doctest::Approx(poisson(a * a, n)).epsilon(1e-12));
    CHECK(displacement_overlap_sq(0, 0, 1.0) == doctest::Approx(0.367879441171).epsilon(1e-11));
    CHECK(displacement_overlap_sq(1, 1, 1.0) < 1e-30);
    CHECK(displacement_overlap_sq(3, 3, 0.0) == 1.0);
    CHECK(displacement_overlap_sq(3, 4, 0.0) == 0.0);
}

TEST_CASE("displacement overlap matches the normally ordered series and is symmetric") {
    for (double a : {0.2, 0.9, 1.7})
        for (int n = 0; n <= 12; ++n)
            for (int m = 0; m <= 12; ++m) {
                const double v = displacement_overlap_sq(n, m, a);
                CHECK(v == doctest::Approx(overlap_by_series(n, m, a)).epsilon(1e-9).scale(1e-3));
                CHECK(v == doctest::Approx(displacement_overlap_sq(m, n, a)).epsilon(1e-13));
            }
}

TEST_CASE("coherent-state and thermal limits") {
    const auto coh = displaced_thermal_pmf({0.0, 1.0});
    CHECK(coh.at(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    const auto th = displaced_thermal_pmf({0.7, 0.0});
    CHECK(th.n_min() == 0);
    for (int n = 0; n < 60; ++n) {
        if (n <= th.n_max()) CHECK(th.at(n) == thermal_pmf(0.7, n));
        else CHECK(thermal_pmf(0.7, n) < kDefaultMassTol);
    }
}

TEST_CASE("pmf matches the matrix oracle at the Fig. 2a working point") {
    const DisplacedThermalSpec spec{0.2, 5.11};
    const auto p = displaced_thermal_pmf(spec);
    const auto q = matrix_oracle_pmf(spec, 128);
    double worst = 0.0;
    for (int n = 0; n < 128; ++n) worst = std::max(worst, std::abs(p.at(n) - q.at(n)));
    CHECK(worst < 1e-9);
}

TEST_CASE("matrix oracle") {
    const auto th = matrix_oracle_pmf({0.3, 0.0}, 64);
    for (int n = 0; n < 64; ++n) CHECK(th.at(n) == doctest::Approx(thermal_pmf(0.3, n)).epsilon(1e-13).scale(1e-16));
    const auto coh = matrix_oracle_pmf({0.0, 2.0}, 64);
    for (int n = 0; n < 64; ++n) CHECK(std::abs(coh.at(n) - poisson(4.0, n)) < 1e-10);
    const auto d = matrix_oracle_pmf({0.5, 1.5}, 96);
    double mean = 0.0;
    for (int n = 0; n < 96; ++n) mean += n * d.at(n);
    CHECK(std::abs(mean - (0.5 + 2.25)) < 1e-8);
    CHECK_THROWS_AS(matrix_oracle_pmf({0.0, 6.0}, 32), NumericalError);
    CHECK_THROWS_AS(matrix_oracle_pmf({5.0, 0.0}, 32), NumericalError);
    CHECK_THROWS_AS(matrix_oracle_pmf({0.0, 1.0}, 1), DomainError);
}

TEST_CASE("adaptive window") {
    CHECK(adaptive_window({0.0, 0.0}) == std::pair<std::int64_t, std::int64_t>{0, 0});
    const auto [lo, hi] = adaptive_window({0.0, 100.0}, 1e-10);
    CHECK(lo <= 10000 - 700);
    CHECK(hi >= 10000 + 700);
    CHECK(hi - lo < 4000);
    const auto d = displaced_thermal_pmf({0.0, 100.0}, 1e-10);
    CHECK(d.captured_mass() >= 1.0 - 1e-10);
    CHECK(d.mean() == doctest::Approx(1e4).epsilon(1e-9));
    CHECK(d.variance() == doctest::Approx(1e4).epsilon(1e-6));
}

TEST_CASE("window cap and tolerance domain") {
    CHECK_THROWS_AS(displaced_thermal_pmf({0.0, 100.0}, 1e-10, 5000), NumericalError);
    CHECK_THROWS_AS(displaced_thermal_pmf({0.0, 1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(displaced_thermal_pmf({0.0, 1.0}, 0.2), DomainError);
    CHECK_THROWS_AS(displaced_thermal_pmf({-1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(displaced_thermal_pmf({0.0, NAN}), DomainError);
}

TEST_CASE("captured mass tends to one as the tolerance shrinks") {
    for (const DisplacedThermalSpec spec : {DisplacedThermalSpec{0.2, 3.0}, {2.0, 5.0}, {0.0, 40.0}, {0.21, 85.0}}) {
        double prev = 0.0;
        for (double tol : {1e-2, 1e-4, 1e-7, 1e-10, 1e-11}) {
            const auto d = displaced_thermal_pmf(spec, tol);
            CHECK(d.captured_mass() >= 1.0 - tol);
            CHECK(d.captured_mass() <= 1.0 + 1e-11);
            CHECK(d.captured_mass() >= prev - 1e-15);
            prev = d.captured_mass();
        }
    }
    // Log-space terms near n = 1600 carry ~1e-12 relative roundoff.
    CHECK_THROWS_AS(displaced_thermal_pmf({0.0, 40.0}, 1e-14), NumericalError);
}

TEST_CASE("mean identity nbar + |alpha|^2") {
    for (double nbar : {0.0, 0.2, 2.0})
        for (double a : {0.0, 1.0, 3.0, 6.0}) {
            const double tol = 1e-10;
            const auto d = displaced_thermal_pmf({nbar, a}, tol);
            const double target = nbar + a * a;
            CHECK(std::abs(d.mean() - target) <= 10.0 * tol * std::max(target, 1.0));
        }
}

TEST_CASE("distribution text output") {
    std::ostringstream os;
    write_distribution(os, NumberStateDistribution(3, {0.25, 0.75}));
    CHECK(os.str() == "n,p\n3,0.25\n4,0.75\n");
    CHECK_THROWS_AS(NumberStateDistribution(0, {}), DomainError);
    CHECK_THROWS_AS(NumberStateDistribution(0, {-0.1}), DomainError);
}
