#include <doctest.h>

#include <cmath>
#include <random>

#include "bangbang/error.hpp"
#include "bangbang/fit.hpp"

using namespace bangbang;

namespace {

struct Data {
    std::vector<double> x, y, s;
};

Data exponential_data(double a, double k, double c, double noise, std::uint64_t seed) {
    Data d;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        const double x = 0.1 * i;
        d.x.push_back(x);
        d.y.push_back(a * std::exp(-k * x) + c + noise * g(rng));
        d.s.push_back(noise > 0 ? noise : 1.0);
    }
    return d;
}

ResidualFunction exponential_residuals(const Data& d) {
    return [&d](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < d.x.size(); ++i) r[i] = (d.y[i] - (p[0] * std::exp(-p[1] * d.x[i]) + p[2])) / d.s[i];
    };
}

}  // namespace

TEST_CASE("noiseless round trip to 1e-6 relative") {
    const auto d = exponential_data(2.0, 0.7, 0.3, 0.0, 1);
    const auto fit = least_squares(exponential_residuals(d), {"a", "k", "c"}, {1.0, 1.5, 0.0}, d.x.size());
    CHECK(fit.converged);
    CHECK(fit.value("a") == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.value("k") == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(fit.value("c") == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(fit.dof == 57);
    CHECK(fit.residuals.size() == 60);
    CHECK_THROWS_AS(fit.value("z"), DomainError);
    CHECK(fit.has("k"));
}

TEST_CASE("straight-line errors equal the closed-form covariance") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.05);
    std::vector<double> x, y;
    for (int i = 0; i < 25; ++i) {
        x.push_back(i * 0.2);
        y.push_back(1.0 + 0.5 * x.back() + g(rng));
    }
    auto fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = y[i] - (p[0] + p[1] * x[i]);
    };
    const auto fit = least_squares(fn, {"b0", "b1"}, {0.0, 0.0}, x.size());
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sxx += x[i] * x[i];
        sy += y[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    const double b1 = (n * sxy - sx * sy) / det, b0 = (sy - b1 * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) rss += std::pow(y[i] - b0 - b1 * x[i], 2);
    const double s2 = rss / (n - 2);
    CHECK(fit.value("b0") == doctest::Approx(b0).epsilon(1e-9));
    CHECK(fit.value("b1") == doctest::Approx(b1).epsilon(1e-9));
    CHECK(fit.rss == doctest::Approx(rss).epsilon(1e-9));
    CHECK(fit.error("b0") == doctest::Approx(std::sqrt(s2 * sxx / det)).epsilon(1e-6));
    CHECK(fit.error("b1") == doctest::Approx(std::sqrt(s2 * n / det)).epsilon(1e-6));
}

TEST_CASE("noisy exponential recovered within three standard errors") {
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto d = exponential_data(2.0, 0.7, 0.3, 0.02, seed);
        const auto fit = least_squares(exponential_residuals(d), {"a", "k", "c"}, {1.5, 1.0, 0.1}, d.x.size());
        if (std::abs(fit.value("k") - 0.7) < 3.0 * fit.error("k")) ++inside;
    }
    CHECK(inside >= 38);
}

TEST_CASE("Jacobian is stable under halving the step") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    const auto d = exponential_data(2.0, 0.7, 0.3, 0.01, 2);
    const auto fn = exponential_residuals(d);
    const std::vector<double> p{u(rng), u(rng), u(rng)};
    const auto j1 = numerical_jacobian(fn, p, d.x.size());
    const auto j2 = numerical_jacobian(fn, p, d.x.size(), {}, 0.5);
    CHECK((j1 - j2).norm() <= 1e-4 * j2.norm());
    // Against the analytic derivative.
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        const double e = std::exp(-p[1] * d.x[i]);
        CHECK(j1(static_cast<Eigen::Index>(i), 0) == doctest::Approx(-e / d.s[i]).epsilon(1e-6));
        CHECK(j1(static_cast<Eigen::Index>(i), 1) == doctest::Approx(p[0] * d.x[i] * e / d.s[i]).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("unconstrained direction reports an infinite error") {
    const auto d = exponential_data(2.0, 0.7, 0.3, 0.01, 4);
    auto fn = [&d](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < d.x.size(); ++i)
            r[i] = (d.y[i] - ((p[0] + p[3]) * std::exp(-p[1] * d.x[i]) + p[2])) / d.s[i];
    };
    const auto fit = least_squares(fn, {"a", "k", "c", "a2"}, {1.0, 1.0, 0.0, 1.0}, d.x.size());
    CHECK(std::isinf(fit.error("a")));
    CHECK(std::isinf(fit.error("a2")));
    CHECK(std::isfinite(fit.error("k")));
    CHECK(fit.value("a") + fit.value("a2") == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("badly scaled parameters still get finite errors") {
    std::vector<double> x, y;
    for (int i = 0; i < 50; ++i) {
        x.push_back(1e6 * i);
        y.push_back(3e-7 * x.back() + 0.02 * std::sin(i));
    }
    auto fn = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = y[i] - (p[0] * 1e-6 * x[i] + p[1] * 1e4);
    };
    const auto fit = least_squares(fn, {"slope", "offset"}, {0.1, 0.0}, x.size());
    CHECK(std::isfinite(fit.error("slope")));
    CHECK(std::isfinite(fit.error("offset")));
    CHECK(fit.error("slope") > 0.0);
}

TEST_CASE("iteration limit raises ConvergenceError with diagnostics") {
    const auto d = exponential_data(2.0, 0.7, 0.3, 0.01, 6);
    FitOptions opt;
    opt.max_iterations = 1;
    try {
        (void)least_squares(exponential_residuals(d), {"a", "k", "c"}, {0.1, 5.0, -1.0}, d.x.size(), opt);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.last_rss() > 0.0);
    }
    CHECK_THROWS_AS(least_squares(exponential_residuals(d), {"a"}, {1.0, 2.0}, d.x.size()), DomainError);
}
