#include "bangbang/fockmath.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bangbang/constants.hpp"
#include "bangbang/error.hpp"

namespace bangbang::fock {

namespace {

std::string laguerre_args(std::int64_t n, std::int64_t order, double x) {
    std::ostringstream os;
    os.precision(17);
    os << "(n=" << n << ", order=" << order << ", x=" << x << ")";
    return os.str();
}

void check_laguerre_domain(std::int64_t n, std::int64_t order, double x) {
    if (n < 0 || order < 0 || !(x >= 0.0) || !std::isfinite(x))
        throw DomainError("laguerre: invalid arguments " + laguerre_args(n, order, x));
}

// Rescale threshold for the log-magnitude recurrence.
constexpr double kBig = 0x1p+500;
constexpr double kLogBig = 500.0 * 0.69314718055994530942;

}  // namespace

double laguerre(std::int64_t n, std::int64_t order, double x) {
    check_laguerre_domain(n, order, x);
    const double a = static_cast<double>(order);
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = 1.0 + a - x;
    for (std::int64_t k = 1; k < n; ++k) {
        const double kd = static_cast<double>(k);
        const double next = ((2.0 * kd + 1.0 + a - x) * cur - (kd + a) * prev) / (kd + 1.0);
        prev = cur;
        cur = next;
        if (!std::isfinite(cur))
            throw NumericalError("laguerre: overflow at degree " + std::to_string(k + 1) + " " +
                                 laguerre_args(n, order, x));
    }
    return cur;
}

LogMagnitude log_laguerre(std::int64_t n, std::int64_t order, double x) {
    check_laguerre_domain(n, order, x);
    const double a = static_cast<double>(order);
    double prev = 1.0;
    double cur = (n == 0) ? 1.0 : 1.0 + a - x;
    double log_scale = 0.0;
    for (std::int64_t k = 1; k < n; ++k) {
        const double kd = static_cast<double>(k);
        const double next = ((2.0 * kd + 1.0 + a - x) * cur - (kd + a) * prev) / (kd + 1.0);
        prev = cur;
        cur = next;
        if (std::abs(cur) > kBig) {
            cur /= kBig;
            prev /= kBig;
            log_scale += kLogBig;
        }
    }
    if (!std::isfinite(cur))
        throw NumericalError("log_laguerre: non-finite recurrence " + laguerre_args(n, order, x));
    if (cur == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    return {std::log(std::abs(cur)) + log_scale, cur > 0.0 ? 1 : -1};
}

double log_factorial_ratio(std::int64_t n_lesser, std::int64_t n_greater) {
    if (n_lesser < 0 || n_greater < n_lesser)
        throw DomainError("log_factorial_ratio: need 0 <= n_lesser <= n_greater");
    const std::int64_t gap = n_greater - n_lesser;
    if (gap == 0) return 0.0;
    if (gap <= 256) {
        // Direct sum keeps full relative precision where lgamma differences would cancel.
        double sum = 0.0;
        for (std::int64_t k = n_lesser + 1; k <= n_greater; ++k) sum += std::log(static_cast<double>(k));
        return -0.5 * sum;
    }
    return 0.5 * (std::lgamma(static_cast<double>(n_lesser) + 1.0) -
                  std::lgamma(static_cast<double>(n_greater) + 1.0));
}

namespace {

double bessel_series(int order, double x) {
    const double half = 0.5 * x;
    const double q = -half * half;
    double term = 1.0;
    for (int k = 1; k <= order; ++k) term *= half / k;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// Miller backward recurrence normalized with J0 + 2 sum J_2k = 1.
double bessel_miller(int order, double x) {
    const double top = std::max(static_cast<double>(order), x);
    int start = static_cast<int>(top + 30.0 + 2.0 * std::sqrt(40.0 * top));
    start += start % 2;
    double next = 0.0;
    double cur = 1e-300;
    double norm = 0.0;
    double result = 0.0;
    for (int k = start; k > 0; --k) {
        const double prev = (2.0 * k / x) * cur - next;
        next = cur;
        cur = prev;  // J_{k-1}
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
        if (k - 1 == order) result = cur;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
    }
    norm += cur;
    return result / norm;
}

// Hankel asymptotic expansion, valid for x well above order^2 / 2.
double bessel_hankel(int order, double x) {
    const double mu = 4.0 * static_cast<double>(order) * order;
    const double inv8x = 1.0 / (8.0 * x);
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) * inv8x / k;
        if (std::abs(term) >= last) break;
        last = std::abs(term);
        // term sequence alternates between q (odd k) and p (even k) with signs + - - + + ...
        const int phase = k % 4;
        if (phase == 1) q += term;
        else if (phase == 2) p -= term;
        else if (phase == 3) q -= term;
        else p += term;
        if (last < 1e-17) break;
    }
    const double chi = x - (0.5 * order + 0.25) * constants::pi;
    return std::sqrt(2.0 / (constants::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j(int order, double x) {
    if (order < 0 || !(x >= 0.0) || !std::isfinite(x))
        throw DomainError("bessel_j: need order >= 0 and finite x >= 0");
    if (x == 0.0) return order == 0 ? 1.0 : 0.0;
    if (x <= 1.0) return bessel_series(order, x);
    if (x < 25.0 || order * order > 0.5 * x) return bessel_miller(order, x);
    if (order <= 1) return bessel_hankel(order, x);
    // Forward recurrence from J0, J1 is stable for order < x.
    double prev = bessel_hankel(0, x);
    double cur = bessel_hankel(1, x);
    for (int k = 1; k < order; ++k) {
        const double next = (2.0 * k / x) * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double laguerre_bessel_approx(std::int64_t n, int order, double eta) {
    if (n < 1) throw DomainError("laguerre_bessel_approx: n must be >= 1");
    if (order < 0 || !(eta > 0.0)) throw DomainError("laguerre_bessel_approx: need order >= 0, eta > 0");
    const double root_n = std::sqrt(static_cast<double>(n));
    return std::pow(root_n / eta, order) * std::exp(0.5 * eta * eta) *
           bessel_j(order, 2.0 * eta * root_n);
}

}  // namespace bangbang::fock
