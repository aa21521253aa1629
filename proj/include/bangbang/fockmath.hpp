#pragma once

#include <cstdint>

// Special functions evaluated at Fock-state indices up to ~1e6.
namespace bangbang::fock {

/// Generalized Laguerre polynomial L_n^{order}(x) by forward three-term
/// recurrence in n. Throws NumericalError carrying (n, order, x) on overflow.
double laguerre(std::int64_t n, std::int64_t order, double x);

/// log|L_n^{order}(x)| together with its sign, rescaling the recurrence so
/// that arguments far outside double range (large x with large order) stay
/// representable. sign is 0 when the polynomial vanishes exactly.
struct LogMagnitude {
    double log_abs;
    int sign;
};
LogMagnitude log_laguerre(std::int64_t n, std::int64_t order, double x);

/// (1/2) [ln n_lesser! - ln n_greater!], the log of sqrt(n_lesser! / n_greater!).
double log_factorial_ratio(std::int64_t n_lesser, std::int64_t n_greater);

/// Bessel function of the first kind, integer order >= 0, x >= 0.
double bessel_j(int order, double x);

/// Large-n form (sqrt(n)/eta)^order exp(eta^2/2) J_order(2 eta sqrt(n)) of
/// L_n^{order}(eta^2). Requires n >= 1.
double laguerre_bessel_approx(std::int64_t n, int order, double eta);

}  // namespace bangbang::fock
