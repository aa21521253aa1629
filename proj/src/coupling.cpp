#include "bangbang/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "bangbang/error.hpp"
#include "bangbang/fockmath.hpp"

namespace bangbang {

void SidebandDrive::validate() const {
    if (!(rabi0 >= 0.0) || !std::isfinite(rabi0)) throw DomainError("rabi0 must be finite and >= 0");
    if (!(decay >= 0.0) || !std::isfinite(decay)) throw DomainError("decay must be finite and >= 0");
    if (!std::isfinite(detune_off)) throw DomainError("detune_off must be finite");
}

void StarkEnvironment::validate() const {
    if (!(delta_secondary > 0.0)) throw DomainError("delta_secondary must be positive");
    if (!(coupling_ratio > 0.0)) throw DomainError("coupling_ratio must be positive");
    if (sum_cutoff < 5) throw DomainError("sum_cutoff must be >= 5");
}

double rabi_frequency(std::int64_t n, int s, double eta, double rabi0) {
    if (n < 0 || n + s < 0)
        throw DomainError("rabi_frequency: need n >= 0 and n + s >= 0 (n=" + std::to_string(n) +
                          ", s=" + std::to_string(s) + ")");
    const std::int64_t lesser = std::min<std::int64_t>(n, n + s);
    const int order = std::abs(s);
    const double x = eta * eta;
    if (eta == 0.0) return order == 0 ? rabi0 : 0.0;
    const auto lag = fock::log_laguerre(lesser, order, x);
    if (lag.sign == 0) return 0.0;
    const double log_ratio = -0.5 * x + order * std::log(eta) + fock::log_factorial_ratio(lesser, lesser + order) +
                             lag.log_abs;
    return rabi0 * std::exp(log_ratio);
}

namespace {

double secondary_denominator(int s, int s_prime, std::int64_t n, const StarkEnvironment& env, double trap_freq) {
    const double den = env.delta_secondary + trap_freq * static_cast<double>(s_prime - s);
    if (std::abs(den) <= 1e-12 * std::max(env.delta_secondary, trap_freq))
        throw NumericalError("ac_stark_shift: exact resonance with secondary sideband (s=" + std::to_string(s) +
                             ", s'=" + std::to_string(s_prime) + ", n=" + std::to_string(n) + ")");
    return den;
}

// Shared by the scalar and table paths; unit(s') returns Omega_{n,n+s'}/Omega0.
template <class UnitRabi>
double stark_coefficient_impl(std::int64_t n, int s, const StarkEnvironment& env, double trap_freq,
                              UnitRabi&& unit) {
    const bool printed = env.convention == StarkConvention::as_printed;
    const double own = unit(s);
    const double w2 = env.coupling_ratio * env.coupling_ratio;
    double main = 0.0;
    // Pair +k with -k so the as-printed sum cancels exactly under a symmetric cutoff.
    for (int k = 1; k <= env.sum_cutoff; ++k) {
        double pair = 0.0;
        for (int sign : {+1, -1}) {
            const int sp = s + sign * k;
            if (n + sp < 0) continue;
            const double r = printed ? own : unit(sp);
            pair += r * r / (2.0 * trap_freq * static_cast<double>(sign * k));
        }
        main += pair;
    }
    double secondary = 0.0;
    for (int sp = s - env.sum_cutoff; sp <= s + env.sum_cutoff; ++sp) {
        if (n + sp < 0) continue;
        const double r = printed ? own : unit(sp);
        secondary += r * r / w2 / (4.0 * secondary_denominator(s, sp, n, env, trap_freq));
    }
    return main + secondary;
}

}  // namespace

double ac_stark_shift(std::int64_t n, int s, const StarkEnvironment& env, double eta, double rabi0,
                      double trap_freq) {
    if (!env.enabled) return 0.0;
    env.validate();
    if (n < 0 || n + s < 0) throw DomainError("ac_stark_shift: need n >= 0 and n + s >= 0");
    if (!(trap_freq > 0.0)) throw DomainError("ac_stark_shift: trap_freq must be positive");
    const double coeff = stark_coefficient_impl(n, s, env, trap_freq,
                                                [&](int sp) { return rabi_frequency(n, sp, eta, 1.0); });
    return rabi0 * rabi0 * coeff;
}

double total_detuning(std::int64_t n, const SidebandDrive& drive, const StarkEnvironment& env,
                      const OscillatorParams& params) {
    return drive.detune_off +
           ac_stark_shift(n, drive.sideband, env, params.lamb_dicke(), drive.rabi0, params.trap_freq());
}

int nearest_secondary_resonance(int s, const StarkEnvironment& env, double trap_freq) {
    // |Delta + w (s' - s)| is minimized at s' - s = round(-Delta / w).
    return s + static_cast<int>(std::lround(-env.delta_secondary / trap_freq));
}

LaguerreTable::LaguerreTable(double x, int max_order) : x_(x), rows_(static_cast<std::size_t>(max_order + 1)) {
    if (max_order < 0 || !(x >= 0.0)) throw DomainError("LaguerreTable: need max_order >= 0 and x >= 0");
    for (std::size_t k = 0; k < rows_.size(); ++k) rows_[k] = {1.0, 1.0 + static_cast<double>(k) - x};
}

void LaguerreTable::reserve(std::int64_t n_max) {
    if (n_max < size()) return;
    const std::int64_t target = std::max<std::int64_t>(n_max + 1, size() + size() / 2);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        auto& row = rows_[k];
        const double a = static_cast<double>(k);
        row.reserve(static_cast<std::size_t>(target));
        for (std::int64_t j = static_cast<std::int64_t>(row.size()) - 1; j + 1 < target; ++j) {
            const double jd = static_cast<double>(j);
            const double next = ((2.0 * jd + 1.0 + a - x_) * row[static_cast<std::size_t>(j)] -
                                 (jd + a) * row[static_cast<std::size_t>(j - 1)]) /
                                (jd + 1.0);
            if (!std::isfinite(next))
                throw NumericalError("LaguerreTable: overflow at degree " + std::to_string(j + 1) +
                                     ", order " + std::to_string(k));
            row.push_back(next);
        }
    }
}

CouplingTable::CouplingTable(double eta, int sideband, const StarkEnvironment& env, double trap_freq)
    : eta_(eta),
      sideband_(sideband),
      env_(env),
      trap_freq_(trap_freq),
      laguerre_(eta * eta, std::abs(sideband) + (env.enabled ? env.sum_cutoff : 0)) {
    if (env.enabled) env.validate();
    if (!(eta >= 0.0)) throw DomainError("CouplingTable: eta must be non-negative");
    if (env.enabled && !(trap_freq > 0.0)) throw DomainError("CouplingTable: trap_freq must be positive");
}

double CouplingTable::unit_rabi(std::int64_t n, int s_prime) {
    if (n + s_prime < 0) return 0.0;
    const int order = std::abs(s_prime);
    if (order > laguerre_.max_order()) throw DomainError("CouplingTable: sideband outside table range");
    if (eta_ == 0.0) return order == 0 ? 1.0 : 0.0;
    const std::int64_t lesser = std::min<std::int64_t>(n, n + s_prime);
    laguerre_.reserve(lesser);
    const double lag = std::abs(laguerre_(lesser, order));
    double ratio = std::exp(-0.5 * eta_ * eta_);
    double prod = 1.0;
    for (int j = 1; j <= order; ++j) {
        ratio *= eta_;
        prod *= static_cast<double>(lesser + j);
    }
    return ratio * lag / std::sqrt(prod);
}

void CouplingTable::reserve(std::int64_t n_max) {
    const auto have = static_cast<std::int64_t>(ratio_.size());
    if (n_max < have) return;
    const std::int64_t target = std::max<std::int64_t>(n_max + 1, have + have / 2 + 16);
    laguerre_.reserve(target + std::abs(sideband_) + 1);
    ratio_.reserve(static_cast<std::size_t>(target));
    stark_.reserve(static_cast<std::size_t>(target));
    for (std::int64_t n = have; n < target; ++n) {
        ratio_.push_back(unit_rabi(n, sideband_));
        if (!env_.enabled || n + sideband_ < 0) {
            stark_.push_back(0.0);
            continue;
        }
        stark_.push_back(stark_coefficient_impl(n, sideband_, env_, trap_freq_,
                                                [&](int sp) { return unit_rabi(n, sp); }));
    }
}

double mean_rabi(const DisplacedThermalSpec& spec, const SidebandDrive& drive, const StarkEnvironment& env,
                 const OscillatorParams& params, double mass_tol) {
    drive.validate();
    const auto dist = displaced_thermal_pmf(spec, mass_tol);
    CouplingTable table(params.lamb_dicke(), drive.sideband, env, params.trap_freq());
    table.reserve(dist.n_max());
    double sum = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const std::int64_t n = dist.n_min() + static_cast<std::int64_t>(i);
        if (n + drive.sideband < 0) continue;
        const double omega = drive.rabi0 * table.rabi_ratio(n);
        const double delta = drive.detune_off + drive.rabi0 * drive.rabi0 * table.stark_coefficient(n);
        sum += dist.weights()[i] * std::hypot(omega, delta);
    }
    return sum / dist.captured_mass();
}

}  // namespace bangbang
