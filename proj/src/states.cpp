#include "bangbang/states.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "bangbang/error.hpp"
#include "bangbang/fockmath.hpp"

namespace bangbang {

void DisplacedThermalSpec::validate() const {
    if (!(nbar_th >= 0.0) || !std::isfinite(nbar_th))
        throw DomainError("nbar_th must be finite and non-negative");
    if (!(alpha_mag >= 0.0) || !std::isfinite(alpha_mag))
        throw DomainError("alpha_mag must be finite and non-negative");
}

NumberStateDistribution::NumberStateDistribution(std::int64_t n_min, std::vector<double> weights)
    : n_min_(n_min), weights_(std::move(weights)) {
    if (n_min_ < 0) throw DomainError("distribution n_min must be non-negative");
    if (weights_.empty()) throw DomainError("distribution must have at least one weight");
    for (double w : weights_)
        if (!(w >= 0.0)) throw DomainError("distribution weights must be non-negative");
    captured_mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double NumberStateDistribution::at(std::int64_t n) const noexcept {
    if (n < n_min_ || n > n_max()) return 0.0;
    return weights_[static_cast<std::size_t>(n - n_min_)];
}

double NumberStateDistribution::mean() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i)
        sum += static_cast<double>(n_min_ + static_cast<std::int64_t>(i)) * weights_[i];
    return sum / captured_mass_;
}

double NumberStateDistribution::variance() const {
    const double mu = mean();
    double sum = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double d = static_cast<double>(n_min_ + static_cast<std::int64_t>(i)) - mu;
        sum += d * d * weights_[i];
    }
    return sum / captured_mass_;
}

double thermal_pmf(double nbar, std::int64_t n) {
    if (!(nbar >= 0.0)) throw DomainError("thermal_pmf: nbar must be non-negative");
    if (n < 0) return 0.0;
    if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
    // nbar^n / (nbar+1)^(n+1) = exp(-n log1p(1/nbar) - log1p(nbar))
    return std::exp(-static_cast<double>(n) * std::log1p(1.0 / nbar) - std::log1p(nbar));
}

std::int64_t thermal_cutoff(double nbar, double tail) {
    if (nbar == 0.0) return 0;
    // sum_{m > M} P_th(m) = r^(M+1), r = nbar / (nbar + 1)
    const double log_r = -std::log1p(1.0 / nbar);
    const double m = std::ceil(std::log(tail) / log_r) - 1.0;
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(m));
}

namespace {

double log_overlap_sq(std::int64_t n, std::int64_t m, double alpha, double log_alpha) {
    const std::int64_t lo = std::min(n, m);
    const std::int64_t gap = std::max(n, m) - lo;
    const auto lag = fock::log_laguerre(lo, gap, alpha * alpha);
    if (lag.sign == 0) return -std::numeric_limits<double>::infinity();
    return 2.0 * fock::log_factorial_ratio(lo, lo + gap) + 2.0 * static_cast<double>(gap) * log_alpha -
           alpha * alpha + 2.0 * lag.log_abs;
}

}  // namespace

double displacement_overlap_sq(std::int64_t n, std::int64_t m, double alpha) {
    if (n < 0 || m < 0) throw DomainError("displacement_overlap_sq: indices must be non-negative");
    if (!(alpha >= 0.0)) throw DomainError("displacement_overlap_sq: alpha must be non-negative");
    if (alpha == 0.0) return n == m ? 1.0 : 0.0;
    return std::exp(log_overlap_sq(n, m, alpha, std::log(alpha)));
}

namespace {

struct WindowedPmf {
    std::int64_t lo;
    std::vector<double> weights;
    double mass;
};

double initial_half_width(const DisplacedThermalSpec& spec) {
    const double a2 = spec.alpha_mag * spec.alpha_mag;
    const double var = a2 * (2.0 * spec.nbar_th + 1.0) + spec.nbar_th * (spec.nbar_th + 1.0);
    return std::ceil(8.0 * std::sqrt(var) + 10.0);
}

void check_tol(double mass_tol) {
    if (!(mass_tol > 0.0 && mass_tol < 0.1)) throw DomainError("mass_tol must lie in (0, 0.1)");
}

WindowedPmf evaluate_window(const DisplacedThermalSpec& spec, double mass_tol, std::int64_t cap) {
    spec.validate();
    check_tol(mass_tol);
    const double alpha = spec.alpha_mag;
    const std::int64_t m_max = thermal_cutoff(spec.nbar_th, 0.25 * mass_tol);
    std::vector<double> thermal(static_cast<std::size_t>(m_max + 1));
    for (std::int64_t m = 0; m <= m_max; ++m) thermal[static_cast<std::size_t>(m)] = thermal_pmf(spec.nbar_th, m);

    const double center = spec.nbar_th + alpha * alpha;
    double half = initial_half_width(spec);
    double prev_mass = -1.0;
    for (;;) {
        const std::int64_t lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(center - half)));
        const std::int64_t hi = static_cast<std::int64_t>(std::ceil(center + half));
        if (hi > cap)
            throw NumericalError("displaced_thermal_pmf: window [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "] exceeds cap n <= " + std::to_string(cap));
        WindowedPmf out{lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 0.0), 0.0};
        if (alpha == 0.0) {
            for (std::int64_t n = lo; n <= std::min(hi, m_max); ++n)
                out.weights[static_cast<std::size_t>(n - lo)] = thermal[static_cast<std::size_t>(n)];
        } else {
            const double log_alpha = std::log(alpha);
            const double a2 = alpha * alpha;
            // lgamma differences lose ~1e-16 of log(hi!) in absolute terms; harmless for p(n)
            std::vector<double> log_fact(static_cast<std::size_t>(std::max(hi, m_max) + 1));
            for (std::size_t k = 0; k < log_fact.size(); ++k) log_fact[k] = std::lgamma(static_cast<double>(k) + 1.0);
            for (std::int64_t n = lo; n <= hi; ++n) {
                double p = 0.0;
                for (std::int64_t m = 0; m <= m_max; ++m) {
                    const std::int64_t small = std::min(n, m);
                    const std::int64_t gap = std::max(n, m) - small;
                    const auto lag = fock::log_laguerre(small, gap, a2);
                    if (lag.sign == 0) continue;
                    const double log_ratio = log_fact[static_cast<std::size_t>(small)] -
                                             log_fact[static_cast<std::size_t>(small + gap)];
                    const double log_term = log_ratio + 2.0 * static_cast<double>(gap) * log_alpha - a2 +
                                            2.0 * lag.log_abs;
                    p += thermal[static_cast<std::size_t>(m)] * std::exp(log_term);
                }
                out.weights[static_cast<std::size_t>(n - lo)] = p;
            }
        }
        out.mass = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
        if (out.mass >= 1.0 - mass_tol) return out;
        // Widening that recovers almost none of the deficit means roundoff, not tails.
        if (prev_mass >= 0.0 && out.mass - prev_mass < 0.1 * (1.0 - prev_mass))
        {
            char msg[200];
            std::snprintf(msg, sizeof msg,
                          "displaced_thermal_pmf: missing mass %.3g does not shrink with a wider window; "
                          "mass_tol %.3g is below the floating-point floor for this state",
                          1.0 - out.mass, mass_tol);
            throw NumericalError(msg);
        }
        prev_mass = out.mass;
        if (lo == 0 && hi >= cap) break;
        half *= 2.0;
    }
    throw NumericalError("displaced_thermal_pmf: could not capture requested mass");
}

// Drop exactly-zero edge entries (e.g. the pure ground state).
void trim_zero_edges(WindowedPmf& w) {
    auto first = std::find_if(w.weights.begin(), w.weights.end(), [](double p) { return p > 0.0; });
    if (first == w.weights.end()) return;
    auto last = std::find_if(w.weights.rbegin(), w.weights.rend(), [](double p) { return p > 0.0; }).base();
    w.lo += first - w.weights.begin();
    w.weights = std::vector<double>(first, last);
}

}  // namespace

std::pair<std::int64_t, std::int64_t> adaptive_window(const DisplacedThermalSpec& spec, double mass_tol,
                                                      std::int64_t cap) {
    auto w = evaluate_window(spec, mass_tol, cap);
    trim_zero_edges(w);
    return {w.lo, w.lo + static_cast<std::int64_t>(w.weights.size()) - 1};
}

NumberStateDistribution displaced_thermal_pmf(const DisplacedThermalSpec& spec, double mass_tol,
                                              std::int64_t cap) {
    auto w = evaluate_window(spec, mass_tol, cap);
    trim_zero_edges(w);
    return NumberStateDistribution(w.lo, std::move(w.weights));
}

NumberStateDistribution matrix_oracle_pmf(const DisplacedThermalSpec& spec, int dim) {
    spec.validate();
    if (dim < 2) throw DomainError("matrix_oracle_pmf: dim must be >= 2");
    // Thermal tail beyond the basis.
    const double r = spec.nbar_th / (spec.nbar_th + 1.0);
    if (spec.nbar_th > 0.0 && std::pow(r, dim) >= 1e-12)
        throw NumericalError("matrix_oracle_pmf: thermal tail beyond dim " + std::to_string(dim) +
                             " exceeds 1e-12");

    Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 1; k < dim; ++k) {
        const double s = spec.alpha_mag * std::sqrt(static_cast<double>(k));
        gen(k, k - 1) = s;   // alpha a^dagger
        gen(k - 1, k) = -s;  // -alpha a
    }
    const Eigen::MatrixXd disp = gen.exp();
    std::vector<double> weights(static_cast<std::size_t>(dim), 0.0);
    for (int n = 0; n < dim; ++n) {
        double p = 0.0;
        for (int m = 0; m < dim; ++m) p += disp(n, m) * disp(n, m) * thermal_pmf(spec.nbar_th, m);
        weights[static_cast<std::size_t>(n)] = p;
    }
    const int edge = std::max(4, dim / 16);
    const double edge_mass = std::accumulate(weights.end() - edge, weights.end(), 0.0);
    if (edge_mass >= 1e-12)
    {
        char msg[160];
        std::snprintf(msg, sizeof msg, "matrix_oracle_pmf: %.3g probability in the top %d basis states; increase dim",
                      edge_mass, edge);
        throw NumericalError(msg);
    }
    return NumberStateDistribution(0, std::move(weights));
}

void write_distribution(std::ostream& os, const NumberStateDistribution& dist) {
    os << "n,p\n";
    char buf[64];
    for (std::size_t i = 0; i < dist.size(); ++i) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, dist.weights()[i]);
        os << dist.n_min() + static_cast<std::int64_t>(i) << ',' << std::string_view(buf, end - buf) << '\n';
    }
}

}  // namespace bangbang
