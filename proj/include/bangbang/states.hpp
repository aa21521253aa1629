#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace bangbang {

/// Thermal mixture with mean occupation nbar_th displaced by |alpha|.
struct DisplacedThermalSpec {
    double nbar_th = 0.0;
    double alpha_mag = 0.0;

    void validate() const;
    bool operator==(const DisplacedThermalSpec&) const = default;
};

/// Fock-state probabilities on the contiguous window [n_min, n_min + size).
class NumberStateDistribution {
  public:
    NumberStateDistribution() = default;
    NumberStateDistribution(std::int64_t n_min, std::vector<double> weights);

    std::int64_t n_min() const noexcept { return n_min_; }
    std::int64_t n_max() const noexcept { return n_min_ + static_cast<std::int64_t>(weights_.size()) - 1; }
    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double captured_mass() const noexcept { return captured_mass_; }

    /// p(n); zero outside the window.
    double at(std::int64_t n) const noexcept;
    double mean() const;
    double variance() const;

  private:
    std::int64_t n_min_ = 0;
    std::vector<double> weights_{1.0};
    double captured_mass_ = 1.0;
};

inline constexpr double kDefaultMassTol = 1e-10;
inline constexpr std::int64_t kDefaultWindowCap = 1'000'000;

double thermal_pmf(double nbar, std::int64_t n);

/// |<n|D(alpha)|m>|^2 for real alpha >= 0, evaluated through the Laguerre
/// closed form in log space.
double displacement_overlap_sq(std::int64_t n, std::int64_t m, double alpha);

/// Smallest M with sum_{m > M} P_th(m) <= tail.
std::int64_t thermal_cutoff(double nbar, double tail);

/// Window [n_min, n_max] over which displaced_thermal_pmf evaluates p(n).
std::pair<std::int64_t, std::int64_t> adaptive_window(const DisplacedThermalSpec& spec,
                                                      double mass_tol = kDefaultMassTol,
                                                      std::int64_t cap = kDefaultWindowCap);

/// p(n) = sum_m P_th(m) |<n|D(alpha)|m>|^2 on an adaptive window that
/// captures at least 1 - mass_tol of the probability.
NumberStateDistribution displaced_thermal_pmf(const DisplacedThermalSpec& spec,
                                              double mass_tol = kDefaultMassTol,
                                              std::int64_t cap = kDefaultWindowCap);

/// Independent reference: diag(D rho_th D^dagger) with D the matrix
/// exponential of alpha (a^dagger - a) on a dim-dimensional truncated basis.
NumberStateDistribution matrix_oracle_pmf(const DisplacedThermalSpec& spec, int dim);

/// Two-column "n,p" text for plotting.
void write_distribution(std::ostream& os, const NumberStateDistribution& dist);

}  // namespace bangbang
