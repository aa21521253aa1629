#pragma once

#include <stdexcept>
#include <string>

namespace bangbang {

// Invalid argument or out-of-domain physical input.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// Overflow, resonant denominators, truncation failures.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Least-squares solver did not reach its convergence criterion.
class ConvergenceError : public NumericalError {
  public:
    ConvergenceError(const std::string& what, double last_rss, int iterations)
        : NumericalError(what), last_rss_(last_rss), iterations_(iterations) {}
    double last_rss() const noexcept { return last_rss_; }
    int iterations() const noexcept { return iterations_; }

  private:
    double last_rss_;
    int iterations_;
};

// Malformed configuration, dataset, or schema mismatch.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace bangbang
