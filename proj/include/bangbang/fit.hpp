#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bangbang {

struct FitOptions {
    int max_iterations = 200;
    double rel_tol = 1e-10;  // on the relative decrease of the residual sum of squares
    double rel_step = 1e-6;  // numerical-derivative step max(rel_step |p|, abs_step)
    double abs_step = 1e-9;
    double initial_damping = 1e-3;
};

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> errors;  // +inf for directions the data do not constrain
    double rss = 0.0;            // weighted residual sum of squares (chi^2)
    double chi2_reduced = 0.0;
    std::size_t dof = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;

    double value(std::string_view name) const;
    double error(std::string_view name) const;
    bool has(std::string_view name) const;
};

/// Writes weighted residuals (data - model) / sigma for the given parameters.
using ResidualFunction = std::function<void(std::span<const double> params, std::span<double> residuals)>;

/// Central-difference Jacobian of the residual vector; step_scale multiplies
/// the per-parameter step.
Eigen::MatrixXd numerical_jacobian(const ResidualFunction& fn, std::span<const double> params,
                                   std::size_t n_residuals, const FitOptions& options = {},
                                   double step_scale = 1.0);

/// Levenberg-damped Gauss-Newton minimization of the residual sum of squares.
/// Standard errors come from (J^T J)^-1 scaled by the reduced chi^2. Throws
/// ConvergenceError when max_iterations is exhausted.
FitResult least_squares(const ResidualFunction& fn, std::vector<std::string> names, std::vector<double> init,
                        std::size_t n_residuals, const FitOptions& options = {});

}  // namespace bangbang
