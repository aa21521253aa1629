#include "bangbang/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bangbang/error.hpp"

namespace bangbang {

namespace {

std::size_t index_of(const std::vector<std::string>& names, std::string_view name) {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DomainError("FitResult: no parameter named '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - names.begin());
}

double sum_sq(const Eigen::VectorXd& r) { return r.squaredNorm(); }

Eigen::VectorXd evaluate(const ResidualFunction& fn, const Eigen::VectorXd& p, std::size_t m) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(m));
    fn(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
       std::span<double>(r.data(), m));
    return r;
}

// Standard errors from the pseudo-inverse of J^T J, taken after scaling to
// unit diagonal so that parameter units do not decide what counts as null.
// Parameters loading on a null direction get +inf.
std::vector<double> standard_errors(const Eigen::MatrixXd& jac, double scale) {
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const auto k = normal.rows();
    std::vector<double> errors(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
    if (k == 0) return errors;
    Eigen::VectorXd d(k);
    for (Eigen::Index i = 0; i < k; ++i) d(i) = normal(i, i) > 0.0 ? 1.0 / std::sqrt(normal(i, i)) : 0.0;
    const Eigen::MatrixXd scaled = d.asDiagonal() * normal * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const Eigen::MatrixXd& vec = eig.eigenvectors();
    const double top = ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(k);
    std::vector<bool> undetermined(static_cast<std::size_t>(k), false);
    for (Eigen::Index i = 0; i < k; ++i)
        if (d(i) == 0.0) undetermined[static_cast<std::size_t>(i)] = true;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (!(top > 0.0) || ev(j) <= 1e-14 * top) {
            for (Eigen::Index i = 0; i < k; ++i)
                if (std::abs(vec(i, j)) > 1e-8) undetermined[static_cast<std::size_t>(i)] = true;
            continue;
        }
        for (Eigen::Index i = 0; i < k; ++i) var(i) += vec(i, j) * vec(i, j) / ev(j);
    }
    for (Eigen::Index i = 0; i < k; ++i)
        if (!undetermined[static_cast<std::size_t>(i)])
            errors[static_cast<std::size_t>(i)] = d(i) * std::sqrt(var(i) * scale);
    return errors;
}

}  // namespace

double FitResult::value(std::string_view name) const { return values[index_of(names, name)]; }
double FitResult::error(std::string_view name) const { return errors[index_of(names, name)]; }
bool FitResult::has(std::string_view name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::MatrixXd numerical_jacobian(const ResidualFunction& fn, std::span<const double> params,
                                   std::size_t n_residuals, const FitOptions& options, double step_scale) {
    const auto k = static_cast<Eigen::Index>(params.size());
    const auto m = static_cast<Eigen::Index>(n_residuals);
    Eigen::MatrixXd jac(m, k);
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(params.data(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double h = std::max(options.rel_step * std::abs(p(j)), options.abs_step) * step_scale;
        const double saved = p(j);
        p(j) = saved + h;
        const Eigen::VectorXd up = evaluate(fn, p, n_residuals);
        p(j) = saved - h;
        const Eigen::VectorXd down = evaluate(fn, p, n_residuals);
        p(j) = saved;
        jac.col(j) = (up - down) / (2.0 * h);
    }
    return jac;
}

FitResult least_squares(const ResidualFunction& fn, std::vector<std::string> names, std::vector<double> init,
                        std::size_t n_residuals, const FitOptions& options) {
    if (names.size() != init.size()) throw DomainError("least_squares: names and init differ in length");
    if (n_residuals < init.size()) throw DomainError("least_squares: fewer residuals than parameters");
    const auto k = static_cast<Eigen::Index>(init.size());
    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), k);
    Eigen::VectorXd r = evaluate(fn, p, n_residuals);
    double chi2 = sum_sq(r);
    if (!std::isfinite(chi2)) throw NumericalError("least_squares: non-finite residuals at the initial point");

    double lambda = options.initial_damping;
    bool converged = (chi2 == 0.0 || k == 0);
    int iter = 0;
    while (!converged && iter < options.max_iterations) {
        ++iter;
        const Eigen::MatrixXd jac =
            numerical_jacobian(fn, std::span<const double>(p.data(), static_cast<std::size_t>(k)), n_residuals, options);
        const Eigen::MatrixXd normal = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd damped = normal;
            for (Eigen::Index j = 0; j < k; ++j)
                damped(j, j) += lambda * std::max(normal(j, j), 1e-30);
            const Eigen::VectorXd step = damped.ldlt().solve(-grad);
            const Eigen::VectorXd trial = p + step;
            const Eigen::VectorXd r_trial = evaluate(fn, trial, n_residuals);
            const double chi2_trial = sum_sq(r_trial);
            if (step.allFinite() && std::isfinite(chi2_trial) && chi2_trial <= chi2) {
                const double decrease = (chi2 - chi2_trial) / chi2;
                p = trial;
                r = r_trial;
                chi2 = chi2_trial;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (decrease < options.rel_tol || chi2 == 0.0) converged = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // No descent direction left at double precision: the gradient has vanished.
                    converged = true;
                    break;
                }
            }
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "least_squares: no convergence after " << iter << " iterations, last rss " << chi2;
        throw ConvergenceError(os.str(), chi2, iter);
    }

    FitResult out;
    out.names = std::move(names);
    out.values.assign(p.data(), p.data() + k);
    out.rss = chi2;
    out.dof = n_residuals - static_cast<std::size_t>(k);
    out.chi2_reduced = out.dof > 0 ? chi2 / static_cast<double>(out.dof) : 0.0;
    out.iterations = iter;
    out.converged = true;
    out.residuals.assign(r.data(), r.data() + r.size());
    const Eigen::MatrixXd jac =
        numerical_jacobian(fn, std::span<const double>(p.data(), static_cast<std::size_t>(k)), n_residuals, options);
    out.errors = standard_errors(jac, out.dof > 0 ? out.chi2_reduced : 1.0);
    return out;
}

}  // namespace bangbang
