#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace ctyp {

struct LmOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-12;
    double initial_lambda = 1e-3;
    Eigen::VectorXd lower;  // optional box bounds, empty = unbounded
    Eigen::VectorXd upper;
};

struct LmResult {
    Eigen::VectorXd x;
    double sse = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Small dense Levenberg-Marquardt with a finite-difference Jacobian.
/// residuals(x, r) fills r with the residual vector at x.
LmResult lm_fit(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residuals,
                int n_residuals, Eigen::VectorXd x0, const LmOptions& options = {});

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// Survival probability of a chi-squared statistic with dof degrees of freedom.
double chi_squared_pvalue(double statistic, int dof);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

double median(std::vector<double> values);

} // namespace ctyp
