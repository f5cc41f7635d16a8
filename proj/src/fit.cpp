#include "ctyp/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ctyp {

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const LmOptions& options) {
    if (options.lower.size() == x.size())
        x = x.cwiseMax(options.lower);
    if (options.upper.size() == x.size())
        x = x.cwiseMin(options.upper);
    return x;
}

} // namespace

LmResult lm_fit(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residuals,
                int n_residuals, Eigen::VectorXd x0, const LmOptions& options) {
    const int np = static_cast<int>(x0.size());
    Eigen::VectorXd x = clamp_to_box(std::move(x0), options);
    Eigen::VectorXd r(n_residuals), r_trial(n_residuals);
    Eigen::MatrixXd jac(n_residuals, np);

    residuals(x, r);
    double sse = r.squaredNorm();
    double lambda = options.initial_lambda;

    LmResult result;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        // central-difference Jacobian
        for (int j = 0; j < np; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            Eigen::VectorXd rp(n_residuals), rm(n_residuals);
            residuals(xp, rp);
            residuals(xm, rm);
            jac.col(j) = (rp - rm) / (2.0 * h);
        }

        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 32; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal().array() += lambda * (jtj.diagonal().array().abs() + 1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            const Eigen::VectorXd x_trial = clamp_to_box(x + step, options);
            residuals(x_trial, r_trial);
            const double sse_trial = r_trial.squaredNorm();
            if (std::isfinite(sse_trial) && sse_trial <= sse) {
                const double step_size = (x_trial - x).norm();
                x = x_trial;
                r = r_trial;
                sse = sse_trial;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (step_size < options.step_tolerance * std::max(1.0, x.norm())) {
                    result.converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
        result.iterations = iter + 1;
        if (result.converged || !stepped) {
            // no improving step at huge damping means a (local) minimum
            if (!stepped) result.converged = true;
            break;
        }
    }
    result.x = x;
    result.sse = sse;
    return result;
}

namespace {

// series expansion of P(a, x), valid for x < a + 1
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x), valid for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_squared_pvalue(double statistic, int dof) {
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length series");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace ctyp
