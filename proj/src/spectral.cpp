#include "ctyp/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "ctyp/csv.hpp"
#include "ctyp/fit.hpp"

namespace ctyp {

Window Window::full(std::span<const double> sorted_eigenvalues) {
    if (sorted_eigenvalues.empty()) throw Error("empty spectrum");
    return {sorted_eigenvalues.front(), sorted_eigenvalues.back()};
}

std::size_t staircase(std::span<const double> sorted_eigenvalues, double e) {
    return static_cast<std::size_t>(
        std::upper_bound(sorted_eigenvalues.begin(), sorted_eigenvalues.end(), e) -
        sorted_eigenvalues.begin());
}

DosCurve binned_dos(std::span<const double> sorted_eigenvalues, double bin_width) {
    if (sorted_eigenvalues.empty()) throw Error("binned_dos: empty spectrum");
    if (bin_width <= 0.0) throw Error("binned_dos: bin width must be positive");

    const double lo = sorted_eigenvalues.front();
    const double hi = sorted_eigenvalues.back();
    const std::size_t n_bins = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-12)));

    DosCurve dos;
    dos.bin_width = bin_width;
    dos.counts.assign(n_bins, 0);
    for (double e : sorted_eigenvalues) {
        auto k = static_cast<std::size_t>((e - lo) / bin_width);
        if (k >= n_bins) k = n_bins - 1;
        ++dos.counts[k];
    }
    const double n = static_cast<double>(sorted_eigenvalues.size());
    dos.centers.resize(n_bins);
    dos.density.resize(n_bins);
    dos.normalized.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) {
        dos.centers[k] = lo + (static_cast<double>(k) + 0.5) * bin_width;
        dos.density[k] = static_cast<double>(dos.counts[k]) / bin_width;
        dos.normalized[k] = dos.density[k] / n;
    }
    return dos;
}

Window analysis_window(std::span<const double> sorted_eigenvalues, double dos_bin_width) {
    const DosCurve dos = binned_dos(sorted_eigenvalues, dos_bin_width);
    std::size_t peak = 0;
    for (std::size_t k = 1; k < dos.counts.size(); ++k)
        if (dos.counts[k] > dos.counts[peak]) peak = k;
    const double half = 0.5 * static_cast<double>(dos.counts[peak]);
    std::size_t left = peak, right = peak;
    while (left > 0 && static_cast<double>(dos.counts[left - 1]) >= half) --left;
    while (right + 1 < dos.counts.size() && static_cast<double>(dos.counts[right + 1]) >= half)
        ++right;
    const double fwhm = static_cast<double>(right - left + 1) * dos_bin_width;
    return {sorted_eigenvalues.front(), dos.centers[peak] + 0.5 * fwhm};
}

double StaircasePoly::eval(double e) const {
    const double x = (e - center) / scale;
    double acc = 0.0;
    for (int k = 10; k >= 0; --k) acc = acc * x + coeffs[static_cast<std::size_t>(k)];
    return acc;
}

double StaircasePoly::deriv(double e) const {
    const double x = (e - center) / scale;
    double acc = 0.0;
    for (int k = 10; k >= 1; --k) acc = acc * x + k * coeffs[static_cast<std::size_t>(k)];
    return acc / scale;
}

double StaircasePoly::deriv2(double e) const {
    const double x = (e - center) / scale;
    double acc = 0.0;
    for (int k = 10; k >= 2; --k) acc = acc * x + k * (k - 1) * coeffs[static_cast<std::size_t>(k)];
    return acc / (scale * scale);
}

StaircasePoly fit_staircase(std::span<const double> sorted_eigenvalues, const Window& window,
                            int degree) {
    if (degree < 1 || degree > 10) throw Error("fit_staircase: degree must be in [1, 10]");
    const auto first = std::lower_bound(sorted_eigenvalues.begin(), sorted_eigenvalues.end(),
                                        window.lo) -
                       sorted_eigenvalues.begin();
    const auto last = std::upper_bound(sorted_eigenvalues.begin(), sorted_eigenvalues.end(),
                                       window.hi) -
                      sorted_eigenvalues.begin();
    const auto n = last - first;
    if (n < degree + 2)
        throw Error("fit_staircase: only " + std::to_string(n) + " levels in window");

    StaircasePoly fit;
    fit.e_lo = sorted_eigenvalues[static_cast<std::size_t>(first)];
    fit.e_hi = sorted_eigenvalues[static_cast<std::size_t>(last - 1)];
    fit.center = 0.5 * (fit.e_lo + fit.e_hi);
    fit.scale = std::max(0.5 * (fit.e_hi - fit.e_lo), 1e-12);

    Eigen::MatrixXd vand(n, degree + 1);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = sorted_eigenvalues[static_cast<std::size_t>(first + i)];
        const double x = (e - fit.center) / fit.scale;
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            vand(i, k) = p;
            p *= x;
        }
        // staircase value at a level is its global 1-based rank
        rhs(i) = static_cast<double>(first + i + 1);
    }
    const Eigen::VectorXd sol = vand.colPivHouseholderQr().solve(rhs);
    for (int k = 0; k <= degree; ++k) fit.coeffs[static_cast<std::size_t>(k)] = sol(k);

    const int grid = 2001;
    double min_slope = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double e = fit.e_lo + (fit.e_hi - fit.e_lo) * i / (grid - 1);
        min_slope = std::min(min_slope, fit.deriv(e));
    }
    fit.monotone = min_slope >= 0.0;
    return fit;
}

UnfoldedSpectrum unfold(std::span<const double> sorted_eigenvalues, const Window& window) {
    UnfoldedSpectrum u;
    for (double e : sorted_eigenvalues)
        if (window.contains(e)) u.raw.push_back(e);
    if (u.raw.size() < 500)
        throw Error("unfold: need at least 500 levels in window, got " +
                    std::to_string(u.raw.size()));
    u.smooth_staircase = fit_staircase(sorted_eigenvalues, window);
    u.unfolded.reserve(u.raw.size());
    for (double e : u.raw) u.unfolded.push_back(u.smooth_staircase.eval(e));
    return u;
}

SpacingHistogram make_spacing_histogram(std::span<const double> spacings, double bin_width) {
    if (spacings.empty()) throw Error("spacing histogram: no spacings");
    if (bin_width <= 0.0) throw Error("spacing histogram: bin width must be positive");
    double s_max = 0.0;
    for (double s : spacings) s_max = std::max(s_max, s);

    SpacingHistogram h;
    h.bin_width = bin_width;
    h.n_samples = spacings.size();
    const auto n_bins =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(s_max / bin_width)) + 1);
    h.counts.assign(n_bins, 0);
    for (double s : spacings) {
        auto k = static_cast<std::size_t>(s / bin_width);
        if (k >= n_bins) k = n_bins - 1;
        ++h.counts[k];
    }
    h.density.resize(n_bins);
    const double norm = static_cast<double>(h.n_samples) * bin_width;
    for (std::size_t k = 0; k < n_bins; ++k)
        h.density[k] = static_cast<double>(h.counts[k]) / norm;
    return h;
}

SpacingHistogram spacing_histogram(const UnfoldedSpectrum& u, double bin_width) {
    if (u.unfolded.size() < 2) throw Error("spacing histogram: need at least 2 levels");
    std::vector<double> spacings(u.unfolded.size() - 1);
    for (std::size_t i = 0; i + 1 < u.unfolded.size(); ++i)
        spacings[i] = u.unfolded[i + 1] - u.unfolded[i];
    return make_spacing_histogram(spacings, bin_width);
}

double brody_b(double gamma) {
    return std::exp((gamma + 1.0) * std::lgamma((gamma + 2.0) / (gamma + 1.0)));
}

double brody_pdf(double s, double gamma) {
    if (s < 0.0) return 0.0;
    const double b = brody_b(gamma);
    const double sg = std::pow(s, gamma);
    return (gamma + 1.0) * b * sg * std::exp(-b * sg * s);
}

double brody_cdf(double s, double gamma) {
    if (s <= 0.0) return 0.0;
    return 1.0 - std::exp(-brody_b(gamma) * std::pow(s, gamma + 1.0));
}

double poisson_pdf(double s) { return std::exp(-s); }

double wigner_dyson_pdf(double s) {
    return 0.5 * M_PI * s * std::exp(-0.25 * M_PI * s * s);
}

std::vector<double> sample_brody_spacings(std::size_t n, double gamma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double b = brody_b(gamma);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = uniform(rng);
        out[i] = std::pow(-std::log1p(-u) / b, 1.0 / (gamma + 1.0));
    }
    return out;
}

namespace {

struct BrodyObjective {
    // (s, target) pairs, density or cumulative depending on the fit flavor
    std::vector<double> s;
    std::vector<double> target;
    bool cumulative = false;

    void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
        const double gamma = x(0);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double model = cumulative ? brody_cdf(s[i], gamma) : brody_pdf(s[i], gamma);
            r(static_cast<Eigen::Index>(i)) = model - target[i];
        }
    }
};

double fit_brody_objective(const BrodyObjective& objective) {
    LmOptions options;
    options.lower = Eigen::VectorXd::Constant(1, -0.5);
    options.upper = Eigen::VectorXd::Constant(1, 2.0);

    const int n = static_cast<int>(objective.s.size());
    LmResult best;
    bool have_best = false;
    std::string tried;
    for (double start : {0.5, 0.1, 0.9}) {
        tried += (tried.empty() ? "" : ", ") + std::to_string(start);
        LmResult res = lm_fit(objective, n, Eigen::VectorXd::Constant(1, start), options);
        if (res.converged && (!have_best || res.sse < best.sse)) {
            best = res;
            have_best = true;
        }
        if (have_best && start == 0.5) break;  // default start converged
    }
    if (!have_best)
        throw FitError("brody fit did not converge (initial values tried: " + tried + ")");
    return best.x(0);
}

} // namespace

BrodyFitResult fit_brody(const SpacingHistogram& histogram) {
    BrodyObjective pdf_objective;
    for (std::size_t k = 0; k < histogram.counts.size(); ++k) {
        if (histogram.counts[k] == 0) continue;
        pdf_objective.s.push_back(histogram.bin_center(k));
        pdf_objective.target.push_back(histogram.density[k]);
    }
    if (pdf_objective.s.size() < 3) throw FitError("brody fit: too few occupied bins");

    BrodyObjective cdf_objective;
    cdf_objective.cumulative = true;
    std::size_t last_occupied = 0;
    for (std::size_t k = 0; k < histogram.counts.size(); ++k)
        if (histogram.counts[k] > 0) last_occupied = k;
    double cumulative = 0.0;
    const double n = static_cast<double>(histogram.n_samples);
    for (std::size_t k = 0; k <= last_occupied; ++k) {
        cumulative += static_cast<double>(histogram.counts[k]);
        cdf_objective.s.push_back(static_cast<double>(k + 1) * histogram.bin_width);
        cdf_objective.target.push_back(cumulative / n);
    }

    BrodyFitResult result;
    result.gamma_pdf = fit_brody_objective(pdf_objective);
    result.gamma_cdf = fit_brody_objective(cdf_objective);
    result.gamma = 0.5 * (result.gamma_pdf + result.gamma_cdf);
    result.gamma_err = 0.5 * std::abs(result.gamma_pdf - result.gamma_cdf);
    return result;
}

GapRatioStats restricted_gap_ratios(std::span<const double> sorted_eigenvalues,
                                    const Window& window, double bin_width) {
    std::vector<double> levels;
    for (double e : sorted_eigenvalues)
        if (window.contains(e)) levels.push_back(e);
    if (levels.size() < 3)
        throw Error("gap ratios: need at least 3 levels in window");

    GapRatioStats stats;
    stats.bin_width = bin_width;
    for (std::size_t a = 1; a + 1 < levels.size(); ++a) {
        const double d_prev = levels[a] - levels[a - 1];
        const double d_next = levels[a + 1] - levels[a];
        if (d_prev == 0.0 || d_next == 0.0) {
            ++stats.degenerate;
            continue;
        }
        const double g = d_next / d_prev;
        stats.ratios.push_back(std::min(g, 1.0 / g));
    }
    if (stats.ratios.empty()) throw Error("gap ratios: all interior gaps degenerate");

    double sum = 0.0;
    for (double r : stats.ratios) sum += r;
    stats.mean_r = sum / static_cast<double>(stats.ratios.size());

    const auto n_bins = static_cast<std::size_t>(std::ceil(1.0 / bin_width));
    std::vector<std::size_t> counts(n_bins, 0);
    for (double r : stats.ratios) {
        auto k = static_cast<std::size_t>(r / bin_width);
        if (k >= n_bins) k = n_bins - 1;
        ++counts[k];
    }
    stats.density.resize(n_bins);
    const double norm = static_cast<double>(stats.ratios.size()) * bin_width;
    for (std::size_t k = 0; k < n_bins; ++k)
        stats.density[k] = static_cast<double>(counts[k]) / norm;
    return stats;
}

double gap_ratio_reference(double r, RatioKind kind) {
    if (r < 0.0 || r > 1.0) throw Error("gap_ratio_reference: r must be in [0, 1]");
    if (kind == RatioKind::Poisson) return 2.0 / ((1.0 + r) * (1.0 + r));
    const double q = 1.0 + r + r * r;
    return 6.75 * (r + r * r) / (q * q * std::sqrt(q));
}

void write_staircase_csv(std::span<const double> sorted_eigenvalues, const StaircasePoly& fit,
                         const std::filesystem::path& path, std::size_t max_rows) {
    CsvWriter csv(path);
    csv.header("energy,staircase,smooth_staircase");
    const std::size_t n = sorted_eigenvalues.size();
    const std::size_t stride = std::max<std::size_t>(1, n / max_rows);
    for (std::size_t i = 0; i < n; i += stride) {
        const double e = sorted_eigenvalues[i];
        csv.row(e, i + 1, fit.eval(e));
    }
}

void write_dos_csv(const DosCurve& dos, const std::filesystem::path& path) {
    CsvWriter csv(path);
    csv.header("energy,count,density,normalized_density");
    for (std::size_t k = 0; k < dos.centers.size(); ++k)
        csv.row(dos.centers[k], dos.counts[k], dos.density[k], dos.normalized[k]);
}

void write_spacing_csv(const SpacingHistogram& h, const std::filesystem::path& path) {
    CsvWriter csv(path);
    csv.header("s,density");
    for (std::size_t k = 0; k < h.density.size(); ++k) csv.row(h.bin_center(k), h.density[k]);
}

void write_gap_ratio_csv(const GapRatioStats& stats, const std::filesystem::path& path) {
    CsvWriter csv(path);
    csv.comment("mean_r=" + format_double(stats.mean_r) +
                " degenerate=" + std::to_string(stats.degenerate));
    csv.header("r,density,goe,poisson");
    for (std::size_t k = 0; k < stats.density.size(); ++k) {
        const double r = (static_cast<double>(k) + 0.5) * stats.bin_width;
        csv.row(r, stats.density[k], gap_ratio_reference(r, RatioKind::Goe),
                gap_ratio_reference(r, RatioKind::Poisson));
    }
}

} // namespace ctyp
