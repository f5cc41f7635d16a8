#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ctyp/errors.hpp"

namespace ctyp {

struct Window {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double e) const { return e >= lo && e <= hi; }

    static Window full(std::span<const double> sorted_eigenvalues);
};

/// Degree-10 least-squares polynomial of the spectral staircase in the
/// standardized variable x = (E - center) / scale.
struct StaircasePoly {
    double center = 0.0;
    double scale = 1.0;
    std::array<double, 11> coeffs{};
    double e_lo = 0.0, e_hi = 0.0;  // fitted energy range
    bool monotone = true;           // derivative >= 0 on a dense grid over the range

    double eval(double e) const;
    double deriv(double e) const;   // smoothed density of states
    double deriv2(double e) const;
};

struct UnfoldedSpectrum {
    std::vector<double> raw;       // in-window eigenvalues, ascending
    StaircasePoly smooth_staircase;
    std::vector<double> unfolded;  // e_alpha = smooth staircase at raw[alpha]
};

struct DosCurve {
    double bin_width = 0.0;
    std::vector<double> centers;
    std::vector<std::size_t> counts;
    std::vector<double> density;     // counts / bin_width
    std::vector<double> normalized;  // unit-area version
};

struct SpacingHistogram {
    double bin_width = 0.0;
    std::size_t n_samples = 0;
    std::vector<std::size_t> counts;
    std::vector<double> density;  // sums to 1 against bin_width

    double bin_center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width; }
};

struct BrodyFitResult {
    double gamma = 0.0;
    double gamma_err = 0.0;
    double gamma_pdf = 0.0;  // from the density fit
    double gamma_cdf = 0.0;  // from the cumulative fit
};

struct GapRatioStats {
    std::vector<double> ratios;   // restricted ratios in (0, 1]
    double mean_r = 0.0;
    std::size_t degenerate = 0;   // interior levels skipped due to an exact zero gap
    double bin_width = 0.0;
    std::vector<double> density;  // histogram over [0, 1]
};

enum class RatioKind { Goe, Poisson };

/// N(e): number of eigenvalues <= e (step convention: a level at e counts).
std::size_t staircase(std::span<const double> sorted_eigenvalues, double e);

DosCurve binned_dos(std::span<const double> sorted_eigenvalues, double bin_width);

/// Analysis window [E_min, E_peak + FWHM/2] derived from the binned DOS.
Window analysis_window(std::span<const double> sorted_eigenvalues, double dos_bin_width = 0.4);

/// Least-squares staircase polynomial over the in-window levels.
/// Requires at least degree + 2 levels in the window.
StaircasePoly fit_staircase(std::span<const double> sorted_eigenvalues, const Window& window,
                            int degree = 10);

/// Unfolds the in-window part of the spectrum. Requires >= 500 in-window
/// levels; a non-monotone smooth staircase is reported via the monotone flag.
UnfoldedSpectrum unfold(std::span<const double> sorted_eigenvalues, const Window& window);

SpacingHistogram make_spacing_histogram(std::span<const double> spacings, double bin_width = 0.01);
SpacingHistogram spacing_histogram(const UnfoldedSpectrum& u, double bin_width = 0.01);

double brody_b(double gamma);
double brody_pdf(double s, double gamma);
double brody_cdf(double s, double gamma);
double poisson_pdf(double s);
double wigner_dyson_pdf(double s);

/// Inverse-CDF reference sampler for spacing distributions (gamma = 0 is
/// Poisson, gamma = 1 is Wigner-Dyson).
std::vector<double> sample_brody_spacings(std::size_t n, double gamma, std::uint64_t seed);

/// Brody parameter from the histogram: one fit against the density, one
/// against the empirical cumulative; the reported gamma is their mean and
/// gamma_err their standard deviation.
BrodyFitResult fit_brody(const SpacingHistogram& histogram);

GapRatioStats restricted_gap_ratios(std::span<const double> sorted_eigenvalues,
                                    const Window& window, double bin_width = 0.01);

double gap_ratio_reference(double r, RatioKind kind);

void write_staircase_csv(std::span<const double> sorted_eigenvalues, const StaircasePoly& fit,
                         const std::filesystem::path& path, std::size_t max_rows = 4000);
void write_dos_csv(const DosCurve& dos, const std::filesystem::path& path);
void write_spacing_csv(const SpacingHistogram& h, const std::filesystem::path& path);
void write_gap_ratio_csv(const GapRatioStats& stats, const std::filesystem::path& path);

} // namespace ctyp
