#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ctyp/spectral.hpp"

namespace ctyp {

struct CanonicalPartition {
    double beta = 0.0;
    double log_z = 0.0;
    double mean_energy = 0.0;
    double energy_variance = 0.0;
};

/// Microcanonical inverse temperature from a smoothed staircase fit:
/// beta(E) = d/dE ln N'(E) evaluated analytically as N''(E) / N'(E).
/// Throws DomainError where the smoothed density of states is not positive.
double beta_microcanonical(const StaircasePoly& fit, double e);

/// Canonical log partition function, mean energy, and energy variance with
/// overflow-safe exponent shifting. Valid for any finite beta.
CanonicalPartition canonical_stats(std::span<const double> eigenvalues, double beta);

/// Unique beta with canonical mean energy e, by bisection on the monotone
/// map beta -> <E>_beta. Requires E_min < e < E_max.
double solve_beta_canonical(std::span<const double> eigenvalues, double e);

/// beta(E) on a midpoint grid over the window: microcanonical from the total
/// and the bath staircase fits, canonical from the full spectrum. Values are
/// NaN where the corresponding estimate is out of domain.
struct BetaCurve {
    std::vector<double> energies;
    std::vector<double> beta_micro_total;
    std::vector<double> beta_micro_bath;
    std::vector<double> beta_canonical;
};

BetaCurve beta_curve(const StaircasePoly& total_fit, const StaircasePoly& bath_fit,
                     std::span<const double> eigenvalues, const Window& window,
                     std::size_t n_points = 200);

void write_beta_curve_csv(const BetaCurve& curve, const std::filesystem::path& path);

} // namespace ctyp
