#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>

#include "ctyp/model.hpp"

namespace ctyp {

struct EigenOptions {
    double memory_budget_bytes = 8.0 * (1ull << 30);  // 8 GiB
};

/// Complete eigendecomposition of a Hamiltonian. Eigenvalues ascending,
/// column alpha of eigenvectors belongs to eigenvalues[alpha].
struct SpectrumResult {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    ModelParams params;
    double residual_bound = 0.0;  // verified bound on max ||H v - E v||

    std::size_t dimension() const { return static_cast<std::size_t>(eigenvalues.size()); }
};

struct SpectrumReport {
    double max_residual = 0.0;
    double max_orthonormality_defect = 0.0;
    double trace_defect = 0.0;
    bool orthonormality_sampled = false;  // true if the Gram check was subsampled
};

/// Number of worker threads for LAPACK and OpenMP regions. 0 = hardware default.
void set_thread_count(int n);

/// Full dense symmetric eigendecomposition. Densifies the sparse matrix and
/// uses divide-and-conquer when the workspace fits options.memory_budget_bytes,
/// falling back to the slimmer QR path otherwise.
/// Throws CapacityError when even the QR path exceeds the budget, SolverError
/// on non-convergence, and SolverError when the verified residual exceeds
/// 1e-10 x spectral radius.
SpectrumResult diagonalize(const SparseHamiltonian& h, const EigenOptions& options = {});

/// Report-only verification of residuals, orthonormality and trace identity.
SpectrumReport verify_spectrum(const SparseHamiltonian& h, const SpectrumResult& s);

/// Binary spectrum file, fixed little-endian layout:
///   "CTSP" | u32 version=1 | u64 dimension | 56-byte params block
///   | f64 residual_bound | eigenvalues (d x f64) | eigenvectors
///   (d*d x f64, column-major, column alpha contiguous).
void save_spectrum(const SpectrumResult& s, const std::filesystem::path& path);

/// Throws FormatError on bad magic, unsupported version, truncation, or
/// (when expected params are given) on a params mismatch.
SpectrumResult load_spectrum(const std::filesystem::path& path,
                             const std::optional<ModelParams>& expected = std::nullopt);

} // namespace ctyp
