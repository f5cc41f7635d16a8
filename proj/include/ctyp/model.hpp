#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctyp/errors.hpp"

namespace ctyp {

/// Couplings and geometry of the impurity + spin-polarized bath chain.
/// Units: J = 1, k_B = 1; all energies dimensionless.
struct ModelParams {
    int m_sites = 2;             // chain length M_s
    int n_bath = 0;              // number of bath fermions N_B
    double j_imp = 1.0;          // impurity hopping J_I
    double j_bath = 1.0;         // bath hopping J_B
    double w_bb = 0.0;           // nearest-neighbor bath-bath coupling
    double w_ib = 0.0;           // on-site impurity-bath coupling
    int tilt_exponent = 2;       // background tilt power, 1 (linear) or 2 (quadratic)
    double tilt_amplitude = 0.01;

    bool operator==(const ModelParams&) const = default;

    /// Throws ConfigError unless m_sites >= 2, 0 <= n_bath <= m_sites,
    /// tilt_exponent in {1, 2}.
    void validate() const;
};

/// One configuration: impurity position plus a bath occupation bitmask.
/// Sites are 0-based internally; bit j of bath_mask set <=> bath fermion on site j.
struct BasisState {
    int impurity_site = 0;
    std::uint32_t bath_mask = 0;
};

/// Ordered enumeration of the full Hilbert space.
/// Canonical order: impurity-site major, bath mask ascending as integer.
/// With this layout the bath partial trace reduces site blocks of length
/// bath_dim that are contiguous in any state vector.
struct FockBasis {
    int m_sites = 0;
    int n_bath = 0;
    std::vector<std::uint32_t> bath_masks;  // ascending, size C(m_sites, n_bath)
    std::vector<BasisState> states;         // size dimension()

    std::size_t bath_dim() const { return bath_masks.size(); }
    std::size_t dimension() const { return states.size(); }

    /// Position of (impurity_site, bath_mask) in the canonical order.
    std::size_t index_of(int impurity_site, std::uint32_t bath_mask) const;

    /// Rank of a mask within the ascending mask list (combinatorial ranking).
    std::size_t rank_of_mask(std::uint32_t mask) const;
};

/// Symmetric sparse matrix, upper triangle stored in CSR form.
struct SparseHamiltonian {
    std::size_t dimension = 0;
    ModelParams params;
    std::vector<double> diagonal;           // size dimension
    std::vector<std::size_t> row_start;     // size dimension + 1
    std::vector<std::uint32_t> col_index;   // strictly above the diagonal
    std::vector<double> value;

    std::size_t offdiag_nonzeros() const { return value.size(); }

    /// y = H x using the symmetric structure.
    void apply(std::span<const double> x, std::span<double> y) const;

    /// Gershgorin bound on the spectral radius.
    double spectral_radius_bound() const;
};

std::uint64_t binomial(int n, int k);

/// On-site background tilt V(j) = A * [-0.5 + ((j-1)/(M_s-1))^n], j = 1..M_s.
double external_potential(int site_one_based, const ModelParams& params);

/// All M_s * C(M_s, N_B) configurations in canonical order.
/// Throws CapacityError if the dimension exceeds max_states.
FockBasis enumerate_basis(const ModelParams& params,
                          std::size_t max_states = (std::size_t{1} << 22));

/// Full Hamiltonian (impurity + bath + interaction + tilt) on the given basis.
SparseHamiltonian build_hamiltonian(const FockBasis& basis, const ModelParams& params);

/// Bath-only Hamiltonian (hopping + W_BB + tilt) on the C(M_s, N_B) bath space,
/// bath masks ascending.
SparseHamiltonian build_bath_hamiltonian(const ModelParams& params);

std::vector<double> apply_hamiltonian(const SparseHamiltonian& h,
                                      std::span<const double> x);

/// Fixed little-endian byte layout (56 bytes), shared by the spectrum file
/// format and the content-addressed spectrum cache:
/// u32 m_sites, u32 n_bath, u32 tilt_exponent, u32 reserved(=0),
/// f64 j_imp, j_bath, w_bb, w_ib, tilt_amplitude.
std::vector<std::uint8_t> serialize_params(const ModelParams& params);
ModelParams deserialize_params(std::span<const std::uint8_t> bytes);

/// FNV-1a 64-bit hash of serialize_params(), as 16 hex digits.
std::string params_hash(const ModelParams& params);

} // namespace ctyp
