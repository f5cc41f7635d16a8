#include "ctyp/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

namespace ctyp {

void ModelParams::validate() const {
    if (m_sites < 2)
        throw ConfigError("m_sites must be >= 2, got " + std::to_string(m_sites));
    if (n_bath < 0 || n_bath > m_sites)
        throw ConfigError("n_bath must be in [0, m_sites], got " + std::to_string(n_bath) +
                          " with m_sites=" + std::to_string(m_sites));
    if (tilt_exponent != 1 && tilt_exponent != 2)
        throw ConfigError("tilt_exponent must be 1 or 2, got " + std::to_string(tilt_exponent));
    if (!std::isfinite(j_imp) || !std::isfinite(j_bath) || !std::isfinite(w_bb) ||
        !std::isfinite(w_ib) || !std::isfinite(tilt_amplitude))
        throw ConfigError("model couplings must be finite");
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        // exact at every step: result * (n-k+i) is divisible by i
        std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
        if (result > std::numeric_limits<std::uint64_t>::max() / num)
            throw CapacityError("binomial overflow for n=" + std::to_string(n));
        result = result * num / static_cast<std::uint64_t>(i);
    }
    return result;
}

double external_potential(int site_one_based, const ModelParams& params) {
    if (site_one_based < 1 || site_one_based > params.m_sites)
        throw ConfigError("site index out of range: " + std::to_string(site_one_based));
    const double ratio = static_cast<double>(site_one_based - 1) /
                         static_cast<double>(params.m_sites - 1);
    const double powered = (params.tilt_exponent == 1) ? ratio : ratio * ratio;
    return params.tilt_amplitude * (-0.5 + powered);
}

namespace {

std::vector<std::uint32_t> ascending_masks(int m_sites, int n_bath) {
    std::vector<std::uint32_t> masks;
    masks.reserve(binomial(m_sites, n_bath));
    if (n_bath == 0) {
        masks.push_back(0);
        return masks;
    }
    std::uint32_t v = (std::uint32_t{1} << n_bath) - 1;
    const std::uint32_t limit = std::uint32_t{1} << m_sites;
    while (v < limit) {
        masks.push_back(v);
        // next integer with the same popcount (Gosper's hack)
        const std::uint32_t t = v | (v - 1);
        v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
    }
    return masks;
}

int adjacent_occupied_pairs(std::uint32_t mask) {
    return std::popcount(mask & (mask >> 1));
}

} // namespace

std::size_t FockBasis::rank_of_mask(std::uint32_t mask) const {
    // colex rank: sum of C(p_i, i) over bit positions p_1 < p_2 < ...
    std::size_t rank = 0;
    int i = 1;
    std::uint32_t m = mask;
    while (m != 0) {
        const int p = std::countr_zero(m);
        rank += binomial(p, i);
        m &= m - 1;
        ++i;
    }
    return rank;
}

std::size_t FockBasis::index_of(int impurity_site, std::uint32_t bath_mask) const {
    return static_cast<std::size_t>(impurity_site) * bath_dim() + rank_of_mask(bath_mask);
}

FockBasis enumerate_basis(const ModelParams& params, std::size_t max_states) {
    params.validate();
    const std::uint64_t d_bath = binomial(params.m_sites, params.n_bath);
    const std::uint64_t d = static_cast<std::uint64_t>(params.m_sites) * d_bath;
    if (d > max_states)
        throw CapacityError("basis dimension " + std::to_string(d) +
                            " exceeds capacity " + std::to_string(max_states));

    FockBasis basis;
    basis.m_sites = params.m_sites;
    basis.n_bath = params.n_bath;
    basis.bath_masks = ascending_masks(params.m_sites, params.n_bath);
    basis.states.reserve(d);
    for (int s = 0; s < params.m_sites; ++s)
        for (std::uint32_t mask : basis.bath_masks)
            basis.states.push_back({s, mask});
    return basis;
}

void SparseHamiltonian::apply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dimension || y.size() != dimension)
        throw Error("apply: vector length " + std::to_string(x.size()) +
                    " does not match dimension " + std::to_string(dimension));
    for (std::size_t i = 0; i < dimension; ++i) y[i] = diagonal[i] * x[i];
    for (std::size_t i = 0; i < dimension; ++i) {
        for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) {
            const std::size_t k = col_index[e];
            y[i] += value[e] * x[k];
            y[k] += value[e] * x[i];
        }
    }
}

double SparseHamiltonian::spectral_radius_bound() const {
    std::vector<double> row_sum(dimension, 0.0);
    for (std::size_t i = 0; i < dimension; ++i) {
        for (std::size_t e = row_start[i]; e < row_start[i + 1]; ++e) {
            const double a = std::abs(value[e]);
            row_sum[i] += a;
            row_sum[col_index[e]] += a;
        }
    }
    double bound = 0.0;
    for (std::size_t i = 0; i < dimension; ++i)
        bound = std::max(bound, std::abs(diagonal[i]) + row_sum[i]);
    return bound;
}

std::vector<double> apply_hamiltonian(const SparseHamiltonian& h, std::span<const double> x) {
    std::vector<double> y(h.dimension, 0.0);
    h.apply(x, y);
    return y;
}

namespace {

struct RowBuilder {
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;

    void add(std::size_t col, double v) {
        cols.push_back(static_cast<std::uint32_t>(col));
        vals.push_back(v);
    }
    void sort_and_flush(SparseHamiltonian& h) {
        // keep column order ascending within each row
        std::vector<std::size_t> order(cols.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
        for (std::size_t i : order) {
            h.col_index.push_back(cols[i]);
            h.value.push_back(vals[i]);
        }
        h.row_start.push_back(h.value.size());
        cols.clear();
        vals.clear();
    }
};

} // namespace

SparseHamiltonian build_hamiltonian(const FockBasis& basis, const ModelParams& params) {
    params.validate();
    if (basis.m_sites != params.m_sites || basis.n_bath != params.n_bath ||
        basis.dimension() != static_cast<std::size_t>(params.m_sites) * basis.bath_dim())
        throw Error("build_hamiltonian: basis does not match params");

    const std::size_t d_bath = basis.bath_dim();
    std::vector<double> site_v(params.m_sites);
    for (int j = 0; j < params.m_sites; ++j) site_v[j] = external_potential(j + 1, params);

    SparseHamiltonian h;
    h.dimension = basis.dimension();
    h.params = params;
    h.diagonal.resize(h.dimension);
    h.row_start.reserve(h.dimension + 1);
    h.row_start.push_back(0);

    RowBuilder row;
    for (std::size_t i = 0; i < h.dimension; ++i) {
        const BasisState& st = basis.states[i];
        const int s = st.impurity_site;
        const std::uint32_t mask = st.bath_mask;

        double diag = params.w_bb * adjacent_occupied_pairs(mask);
        if ((mask >> s) & 1u) diag += params.w_ib;
        diag += site_v[s];
        for (std::uint32_t m = mask; m != 0; m &= m - 1)
            diag += site_v[std::countr_zero(m)];
        h.diagonal[i] = diag;

        // impurity hop s -> s+1, same bath configuration (always a larger index)
        if (s + 1 < params.m_sites) row.add(i + d_bath, -params.j_imp);

        // bath hops between adjacent sites; store the upper triangle only
        for (int j = 0; j + 1 < params.m_sites; ++j) {
            const std::uint32_t b1 = std::uint32_t{1} << j;
            const std::uint32_t b2 = std::uint32_t{1} << (j + 1);
            const bool o1 = mask & b1, o2 = mask & b2;
            if (o1 == o2) continue;
            const std::uint32_t moved = mask ^ (b1 | b2);
            if (moved > mask)
                row.add(static_cast<std::size_t>(s) * d_bath + basis.rank_of_mask(moved),
                        -params.j_bath);
        }
        row.sort_and_flush(h);
    }
    return h;
}

SparseHamiltonian build_bath_hamiltonian(const ModelParams& params) {
    params.validate();
    const auto masks = ascending_masks(params.m_sites, params.n_bath);

    std::vector<double> site_v(params.m_sites);
    for (int j = 0; j < params.m_sites; ++j) site_v[j] = external_potential(j + 1, params);

    FockBasis ranker;  // only for rank_of_mask
    ranker.m_sites = params.m_sites;
    ranker.n_bath = params.n_bath;

    SparseHamiltonian h;
    h.dimension = masks.size();
    h.params = params;
    h.diagonal.resize(h.dimension);
    h.row_start.reserve(h.dimension + 1);
    h.row_start.push_back(0);

    RowBuilder row;
    for (std::size_t i = 0; i < masks.size(); ++i) {
        const std::uint32_t mask = masks[i];
        double diag = params.w_bb * adjacent_occupied_pairs(mask);
        for (std::uint32_t m = mask; m != 0; m &= m - 1)
            diag += site_v[std::countr_zero(m)];
        h.diagonal[i] = diag;

        for (int j = 0; j + 1 < params.m_sites; ++j) {
            const std::uint32_t b1 = std::uint32_t{1} << j;
            const std::uint32_t b2 = std::uint32_t{1} << (j + 1);
            const bool o1 = mask & b1, o2 = mask & b2;
            if (o1 == o2) continue;
            const std::uint32_t moved = mask ^ (b1 | b2);
            if (moved > mask) row.add(ranker.rank_of_mask(moved), -params.j_bath);
        }
        row.sort_and_flush(h);
    }
    return h;
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
    return v;
}

double get_f64(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace

std::vector<std::uint8_t> serialize_params(const ModelParams& p) {
    std::vector<std::uint8_t> out;
    out.reserve(56);
    put_u32(out, static_cast<std::uint32_t>(p.m_sites));
    put_u32(out, static_cast<std::uint32_t>(p.n_bath));
    put_u32(out, static_cast<std::uint32_t>(p.tilt_exponent));
    put_u32(out, 0);
    put_f64(out, p.j_imp);
    put_f64(out, p.j_bath);
    put_f64(out, p.w_bb);
    put_f64(out, p.w_ib);
    put_f64(out, p.tilt_amplitude);
    return out;
}

ModelParams deserialize_params(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != 56)
        throw FormatError("params block must be 56 bytes, got " + std::to_string(bytes.size()));
    ModelParams p;
    p.m_sites = static_cast<int>(get_u32(bytes, 0));
    p.n_bath = static_cast<int>(get_u32(bytes, 4));
    p.tilt_exponent = static_cast<int>(get_u32(bytes, 8));
    p.j_imp = get_f64(bytes, 16);
    p.j_bath = get_f64(bytes, 24);
    p.w_bb = get_f64(bytes, 32);
    p.w_ib = get_f64(bytes, 40);
    p.tilt_amplitude = get_f64(bytes, 48);
    return p;
}

std::string params_hash(const ModelParams& params) {
    const auto bytes = serialize_params(params);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace ctyp
