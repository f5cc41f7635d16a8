#include "ctyp/eigen.hpp"

#include <lapacke.h>
#include <omp.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>
#include <vector>

extern "C" void openblas_set_num_threads(int);

namespace ctyp {

void set_thread_count(int n) {
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    omp_set_num_threads(n);
    openblas_set_num_threads(n);
}

namespace {

Eigen::MatrixXd densify(const SparseHamiltonian& h) {
    const auto n = static_cast<Eigen::Index>(h.dimension);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < h.dimension; ++i) {
        a(i, i) = h.diagonal[i];
        for (std::size_t e = h.row_start[i]; e < h.row_start[i + 1]; ++e) {
            const std::size_t k = h.col_index[e];
            a(i, k) = h.value[e];
            a(k, i) = h.value[e];
        }
    }
    return a;
}

std::string params_context(const SparseHamiltonian& h) {
    const ModelParams& p = h.params;
    return "dimension=" + std::to_string(h.dimension) +
           " m_sites=" + std::to_string(p.m_sites) + " n_bath=" + std::to_string(p.n_bath) +
           " w_bb=" + std::to_string(p.w_bb) + " w_ib=" + std::to_string(p.w_ib);
}

} // namespace

SpectrumResult diagonalize(const SparseHamiltonian& h, const EigenOptions& options) {
    const std::size_t n = h.dimension;
    if (n == 0) throw Error("diagonalize: empty matrix");

    // dsyevd workspace is ~2n^2 doubles on top of the matrix itself;
    // dsyev gets by with O(n) extra.
    const double nd = static_cast<double>(n);
    const double bytes_matrix = nd * nd * 8.0;
    const double bytes_dc = bytes_matrix + (2.0 * nd * nd + 7.0 * nd) * 8.0;
    const double bytes_qr = bytes_matrix + 40.0 * nd * 8.0;
    const bool use_dc = bytes_dc <= options.memory_budget_bytes;
    if (!use_dc && bytes_qr > options.memory_budget_bytes)
        throw CapacityError("dense decomposition needs " + std::to_string(bytes_qr / (1 << 30)) +
                            " GiB, budget " +
                            std::to_string(options.memory_budget_bytes / (1 << 30)) + " GiB (" +
                            params_context(h) + ")");

    SpectrumResult result;
    result.params = h.params;
    result.eigenvalues.resize(static_cast<Eigen::Index>(n));
    result.eigenvectors = densify(h);

    const auto ln = static_cast<lapack_int>(n);
    lapack_int info;
    if (use_dc) {
        info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', ln, result.eigenvectors.data(), ln,
                              result.eigenvalues.data());
    } else {
        info = LAPACKE_dsyev(LAPACK_COL_MAJOR, 'V', 'L', ln, result.eigenvectors.data(), ln,
                             result.eigenvalues.data());
    }
    if (info != 0)
        throw SolverError("dense eigensolver failed with info=" + std::to_string(info) + " (" +
                          params_context(h) + ")");

    // verify residuals against the target bound before accepting the result
    const double radius =
        std::max(std::abs(result.eigenvalues(0)),
                 std::abs(result.eigenvalues(static_cast<Eigen::Index>(n) - 1)));
    const double target = 1e-10 * std::max(radius, 1.0);

    double max_residual = 0.0;
#pragma omp parallel
    {
        std::vector<double> hv(n);
        double local_max = 0.0;
#pragma omp for schedule(dynamic, 16)
        for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(n); ++a) {
            const double* v = result.eigenvectors.col(a).data();
            h.apply(std::span<const double>(v, n), hv);
            const double e = result.eigenvalues(a);
            double r2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = hv[i] - e * v[i];
                r2 += r * r;
            }
            local_max = std::max(local_max, std::sqrt(r2));
        }
#pragma omp critical
        max_residual = std::max(max_residual, local_max);
    }
    if (max_residual > target)
        throw SolverError("eigendecomposition residual " + std::to_string(max_residual) +
                          " exceeds bound " + std::to_string(target) + " (" + params_context(h) +
                          ")");
    result.residual_bound = target;
    return result;
}

SpectrumReport verify_spectrum(const SparseHamiltonian& h, const SpectrumResult& s) {
    const std::size_t n = h.dimension;
    if (s.dimension() != n) throw Error("verify_spectrum: dimension mismatch");

    SpectrumReport report;

    std::vector<double> hv(n);
    for (std::size_t a = 0; a < n; ++a) {
        const double* v = s.eigenvectors.col(static_cast<Eigen::Index>(a)).data();
        h.apply(std::span<const double>(v, n), hv);
        const double e = s.eigenvalues(static_cast<Eigen::Index>(a));
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = hv[i] - e * v[i];
            r2 += r * r;
        }
        report.max_residual = std::max(report.max_residual, std::sqrt(r2));
    }

    // full Gram matrix for small systems, subsampled columns for large ones
    const std::size_t gram_limit = 3000;
    if (n <= gram_limit) {
        Eigen::MatrixXd gram = s.eigenvectors.transpose() * s.eigenvectors;
        gram.diagonal().array() -= 1.0;
        report.max_orthonormality_defect = gram.cwiseAbs().maxCoeff();
    } else {
        report.orthonormality_sampled = true;
        const std::size_t stride = n / 128;
        for (std::size_t a = 0; a < n; a += stride) {
            for (std::size_t b = a; b < n; b += stride) {
                const double dot = s.eigenvectors.col(static_cast<Eigen::Index>(a))
                                       .dot(s.eigenvectors.col(static_cast<Eigen::Index>(b)));
                const double defect = std::abs(dot - (a == b ? 1.0 : 0.0));
                report.max_orthonormality_defect =
                    std::max(report.max_orthonormality_defect, defect);
            }
        }
    }

    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) trace += h.diagonal[i];
    report.trace_defect = std::abs(s.eigenvalues.sum() - trace);
    return report;
}

namespace {

constexpr char kMagic[4] = {'C', 'T', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ofstream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& in, void* data, std::size_t n, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw FormatError(std::string("spectrum file truncated while reading ") + what);
}

} // namespace

void save_spectrum(const SpectrumResult& s, const std::filesystem::path& path) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        write_bytes(out, kMagic, 4);
        write_bytes(out, &kVersion, 4);
        const std::uint64_t dim = s.dimension();
        write_bytes(out, &dim, 8);
        const auto pbytes = serialize_params(s.params);
        write_bytes(out, pbytes.data(), pbytes.size());
        write_bytes(out, &s.residual_bound, 8);
        write_bytes(out, s.eigenvalues.data(), dim * 8);
        write_bytes(out, s.eigenvectors.data(), dim * dim * 8);
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

SpectrumResult load_spectrum(const std::filesystem::path& path,
                             const std::optional<ModelParams>& expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());

    char magic[4];
    read_bytes(in, magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string());
    std::uint32_t version = 0;
    read_bytes(in, &version, 4, "version");
    if (version != kVersion)
        throw FormatError("unsupported spectrum file version " + std::to_string(version));
    std::uint64_t dim = 0;
    read_bytes(in, &dim, 8, "dimension");

    std::vector<std::uint8_t> pbytes(56);
    read_bytes(in, pbytes.data(), 56, "params");

    SpectrumResult s;
    s.params = deserialize_params(pbytes);
    if (expected && !(s.params == *expected))
        throw FormatError("spectrum file params do not match the expected configuration");
    read_bytes(in, &s.residual_bound, 8, "residual bound");
    s.eigenvalues.resize(static_cast<Eigen::Index>(dim));
    read_bytes(in, s.eigenvalues.data(), dim * 8, "eigenvalues");
    s.eigenvectors.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    read_bytes(in, s.eigenvectors.data(), dim * dim * 8, "eigenvectors");
    return s;
}

} // namespace ctyp
