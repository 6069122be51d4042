#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmerkle/group.hpp"
#include "qmerkle/matrix.hpp"
#include "qmerkle/prng.hpp"
#include "qmerkle/spectral.hpp"

namespace qmerkle::adv {

struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double acc = 1.0;
    for (std::size_t i = 0; i < k; ++i) acc = acc * double(n - i) / double(i + 1);
    return acc;
}

/// Level weights of the construction:
/// alpha_level = C(n,k)^{-1/2} * max(n^{k/(k+1)} - level, 0).
inline double alpha_coeff(std::size_t level, std::size_t n, std::size_t k) {
    const double target = std::pow(double(n), double(k) / double(k + 1));
    return std::max(target - double(level), 0.0) / std::sqrt(binomial(n, k));
}

/// Label set for the rows or columns of an adversary matrix. Every label
/// carries an input string over Z_m; row labels of the stacked k-SUM
/// construction also carry the index of their witness block. Composed
/// labels additionally carry one bucket-slot per coordinate.
struct Labels {
    std::size_t n = 0;        // coordinates per label
    std::uint64_t m = 1;      // coordinate alphabet
    std::size_t ell = 0;      // bucket size; 0 when not composed
    std::size_t count = 0;
    std::vector<std::int32_t> block;  // witness-block tag, -1 if untagged
    std::vector<std::uint8_t> coords; // count * n
    std::vector<std::uint8_t> slots;  // count * n when composed

    static constexpr std::uint8_t kStar = 0xff;

    std::uint8_t coord(std::size_t label, std::size_t j) const {
        return coords[label * n + j];
    }
    std::uint8_t slot(std::size_t label, std::size_t j) const {
        return slots[label * n + j];
    }

    /// Cell content of a composed label at bucket p, position q:
    /// the stored coordinate when the slot matches, the blank otherwise.
    std::uint8_t content(std::size_t label, std::size_t p, std::size_t q) const {
        return slot(label, p) == static_cast<std::uint8_t>(q) ? coord(label, p) : kStar;
    }
};

/// Real dense adversary matrix with labelled rows and columns.
struct AdversaryMatrix {
    linalg::RMatrix entries;
    Labels rows, cols;
    std::size_t n = 0, k = 0;
    std::uint64_t m = 1, w = 0;
    bool zero_extended = false;

    std::size_t block_count() const {
        if (rows.count == 0) return 0;
        std::int32_t top = -1;
        for (auto b : rows.block) top = std::max(top, b);
        return static_cast<std::size_t>(top + 1);
    }

    std::size_t block_rows() const {
        const auto blocks = block_count();
        return blocks == 0 ? rows.count : rows.count / blocks;
    }
};

/// Unit-sum weights paired with their entrywise square root.
struct DistVector {
    std::vector<double> weights;
    std::vector<double> amplitudes;

    static DistVector uniform(std::size_t count) {
        DistVector d;
        d.weights.assign(count, 1.0 / double(count));
        d.amplitudes.assign(count, 1.0 / std::sqrt(double(count)));
        return d;
    }

    static DistVector from_weights(std::vector<double> w) {
        double total = 0.0;
        for (double x : w) {
            if (x < 0.0) throw std::invalid_argument("DistVector: negative weight");
            total += x;
        }
        if (total <= 0.0) throw std::invalid_argument("DistVector: zero mass");
        DistVector d;
        d.weights.reserve(w.size());
        d.amplitudes.reserve(w.size());
        for (double x : w) {
            d.weights.push_back(x / total);
            d.amplitudes.push_back(std::sqrt(x / total));
        }
        return d;
    }
};

struct BuildOptions {
    std::size_t max_cols = 10000;
    std::size_t max_rows = 100000;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> k_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;
    if (k == 0) {
        out.push_back({});
        return out;
    }
    if (k > n) return out;
    for (;;) {
        out.push_back(comb);
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (comb[i] != i + n - k) break;
        }
        if (comb[i] == i + n - k) return out;
        ++comb[i];
        for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
}

/// Entry values of one stacked block as a function of the agreement
/// pattern: s = number of coordinates where the row and column strings
/// agree, c = number of those inside the witness subset V. Expanding the
/// projector tensor products gives, per level u,
///   sum_i (1-1/m)^i (-1/m)^(u-i) [ C(s,i) C(n-s,u-i)
///                                  - C(s-c,i-c) C(n-s-(k-c),u-i-(k-c)) ],
/// the subtrahend removing the subsets containing V.
inline std::vector<std::vector<double>> entry_table(std::size_t n, std::size_t k,
                                                    std::uint64_t m) {
    const double inv_m = 1.0 / double(m);
    std::vector<std::vector<double>> table(n + 1, std::vector<double>(k + 1, 0.0));

    std::vector<double> alpha(n + 1);
    for (std::size_t u = 0; u <= n; ++u) alpha[u] = alpha_coeff(u, n, k);

    auto choose = [](double nn, double kk) {
        if (kk < 0 || kk > nn) return 0.0;
        return binomial(std::size_t(nn), std::size_t(kk));
    };

    for (std::size_t s = 0; s <= n; ++s) {
        for (std::size_t c = 0; c <= std::min(s, k); ++c) {
            if (k - c > n - s) continue; // V cannot miss more than the disagreements
            double total = 0.0;
            for (std::size_t u = 0; u <= n; ++u) {
                if (alpha[u] == 0.0) continue;
                double level = 0.0;
                for (std::size_t i = 0; i <= std::min(u, s); ++i) {
                    if (u - i > n - s) continue;
                    const double term = std::pow(1.0 - inv_m, double(i)) *
                                        std::pow(-inv_m, double(u - i));
                    const double all = choose(double(s), double(i)) *
                                       choose(double(n - s), double(u - i));
                    double containing = 0.0;
                    if (i >= c && u - i >= k - c)
                        containing = choose(double(s - c), double(i - c)) *
                                     choose(double(n - s) - double(k - c),
                                            double(u - i) - double(k - c));
                    level += term * (all - containing);
                }
                total += alpha[u] * std::pow(inv_m, double(n - u)) * level;
            }
            table[s][c] = std::sqrt(double(m)) * total;
        }
    }
    return table;
}

inline void decode_mixed_radix(std::uint64_t index, std::uint64_t m, std::size_t n,
                               std::uint8_t* out) {
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = static_cast<std::uint8_t>(index % m);
        index /= m;
    }
}

} // namespace detail

/// Stacked adversary matrix for k-SUM over Z_m^n with target w: one
/// block per witness subset V, rows labelled by the inputs satisfying
/// the block's sum constraint, columns by all inputs.
inline AdversaryMatrix build_gamma(std::size_t n, std::size_t k, std::uint64_t m,
                                   std::uint64_t w, const BuildOptions& opts = {}) {
    if (k == 0 || k > n) throw std::invalid_argument("build_gamma: need 1 <= k <= n");
    if (m < 2) throw std::invalid_argument("build_gamma: need m >= 2");
    if (m > 64) throw std::invalid_argument("build_gamma: coordinate alphabet too large");

    const std::uint64_t cols64 = pow_checked(m, static_cast<unsigned>(n));
    const std::uint64_t block_rows64 = pow_checked(m, static_cast<unsigned>(n - 1));
    const auto subsets = detail::k_subsets(n, k);
    const std::uint64_t rows64 = block_rows64 * subsets.size();
    if (cols64 > opts.max_cols)
        throw std::invalid_argument("build_gamma: column count exceeds the cap");
    if (rows64 > opts.max_rows)
        throw std::invalid_argument("build_gamma: row count exceeds the cap");

    const std::size_t cols = std::size_t(cols64);
    const std::size_t block_rows = std::size_t(block_rows64);
    const std::size_t rows = std::size_t(rows64);

    AdversaryMatrix gamma;
    gamma.n = n;
    gamma.k = k;
    gamma.m = m;
    gamma.w = w;

    gamma.cols.n = n;
    gamma.cols.m = m;
    gamma.cols.count = cols;
    gamma.cols.block.assign(cols, -1);
    gamma.cols.coords.resize(cols * n);
    for (std::size_t c = 0; c < cols; ++c)
        detail::decode_mixed_radix(c, m, n, &gamma.cols.coords[c * n]);

    gamma.rows.n = n;
    gamma.rows.m = m;
    gamma.rows.count = rows;
    gamma.rows.block.resize(rows);
    gamma.rows.coords.resize(rows * n);

    const auto table = detail::entry_table(n, k, m);
    gamma.entries = linalg::RMatrix(rows, cols);

    std::vector<std::uint8_t> free_coords(n); // scratch for n-1 digits
    for (std::size_t b = 0; b < subsets.size(); ++b) {
        const auto& subset = subsets[b];
        std::vector<bool> in_v(n, false);
        for (auto j : subset) in_v[j] = true;
        const std::size_t pivot = subset[0];

        for (std::size_t local = 0; local < block_rows; ++local) {
            const std::size_t r = b * block_rows + local;
            gamma.rows.block[r] = std::int32_t(b);
            std::uint8_t* x = &gamma.rows.coords[r * n];

            detail::decode_mixed_radix(local, m, n - 1, free_coords.data());
            std::size_t next = 0;
            std::uint64_t partial = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == pivot) continue;
                x[j] = free_coords[next++];
                if (in_v[j]) partial += x[j];
            }
            x[pivot] = static_cast<std::uint8_t>(((w % m) + m * n - partial % m) % m);

            double* out = &gamma.entries(r, 0);
            const std::uint8_t* ycol = gamma.cols.coords.data();
            for (std::size_t c = 0; c < cols; ++c, ycol += n) {
                std::size_t agree = 0, agree_v = 0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (x[j] == ycol[j]) {
                        ++agree;
                        agree_v += in_v[j];
                    }
                }
                out[c] = table[agree][agree_v];
            }
        }
    }
    return gamma;
}

/// Spectral norm of a labelled matrix.
inline double spectral_norm(const AdversaryMatrix& gamma) {
    return linalg::spectral_norm(gamma.entries);
}

/// Wraps a square matrix indexed by all of Z_m^n on rows and columns.
inline AdversaryMatrix input_indexed(linalg::RMatrix entries, std::size_t n,
                                     std::uint64_t m) {
    const std::uint64_t count = pow_checked(m, static_cast<unsigned>(n));
    if (entries.rows() != count || entries.cols() != count)
        throw std::invalid_argument("input_indexed: entries must be m^n square");
    AdversaryMatrix out;
    out.n = n;
    out.m = m;
    out.entries = std::move(entries);

    Labels lab;
    lab.n = n;
    lab.m = m;
    lab.count = std::size_t(count);
    lab.block.assign(lab.count, -1);
    lab.coords.resize(lab.count * n);
    for (std::size_t i = 0; i < lab.count; ++i)
        detail::decode_mixed_radix(i, m, n, &lab.coords[i * n]);
    out.rows = lab;
    out.cols = lab;
    return out;
}

namespace detail {

/// Largest singular value of entries masked by key inequality:
/// (M o Delta)[r,c] = M[r,c] * 1{row_key[r] != col_key[c]}, without
/// materializing the filtered matrix.
inline double masked_sigma_max(const linalg::RMatrix& m,
                               const std::vector<std::uint16_t>& row_keys,
                               const std::vector<std::uint16_t>& col_keys) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::uint16_t max_key = 0;
    for (auto k : row_keys) max_key = std::max(max_key, k);
    for (auto k : col_keys) max_key = std::max(max_key, k);
    const std::size_t groups = std::size_t(max_key) + 1;

    std::vector<std::vector<std::uint32_t>> cols_by_key(groups), rows_by_key(groups);
    for (std::size_t c = 0; c < cols; ++c) cols_by_key[col_keys[c]].push_back(std::uint32_t(c));
    for (std::size_t r = 0; r < rows; ++r) rows_by_key[row_keys[r]].push_back(std::uint32_t(r));

    auto apply = [&](std::span<const double> in, std::span<double> out) {
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = &m(r, 0);
            double full = 0.0;
            for (std::size_t c = 0; c < cols; ++c) full += row[c] * in[c];
            double same = 0.0;
            for (auto c : cols_by_key[row_keys[r]]) same += row[c] * in[c];
            out[r] = full - same;
        }
    };
    auto apply_adjoint = [&](std::span<const double> in, std::span<double> out) {
        std::vector<double> full(cols, 0.0);
        std::vector<std::vector<double>> same(groups);
        for (std::size_t g = 0; g < groups; ++g)
            if (!rows_by_key[g].empty()) same[g].assign(cols, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* row = &m(r, 0);
            const double x = in[r];
            if (x == 0.0) continue;
            double* acc = same[row_keys[r]].data();
            for (std::size_t c = 0; c < cols; ++c) {
                const double v = row[c] * x;
                full[c] += v;
                acc[c] += v;
            }
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const auto& s = same[col_keys[c]];
            out[c] = full[c] - (s.empty() ? 0.0 : s[c]);
        }
    };
    return linalg::lanczos_sigma_max(rows, cols, apply, apply_adjoint);
}

} // namespace detail

/// ||Gamma o Delta_j||: the Hadamard filter keeps entries whose row and
/// column strings differ in coordinate j (0-based).
inline double delta_j_norm(const AdversaryMatrix& gamma, std::size_t j) {
    if (j >= gamma.rows.n) throw std::invalid_argument("delta_j_norm: bad coordinate");
    std::vector<std::uint16_t> rk(gamma.rows.count), ck(gamma.cols.count);
    for (std::size_t r = 0; r < gamma.rows.count; ++r) rk[r] = gamma.rows.coord(r, j);
    for (std::size_t c = 0; c < gamma.cols.count; ++c) ck[c] = gamma.cols.coord(c, j);
    return detail::masked_sigma_max(gamma.entries, rk, ck);
}

/// ||Gamma o Delta_(p,q)|| for a composed matrix: entries survive when
/// the bucket-p cell-q contents differ.
inline double delta_cell_norm(const AdversaryMatrix& gamma, std::size_t p, std::size_t q) {
    if (gamma.rows.ell == 0) throw std::invalid_argument("delta_cell_norm: not composed");
    std::vector<std::uint16_t> rk(gamma.rows.count), ck(gamma.cols.count);
    for (std::size_t r = 0; r < gamma.rows.count; ++r)
        rk[r] = gamma.rows.content(r, p, q) == Labels::kStar
                    ? std::uint16_t(gamma.rows.m)
                    : gamma.rows.content(r, p, q);
    for (std::size_t c = 0; c < gamma.cols.count; ++c)
        ck[c] = gamma.cols.content(c, p, q) == Labels::kStar
                    ? std::uint16_t(gamma.cols.m)
                    : gamma.cols.content(c, p, q);
    return detail::masked_sigma_max(gamma.entries, rk, ck);
}

/// All Hadamard-filter norms: one per coordinate, or one per bucket cell
/// for composed matrices.
inline std::vector<double> all_delta_norms(const AdversaryMatrix& gamma) {
    std::vector<double> out;
    if (gamma.rows.ell == 0) {
        for (std::size_t j = 0; j < gamma.rows.n; ++j) out.push_back(delta_j_norm(gamma, j));
    } else {
        for (std::size_t p = 0; p < gamma.rows.n; ++p)
            for (std::size_t q = 0; q < gamma.rows.ell; ++q)
                out.push_back(delta_cell_norm(gamma, p, q));
    }
    return out;
}

/// delta_P^* Gamma delta_Q with compensated accumulation.
inline double bilinear(const DistVector& delta_p, const AdversaryMatrix& gamma,
                       const DistVector& delta_q) {
    if (delta_p.amplitudes.size() != gamma.rows.count ||
        delta_q.amplitudes.size() != gamma.cols.count)
        throw std::invalid_argument("bilinear: dimension mismatch");
    linalg::KahanSum acc;
    for (std::size_t r = 0; r < gamma.rows.count; ++r) {
        const double* row = &gamma.entries(r, 0);
        double dot = 0.0;
        for (std::size_t c = 0; c < gamma.cols.count; ++c)
            dot += row[c] * delta_q.amplitudes[c];
        acc.add(delta_p.amplitudes[r] * dot);
    }
    return acc.value();
}

inline double tau(double s_p, double s_q) {
    if (s_p < 0 || s_p > 1 || s_q < 0 || s_q > 1)
        throw std::invalid_argument("tau: acceptance levels must lie in [0,1]");
    return std::sqrt(s_p * s_q) + std::sqrt((1.0 - s_p) * (1.0 - s_q));
}

/// The distinguishing bound evaluated exactly:
///   min_j (delta_P^* Gamma delta_Q - tau ||Gamma||) / ||Gamma o Delta_j||.
/// Negative values are returned as-is; the bound is then vacuous.
inline double adv_value(const AdversaryMatrix& gamma, const DistVector& delta_p, double s_p,
                        const DistVector& delta_q, double s_q) {
    const double numerator =
        bilinear(delta_p, gamma, delta_q) - tau(s_p, s_q) * spectral_norm(gamma);
    double best = std::numeric_limits<double>::infinity();
    for (double denom : all_delta_norms(gamma)) {
        double quotient;
        if (denom > 1e-300)
            quotient = numerator / denom;
        else
            quotient = numerator > 0    ? std::numeric_limits<double>::infinity()
                       : numerator < 0 ? -std::numeric_limits<double>::infinity()
                                       : 0.0;
        best = std::min(best, quotient);
    }
    return best;
}

struct AdvReport {
    std::size_t n = 0, k = 0;
    std::uint64_t m = 0, w = 0;
    double delta_gamma_delta = 0.0;
    double target = 0.0; // n^(k/(k+1))
    double gamma_norm = 0.0;
    double excess = 0.0; // gamma_norm / target - 1
    std::vector<double> delta_j_norms;
    double tau_value = 0.0;
    double adv_value = 0.0;
    bool norms_computed = false;
};

struct VerifyOptions {
    bool compute_norms = true;
    BuildOptions build;
};

/// Builds the matrix and machine-checks its defining identities:
/// (a) the bilinear form under uniform label weights equals n^(k/(k+1))
///     to 1e-8 (hard error otherwise);
/// (b) the spectral norm dominates it (recorded, with its excess ratio);
/// (c) every coordinate filter norm (recorded).
inline AdvReport verify_ksum_claims(std::size_t n, std::size_t k, std::uint64_t m,
                                    std::uint64_t w, const VerifyOptions& opts = {}) {
    auto gamma = build_gamma(n, k, m, w, opts.build);

    AdvReport report;
    report.n = n;
    report.k = k;
    report.m = m;
    report.w = w;
    report.target = std::pow(double(n), double(k) / double(k + 1));

    const auto delta_p = DistVector::uniform(gamma.rows.count);
    const auto delta_q = DistVector::uniform(gamma.cols.count);
    report.delta_gamma_delta = bilinear(delta_p, gamma, delta_q);
    if (std::abs(report.delta_gamma_delta - report.target) >= 1e-8)
        throw VerificationError("verify_ksum_claims: bilinear identity failed at n=" +
                                std::to_string(n) + " k=" + std::to_string(k));

    if (opts.compute_norms) {
        report.norms_computed = true;
        report.gamma_norm = spectral_norm(gamma);
        report.excess = report.gamma_norm / report.target - 1.0;
        report.delta_j_norms = all_delta_norms(gamma);

        const double s_p = 1.0;
        const double s_q = std::min(1.0, binomial(n, k) / double(m));
        report.tau_value = tau(s_p, s_q);
        report.adv_value = 0.0;
        double worst = std::numeric_limits<double>::infinity();
        const double numerator =
            report.delta_gamma_delta - report.tau_value * report.gamma_norm;
        for (double denom : report.delta_j_norms)
            if (denom > 1e-300) worst = std::min(worst, numerator / denom);
        report.adv_value = worst;
    }
    return report;
}

/// Extends each witness block from its constrained row set to the full
/// input space by adding zero rows. Norms and bilinear values against
/// zero-weighted labels are unchanged.
inline AdversaryMatrix zero_extend(const AdversaryMatrix& gamma) {
    const std::size_t blocks = gamma.block_count();
    const std::size_t cols = gamma.cols.count;
    const std::size_t new_rows = blocks * cols;

    AdversaryMatrix out;
    out.n = gamma.n;
    out.k = gamma.k;
    out.m = gamma.m;
    out.w = gamma.w;
    out.zero_extended = true;
    out.cols = gamma.cols;

    out.rows.n = gamma.rows.n;
    out.rows.m = gamma.rows.m;
    out.rows.count = new_rows;
    out.rows.block.resize(new_rows);
    out.rows.coords.resize(new_rows * gamma.rows.n);
    out.entries = linalg::RMatrix(new_rows, cols);

    // place each original row at the position of its input string
    std::vector<std::size_t> cursor(blocks, 0);
    std::vector<std::vector<std::size_t>> original(blocks);
    for (std::size_t r = 0; r < gamma.rows.count; ++r)
        original[std::size_t(gamma.rows.block[r])].push_back(r);

    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t nr = b * cols + c;
            out.rows.block[nr] = std::int32_t(b);
            std::copy_n(&gamma.cols.coords[c * gamma.cols.n], gamma.cols.n,
                        &out.rows.coords[nr * gamma.rows.n]);
        }
        for (std::size_t r : original[b]) {
            // input string of this row, as a column index
            std::uint64_t index = 0;
            for (std::size_t j = gamma.rows.n; j-- > 0;)
                index = index * gamma.m + gamma.rows.coord(r, j);
            const std::size_t nr = b * cols + std::size_t(index);
            std::copy_n(&gamma.entries(r, 0), cols, &out.entries(nr, 0));
        }
    }
    return out;
}

/// Extends amplitudes over original rows to the zero-extended labelling.
inline DistVector zero_extend_weights(const AdversaryMatrix& original,
                                      const AdversaryMatrix& extended,
                                      const DistVector& delta) {
    if (delta.amplitudes.size() != original.rows.count)
        throw std::invalid_argument("zero_extend_weights: dimension mismatch");
    DistVector out;
    out.weights.assign(extended.rows.count, 0.0);
    out.amplitudes.assign(extended.rows.count, 0.0);
    const std::size_t cols = original.cols.count;
    for (std::size_t r = 0; r < original.rows.count; ++r) {
        std::uint64_t index = 0;
        for (std::size_t j = original.rows.n; j-- > 0;)
            index = index * original.m + original.rows.coord(r, j);
        const std::size_t nr =
            std::size_t(original.rows.block[r]) * cols + std::size_t(index);
        out.weights[nr] = delta.weights[r];
        out.amplitudes[nr] = delta.amplitudes[r];
    }
    return out;
}

/// Bucket composition: every coordinate of every label is spread over
/// ell slots. Blocks between equal coordinates become (ell-1) I_ell,
/// blocks between differing coordinates become 1_ell - I_ell, tensored
/// across coordinates and scaled by the outer entry.
inline AdversaryMatrix compose_gamma(const AdversaryMatrix& factor, std::size_t ell,
                                     const BuildOptions& opts = {}) {
    if (ell < 2) throw std::invalid_argument("compose_gamma: need ell >= 2");
    const std::size_t n = factor.rows.n;
    const std::uint64_t spread = pow_checked(ell, static_cast<unsigned>(n));
    const std::uint64_t rows64 = factor.rows.count * spread;
    const std::uint64_t cols64 = factor.cols.count * spread;
    if (cols64 > opts.max_cols * 10ull || rows64 > opts.max_rows * 10ull)
        throw std::invalid_argument("compose_gamma: size exceeds the cap");

    const std::size_t rows = std::size_t(rows64), cols = std::size_t(cols64);
    const std::size_t s = std::size_t(spread);

    AdversaryMatrix out;
    out.n = factor.n;
    out.k = factor.k;
    out.m = factor.m;
    out.w = factor.w;

    auto expand_labels = [&](const Labels& in) {
        Labels lab;
        lab.n = in.n;
        lab.m = in.m;
        lab.ell = ell;
        lab.count = in.count * s;
        lab.block.resize(lab.count);
        lab.coords.resize(lab.count * n);
        lab.slots.resize(lab.count * n);
        for (std::size_t i = 0; i < in.count; ++i) {
            for (std::size_t v = 0; v < s; ++v) {
                const std::size_t li = i * s + v;
                lab.block[li] = in.block[i];
                std::copy_n(&in.coords[i * n], n, &lab.coords[li * n]);
                std::size_t rest = v;
                for (std::size_t j = 0; j < n; ++j) {
                    lab.slots[li * n + j] = static_cast<std::uint8_t>(rest % ell);
                    rest /= ell;
                }
            }
        }
        return lab;
    };
    out.rows = expand_labels(factor.rows);
    out.cols = expand_labels(factor.cols);

    out.entries = linalg::RMatrix(rows, cols);
    const double diag_gain = double(ell - 1);

    for (std::size_t fr = 0; fr < factor.rows.count; ++fr) {
        const std::uint8_t* xc = &factor.rows.coords[fr * n];
        for (std::size_t fc = 0; fc < factor.cols.count; ++fc) {
            const double base = factor.entries(fr, fc);
            if (base == 0.0) continue;
            const std::uint8_t* yc = &factor.cols.coords[fc * n];

            for (std::size_t sv = 0; sv < s; ++sv) {
                const std::size_t r = fr * s + sv;
                const std::uint8_t* sigma = &out.rows.slots[r * n];
                double* dest = &out.entries(r, fc * s);
                for (std::size_t tv = 0; tv < s; ++tv) {
                    const std::uint8_t* tau_slots = &out.cols.slots[(fc * s + tv) * n];
                    double prod = base;
                    for (std::size_t j = 0; j < n; ++j) {
                        if (xc[j] == yc[j])
                            prod *= (sigma[j] == tau_slots[j]) ? diag_gain : 0.0;
                        else
                            prod *= (sigma[j] == tau_slots[j]) ? 0.0 : 1.0;
                        if (prod == 0.0) break;
                    }
                    dest[tv] = prod;
                }
            }
        }
    }
    return out;
}

/// Spreads outer-input weights uniformly over the slot assignments.
inline DistVector compose_weights(const DistVector& delta, std::size_t label_count,
                                  std::size_t n, std::size_t ell) {
    const std::size_t spread = std::size_t(pow_checked(ell, static_cast<unsigned>(n)));
    if (delta.weights.size() != label_count)
        throw std::invalid_argument("compose_weights: dimension mismatch");
    DistVector out;
    out.weights.resize(label_count * spread);
    out.amplitudes.resize(label_count * spread);
    const double share = 1.0 / double(spread);
    for (std::size_t i = 0; i < label_count; ++i)
        for (std::size_t v = 0; v < spread; ++v) {
            out.weights[i * spread + v] = delta.weights[i] * share;
            out.amplitudes[i * spread + v] = delta.amplitudes[i] * std::sqrt(share);
        }
    return out;
}

struct CompositionReport {
    std::size_t ell = 0;
    double bilinear_lhs = 0.0, bilinear_rhs = 0.0;
    double norm_lhs = 0.0, norm_rhs = 0.0;
    std::vector<double> filter_lhs;  // one per composed cell (p, q)
    std::vector<double> filter_rhs;  // matching prediction from the factor
    double worst_relative_error = 0.0;
};

/// Checks the three composition identities to 1e-8 relative; violations
/// are hard errors.
inline CompositionReport verify_composition(const AdversaryMatrix& factor,
                                            const DistVector& delta_pf,
                                            const DistVector& delta_qf, std::size_t ell,
                                            const BuildOptions& opts = {}) {
    const std::size_t n = factor.rows.n;
    auto composed = compose_gamma(factor, ell, opts);
    const auto delta_p = compose_weights(delta_pf, factor.rows.count, n, ell);
    const auto delta_q = compose_weights(delta_qf, factor.cols.count, n, ell);
    const double gain = std::pow(double(ell - 1), double(n));

    CompositionReport report;
    report.ell = ell;
    report.bilinear_lhs = bilinear(delta_p, composed, delta_q);
    report.bilinear_rhs = bilinear(delta_pf, factor, delta_qf) * gain;
    report.norm_lhs = spectral_norm(composed);
    report.norm_rhs = spectral_norm(factor) * gain;

    auto relative = [](double a, double b) {
        return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
    };
    report.worst_relative_error =
        std::max(relative(report.bilinear_lhs, report.bilinear_rhs),
                 relative(report.norm_lhs, report.norm_rhs));

    const double cell_gain =
        std::pow(double(ell - 1), double(n - 1)) * std::sqrt(double(ell - 1));
    for (std::size_t p = 0; p < n; ++p) {
        const double factor_filtered = delta_j_norm(factor, p);
        for (std::size_t q = 0; q < ell; ++q) {
            report.filter_lhs.push_back(delta_cell_norm(composed, p, q));
            report.filter_rhs.push_back(factor_filtered * cell_gain);
            report.worst_relative_error =
                std::max(report.worst_relative_error,
                         relative(report.filter_lhs.back(), report.filter_rhs.back()));
        }
    }

    if (report.worst_relative_error >= 1e-8)
        throw VerificationError("verify_composition: identity failed at ell=" +
                                std::to_string(ell));
    return report;
}

struct LowerBoundValue {
    double composed = 0.0; // sqrt(ell-1) n^(k/(k+1)) nu
    double hidden = 0.0;   // sqrt(d/n - 1) n^(k/(k+1)) nu with d = n ell
    bool group_order_sufficient = false; // m > n^(k + 2/(k+1))
};

inline LowerBoundValue lower_bound_value(std::size_t n, std::size_t k, std::uint64_t m,
                                         std::size_t ell, double nu) {
    if (nu <= 0.0 || nu > 1.0)
        throw std::invalid_argument("lower_bound_value: nu must lie in (0,1]");
    const double base = std::pow(double(n), double(k) / double(k + 1));
    LowerBoundValue out;
    out.composed = std::sqrt(double(ell) - 1.0) * base * nu;
    const double d = double(n) * double(ell);
    out.hidden = std::sqrt(d / double(n) - 1.0) * base * nu;
    out.group_order_sufficient =
        double(m) > std::pow(double(n), double(k) + 2.0 / double(k + 1));
    return out;
}

} // namespace qmerkle::adv
