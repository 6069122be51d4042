#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qmerkle/matrix.hpp"
#include "qmerkle/prng.hpp"

namespace qmerkle::linalg {

/// Largest eigenvalue of a dense symmetric matrix by cyclic Jacobi
/// sweeps. The input buffer is destroyed. Intended for small orders;
/// accuracy is essentially machine precision.
inline double jacobi_lambda_max(std::vector<double>& a, std::size_t n) {
    if (n == 0) return 0.0;
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        double diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) diag += at(i, i) * at(i, i);
        if (off <= 1e-30 * std::max(diag, 1e-300)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double tau = (at(q, q) - at(p, p)) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = at(p, i), aqi = at(q, i);
                    at(p, i) = c * api - s * aqi;
                    at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    double best = at(0, 0);
    for (std::size_t i = 1; i < n; ++i) best = std::max(best, at(i, i));
    return best;
}

/// Largest eigenvalue of a symmetric tridiagonal matrix via bisection
/// with Sturm counts.
inline double tridiag_lambda_max(const std::vector<double>& alpha,
                                 const std::vector<double>& beta) {
    const std::size_t n = alpha.size();
    if (n == 0) return 0.0;

    double lo = alpha[0], hi = alpha[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double b_prev = i > 0 ? std::abs(beta[i - 1]) : 0.0;
        const double b_next = i + 1 < n ? std::abs(beta[i]) : 0.0;
        lo = std::min(lo, alpha[i] - b_prev - b_next);
        hi = std::max(hi, alpha[i] + b_prev + b_next);
    }

    // count of eigenvalues strictly below x
    auto count_below = [&](double x) {
        std::size_t count = 0;
        double d = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double b2 = i > 0 ? beta[i - 1] * beta[i - 1] : 0.0;
            d = alpha[i] - x - (d != 0.0 ? b2 / d : b2 / 1e-300);
            if (d < 0.0) ++count;
            if (d == 0.0) d = -1e-300;
        }
        return count;
    };

    const double span = std::max(hi - lo, 1e-300);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) == n)
            hi = mid;
        else
            lo = mid;
        if (hi - lo <= 1e-15 * std::max(std::abs(hi), 1.0) || hi - lo <= 1e-18 * span) break;
    }
    return 0.5 * (lo + hi);
}

/// Largest singular value of a linear operator given by callbacks
/// apply(in, out) = A in and apply_adjoint(in, out) = A^T in, both over
/// doubles. Lanczos on A^T A with full reorthogonalization and a
/// deterministic start; relative accuracy well beyond 1e-9.
template <typename Apply, typename ApplyAdjoint>
double lanczos_sigma_max(std::size_t rows, std::size_t cols, Apply&& apply,
                         ApplyAdjoint&& apply_adjoint, std::uint64_t start_seed = 0x5eed) {
    if (rows == 0 || cols == 0) return 0.0;
    const std::size_t max_iter = std::min<std::size_t>(cols, 350);

    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> v(cols), w(cols), mid(rows);

    for (std::size_t i = 0; i < cols; ++i)
        v[i] = double(mix64(derive_seed(start_seed, i))) / double(UINT64_MAX) - 0.5;
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;

    double lambda_prev = -1.0;
    int stable = 0;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        basis.push_back(v);
        apply(std::span<const double>(v), std::span<double>(mid));
        apply_adjoint(std::span<const double>(mid), std::span<double>(w));

        double a = 0.0;
        for (std::size_t i = 0; i < cols; ++i) a += v[i] * w[i];
        alpha.push_back(a);

        // subtract the tridiagonal terms, then reorthogonalize fully
        for (std::size_t i = 0; i < cols; ++i) w[i] -= a * v[i];
        if (iter > 0) {
            const double b = beta.back();
            const auto& prev = basis[iter - 1];
            for (std::size_t i = 0; i < cols; ++i) w[i] -= b * prev[i];
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : basis) {
                double proj = 0.0;
                for (std::size_t i = 0; i < cols; ++i) proj += u[i] * w[i];
                for (std::size_t i = 0; i < cols; ++i) w[i] -= proj * u[i];
            }
        }

        double b = 0.0;
        for (double x : w) b += x * x;
        b = std::sqrt(b);

        const double lambda = tridiag_lambda_max(alpha, beta);
        const double scale = std::max(lambda, 1e-300);
        if (std::abs(lambda - lambda_prev) <= 1e-13 * scale) {
            if (++stable >= 3) return std::sqrt(std::max(lambda, 0.0));
        } else {
            stable = 0;
        }
        lambda_prev = lambda;

        if (b <= 1e-14 * std::sqrt(scale) || iter + 1 == max_iter)
            return std::sqrt(std::max(lambda, 0.0));

        beta.push_back(b);
        for (std::size_t i = 0; i < cols; ++i) v[i] = w[i] / b;
    }
    return std::sqrt(std::max(lambda_prev, 0.0));
}

namespace detail {

/// Dense Gram matrix over the smaller side, as a flat symmetric buffer.
template <typename T>
std::vector<double> small_gram(const Matrix<T>& m, std::size_t& n_out) {
    const bool by_cols = m.cols() <= m.rows();
    const std::size_t n = by_cols ? m.cols() : m.rows();
    n_out = n;

    if constexpr (std::is_same_v<T, double>) {
        std::vector<double> g(n * n, 0.0);
        if (by_cols) {
            for (std::size_t r = 0; r < m.rows(); ++r) {
                auto row = m.row(r);
                for (std::size_t i = 0; i < n; ++i) {
                    if (row[i] == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) g[i * n + j] += row[i] * row[j];
                }
            }
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(i, c) * m(j, c);
                    g[i * n + j] = acc;
                }
        }
        return g;
    } else {
        // Hermitian Gram embedded as the real symmetric [[Re,-Im],[Im,Re]];
        // eigenvalues coincide (doubled in multiplicity)
        std::vector<std::complex<double>> g(n * n, std::complex<double>{});
        if (by_cols) {
            for (std::size_t r = 0; r < m.rows(); ++r) {
                auto row = m.row(r);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j)
                        g[i * n + j] += std::conj(row[i]) * row[j];
            }
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    std::complex<double> acc{};
                    for (std::size_t c = 0; c < m.cols(); ++c)
                        acc += m(i, c) * std::conj(m(j, c));
                    g[i * n + j] = acc;
                }
        }
        std::vector<double> embed(4 * n * n, 0.0);
        const std::size_t dim = 2 * n;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double re = g[i * n + j].real(), im = g[i * n + j].imag();
                embed[i * dim + j] = re;
                embed[(i + n) * dim + (j + n)] = re;
                embed[(i + n) * dim + j] = im;
                embed[i * dim + (j + n)] = -im;
            }
        n_out = dim;
        return embed;
    }
}

} // namespace detail

/// Spectral norm (largest singular value). Small matrices go through a
/// dense eigensolve of the Gram matrix; larger ones through Lanczos.
template <typename T>
double spectral_norm(const Matrix<T>& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    const std::size_t small = std::min(m.rows(), m.cols());
    const double gram_work = double(small) * small * std::max(m.rows(), m.cols());
    if (small <= 400 && gram_work <= 2e8) {
        std::size_t n = 0;
        auto gram = detail::small_gram(m, n);
        return std::sqrt(std::max(jacobi_lambda_max(gram, n), 0.0));
    }
    if constexpr (std::is_same_v<T, double>) {
        return lanczos_sigma_max(
            m.rows(), m.cols(),
            [&](std::span<const double> in, std::span<double> out) { m.apply(in, out); },
            [&](std::span<const double> in, std::span<double> out) {
                m.apply_adjoint(in, out);
            });
    } else {
        // large complex matrices do not occur in this artifact; fall back
        // to a real embedding of the operator
        const std::size_t r2 = 2 * m.rows(), c2 = 2 * m.cols();
        auto apply = [&](std::span<const double> in, std::span<double> out) {
            std::vector<std::complex<double>> vin(m.cols()), vout(m.rows());
            for (std::size_t i = 0; i < m.cols(); ++i)
                vin[i] = {in[i], in[i + m.cols()]};
            m.apply(vin, vout);
            for (std::size_t i = 0; i < m.rows(); ++i) {
                out[i] = vout[i].real();
                out[i + m.rows()] = vout[i].imag();
            }
        };
        auto apply_adj = [&](std::span<const double> in, std::span<double> out) {
            std::vector<std::complex<double>> vin(m.rows()), vout(m.cols());
            for (std::size_t i = 0; i < m.rows(); ++i)
                vin[i] = {in[i], in[i + m.rows()]};
            m.apply_adjoint(vin, vout);
            for (std::size_t i = 0; i < m.cols(); ++i) {
                out[i] = vout[i].real();
                out[i + m.cols()] = vout[i].imag();
            }
        };
        return lanczos_sigma_max(r2, c2, apply, apply_adj);
    }
}

} // namespace qmerkle::linalg
