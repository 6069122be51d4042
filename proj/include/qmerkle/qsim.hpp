#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmerkle/advbound.hpp"
#include "qmerkle/matrix.hpp"
#include "qmerkle/prng.hpp"
#include "qmerkle/spectral.hpp"

namespace qmerkle::qsim {

using Complex = std::complex<double>;
using CMatrix = linalg::CMatrix;
using State = std::vector<Complex>;

/// A query algorithm in explicit form: T+1 unitaries interleaved with
/// T oracle calls, then a two-outcome measurement. The register layout
/// is |a> (group value), |i> (query index, 0 = inert), |ws> (workspace),
/// with basis index (a (n+1) + i) w_dim + ws.
struct QueryAlgorithm {
    std::size_t n = 1;
    std::uint64_t m = 2;
    std::size_t w_dim = 1;
    std::vector<CMatrix> unitaries; // U_0 ... U_T
    CMatrix accept_projector;

    std::size_t dim() const { return std::size_t(m) * (n + 1) * w_dim; }
    std::size_t queries() const { return unitaries.empty() ? 0 : unitaries.size() - 1; }

    void validate() const {
        if (unitaries.empty()) throw std::invalid_argument("QueryAlgorithm: no unitaries");
        const std::size_t d = dim();
        if (d > 64) throw std::invalid_argument("QueryAlgorithm: dimension above cap 64");
        for (const auto& u : unitaries) {
            if (u.rows() != d || u.cols() != d)
                throw std::invalid_argument("QueryAlgorithm: unitary shape mismatch");
            auto residual = u.adjoint() * u - CMatrix::identity(d);
            if (residual.frobenius() > 1e-10)
                throw std::invalid_argument("QueryAlgorithm: operator is not unitary");
        }
        if (accept_projector.rows() != d || accept_projector.cols() != d)
            throw std::invalid_argument("QueryAlgorithm: projector shape mismatch");
        auto idempotent = accept_projector * accept_projector - accept_projector;
        auto hermitian = accept_projector.adjoint() - accept_projector;
        if (idempotent.frobenius() > 1e-10 || hermitian.frobenius() > 1e-10)
            throw std::invalid_argument("QueryAlgorithm: not an orthogonal projector");
    }
};

/// Index permutation of the input oracle: |a>|i>|ws> -> |a + x_i>|i>|ws>
/// for i >= 1; the i = 0 branch is inert.
inline std::vector<std::size_t> oracle_permutation(std::span<const std::uint8_t> x,
                                                   std::uint64_t m, std::size_t n,
                                                   std::size_t w_dim) {
    if (x.size() != n) throw std::invalid_argument("oracle_permutation: input length");
    const std::size_t d = std::size_t(m) * (n + 1) * w_dim;
    std::vector<std::size_t> image(d);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t i = 0; i <= n; ++i) {
            const std::size_t shifted = i == 0 ? a : (a + x[i - 1]) % m;
            for (std::size_t ws = 0; ws < w_dim; ++ws)
                image[(a * (n + 1) + i) * w_dim + ws] = (shifted * (n + 1) + i) * w_dim + ws;
        }
    return image;
}

/// The same permutation as an explicit unitary matrix.
inline CMatrix oracle_unitary(std::span<const std::uint8_t> x, std::uint64_t m,
                              std::size_t n, std::size_t w_dim) {
    const auto image = oracle_permutation(x, m, n, w_dim);
    CMatrix u(image.size(), image.size());
    for (std::size_t b = 0; b < image.size(); ++b) u(image[b], b) = 1.0;
    return u;
}

inline void apply_permutation(const std::vector<std::size_t>& image, const State& in,
                              State& out) {
    for (std::size_t b = 0; b < image.size(); ++b) out[image[b]] = in[b];
}

/// Exact state sequence psi^(0) ... psi^(T) on one input.
inline std::vector<State> run_algorithm(const QueryAlgorithm& alg,
                                        std::span<const std::uint8_t> x) {
    const std::size_t d = alg.dim();
    const auto image = oracle_permutation(x, alg.m, alg.n, alg.w_dim);

    std::vector<State> states;
    states.reserve(alg.unitaries.size());

    State current(d), scratch(d);
    current[0] = 1.0;
    State applied(d);
    alg.unitaries[0].apply(current, applied);
    states.push_back(applied);

    for (std::size_t t = 1; t < alg.unitaries.size(); ++t) {
        apply_permutation(image, states.back(), scratch);
        alg.unitaries[t].apply(scratch, applied);
        states.push_back(applied);
    }
    return states;
}

inline double state_norm(const State& s) {
    double acc = 0;
    for (auto v : s) acc += std::norm(v);
    return std::sqrt(acc);
}

inline double accept_prob(const QueryAlgorithm& alg, std::span<const std::uint8_t> x) {
    const auto states = run_algorithm(alg, x);
    State projected(alg.dim());
    alg.accept_projector.apply(states.back(), projected);
    const double p = state_norm(projected);
    return p * p;
}

namespace detail {

inline std::size_t input_count(std::uint64_t m, std::size_t n) {
    const double count = std::pow(double(m), double(n));
    if (count > 256.0) throw std::invalid_argument("qsim: input space above cap 256");
    return std::size_t(std::llround(count));
}

inline std::vector<std::uint8_t> decode_input(std::size_t index, std::uint64_t m,
                                              std::size_t n) {
    std::vector<std::uint8_t> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = std::uint8_t(index % m);
        index /= m;
    }
    return x;
}

inline std::size_t label_input_index(const adv::Labels& labels, std::size_t i) {
    std::size_t index = 0;
    for (std::size_t j = labels.n; j-- > 0;)
        index = index * std::size_t(labels.m) + labels.coord(i, j);
    return index;
}

/// States of the algorithm on every input of G_m^n.
inline std::vector<std::vector<State>> run_all_inputs(const QueryAlgorithm& alg) {
    const std::size_t inputs = input_count(alg.m, alg.n);
    std::vector<std::vector<State>> all;
    all.reserve(inputs);
    for (std::size_t u = 0; u < inputs; ++u)
        all.push_back(run_algorithm(alg, decode_input(u, alg.m, alg.n)));
    return all;
}

} // namespace detail

/// The progress values W^(0..T): label-weighted sums of pairwise state
/// overlaps. Row labels carrying witness tags are keyed by their input
/// string component.
inline std::vector<Complex> progress_series(const QueryAlgorithm& alg,
                                            const adv::AdversaryMatrix& gamma,
                                            const adv::DistVector& delta_p,
                                            const adv::DistVector& delta_q) {
    if (gamma.rows.n != alg.n || gamma.cols.n != alg.n || gamma.rows.m != alg.m)
        throw std::invalid_argument("progress_series: label/input mismatch");
    if (delta_p.amplitudes.size() != gamma.rows.count ||
        delta_q.amplitudes.size() != gamma.cols.count)
        throw std::invalid_argument("progress_series: weight mismatch");

    const auto all = detail::run_all_inputs(alg);
    const std::size_t steps = alg.unitaries.size();
    const std::size_t d = alg.dim();

    std::vector<std::size_t> row_input(gamma.rows.count), col_input(gamma.cols.count);
    for (std::size_t r = 0; r < gamma.rows.count; ++r)
        row_input[r] = detail::label_input_index(gamma.rows, r);
    for (std::size_t c = 0; c < gamma.cols.count; ++c)
        col_input[c] = detail::label_input_index(gamma.cols, c);

    std::vector<Complex> series(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        Complex total{};
        for (std::size_t r = 0; r < gamma.rows.count; ++r) {
            const double wr = delta_p.amplitudes[r];
            if (wr == 0.0) continue;
            const State& psi_r = all[row_input[r]][t];
            for (std::size_t c = 0; c < gamma.cols.count; ++c) {
                const double entry = gamma.entries(r, c);
                if (entry == 0.0) continue;
                const State& psi_c = all[col_input[c]][t];
                Complex overlap{};
                for (std::size_t b = 0; b < d; ++b)
                    overlap += std::conj(psi_r[b]) * psi_c[b];
                total += wr * delta_q.amplitudes[c] * entry * overlap;
            }
        }
        series[t] = total;
    }
    return series;
}

/// Acceptance probability averaged over a label distribution.
inline double observed_acceptance(const QueryAlgorithm& alg, const adv::Labels& labels,
                                  const adv::DistVector& delta) {
    const auto all = detail::run_all_inputs(alg);
    double acc = 0.0;
    State projected(alg.dim());
    for (std::size_t i = 0; i < labels.count; ++i) {
        if (delta.weights[i] == 0.0) continue;
        alg.accept_projector.apply(all[detail::label_input_index(labels, i)].back(),
                                   projected);
        const double p = state_norm(projected);
        acc += delta.weights[i] * p * p;
    }
    return acc;
}

struct ProgressReport {
    std::vector<Complex> series;
    double initial_error = 0.0;     // |W(0) - bilinear|
    double final_margin = 0.0;      // tau ||Gamma|| - |W(T)|
    double worst_step_margin = 0.0; // min over t of 2 max_j ||..|| - |dW|
    double bound_value = 0.0;       // the distinguishing bound at observed levels
    bool queries_dominate_bound = false;
};

/// Machine check of the progress-function laws for one algorithm and
/// matrix: the initial value is the bilinear form (to 1e-10), the final
/// value is capped by tau ||Gamma||, and each step moves by at most
/// twice the largest filtered norm (both to 1e-8). Violations throw.
inline ProgressReport check_progress_claims(const QueryAlgorithm& alg,
                                            const adv::AdversaryMatrix& gamma,
                                            const adv::DistVector& delta_p,
                                            double s_p_observed,
                                            const adv::DistVector& delta_q,
                                            double s_q_observed) {
    ProgressReport report;
    report.series = progress_series(alg, gamma, delta_p, delta_q);

    const double expected_w0 = adv::bilinear(delta_p, gamma, delta_q);
    report.initial_error = std::abs(report.series.front() - Complex(expected_w0));
    if (report.initial_error > 1e-10)
        throw adv::VerificationError("progress: initial value mismatch");

    const double gamma_norm = adv::spectral_norm(gamma);
    const double ceiling = adv::tau(s_p_observed, s_q_observed) * gamma_norm;
    report.final_margin = ceiling + 1e-8 - std::abs(report.series.back());
    if (report.final_margin < 0.0)
        throw adv::VerificationError("progress: final value exceeds the overlap ceiling");

    const auto filters = adv::all_delta_norms(gamma);
    double max_filter = 0.0;
    for (double f : filters) max_filter = std::max(max_filter, f);
    report.worst_step_margin = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t + 1 < report.series.size(); ++t) {
        const double step = std::abs(report.series[t] - report.series[t + 1]);
        report.worst_step_margin =
            std::min(report.worst_step_margin, 2.0 * max_filter + 1e-8 - step);
    }
    if (report.worst_step_margin < 0.0)
        throw adv::VerificationError("progress: step size exceeds the filtered norm cap");

    report.bound_value = adv_value(gamma, delta_p, s_p_observed, delta_q, s_q_observed);
    report.queries_dominate_bound = double(alg.queries()) >= report.bound_value;
    return report;
}

// ---- random instances ----

/// Haar-distributed unitary via Gram-Schmidt on a Gaussian matrix.
inline CMatrix haar_unitary(std::size_t dim, Rng& rng) {
    CMatrix q(dim, dim);
    for (std::size_t c = 0; c < dim; ++c) {
        std::vector<Complex> col(dim);
        for (auto& v : col) v = {rng.gaussian(), rng.gaussian()};
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t prev = 0; prev < c; ++prev) {
                Complex proj{};
                for (std::size_t r = 0; r < dim; ++r) proj += std::conj(q(r, prev)) * col[r];
                for (std::size_t r = 0; r < dim; ++r) col[r] -= proj * q(r, prev);
            }
        }
        double norm = 0;
        for (auto v : col) norm += std::norm(v);
        norm = std::sqrt(norm);
        for (std::size_t r = 0; r < dim; ++r) q(r, c) = col[r] / norm;
    }
    return q;
}

/// Rank-`rank` orthogonal projector onto Haar-random directions.
inline CMatrix random_projector(std::size_t dim, std::size_t rank, Rng& rng) {
    auto q = haar_unitary(dim, rng);
    CMatrix p(dim, dim);
    for (std::size_t c = 0; c < rank; ++c)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                p(i, j) += q(i, c) * std::conj(q(j, c));
    return p;
}

inline QueryAlgorithm random_algorithm(std::size_t n, std::uint64_t m, std::size_t w_dim,
                                       std::size_t queries, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x9a1));
    QueryAlgorithm alg;
    alg.n = n;
    alg.m = m;
    alg.w_dim = w_dim;
    for (std::size_t t = 0; t <= queries; ++t)
        alg.unitaries.push_back(haar_unitary(alg.dim(), rng));
    alg.accept_projector = random_projector(alg.dim(), alg.dim() / 2, rng);
    alg.validate();
    return alg;
}

struct FuzzCampaignReport {
    std::size_t algorithms = 0;
    std::size_t violations = 0;
    std::size_t bound_failures = 0; // query count below the distinguishing bound
    double worst_initial_error = 0.0;
    double worst_final_margin = std::numeric_limits<double>::infinity();
    double worst_step_margin = std::numeric_limits<double>::infinity();
};

/// Seeded campaign of random circuits against random symmetric matrices
/// and random label weights: every progress law is checked on each run.
inline FuzzCampaignReport progress_fuzz_campaign(std::size_t trials, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0xca30));
    FuzzCampaignReport report;
    report.algorithms = trials;

    const std::size_t n = 2;
    const std::uint64_t m = 2;
    const std::size_t inputs = 4;

    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t w_dim = 1 + rng.below(2);
        const std::size_t queries = 1 + rng.below(3);
        auto alg = random_algorithm(n, m, w_dim, queries, derive_seed(seed, trial));

        linalg::RMatrix g(inputs, inputs);
        for (std::size_t i = 0; i < inputs; ++i)
            for (std::size_t j = i; j < inputs; ++j) g(i, j) = g(j, i) = rng.gaussian();
        auto gamma = adv::input_indexed(std::move(g), n, m);

        std::vector<double> wp(inputs), wq(inputs);
        for (auto& x : wp) x = rng.unit() + 0.02;
        for (auto& x : wq) x = rng.unit() + 0.02;
        const auto delta_p = adv::DistVector::from_weights(wp);
        const auto delta_q = adv::DistVector::from_weights(wq);

        const double sp = observed_acceptance(alg, gamma.rows, delta_p);
        const double sq = observed_acceptance(alg, gamma.cols, delta_q);

        try {
            auto r = check_progress_claims(alg, gamma, delta_p, sp, delta_q, sq);
            report.worst_initial_error = std::max(report.worst_initial_error, r.initial_error);
            report.worst_final_margin = std::min(report.worst_final_margin, r.final_margin);
            report.worst_step_margin = std::min(report.worst_step_margin, r.worst_step_margin);
            if (!r.queries_dominate_bound) ++report.bound_failures;
        } catch (const adv::VerificationError&) {
            ++report.violations;
        }
    }
    return report;
}

struct LemmaFuzzReport {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_slack = std::numeric_limits<double>::infinity();
};

/// Random verification of the trace-inequality
/// |sum_ij A[i,j] <u_i, v_j>| <= ||A|| ||U||_F ||V||_F.
inline LemmaFuzzReport lemma_simple_fuzz(std::size_t dim_n, std::size_t dim_m,
                                         std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("lemma_simple_fuzz: need trials >= 1");
    Rng rng(derive_seed(seed, 0x1e44a));
    LemmaFuzzReport report;
    report.trials = trials;

    for (std::size_t trial = 0; trial < trials; ++trial) {
        const std::size_t nn = 1 + rng.below(dim_n);
        const std::size_t mm = 1 + rng.below(dim_m);
        CMatrix a(nn, nn), u(mm, nn), v(mm, nn);
        for (auto& x : a.data()) x = {rng.gaussian(), rng.gaussian()};
        for (auto& x : u.data()) x = {rng.gaussian(), rng.gaussian()};
        for (auto& x : v.data()) x = {rng.gaussian(), rng.gaussian()};

        Complex lhs{};
        for (std::size_t i = 0; i < nn; ++i)
            for (std::size_t j = 0; j < nn; ++j) {
                Complex inner{};
                for (std::size_t r = 0; r < mm; ++r) inner += std::conj(u(r, i)) * v(r, j);
                lhs += a(i, j) * inner;
            }
        const double rhs = linalg::spectral_norm(a) * u.frobenius() * v.frobenius();
        const double slack = rhs - std::abs(lhs);
        report.worst_slack = std::min(report.worst_slack, slack);
        if (slack < -1e-9) ++report.violations;
    }
    if (report.violations > 0)
        throw adv::VerificationError("lemma_simple_fuzz: inequality violated");
    return report;
}

} // namespace qmerkle::qsim
