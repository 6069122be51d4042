// Acceptance suite: each criterion below runs at its stated tolerance and
// prints one pass/fail line. The process exits nonzero if any criterion
// fails. Runtime caps are part of the criteria and are enforced.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "qmerkle/advbound.hpp"
#include "qmerkle/attacks.hpp"
#include "qmerkle/harness.hpp"
#include "qmerkle/problems.hpp"
#include "qmerkle/protocols.hpp"
#include "qmerkle/qsim.hpp"

using namespace qmerkle;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    int id;
    std::string description;
    double time_cap_seconds; // 0 = uncapped
    std::function<bool(std::string&)> run;
};

bool g_all_ok = true;

void run_criterion(const Criterion& c) {
    std::string detail;
    const auto start = Clock::now();
    bool ok = false;
    try {
        ok = c.run(detail);
    } catch (const std::exception& e) {
        ok = false;
        detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.time_cap_seconds > 0 && elapsed > c.time_cap_seconds) {
        ok = false;
        detail += " [exceeded time cap]";
    }
    std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", c.id,
                c.description.c_str(), elapsed, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    g_all_ok = g_all_ok && ok;
}

// ---- criterion 1 ----
bool bilinear_identity_grid(std::string& detail) {
    struct Point {
        std::size_t n, k;
        std::uint64_t m;
    };
    const std::vector<Point> grid{{3, 2, 3}, {4, 2, 5}, {4, 3, 5}, {5, 2, 5}};
    double worst = 0.0;
    for (std::uint64_t w : {0, 1}) {
        for (auto [n, k, m] : grid) {
            auto report = adv::verify_ksum_claims(n, k, m, w, {.compute_norms = false});
            worst = std::max(worst, std::abs(report.delta_gamma_delta - report.target));
        }
    }
    detail = "worst |dGd - n^(k/(k+1))| = " + harness::double_repr(worst);
    return worst < 1e-8;
}

// ---- criterion 2 ----
bool composition_identities(std::string& detail) {
    double worst = 0.0;

    // scalar building blocks of the identities
    for (std::size_t ell : {2, 3, 4}) {
        auto j_minus_i = linalg::RMatrix::ones(ell, ell) - linalg::RMatrix::identity(ell);
        worst = std::max(worst, std::abs(linalg::spectral_norm(j_minus_i) - double(ell - 1)));

        linalg::RMatrix cross(ell, ell); // row q + column q support of J - I
        for (std::size_t i = 0; i < ell; ++i)
            if (i != 0) cross(0, i) = cross(i, 0) = 1.0;
        worst = std::max(worst, std::abs(linalg::spectral_norm(cross) -
                                         std::sqrt(double(ell - 1))));
    }

    auto gamma = adv::build_gamma(3, 2, 3, 0);
    auto extended = adv::zero_extend(gamma);
    const auto delta_p = adv::zero_extend_weights(
        gamma, extended, adv::DistVector::uniform(gamma.rows.count));
    const auto delta_q = adv::DistVector::uniform(gamma.cols.count);

    Rng rng(20260808);
    linalg::RMatrix rnd(4, 4);
    for (auto& v : rnd.data()) v = rng.unit(); // nonnegative factor
    auto random4 = adv::input_indexed(std::move(rnd), 1, 4);
    const auto uniform4 = adv::DistVector::uniform(4);

    for (std::size_t ell : {2, 3, 4}) {
        auto stacked = adv::verify_composition(extended, delta_p, delta_q, ell);
        auto random = adv::verify_composition(random4, uniform4, uniform4, ell);
        worst = std::max({worst, stacked.worst_relative_error, random.worst_relative_error});
    }
    detail = "worst relative error = " + harness::double_repr(worst);
    return worst < 1e-8;
}

// ---- criterion 3 ----
bool progress_suite(std::string& detail) {
    auto report = qsim::progress_fuzz_campaign(100, 0xacce9);
    detail = "violations = " + std::to_string(report.violations) +
             ", bound failures = " + std::to_string(report.bound_failures) +
             ", worst initial error = " + harness::double_repr(report.worst_initial_error);
    return report.violations == 0 && report.bound_failures == 0 &&
           report.worst_initial_error < 1e-10 && report.worst_final_margin >= 0.0 &&
           report.worst_step_margin >= 0.0;
}

// ---- criterion 4 ----
bool lemma_fuzz(std::string& detail) {
    auto report = qsim::lemma_simple_fuzz(8, 8, 10000, 0xacce4);
    detail = "violations = " + std::to_string(report.violations) +
             ", worst slack = " + harness::double_repr(report.worst_slack);
    return report.violations == 0;
}

// ---- criterion 5 ----
bool protocol_completeness(std::string& detail) {
    using protocols::ProtocolKind;
    struct Config {
        ProtocolKind kind;
        std::size_t k;
    };
    const std::vector<Config> configs{{ProtocolKind::merkle1974, 2},
                                      {ProtocolKind::ksum_classical, 2},
                                      {ProtocolKind::ksum_classical, 3},
                                      {ProtocolKind::ksum_quantum, 2},
                                      {ProtocolKind::ksum_quantum, 3}};
    const std::size_t trials = 10000;
    double worst_rate = 1.0;
    for (const auto& config : configs) {
        std::size_t ok = 0;
        for (std::uint64_t trial = 0; trial < trials; ++trial) {
            protocols::ProtocolConfig pc{
                config.kind, 8, config.k,
                derive_seed(0xacce5, std::uint64_t(config.kind), config.k, trial)};
            auto tr = protocols::run_protocol(pc);
            if (tr.success && tr.alice_key == tr.bob_key) ++ok;
        }
        worst_rate = std::min(worst_rate, double(ok) / double(trials));
    }
    detail = "worst success rate = " + harness::double_repr(worst_rate);
    return worst_rate >= 0.99;
}

// ---- criterion 6 ----
bool merkle_quadratic_gap(std::string& detail) {
    harness::ExperimentConfig cfg;
    cfg.kind = protocols::ProtocolKind::merkle1974;
    cfg.N_list = {16, 32, 64, 128};
    cfg.trials = 200;
    cfg.base_seed = 0xacce6;
    cfg.attack = true;
    auto table = harness::run_experiment(cfg);

    const auto legit = harness::fit_scaling(table, "legit_f");
    const auto eve = harness::fit_scaling(table, "eve_f");

    double eve_mean_16 = 0.0;
    std::size_t count_16 = 0;
    for (const auto& row : table)
        if (row.N == 16) {
            eve_mean_16 += double(row.eve_f);
            ++count_16;
        }
    eve_mean_16 /= double(count_16);

    detail = "legit slope " + harness::double_repr(legit.slope) + ", eve slope " +
             harness::double_repr(eve.slope) + ", eve mean at N=16 " +
             harness::double_repr(eve_mean_16);
    return legit.slope > 0.8 && legit.slope < 1.2 && eve.slope > 1.8 && eve.slope < 2.2 &&
           std::abs(eve_mean_16 - 128.0) <= 13.0;
}

// ---- criterion 7 ----
bool cost_model_spot_values(std::string& detail) {
    using attacks::CostRegime;
    const auto classical = attacks::quantum_cost(100, 2, CostRegime::classical_protocol);
    const auto quantum = attacks::quantum_cost(100, 3, CostRegime::quantum_protocol);
    const auto grover = attacks::quantum_cost(100, 2, CostRegime::merkle_quantum_eve);

    const bool ok = std::abs(classical.eve_lower_exponent - 7.0 / 6.0) < 1e-12 &&
                    std::abs(classical.eve_upper_exponent - 7.0 / 6.0) < 1e-12 &&
                    std::abs(quantum.eve_lower_exponent - 7.0 / 4.0) < 1e-12 &&
                    grover.eve_queries.has_value() &&
                    std::abs(*grover.eve_queries - 25.0 * 3.14159265358979323846) < 1e-9 &&
                    std::abs(*grover.eve_queries - 78.54) < 0.005;
    detail = "exponents " + harness::double_repr(classical.eve_lower_exponent) + ", " +
             harness::double_repr(quantum.eve_lower_exponent) + "; grover count " +
             harness::double_repr(grover.eve_queries.value_or(0.0));
    return ok;
}

// ---- criterion 8 ----
bool reduction_soundness(std::string& detail) {
    std::size_t sound = 0;
    const std::size_t seeds = 100;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        auto base = problems::sample_positive(4, 2, 101, (seed * 7 + 3) % 101,
                                              derive_seed(0xacce8, seed));
        auto bucket = problems::embed_buckets(base, 3, derive_seed(0xacce8, seed, 1));
        auto hidden = problems::buckets_to_hidden(bucket, 1 << 20,
                                                  derive_seed(0xacce8, seed, 2));

        auto solutions = problems::solve_hidden_exhaustive(hidden);
        const auto base_witnesses = problems::brute_solve_ksum(base);
        bool recovered = false;
        for (const auto& sol : solutions) {
            auto pulled = problems::pull_back(hidden, sol.preimages);
            if (std::find(base_witnesses.begin(), base_witnesses.end(), pulled) !=
                base_witnesses.end())
                recovered = true;
        }
        if (recovered) ++sound;
    }
    detail = std::to_string(sound) + "/" + std::to_string(seeds) + " seeds recovered";
    return sound == seeds;
}

// ---- criterion 9 ----
bool asymptotic_statement(std::string& detail) {
    detail =
        "the security statements are asymptotic lower bounds over all algorithms and "
        "cannot be confirmed by finite experiment; criteria 1-4 verify the finite "
        "identities behind them and criterion 7 checks the exponent bookkeeping";
    return true;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "bilinear identity on the verification grid", 60.0, bilinear_identity_grid},
        {2, "composition identities at ell = 2, 3, 4", 120.0, composition_identities},
        {3, "progress laws over 100 random circuits", 600.0, progress_suite},
        {4, "trace inequality over 10000 random triples", 0.0, lemma_fuzz},
        {5, "protocol completeness at N = 8", 0.0, protocol_completeness},
        {6, "quadratic eavesdropping gap for the 1974 scheme", 300.0, merkle_quadratic_gap},
        {7, "cost-model spot values", 0.0, cost_model_spot_values},
        {8, "bucket-mixing reduction soundness", 0.0, reduction_soundness},
        {9, "asymptotic bounds not reproducible at desk scale (statement)", 0.0,
         asymptotic_statement},
    };
    for (const auto& criterion : criteria) run_criterion(criterion);
    std::printf("%s\n", g_all_ok ? "ACCEPTANCE: all criteria passed"
                                 : "ACCEPTANCE: FAILURES PRESENT");
    return g_all_ok ? 0 : 1;
}
