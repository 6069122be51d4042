#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qmerkle/oracle.hpp"
#include "qmerkle/prng.hpp"
#include "qmerkle/protocols.hpp"

namespace qmerkle::attacks {

struct AttackResult {
    std::optional<protocols::Key> recovered_key;
    QueryCount eve_ledger;
    bool succeeded = false;
    std::uint64_t seed = 0;
    std::string config;
};

/// Compares the eavesdropper's output against the established key.
/// Attacks themselves never see the key; the harness scores them.
inline void score_against(AttackResult& result, const protocols::Key& legit_key) {
    result.succeeded = result.recovered_key.has_value() && *result.recovered_key == legit_key;
}

/// Inverts the single announced image by sampling the domain without
/// replacement. Expected cost d/2 when the image has a unique preimage.
inline AttackResult eve_merkle_classical(const protocols::PublicView& view,
                                         OracleInstance& oracle) {
    if (!view.announced_y)
        throw std::invalid_argument("eve_merkle_classical: no announced image");
    const std::uint64_t d = view.d;
    Rng rng(derive_seed(oracle.seed(), 0xe5e));

    std::vector<std::uint64_t> order(d);
    for (std::uint64_t i = 0; i < d; ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());

    AttackResult result;
    result.seed = oracle.seed();
    result.config = protocols::kind_name(view.kind);
    for (std::uint64_t x : order) {
        if (oracle.query_f(Party::Eve, x) == *view.announced_y) {
            result.recovered_key = protocols::make_key(x);
            break;
        }
    }
    result.eve_ledger = oracle.query_count(Party::Eve);
    return result;
}

/// Recovers the key from a k-SUM-kind public view by brute force:
/// a full domain scan builds the preimage map of the published images,
/// one t-query per found preimage recovers the group values, and the
/// announced sum is solved over every preimage choice. A unique solution
/// yields the key; anything else reports failure.
inline AttackResult eve_hidden_ksum_classical(const protocols::PublicView& view,
                                              OracleInstance& oracle) {
    if (!view.w) throw std::invalid_argument("eve_hidden_ksum_classical: no announced sum");
    const std::size_t n = view.Y.size();
    const std::size_t k = view.k;

    AttackResult result;
    result.seed = oracle.seed();
    result.config = protocols::kind_name(view.kind);

    std::unordered_map<std::uint64_t, std::size_t> index_of;
    for (std::size_t i = 0; i < n; ++i) index_of[view.Y[i]] = i;

    std::vector<std::vector<std::uint64_t>> preimages(n);
    for (std::uint64_t x = 0; x < view.d; ++x) {
        auto it = index_of.find(oracle.query_f(Party::Eve, x));
        if (it != index_of.end()) preimages[it->second].push_back(x);
    }

    std::vector<std::vector<GroupElem>> tvals(n);
    for (std::size_t i = 0; i < n; ++i)
        for (auto x : preimages[i]) tvals[i].push_back(oracle.query_t(Party::Eve, x));

    // enumerate k-index subsets and one preimage choice per index
    std::vector<std::vector<std::uint64_t>> solutions;
    std::vector<std::size_t> comb(k);
    std::vector<std::uint64_t> chosen(k);
    auto choices = [&](auto&& self, std::size_t depth, GroupElem acc) -> void {
        if (depth == k) {
            if (acc == *view.w) solutions.push_back(chosen);
            return;
        }
        const std::size_t i = comb[depth];
        for (std::size_t c = 0; c < preimages[i].size(); ++c) {
            chosen[depth] = preimages[i][c];
            self(self, depth + 1, acc + tvals[i][c]);
        }
    };
    auto subsets = [&](auto&& self, std::size_t depth, std::size_t start) -> void {
        if (depth == k) {
            choices(choices, 0, GroupElem(0, view.m));
            return;
        }
        for (std::size_t i = start; i + (k - depth) <= n; ++i) {
            comb[depth] = i;
            self(self, depth + 1, i + 1);
        }
    };
    subsets(subsets, 0, 0);

    if (solutions.size() == 1) result.recovered_key = protocols::make_key(solutions[0]);
    result.eve_ledger = oracle.query_count(Party::Eve);
    return result;
}

enum class CostRegime : int {
    classical_protocol = 0,
    quantum_protocol = 1,
    merkle_classical_eve = 2,
    merkle_quantum_eve = 3,
};

inline const char* regime_name(CostRegime r) {
    switch (r) {
        case CostRegime::classical_protocol: return "classical_protocol";
        case CostRegime::quantum_protocol: return "quantum_protocol";
        case CostRegime::merkle_classical_eve: return "merkle_classical_eve";
        case CostRegime::merkle_quantum_eve: return "merkle_quantum_eve";
    }
    return "?";
}

/// Query-count bookkeeping for one protocol family: what the legitimate
/// parties spend, and the exponents bounding the eavesdropper from below
/// (proved) and above (achieved by a known attack). Absolute adversary
/// counts are reported where a closed form exists.
struct CostPrediction {
    double legit_queries = 0;
    double eve_lower_exponent = 0;
    double eve_upper_exponent = 0;
    std::optional<double> eve_queries;
    CostRegime regime = CostRegime::classical_protocol;
};

inline CostPrediction quantum_cost(std::size_t N, std::size_t k, CostRegime regime) {
    if (N < 2) throw std::invalid_argument("quantum_cost: N must be at least 2");
    if (k < 1) throw std::invalid_argument("quantum_cost: k must be positive");
    constexpr double pi = 3.14159265358979323846;
    const double dN = double(N), dk = double(k);

    CostPrediction p;
    p.regime = regime;
    switch (regime) {
        case CostRegime::classical_protocol:
            p.legit_queries = (dk + 2.0) * dN; // Alice 2N, Bob about kN
            p.eve_lower_exponent = 0.5 + dk / (dk + 1.0);
            p.eve_upper_exponent = p.eve_lower_exponent;
            break;
        case CostRegime::quantum_protocol:
            p.legit_queries = 2.0 * dN + dk * (pi / 4.0) * dN;
            p.eve_lower_exponent = 1.0 + dk / (dk + 1.0);
            p.eve_upper_exponent = p.eve_lower_exponent;
            break;
        case CostRegime::merkle_classical_eve:
            p.legit_queries = 2.0 * dN;
            p.eve_lower_exponent = 2.0;
            p.eve_upper_exponent = 2.0;
            p.eve_queries = dN * dN / 2.0;
            break;
        case CostRegime::merkle_quantum_eve:
            p.legit_queries = 2.0 * dN;
            p.eve_lower_exponent = 1.0;
            p.eve_upper_exponent = 1.0;
            p.eve_queries = (pi / 4.0) * dN;
            break;
    }
    return p;
}

} // namespace qmerkle::attacks
