#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qmerkle/group.hpp"
#include "qmerkle/oracle.hpp"
#include "qmerkle/prng.hpp"
#include "qmerkle/problems.hpp"

namespace qmerkle::protocols {

enum class ProtocolKind : int { merkle1974 = 0, ksum_classical = 1, ksum_quantum = 2 };

inline const char* kind_name(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::merkle1974: return "merkle1974";
        case ProtocolKind::ksum_classical: return "ksum_classical";
        case ProtocolKind::ksum_quantum: return "ksum_quantum";
    }
    return "?";
}

inline ProtocolKind kind_from_name(const std::string& s) {
    if (s == "merkle1974") return ProtocolKind::merkle1974;
    if (s == "ksum_classical") return ProtocolKind::ksum_classical;
    if (s == "ksum_quantum") return ProtocolKind::ksum_quantum;
    throw std::invalid_argument("unknown protocol kind: " + s);
}

/// Run parameters. Domain, range and group sizes are derived from the
/// security parameter: d = N^2 (N^3 for the quantum-party variant),
/// r large enough to keep f collision-free except with vanishing
/// probability (N^5 when d = N^2; N^7 when d = N^3, keeping the expected
/// number of stray preimages at the same d^2/r = 1/N profile), and group
/// order m = N^(4k+1) so that the announced sum pins a unique subset.
struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::merkle1974;
    std::size_t N = 8;
    std::size_t k = 2; // ignored by merkle1974
    std::uint64_t seed = 0;

    bool uses_group() const { return kind != ProtocolKind::merkle1974; }

    std::uint64_t domain_size() const {
        return pow_checked(N, kind == ProtocolKind::ksum_quantum ? 3 : 2);
    }
    std::uint64_t range_size() const {
        return pow_checked(N, kind == ProtocolKind::ksum_quantum ? 7 : 5);
    }
    std::uint64_t group_order() const {
        return uses_group() ? pow_checked(N, static_cast<unsigned>(4 * k + 1)) : 1;
    }

    void validate() const {
        if (N < 2) throw std::invalid_argument("ProtocolConfig: N must be at least 2");
        if (uses_group()) {
            if (k < 1) throw std::invalid_argument("ProtocolConfig: k must be positive");
            if (k > N / 2)
                throw std::invalid_argument("ProtocolConfig: k must satisfy k <= N/2");
        }
        (void)domain_size();
        (void)range_size();
        (void)group_order(); // throws on overflow
    }

    OracleInstance make_oracle() const {
        return OracleInstance(derive_seed(seed, static_cast<std::uint64_t>(kind), N, k),
                              domain_size(), range_size(), group_order());
    }
};

using Key = std::vector<std::uint8_t>;

inline void append_big_endian(Key& key, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        key.push_back(static_cast<std::uint8_t>((v >> shift) & 0xff));
}

/// Fixed-width big-endian concatenation of domain points.
inline Key make_key(std::span<const std::uint64_t> points) {
    Key key;
    key.reserve(points.size() * 8);
    for (auto p : points) append_big_endian(key, p);
    return key;
}

inline Key make_key(const std::vector<std::uint64_t>& points) {
    return make_key(std::span<const std::uint64_t>(points));
}

inline Key make_key(std::uint64_t point) {
    return make_key(std::span<const std::uint64_t>(&point, 1));
}

struct Ledger {
    QueryCount alice, bob, eve;
    friend bool operator==(const Ledger&, const Ledger&) = default;
};

inline Ledger read_ledger(const OracleInstance& oracle) {
    return {oracle.query_count(Party::Alice), oracle.query_count(Party::Bob),
            oracle.query_count(Party::Eve)};
}

struct ProtocolTranscript {
    ProtocolKind kind = ProtocolKind::merkle1974;
    std::size_t N = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;

    std::vector<std::uint64_t> X; // Alice's private points
    std::vector<std::uint64_t> Y; // published images
    std::optional<GroupElem> w;   // announced sum (absent for merkle1974)
    std::vector<std::size_t> bob_indices;
    std::vector<std::uint64_t> bob_preimages;
    Key alice_key, bob_key;
    Ledger ledger;
    double charged_bob_queries = 0.0;
    bool success = false;

    /// The single image Bob sends back in the 1974 scheme.
    std::optional<std::uint64_t> announced_image() const {
        if (kind != ProtocolKind::merkle1974 || bob_indices.empty()) return std::nullopt;
        return Y[bob_indices[0]];
    }
};

/// Everything the eavesdropper is allowed to see. Attacks are written
/// against this projection only; it carries no private fields.
struct PublicView {
    ProtocolKind kind = ProtocolKind::merkle1974;
    std::size_t N = 0;
    std::size_t k = 0;
    std::uint64_t d = 0, r = 0, m = 0;
    std::vector<std::uint64_t> Y;
    std::optional<std::uint64_t> announced_y; // merkle1974
    std::optional<GroupElem> w;               // k-SUM kinds

    static PublicView from(const ProtocolTranscript& transcript) {
        ProtocolConfig cfg{transcript.kind, transcript.N, transcript.k, transcript.seed};
        PublicView view;
        view.kind = transcript.kind;
        view.N = transcript.N;
        view.k = transcript.k;
        view.d = cfg.domain_size();
        view.r = cfg.range_size();
        view.m = cfg.group_order();
        view.Y = transcript.Y;
        view.announced_y = transcript.announced_image();
        view.w = transcript.w;
        return view;
    }
};

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Alice samples points until she holds N with pairwise distinct images,
/// publishing the images. Expected resampling cost is O(1) for the
/// configured ranges; a degenerate range fails after 100 N attempts.
inline std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>>
alice_publish(OracleInstance& oracle, std::size_t N) {
    const std::uint64_t d = oracle.domain_size();
    if (N > d) throw std::invalid_argument("alice_publish: N exceeds domain size");
    Rng rng(derive_seed(oracle.seed(), 0xa11ce));

    std::vector<std::uint64_t> xs, ys;
    std::unordered_map<std::uint64_t, bool> seen_x, seen_y;
    std::size_t attempts = 0;
    while (xs.size() < N) {
        if (++attempts > 100 * N)
            throw ProtocolError("alice_publish: could not reach distinct images");
        const std::uint64_t x = rng.below(d);
        if (seen_x.count(x)) continue; // redraw duplicates before spending a query
        seen_x[x] = true;
        const std::uint64_t y = oracle.query_f(Party::Alice, x);
        if (seen_y.count(y)) continue;
        seen_y[y] = true;
        xs.push_back(x);
        ys.push_back(y);
    }
    return {std::move(xs), std::move(ys)};
}

enum class BobMode { classical, quantum_emulated };

struct BobResult {
    std::vector<std::size_t> indices;      // strictly increasing
    std::vector<std::uint64_t> preimages;  // aligned with indices
    double charged_queries = 0.0;
};

/// Bob inverts k distinct published images.
///
/// classical: uniform sampling of the domain, skipping images already
/// hit; the charge is his actual metered f count. quantum_emulated:
/// the search output distribution is sampled directly (one uniform
/// preimage of one uniform unhit image, via unmetered reads) and the
/// charge is the square-root search cost k * ceil((pi/4) sqrt(d/N)).
inline BobResult bob_solve(OracleInstance& oracle, const std::vector<std::uint64_t>& Y,
                           std::size_t k, BobMode mode) {
    if (k > Y.size()) throw std::invalid_argument("bob_solve: k exceeds |Y|");
    const std::uint64_t d = oracle.domain_size();
    Rng rng(derive_seed(oracle.seed(), 0xb0b));

    std::unordered_map<std::uint64_t, std::size_t> index_of;
    for (std::size_t i = 0; i < Y.size(); ++i) index_of[Y[i]] = i;

    std::vector<std::pair<std::size_t, std::uint64_t>> found;
    std::vector<bool> hit(Y.size(), false);
    double charged = 0.0;

    if (mode == BobMode::classical) {
        const std::uint64_t before = oracle.query_count(Party::Bob).f;
        std::uint64_t since_last_hit = 0;
        while (found.size() < k) {
            if (++since_last_hit > 100 * d)
                throw ProtocolError("bob_solve: preimage search exhausted");
            const std::uint64_t x = rng.below(d);
            const auto it = index_of.find(oracle.query_f(Party::Bob, x));
            if (it == index_of.end() || hit[it->second]) continue;
            hit[it->second] = true;
            found.emplace_back(it->second, x);
            since_last_hit = 0;
        }
        charged = double(oracle.query_count(Party::Bob).f - before);
    } else {
        const double per_preimage =
            std::ceil((3.14159265358979323846 / 4.0) *
                      std::sqrt(double(d) / double(Y.size())));
        for (std::size_t j = 0; j < k; ++j) {
            // uniform unhit image
            std::size_t pick = rng.below(Y.size() - j);
            std::size_t target = 0;
            for (std::size_t i = 0;; ++i) {
                if (hit[i]) continue;
                if (pick == 0) {
                    target = i;
                    break;
                }
                --pick;
            }
            // uniform preimage of it
            std::vector<std::uint64_t> preimages;
            for (std::uint64_t x = 0; x < d; ++x)
                if (oracle.peek_f(x) == Y[target]) preimages.push_back(x);
            hit[target] = true;
            found.emplace_back(target, preimages[rng.below(preimages.size())]);
        }
        charged = double(k) * per_preimage;
    }

    std::sort(found.begin(), found.end());
    BobResult result;
    result.charged_queries = charged;
    for (auto& [i, x] : found) {
        result.indices.push_back(i);
        result.preimages.push_back(x);
    }
    return result;
}

/// Bob's announcement: the group sum of the t-values of his preimages.
inline GroupElem bob_announce(OracleInstance& oracle,
                              const std::vector<std::uint64_t>& preimages,
                              std::uint64_t m) {
    if (preimages.empty()) throw std::invalid_argument("bob_announce: no preimages");
    GroupElem acc(0, m);
    for (auto x : preimages) acc = acc + oracle.query_t(Party::Bob, x);
    return acc;
}

/// Alice reads t on all her points and solves the resulting k-SUM for
/// the announced target. Returns the witness when it is unique; an empty
/// optional signals key-establishment failure (no or several witnesses).
inline std::optional<std::vector<std::size_t>>
alice_recover(OracleInstance& oracle, const std::vector<std::uint64_t>& X, GroupElem w,
              std::size_t k, std::uint64_t m) {
    problems::KSumInstance inst;
    inst.n = X.size();
    inst.k = k;
    inst.m = m;
    inst.w = w;
    inst.values.reserve(X.size());
    for (auto x : X) inst.values.push_back(oracle.query_t(Party::Alice, x));

    auto witnesses = problems::brute_solve_ksum(inst);
    if (witnesses.size() != 1) return std::nullopt;
    return witnesses.front();
}

/// One full run against a caller-supplied oracle. Failures inside the
/// protocol (search exhaustion, ambiguous recovery) yield a transcript
/// with success = false rather than an exception.
inline ProtocolTranscript run_protocol_with(const ProtocolConfig& config,
                                            OracleInstance& oracle) {
    config.validate();
    ProtocolTranscript tr;
    tr.kind = config.kind;
    tr.N = config.N;
    tr.k = config.uses_group() ? config.k : 1;
    tr.seed = config.seed;

    try {
        auto [X, Y] = alice_publish(oracle, config.N);
        tr.X = std::move(X);
        tr.Y = std::move(Y);

        if (config.kind == ProtocolKind::merkle1974) {
            auto bob = bob_solve(oracle, tr.Y, 1, BobMode::classical);
            tr.bob_indices = bob.indices;
            tr.bob_preimages = bob.preimages;
            tr.charged_bob_queries = bob.charged_queries;
            // Alice locates the announced image among her own points
            tr.alice_key = make_key(tr.X[bob.indices[0]]);
            tr.bob_key = make_key(bob.preimages);
            tr.success = tr.alice_key == tr.bob_key;
        } else {
            const BobMode mode = config.kind == ProtocolKind::ksum_quantum
                                     ? BobMode::quantum_emulated
                                     : BobMode::classical;
            auto bob = bob_solve(oracle, tr.Y, config.k, mode);
            tr.bob_indices = bob.indices;
            tr.bob_preimages = bob.preimages;
            tr.charged_bob_queries = bob.charged_queries;
            tr.w = bob_announce(oracle, bob.preimages, config.group_order());
            tr.bob_key = make_key(bob.preimages);

            auto recovered =
                alice_recover(oracle, tr.X, *tr.w, config.k, config.group_order());
            if (recovered) {
                std::vector<std::uint64_t> alice_points;
                for (auto i : *recovered) alice_points.push_back(tr.X[i]);
                tr.alice_key = make_key(alice_points);
                tr.success = tr.alice_key == tr.bob_key;
            } else {
                tr.success = false;
            }
        }
    } catch (const ProtocolError&) {
        tr.success = false;
    }
    tr.ledger = read_ledger(oracle);
    return tr;
}

inline ProtocolTranscript run_protocol(const ProtocolConfig& config) {
    auto oracle = config.make_oracle();
    return run_protocol_with(config, oracle);
}

} // namespace qmerkle::protocols
