#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "qmerkle/group.hpp"
#include "qmerkle/oracle.hpp"
#include "qmerkle/prng.hpp"

namespace qmerkle::problems {

/// k-SUM over Z_m in list form: find k positions of `values` summing to
/// the target. `planted` records the witness subset for instances drawn
/// from the positive distribution.
struct KSumInstance {
    std::size_t n = 0;
    std::size_t k = 0;
    std::uint64_t m = 1;
    GroupElem w;
    std::vector<GroupElem> values;
    std::optional<std::vector<std::size_t>> planted;
};

/// Positive-instance distribution: a uniform k-subset carrying a uniform
/// string conditioned on summing to w; every other entry uniform.
inline KSumInstance sample_positive(std::size_t n, std::size_t k, std::uint64_t m,
                                    std::uint64_t w, std::uint64_t seed) {
    if (k > n) throw std::invalid_argument("sample_positive: k > n");
    if (m < 2) throw std::invalid_argument("sample_positive: m < 2");
    Rng rng(derive_seed(seed, 0x705, n, k));

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx.begin(), idx.end());
    std::vector<std::size_t> subset(idx.begin(), idx.begin() + k);
    std::sort(subset.begin(), subset.end());

    KSumInstance inst;
    inst.n = n;
    inst.k = k;
    inst.m = m;
    inst.w = GroupElem(w, m);
    inst.values.assign(n, GroupElem(0, m));
    for (std::size_t i = 0; i < n; ++i) inst.values[i] = GroupElem(rng.below(m), m);

    if (k > 0) {
        GroupElem partial(0, m);
        for (std::size_t j = 0; j + 1 < k; ++j) {
            inst.values[subset[j]] = GroupElem(rng.below(m), m);
            partial = partial + inst.values[subset[j]];
        }
        inst.values[subset[k - 1]] = inst.w - partial;
    }
    inst.planted = std::move(subset);
    return inst;
}

/// Uniform distribution on all inputs; no witness is planted.
inline KSumInstance sample_uniform(std::size_t n, std::size_t k, std::uint64_t m,
                                   std::uint64_t w, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("sample_uniform: m < 1");
    Rng rng(derive_seed(seed, 0x70d, n));
    KSumInstance inst;
    inst.n = n;
    inst.k = k;
    inst.m = m;
    inst.w = GroupElem(w, m);
    inst.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) inst.values.emplace_back(rng.below(m), m);
    return inst;
}

/// Every strictly increasing k-subset of positions whose values sum to
/// the target, in lexicographic order. Uses a meet-in-the-middle split
/// (floor(k/2) | ceil(k/2) with an index boundary between the halves),
/// which enumerates exactly the same witness set as the naive scan.
inline std::vector<std::vector<std::size_t>> brute_solve_ksum(const KSumInstance& inst) {
    const std::size_t n = inst.n, k = inst.k;
    const std::uint64_t m = inst.m;
    std::vector<std::vector<std::size_t>> witnesses;

    if (k == 0) {
        if (inst.w.value == 0) witnesses.push_back({});
        return witnesses;
    }
    if (k > n) return witnesses;

    const std::size_t k1 = k / 2, k2 = k - k1;

    // enumerate sorted subsets of a given size
    auto for_each_subset = [&](std::size_t size, auto&& fn) {
        std::vector<std::size_t> comb(size);
        for (std::size_t i = 0; i < size; ++i) comb[i] = i;
        if (size == 0) {
            fn(comb);
            return;
        }
        for (;;) {
            fn(comb);
            std::size_t i = size;
            while (i > 0) {
                --i;
                if (comb[i] != i + n - size) break;
            }
            if (comb[i] == i + n - size) return;
            ++comb[i];
            for (std::size_t j = i + 1; j < size; ++j) comb[j] = comb[j - 1] + 1;
        }
    };

    auto subset_sum = [&](const std::vector<std::size_t>& s) {
        std::uint64_t acc = 0;
        for (auto i : s) acc = (acc + inst.values[i].value) % m;
        return acc;
    };

    // left halves keyed by sum; a witness splits uniquely at its k1-th
    // smallest element, so no deduplication is needed
    struct Half {
        std::vector<std::size_t> indices;
        std::size_t max_index;
    };
    std::unordered_map<std::uint64_t, std::vector<Half>> by_sum;
    for_each_subset(k1, [&](const std::vector<std::size_t>& s) {
        by_sum[subset_sum(s)].push_back({s, s.empty() ? 0 : s.back() + 1});
    });

    for_each_subset(k2, [&](const std::vector<std::size_t>& s) {
        const std::uint64_t rs = subset_sum(s);
        const std::uint64_t need = (inst.w.value + m - rs) % m;
        auto it = by_sum.find(need);
        if (it == by_sum.end()) return;
        for (const Half& half : it->second) {
            if (half.max_index > s.front()) continue;
            std::vector<std::size_t> witness = half.indices;
            witness.insert(witness.end(), s.begin(), s.end());
            witnesses.push_back(std::move(witness));
        }
    });

    std::sort(witnesses.begin(), witnesses.end());
    return witnesses;
}

/// k-SUM composed with unstructured search: each value sits in one slot
/// of a length-ell bucket, all other cells hold the blank marker.
struct BucketInstance {
    KSumInstance base;
    std::size_t ell = 1;
    std::vector<std::size_t> slots; // slot of the value in each bucket

    /// Cell content; empty optional is the blank cell.
    std::optional<GroupElem> cell(std::size_t bucket, std::size_t pos) const {
        if (bucket >= base.n || pos >= ell) throw std::out_of_range("BucketInstance::cell");
        if (slots[bucket] == pos) return base.values[bucket];
        return std::nullopt;
    }
};

inline BucketInstance embed_buckets(const KSumInstance& base, std::size_t ell,
                                    std::uint64_t seed) {
    if (ell < 1) throw std::invalid_argument("embed_buckets: ell < 1");
    Rng rng(derive_seed(seed, 0xb0c, base.n, ell));
    BucketInstance out;
    out.base = base;
    out.ell = ell;
    out.slots.reserve(base.n);
    for (std::size_t i = 0; i < base.n; ++i) out.slots.push_back(rng.below(ell));
    return out;
}

/// The eavesdropper's form of the problem: group values reachable only
/// through preimages of published f-images.
struct HiddenKSumInstance {
    OracleInstance oracle;
    std::size_t n = 0;
    std::size_t k = 0;
    GroupElem w;
    std::vector<std::uint64_t> y; // published images, pairwise distinct
    std::uint64_t d = 0;

    /// Mixing permutation used to build the instance: flat cell index
    /// (bucket * ell + pos) -> domain point. Construction metadata, not
    /// part of the solver-facing surface.
    std::vector<std::uint64_t> mixing;
    std::size_t ell = 1;
};

/// Turns a composed instance into a hidden one by mixing all bucket
/// cells into one domain through a uniform permutation. Every cell of
/// bucket i becomes a preimage of y_i; the slot cell carries the bucket
/// value through t and all other domain points get fresh uniform
/// t-values.
inline HiddenKSumInstance buckets_to_hidden(const BucketInstance& bucket,
                                            std::uint64_t r, std::uint64_t seed) {
    const std::size_t n = bucket.base.n;
    const std::size_t ell = bucket.ell;
    const std::uint64_t d = static_cast<std::uint64_t>(n) * ell;
    Rng rng(derive_seed(seed, 0x41d, n, ell));

    std::vector<std::uint64_t> mixing(d);
    for (std::uint64_t i = 0; i < d; ++i) mixing[i] = i;
    rng.shuffle(mixing.begin(), mixing.end());

    // distinct published images
    std::vector<std::uint64_t> y(n);
    bool distinct = false;
    for (int attempt = 0; attempt < 100 && !distinct; ++attempt) {
        for (std::size_t i = 0; i < n; ++i) y[i] = rng.below(r);
        auto sorted = y;
        std::sort(sorted.begin(), sorted.end());
        distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    }
    if (!distinct)
        throw std::invalid_argument("buckets_to_hidden: r too small to keep images distinct");

    HiddenKSumInstance out{
        OracleInstance(derive_seed(seed, 0x41e), d, r, bucket.base.m),
        n,
        bucket.base.k,
        bucket.base.w,
        y,
        d,
        std::move(mixing),
        ell};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t pos = 0; pos < ell; ++pos)
            out.oracle.override_f(out.mixing[i * ell + pos], y[i]);
    for (std::size_t i = 0; i < n; ++i)
        out.oracle.override_t(out.mixing[i * ell + bucket.slots[i]],
                              bucket.base.values[i].value);
    return out;
}

/// k published-image indices (strictly increasing) together with the
/// chosen preimage of each.
struct HiddenWitness {
    std::vector<std::size_t> indices;
    std::vector<std::uint64_t> preimages;
};

/// All hidden witnesses, by unmetered exhaustive scan. Instance-level
/// ground truth for tests of the reduction; the metered eavesdropper
/// lives in the attacks module.
inline std::vector<HiddenWitness> solve_hidden_exhaustive(const HiddenKSumInstance& inst) {
    std::unordered_map<std::uint64_t, std::size_t> y_index;
    for (std::size_t i = 0; i < inst.y.size(); ++i) y_index[inst.y[i]] = i;

    std::vector<std::vector<std::uint64_t>> preimages(inst.n);
    for (std::uint64_t x = 0; x < inst.d; ++x) {
        auto it = y_index.find(inst.oracle.peek_f(x));
        if (it != y_index.end()) preimages[it->second].push_back(x);
    }

    std::vector<HiddenWitness> found;
    const std::size_t k = inst.k;
    std::vector<std::size_t> comb(k);
    std::vector<std::uint64_t> chosen(k);

    auto explore_choices = [&](auto&& self, std::size_t depth, GroupElem acc) -> void {
        if (depth == k) {
            if (acc == inst.w) found.push_back({comb, chosen});
            return;
        }
        for (std::uint64_t x : preimages[comb[depth]]) {
            chosen[depth] = x;
            self(self, depth + 1, acc + inst.oracle.peek_t(x));
        }
    };
    auto explore_indices = [&](auto&& self, std::size_t depth, std::size_t start) -> void {
        if (depth == k) {
            explore_choices(explore_choices, 0, GroupElem(0, inst.w.modulus));
            return;
        }
        for (std::size_t i = start; i + (k - depth) <= inst.n; ++i) {
            comb[depth] = i;
            self(self, depth + 1, i + 1);
        }
    };
    explore_indices(explore_indices, 0, 0);
    return found;
}

/// Maps solver-returned preimages to the bucket indices they came from.
inline std::vector<std::size_t> pull_back(const HiddenKSumInstance& inst,
                                          std::span<const std::uint64_t> preimages) {
    std::vector<std::uint64_t> inverse(inst.d);
    for (std::uint64_t flat = 0; flat < inst.d; ++flat) inverse[inst.mixing[flat]] = flat;
    std::vector<std::size_t> buckets;
    buckets.reserve(preimages.size());
    for (std::uint64_t x : preimages) {
        if (x >= inst.d) throw std::out_of_range("pull_back: preimage outside domain");
        buckets.push_back(static_cast<std::size_t>(inverse[x] / inst.ell));
    }
    std::sort(buckets.begin(), buckets.end());
    return buckets;
}

} // namespace qmerkle::problems
