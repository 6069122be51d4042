#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include "qmerkle/group.hpp"
#include "qmerkle/prng.hpp"

namespace qmerkle {

enum class Party : int { Alice = 0, Bob = 1, Eve = 2 };

inline const char* party_name(Party p) {
    switch (p) {
        case Party::Alice: return "alice";
        case Party::Bob: return "bob";
        case Party::Eve: return "eve";
    }
    return "?";
}

struct QueryCount {
    std::uint64_t f = 0;
    std::uint64_t t = 0;
    friend bool operator==(const QueryCount&, const QueryCount&) = default;
};

/// Seeded simulation of the two black-box random functions
///   f : D -> [0, r)   and   t : D -> Z_m,
/// with per-party query metering. Values are derived lazily from a
/// counter-mode PRF keyed by (seed, function tag, point), so a domain of
/// size N^3 costs nothing until queried and every run is reproducible.
/// Explicit override tables take precedence over the PRF; they are used
/// by instance constructions that must plant specific function values.
class OracleInstance {
public:
    OracleInstance(std::uint64_t seed, std::uint64_t d, std::uint64_t r, std::uint64_t m)
        : seed_(seed), d_(d), r_(r), m_(m) {
        if (d == 0 || r == 0 || m == 0)
            throw std::invalid_argument("OracleInstance: d, r, m must be positive");
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t domain_size() const { return d_; }
    std::uint64_t range_size() const { return r_; }
    std::uint64_t group_order() const { return m_; }

    /// Metered query to f. Increments the party's f counter by one.
    std::uint64_t query_f(Party party, std::uint64_t x) {
        check_domain(x);
        ++counters_[index(party)].f;
        return f_value(x);
    }

    /// Metered query to t.
    GroupElem query_t(Party party, std::uint64_t x) {
        check_domain(x);
        ++counters_[index(party)].t;
        return GroupElem(t_value(x), m_);
    }

    /// Unmetered reads. Used by emulated searches whose query cost is
    /// charged by formula instead of by metering, and by test oracles
    /// that need ground truth without disturbing the ledgers.
    std::uint64_t peek_f(std::uint64_t x) const {
        check_domain(x);
        return f_value(x);
    }
    GroupElem peek_t(std::uint64_t x) const {
        check_domain(x);
        return GroupElem(t_value(x), m_);
    }

    QueryCount query_count(Party party) const { return counters_[index(party)]; }

    std::uint64_t total_f_queries() const {
        return counters_[0].f + counters_[1].f + counters_[2].f;
    }
    std::uint64_t total_t_queries() const {
        return counters_[0].t + counters_[1].t + counters_[2].t;
    }

    /// Plants explicit values; subsequent queries at x return them.
    void override_f(std::uint64_t x, std::uint64_t y) {
        check_domain(x);
        if (y >= r_) throw std::invalid_argument("override_f: value out of range");
        f_over_[x] = y;
    }
    void override_t(std::uint64_t x, std::uint64_t v) {
        check_domain(x);
        if (v >= m_) throw std::invalid_argument("override_t: value out of range");
        t_over_[x] = v;
    }

private:
    static constexpr std::uint64_t kTagF = 0xf00d0000000000f1ull;
    static constexpr std::uint64_t kTagT = 0xf00d00000000007eull;

    static std::size_t index(Party p) { return static_cast<std::size_t>(p); }

    void check_domain(std::uint64_t x) const {
        if (x >= d_) throw std::out_of_range("oracle query outside domain");
    }

    std::uint64_t f_value(std::uint64_t x) const {
        if (!f_over_.empty()) {
            auto it = f_over_.find(x);
            if (it != f_over_.end()) return it->second;
        }
        return prf_below(seed_, kTagF, x, r_);
    }

    std::uint64_t t_value(std::uint64_t x) const {
        if (!t_over_.empty()) {
            auto it = t_over_.find(x);
            if (it != t_over_.end()) return it->second;
        }
        return prf_below(seed_, kTagT, x, m_);
    }

    std::uint64_t seed_, d_, r_, m_;
    std::unordered_map<std::uint64_t, std::uint64_t> f_over_, t_over_;
    std::array<QueryCount, 3> counters_{};
};

inline OracleInstance new_oracle(std::uint64_t seed, std::uint64_t d, std::uint64_t r,
                                 std::uint64_t m) {
    return OracleInstance(seed, d, r, m);
}

} // namespace qmerkle
