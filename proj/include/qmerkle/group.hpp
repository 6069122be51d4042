#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmerkle {

/// Element of the cyclic group Z_m. The group order travels with the
/// value so that sums over mismatched groups fail loudly.
struct GroupElem {
    std::uint64_t value = 0;
    std::uint64_t modulus = 1;

    GroupElem() = default;
    GroupElem(std::uint64_t v, std::uint64_t m) : value(v), modulus(m) {
        if (m == 0) throw std::invalid_argument("GroupElem: modulus must be positive");
        if (m > (1ull << 63)) throw std::invalid_argument("GroupElem: modulus too large");
        if (v >= m) throw std::invalid_argument("GroupElem: value out of range");
    }

    friend bool operator==(const GroupElem&, const GroupElem&) = default;
};

inline GroupElem operator+(GroupElem a, GroupElem b) {
    if (a.modulus != b.modulus) throw std::invalid_argument("GroupElem: mixed moduli");
    std::uint64_t s = a.value + b.value; // no overflow: both < m <= 2^63
    if (s >= a.modulus) s -= a.modulus;
    return GroupElem(s, a.modulus);
}

inline GroupElem operator-(GroupElem a) {
    return GroupElem(a.value == 0 ? 0 : a.modulus - a.value, a.modulus);
}

inline GroupElem operator-(GroupElem a, GroupElem b) { return a + (-b); }

/// Sum in Z_m; the empty sum is the identity.
inline GroupElem g_sum(std::uint64_t m, std::span<const GroupElem> elems) {
    GroupElem acc(0, m);
    for (const GroupElem& e : elems) {
        if (e.modulus != m) throw std::invalid_argument("g_sum: mixed moduli");
        acc = acc + e;
    }
    return acc;
}

inline GroupElem g_sum(std::uint64_t m, const std::vector<GroupElem>& elems) {
    return g_sum(m, std::span<const GroupElem>(elems));
}

/// base^exp over uint64 with overflow detection.
inline std::uint64_t pow_checked(std::uint64_t base, unsigned exp) {
    std::uint64_t result = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (base != 0 && result > UINT64_MAX / base)
            throw std::overflow_error("pow_checked: overflow");
        result *= base;
    }
    return result;
}

} // namespace qmerkle
