#include "doctest.h"

#include <cmath>
#include <vector>

#include "qmerkle/advbound.hpp"

using namespace qmerkle;
using namespace qmerkle::adv;

namespace {

// ad-hoc labelled matrix over coordinate strings
AdversaryMatrix make_plain(const linalg::RMatrix& entries,
                           const std::vector<std::vector<std::uint8_t>>& row_coords,
                           const std::vector<std::vector<std::uint8_t>>& col_coords,
                           std::uint64_t m) {
    AdversaryMatrix out;
    out.entries = entries;
    out.m = m;
    const std::size_t n = row_coords.front().size();
    out.n = n;

    auto fill = [&](Labels& lab, const std::vector<std::vector<std::uint8_t>>& coords) {
        lab.n = n;
        lab.m = m;
        lab.count = coords.size();
        lab.block.assign(coords.size(), -1);
        lab.coords.resize(coords.size() * n);
        for (std::size_t i = 0; i < coords.size(); ++i)
            std::copy(coords[i].begin(), coords[i].end(), &lab.coords[i * n]);
    };
    fill(out.rows, row_coords);
    fill(out.cols, col_coords);
    return out;
}

} // namespace

TEST_CASE("one-label composition gives the scaled identity block") {
    linalg::RMatrix one(1, 1);
    one(0, 0) = 1.0;
    auto factor = make_plain(one, {{0}}, {{0}}, 4);
    auto composed = compose_gamma(factor, 3);

    CHECK(composed.rows.count == 3);
    CHECK(composed.cols.count == 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c)
            CHECK(composed.entries(r, c) == (r == c ? 2.0 : 0.0));
}

TEST_CASE("antidiagonal factor composes to norm ||F|| * (ell-1)^n") {
    linalg::RMatrix f(2, 2);
    f(0, 1) = 1.0;
    f(1, 0) = 1.0;
    auto factor = make_plain(f, {{0}, {1}}, {{0}, {1}}, 2);
    auto composed = compose_gamma(factor, 2);

    CHECK(composed.rows.count == 4);
    // off-diagonal label blocks are ones minus identity
    CHECK(composed.entries(0, 2) == 0.0);
    CHECK(composed.entries(0, 3) == 1.0);
    CHECK(spectral_norm(composed) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("identity factor composes to norm (ell-1)^n") {
    auto factor =
        make_plain(linalg::RMatrix::identity(2), {{0, 0}, {1, 1}}, {{0, 0}, {1, 1}}, 2);
    auto composed = compose_gamma(factor, 3);
    CHECK(composed.rows.count == 2 * 9);
    CHECK(spectral_norm(composed) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("hand-expanded bilinear value for the all-ones factor") {
    // two labels differing in both coordinates; uniform weights
    auto factor =
        make_plain(linalg::RMatrix::ones(2, 2), {{0, 0}, {1, 1}}, {{0, 0}, {1, 1}}, 2);
    const auto delta = DistVector::uniform(2);
    auto report = verify_composition(factor, delta, delta, 3);
    CHECK(report.bilinear_lhs == doctest::Approx(8.0).epsilon(1e-10)); // 2 (ell-1)^2
    CHECK(report.bilinear_rhs == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("blank-cell filter norms: sqrt(ell-1) per cell") {
    linalg::RMatrix f(2, 2);
    f(0, 1) = 1.0;
    f(1, 0) = 1.0;
    auto factor = make_plain(f, {{0}, {1}}, {{0}, {1}}, 2);
    for (std::size_t ell : {2, 3, 4}) {
        auto composed = compose_gamma(factor, ell);
        for (std::size_t q = 0; q < ell; ++q)
            CHECK(delta_cell_norm(composed, 0, q) ==
                  doctest::Approx(std::sqrt(double(ell - 1))).epsilon(1e-9));
    }
}

TEST_CASE("composition identities for the zero-extended stacked matrix") {
    auto gamma = build_gamma(3, 2, 3, 0);
    auto extended = zero_extend(gamma);
    const auto delta_p =
        zero_extend_weights(gamma, extended, DistVector::uniform(gamma.rows.count));
    const auto delta_q = DistVector::uniform(gamma.cols.count);

    auto report = verify_composition(extended, delta_p, delta_q, 2);
    CHECK(report.worst_relative_error < 1e-8);

    // spot values: the filtered norms scale by (ell-1)^(n-1) sqrt(ell-1)
    const double base_filter = delta_j_norm(extended, 0);
    CHECK(report.filter_rhs[0] ==
          doctest::Approx(base_filter * std::sqrt(1.0)).epsilon(1e-9));
    CHECK(report.bilinear_rhs ==
          doctest::Approx(std::pow(3.0, 2.0 / 3.0) * 1.0).epsilon(1e-7));
}

TEST_CASE("composition identities for a random dense factor") {
    // entries stay nonnegative: the norm identity is a theorem for
    // factors dominated by their absolute value, and provably fails for
    // some signed factors
    Rng rng(808);
    linalg::RMatrix f(4, 4);
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) f(r, c) = rng.unit();
    auto factor = make_plain(f, {{0}, {1}, {2}, {3}}, {{0}, {1}, {2}, {3}}, 4);

    std::vector<double> wp(4), wq(4);
    for (auto& x : wp) x = rng.unit() + 0.05;
    for (auto& x : wq) x = rng.unit() + 0.05;
    const auto delta_p = DistVector::from_weights(wp);
    const auto delta_q = DistVector::from_weights(wq);

    for (std::size_t ell : {2, 3}) {
        auto report = verify_composition(factor, delta_p, delta_q, ell);
        CHECK(report.worst_relative_error < 1e-8);
        CHECK(report.filter_lhs.size() == ell); // one bucket, ell cells
    }
}

TEST_CASE("signed factors can break the norm identity") {
    // the composed norm can exceed ||F|| (ell-1)^n once entries carry
    // mixed signs; the checker flags this as a hard error
    Rng rng(1212);
    linalg::RMatrix f(4, 4);
    for (auto& v : f.data()) v = rng.gaussian();
    auto factor = make_plain(f, {{0}, {1}, {2}, {3}}, {{0}, {1}, {2}, {3}}, 4);

    auto composed = compose_gamma(factor, 2);
    CHECK(spectral_norm(composed) > spectral_norm(factor) + 1e-3);
    CHECK_THROWS_AS(
        verify_composition(factor, DistVector::uniform(4), DistVector::uniform(4), 2),
        VerificationError);
}

TEST_CASE("composed label counts multiply by ell^n") {
    auto gamma = build_gamma(3, 2, 3, 0);
    auto composed = compose_gamma(gamma, 2);
    CHECK(composed.rows.count == gamma.rows.count * 8);
    CHECK(composed.cols.count == gamma.cols.count * 8);
    CHECK(composed.rows.ell == 2);
}

TEST_CASE("ones minus identity norms used by the composition") {
    for (std::size_t ell : {2, 3, 4}) {
        auto j_minus_i =
            linalg::RMatrix::ones(ell, ell) - linalg::RMatrix::identity(ell);
        CHECK(linalg::spectral_norm(j_minus_i) ==
              doctest::Approx(double(ell - 1)).epsilon(1e-12));
    }
}
