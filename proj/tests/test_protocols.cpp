#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "qmerkle/protocols.hpp"

using namespace qmerkle;
using namespace qmerkle::protocols;

TEST_CASE("config derives sizes and validates") {
    ProtocolConfig merkle{ProtocolKind::merkle1974, 16, 2, 0};
    CHECK(merkle.domain_size() == 256);
    CHECK(merkle.range_size() == 1048576);
    CHECK(merkle.group_order() == 1);

    ProtocolConfig classical{ProtocolKind::ksum_classical, 8, 2, 0};
    CHECK(classical.domain_size() == 64);
    CHECK(classical.range_size() == 32768);
    CHECK(classical.group_order() == pow_checked(8, 9));

    ProtocolConfig quantum{ProtocolKind::ksum_quantum, 8, 2, 0};
    CHECK(quantum.domain_size() == 512);

    ProtocolConfig bad{ProtocolKind::ksum_classical, 8, 5, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument); // k > N/2
    ProtocolConfig ok{ProtocolKind::ksum_classical, 8, 3, 0};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("alice_publish produces distinct images and meters exactly") {
    auto oracle = new_oracle(3, 16, 1024, 5);
    auto [X, Y] = alice_publish(oracle, 4);
    CHECK(X.size() == 4);
    CHECK(std::set<std::uint64_t>(Y.begin(), Y.end()).size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(oracle.peek_f(X[i]) == Y[i]);
    CHECK(oracle.query_count(Party::Alice).f >= 4); // N plus any resampling
}

TEST_CASE("alice_publish resampling is vanishing at r = N^5") {
    const std::size_t N = 16;
    std::uint64_t total_resamples = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto oracle = new_oracle(derive_seed(9, seed), N * N, pow_checked(N, 5), 5);
        alice_publish(oracle, N);
        total_resamples += oracle.query_count(Party::Alice).f - N;
    }
    CHECK(double(total_resamples) / 1000.0 < 0.01);
}

TEST_CASE("alice_publish fails loudly on a degenerate range") {
    auto oracle = new_oracle(3, 16, 2, 5); // only two possible images
    CHECK_THROWS_AS(alice_publish(oracle, 4), ProtocolError);
}

TEST_CASE("bob_solve classical: expected cost about kN") {
    const std::size_t N = 16, k = 2;
    double total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto oracle = new_oracle(derive_seed(10, seed), N * N, pow_checked(N, 5), 5);
        auto [X, Y] = alice_publish(oracle, N);
        (void)X;
        auto bob = bob_solve(oracle, Y, k, BobMode::classical);
        CHECK(bob.charged_queries == double(oracle.query_count(Party::Bob).f));
        total += bob.charged_queries;
    }
    const double mean = total / 1000.0;
    CHECK(mean > 27.0);
    CHECK(mean < 37.0); // kN(1 +- 0.15)
}

TEST_CASE("bob_solve returns sorted indices matching the images") {
    auto oracle = new_oracle(4, 256, pow_checked(16, 5), 5);
    auto [X, Y] = alice_publish(oracle, 16);
    (void)X;
    auto bob = bob_solve(oracle, Y, 3, BobMode::classical);
    REQUIRE(bob.indices.size() == 3);
    CHECK(std::is_sorted(bob.indices.begin(), bob.indices.end()));
    CHECK(std::adjacent_find(bob.indices.begin(), bob.indices.end()) == bob.indices.end());
    for (std::size_t j = 0; j < 3; ++j)
        CHECK(oracle.peek_f(bob.preimages[j]) == Y[bob.indices[j]]);
}

TEST_CASE("bob_solve quantum emulation: charge formula, no metering") {
    const std::size_t N = 16, k = 2;
    auto oracle = new_oracle(5, 4096, pow_checked(N, 7), 5);
    auto [X, Y] = alice_publish(oracle, N);
    (void)X;
    const auto before = oracle.query_count(Party::Bob).f;
    auto bob = bob_solve(oracle, Y, k, BobMode::quantum_emulated);
    CHECK(bob.charged_queries == 26.0); // 2 * ceil(pi/4 * sqrt(4096/16))
    CHECK(oracle.query_count(Party::Bob).f == before);
    for (std::size_t j = 0; j < k; ++j)
        CHECK(oracle.peek_f(bob.preimages[j]) == Y[bob.indices[j]]);
}

TEST_CASE("bob_solve with k = 0") {
    auto oracle = new_oracle(6, 64, 32768, 5);
    auto [X, Y] = alice_publish(oracle, 8);
    (void)X;
    auto bob = bob_solve(oracle, Y, 0, BobMode::classical);
    CHECK(bob.indices.empty());
    CHECK(bob.charged_queries == 0.0);
}

TEST_CASE("bob_announce sums t-values and meters k queries") {
    const std::uint64_t m = pow_checked(8, 9);
    auto oracle = new_oracle(7, 64, 32768, m);
    auto [X, Y] = alice_publish(oracle, 8);
    (void)X;
    auto bob = bob_solve(oracle, Y, 3, BobMode::classical);

    const auto before = oracle.query_count(Party::Bob).t;
    auto w = bob_announce(oracle, bob.preimages, m);
    CHECK(oracle.query_count(Party::Bob).t == before + 3);

    // recomputing from the transcript preimages reproduces w
    GroupElem again(0, m);
    for (auto x : bob.preimages) again = again + oracle.peek_t(x);
    CHECK(again == w);

    // single preimage: the announcement is just t(x)
    auto w1 = bob_announce(oracle, {bob.preimages[0]}, m);
    CHECK(w1 == oracle.peek_t(bob.preimages[0]));

    CHECK_THROWS_AS(bob_announce(oracle, {}, m), std::invalid_argument);
}

TEST_CASE("alice_recover finds Bob's subset and meters N t-queries") {
    const std::size_t N = 8, k = 2;
    const std::uint64_t m = pow_checked(N, 9);
    auto oracle = new_oracle(11, 64, 32768, m);
    auto [X, Y] = alice_publish(oracle, N);
    auto bob = bob_solve(oracle, Y, k, BobMode::classical);
    auto w = bob_announce(oracle, bob.preimages, m);

    const auto before = oracle.query_count(Party::Alice).t;
    auto recovered = alice_recover(oracle, X, w, k, m);
    CHECK(oracle.query_count(Party::Alice).t == before + N);
    REQUIRE(recovered.has_value());
    CHECK(*recovered == bob.indices);
}

TEST_CASE("ambiguous recovery is absent at m = N^9 over many trials") {
    // planted announcements isolate the ambiguity event itself: the union
    // bound C(N,k)/m ~ 2e-7 predicts zero collisions at this scale
    const std::size_t N = 8, k = 2;
    const std::uint64_t m = pow_checked(N, 9);
    std::size_t ambiguous = 0;
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        auto oracle = new_oracle(derive_seed(2222, seed), 64, 32768, m);
        auto [X, Y] = alice_publish(oracle, N);
        (void)Y;
        Rng rng(seed);
        const std::size_t i = rng.below(N), j = (i + 1 + rng.below(N - 1)) % N;
        auto w = oracle.peek_t(X[i]) + oracle.peek_t(X[j]);
        auto recovered = alice_recover(oracle, X, w, k, m);
        if (!recovered) ++ambiguous;
    }
    CHECK(ambiguous == 0);
}

TEST_CASE("run_protocol merkle1974") {
    ProtocolConfig cfg{ProtocolKind::merkle1974, 16, 2, 3};
    auto tr = run_protocol(cfg);
    CHECK(tr.success);
    CHECK(tr.alice_key == tr.bob_key);
    CHECK(!tr.w.has_value());
    CHECK(tr.announced_image().has_value());
    CHECK(tr.ledger.alice.f >= 16);
    CHECK(tr.ledger.alice.t == 0);

    // Bob's expected effort is about N
    double total = 0;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        ProtocolConfig c{ProtocolKind::merkle1974, 16, 2, derive_seed(31, seed)};
        total += double(run_protocol(c).ledger.bob.f);
    }
    const double mean = total / 300.0;
    CHECK(mean > 13.0);
    CHECK(mean < 19.0);
}

TEST_CASE("run_protocol ksum_classical end to end") {
    ProtocolConfig cfg{ProtocolKind::ksum_classical, 8, 3, 1};
    auto tr = run_protocol(cfg);
    CHECK(tr.success);
    CHECK(tr.alice_key == tr.bob_key);
    CHECK(tr.alice_key.size() == 3 * 8);
    REQUIRE(tr.w.has_value());

    // announced sum equals the sum over Bob's preimages
    auto oracle = cfg.make_oracle();
    GroupElem acc(0, cfg.group_order());
    for (auto x : tr.bob_preimages) acc = acc + oracle.peek_t(x);
    CHECK(acc == *tr.w);

    // determinism
    auto tr2 = run_protocol(cfg);
    CHECK(tr2.alice_key == tr.alice_key);
    CHECK(tr2.bob_key == tr.bob_key);
    CHECK(tr2.ledger == tr.ledger);
}

TEST_CASE("run_protocol ksum_quantum charges the square-root formula") {
    ProtocolConfig cfg{ProtocolKind::ksum_quantum, 8, 2, 5};
    auto tr = run_protocol(cfg);
    CHECK(tr.charged_bob_queries == 14.0); // 2 * ceil(pi/4 * sqrt(512/8))
    CHECK(tr.ledger.bob.f == 0);           // metering suppressed for the emulation
    CHECK(tr.ledger.bob.t == 2);
    CHECK(tr.success);
}

TEST_CASE("alice costs are exact in k-SUM kinds") {
    ProtocolConfig cfg{ProtocolKind::ksum_classical, 12, 3, 9};
    auto tr = run_protocol(cfg);
    CHECK(tr.ledger.alice.t == 12);
    CHECK(tr.ledger.alice.f >= 12);
}

TEST_CASE("transcript ledger equals oracle counters") {
    ProtocolConfig cfg{ProtocolKind::ksum_classical, 8, 2, 17};
    auto oracle = cfg.make_oracle();
    auto tr = run_protocol_with(cfg, oracle);
    CHECK(tr.ledger == read_ledger(oracle));
    CHECK(tr.ledger.eve == QueryCount{});
}

TEST_CASE("completeness across kinds at N = 8") {
    for (auto kind : {ProtocolKind::merkle1974, ProtocolKind::ksum_classical,
                      ProtocolKind::ksum_quantum}) {
        for (std::size_t k : {2, 3}) {
            std::size_t ok = 0;
            const std::size_t trials = 500;
            for (std::uint64_t seed = 0; seed < trials; ++seed) {
                ProtocolConfig cfg{kind, 8, k,
                                   derive_seed(900, seed, std::uint64_t(kind), k)};
                auto tr = run_protocol(cfg);
                if (tr.success) {
                    CHECK(tr.alice_key == tr.bob_key);
                    ++ok;
                }
            }
            CHECK(double(ok) / trials >= 0.98);
            if (kind == ProtocolKind::merkle1974) break; // k is ignored there
        }
    }
}

TEST_CASE("public view exposes no private data") {
    ProtocolConfig cfg{ProtocolKind::ksum_classical, 8, 2, 23};
    auto tr = run_protocol(cfg);
    auto view = PublicView::from(tr);
    CHECK(view.Y == tr.Y);
    CHECK(view.w == tr.w);
    CHECK(!view.announced_y.has_value());
    CHECK(view.d == 64);
    CHECK(view.m == pow_checked(8, 9));

    ProtocolConfig mcfg{ProtocolKind::merkle1974, 8, 2, 23};
    auto mtr = run_protocol(mcfg);
    auto mview = PublicView::from(mtr);
    CHECK(mview.announced_y == mtr.announced_image());
    CHECK(!mview.w.has_value());
}

TEST_CASE("make_key is fixed-width big-endian") {
    auto key = make_key(std::vector<std::uint64_t>{1, 0x0102030405060708ull});
    REQUIRE(key.size() == 16);
    CHECK(key[7] == 1);
    CHECK(key[8] == 0x01);
    CHECK(key[15] == 0x08);
}
