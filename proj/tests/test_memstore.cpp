// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "emo/memstore.hpp"
#include "emo/rng.hpp"
#include "page_oracles.hpp"

using namespace emo;
using namespace emo::memstore;

namespace {

LayerSchema tiny_schema() { return {{"w", {2}}}; }

GradSet value_of(double v) {
    GradSet g;
    g.add("w", Tensor::vector({v, -v}));
    return g;
}

Tensor key2(double a, double b) { return Tensor::vector({a, b}); }

MemoryStore make_store(size_t cap, ControllerKind kind) {
    return MemoryStore(cap, ControllerSpec{kind}, 2, tiny_schema());
}

} // namespace

TEST_CASE("retrieve returns nearest keys with index tie-break") {
    MemoryStore s = make_store(8, ControllerKind::FIFO);
    s.write(key2(0, 0), value_of(1));
    s.write(key2(3, 4), value_of(2));
    s.write(key2(1, 1), value_of(3));

    auto r = s.retrieve(key2(0, 0), 2);
    REQUIRE(r.size() == 2);
    CHECK(r[0].slot_index == 0);
    CHECK(r[1].slot_index == 2);

    auto all = s.retrieve(key2(0, 0), 10);
    CHECK(all.size() == 3);

    // Equal distances resolve to the lower slot index.
    MemoryStore t = make_store(4, ControllerKind::FIFO);
    t.write(key2(1, 0), value_of(1));
    t.write(key2(-1, 0), value_of(2));
    auto tied = t.retrieve(key2(0, 0), 1);
    REQUIRE(tied.size() == 1);
    CHECK(tied[0].slot_index == 0);

    CHECK(s.retrieve(key2(0, 0), 1).size() == 1);
    CHECK_THROWS_AS(s.retrieve(Tensor::vector({1.0}), 1), std::invalid_argument);
    MemoryStore empty = make_store(4, ControllerKind::FIFO);
    CHECK(empty.retrieve(key2(0, 0), 3).empty());
}

TEST_CASE("write appends then replaces via FIFO") {
    MemoryStore s = make_store(2, ControllerKind::FIFO);
    auto r1 = s.write(key2(0, 0), value_of(1));
    CHECK(r1.kind == MemoryStore::WriteResult::Appended);
    CHECK(r1.index == 0);
    s.write(key2(1, 0), value_of(2));
    auto r3 = s.write(key2(2, 0), value_of(3));
    CHECK(r3.kind == MemoryStore::WriteResult::Replaced);
    CHECK(r3.index == 0); // oldest in front
    CHECK(s.size() == 2);
}

TEST_CASE("LRU replaces the least recently used slot") {
    MemoryStore s = make_store(2, ControllerKind::LRU);
    s.write(key2(0, 0), value_of(1)); // A
    s.write(key2(5, 0), value_of(2)); // B
    auto hit = s.retrieve(key2(0, 0), 1);
    REQUIRE(hit.size() == 1);
    CHECK(hit[0].slot_index == 0);
    auto r = s.write(key2(9, 9), value_of(3)); // C
    CHECK(r.kind == MemoryStore::WriteResult::Replaced);
    CHECK(r.index == 1); // B was least recently used
}

TEST_CASE("CLOCK spares slots referenced since the last sweep") {
    MemoryStore s = make_store(3, ControllerKind::CLOCK);
    s.write(key2(0, 0), value_of(1));  // A
    s.write(key2(10, 0), value_of(2)); // B
    s.write(key2(20, 0), value_of(3)); // C
    auto hit = s.retrieve(key2(0, 0), 1);
    REQUIRE(hit[0].slot_index == 0); // access A
    auto r = s.write(key2(30, 0), value_of(4)); // D
    CHECK(r.kind == MemoryStore::WriteResult::Replaced);
    CHECK(r.index == 1); // A spared, B evicted
}

TEST_CASE("clock_victim with all bits clear picks the hand slot") {
    MemoryStore s = make_store(3, ControllerKind::CLOCK);
    s.write(key2(0, 0), value_of(1));
    s.write(key2(1, 0), value_of(2));
    s.write(key2(2, 0), value_of(3));
    CHECK(s.clock_victim() == 0);
    CHECK(s.clock_hand() == 1);
}

TEST_CASE("clock_victim with all bits set sweeps once and evicts the start slot") {
    MemoryStore s = make_store(3, ControllerKind::CLOCK);
    s.write(key2(0, 0), value_of(1));
    s.write(key2(10, 0), value_of(2));
    s.write(key2(20, 0), value_of(3));
    s.touch({0, 1, 2});
    size_t start = s.clock_hand();
    CHECK(s.clock_victim() == start);
    for (size_t i = 0; i < 3; ++i)
        CHECK(s.slot(i).ref_bit == false);
}

TEST_CASE("schema and capacity edge cases") {
    MemoryStore s = make_store(2, ControllerKind::FIFO);
    GradSet bad;
    bad.add("w", Tensor::vector({1.0})); // wrong shape
    CHECK_THROWS_AS(s.write(key2(0, 0), bad), std::invalid_argument);
    GradSet bad2;
    bad2.add("x", Tensor::vector({1.0, 2.0})); // wrong name
    CHECK_THROWS_AS(s.write(key2(0, 0), bad2), std::invalid_argument);

    MemoryStore zero = make_store(0, ControllerKind::FIFO);
    auto r = zero.write(key2(0, 0), value_of(1));
    CHECK(r.kind == MemoryStore::WriteResult::Ignored);
    CHECK(zero.size() == 0);
}

TEST_CASE("snapshot round trip is field-exact") {
    MemoryStore s = make_store(3, ControllerKind::CLOCK);
    s.write(key2(0.25, -1.5), value_of(1));
    s.write(key2(2, 3), value_of(2));
    s.retrieve(key2(0, 0), 1);
    s.write(key2(4, 5), value_of(3));
    s.write(key2(6, 7), value_of(4)); // forces a replacement, moves the hand

    auto bytes = s.snapshot();
    MemoryStore t = MemoryStore::load(bytes);
    CHECK(t.capacity() == s.capacity());
    CHECK(t.size() == s.size());
    CHECK(t.key_dim() == s.key_dim());
    CHECK(t.controller().kind == s.controller().kind);
    CHECK(t.global_tick() == s.global_tick());
    CHECK(t.clock_hand() == s.clock_hand());
    for (size_t i = 0; i < s.size(); ++i) {
        CHECK(t.slot(i).insert_tick == s.slot(i).insert_tick);
        CHECK(t.slot(i).last_access_tick == s.slot(i).last_access_tick);
        CHECK(t.slot(i).ref_bit == s.slot(i).ref_bit);
        for (size_t j = 0; j < 2; ++j) CHECK(t.slot(i).key.data[j] == s.slot(i).key.data[j]);
        CHECK(max_abs_diff(t.slot(i).values, s.slot(i).values) == 0.0);
    }
    CHECK(t.snapshot() == bytes);
}

TEST_CASE("snapshot error paths") {
    MemoryStore s = make_store(2, ControllerKind::FIFO);
    s.write(key2(1, 2), value_of(1));
    auto bytes = s.snapshot();

    auto corrupted = bytes;
    corrupted[0] = 'X';
    CHECK_THROWS_WITH_AS(MemoryStore::load(corrupted), doctest::Contains("bad-magic"),
                         SnapshotError);

    auto truncated = bytes;
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_WITH_AS(MemoryStore::load(truncated), doctest::Contains("truncated"),
                         SnapshotError);

    auto badver = bytes;
    badver[4] = 9;
    CHECK_THROWS_WITH_AS(MemoryStore::load(badver), doctest::Contains("bad-version"),
                         SnapshotError);

    MemoryStore empty = make_store(5, ControllerKind::LRU);
    MemoryStore loaded = MemoryStore::load(empty.snapshot());
    CHECK(loaded.size() == 0);
    CHECK(loaded.capacity() == 5);
}

TEST_CASE("frozen mode suppresses writes and metadata updates") {
    MemoryStore s = make_store(3, ControllerKind::LRU);
    s.write(key2(0, 0), value_of(1));
    s.write(key2(5, 5), value_of(2));
    s.set_frozen(true);

    auto before = s.snapshot();
    auto r = s.write(key2(9, 9), value_of(3));
    CHECK(r.kind == MemoryStore::WriteResult::Ignored);
    auto got = s.retrieve(key2(0, 0), 2);
    CHECK(got.size() == 2);
    s.touch({0});
    CHECK(s.snapshot() == before);

    s.set_frozen(false);
    s.retrieve(key2(0, 0), 1);
    CHECK(s.snapshot() != before);
}

TEST_CASE("controllers match textbook simulators on random traces") {
    RngStream rng(2024);
    for (int trace = 0; trace < 200; ++trace) {
        size_t cap = 2 + rng.index(6);
        auto kind = static_cast<ControllerKind>(rng.index(3));
        MemoryStore store(cap, ControllerSpec{kind}, 2, tiny_schema());
        page_oracles::FifoSim fifo(cap);
        page_oracles::LruSim lru(cap);
        page_oracles::ClockSim clock(cap);

        for (int op = 0; op < 200; ++op) {
            if (rng.uniform01() < 0.55) {
                auto res = store.write(key2(rng.gauss(0, 2), rng.gauss(0, 2)),
                                       value_of(rng.gauss(0, 1)));
                size_t expect = size_t(-1);
                switch (kind) {
                case ControllerKind::FIFO: expect = fifo.write(); break;
                case ControllerKind::LRU: expect = lru.write(); break;
                case ControllerKind::CLOCK: expect = clock.write(); break;
                }
                if (res.kind == MemoryStore::WriteResult::Appended)
                    REQUIRE(expect == size_t(-1));
                else
                    REQUIRE(res.index == expect);
                REQUIRE(store.size() <= cap);
            } else if (store.size() > 0) {
                size_t k = 1 + rng.index(3);
                auto got = store.retrieve(key2(rng.gauss(0, 2), rng.gauss(0, 2)), k);
                std::vector<size_t> accessed;
                for (auto& r : got) accessed.push_back(r.slot_index);
                std::sort(accessed.begin(), accessed.end());
                switch (kind) {
                case ControllerKind::FIFO: fifo.access(accessed); break;
                case ControllerKind::LRU: lru.access(accessed); break;
                case ControllerKind::CLOCK: clock.access(accessed); break;
                }
            }
        }
    }
}

TEST_CASE("retrieve does not mutate values; write leaves other keys alone") {
    MemoryStore s = make_store(2, ControllerKind::FIFO);
    s.write(key2(0, 0), value_of(1));
    s.write(key2(1, 1), value_of(2));
    Tensor key_before = s.slot(1).key;
    GradSet val_before = clone(s.slot(0).values);
    s.retrieve(key2(0, 0), 2);
    CHECK(max_abs_diff(s.slot(0).values, val_before) == 0.0);
    s.write(key2(7, 7), value_of(9)); // replaces slot 0 (FIFO)
    for (size_t j = 0; j < 2; ++j) CHECK(s.slot(1).key.data[j] == key_before.data[j]);
}
