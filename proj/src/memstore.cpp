// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "emo/memstore.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

namespace emo::memstore {

const char* controller_name(ControllerKind k) {
    switch (k) {
    case ControllerKind::FIFO: return "fifo";
    case ControllerKind::LRU: return "lru";
    case ControllerKind::CLOCK: return "clock";
    }
    return "?";
}

ControllerKind controller_from_name(const std::string& name) {
    if (name == "fifo" || name == "FIFO") return ControllerKind::FIFO;
    if (name == "lru" || name == "LRU") return ControllerKind::LRU;
    if (name == "clock" || name == "CLOCK") return ControllerKind::CLOCK;
    throw std::invalid_argument("unknown controller '" + name + "'");
}

MemoryStore::MemoryStore(size_t capacity, ControllerSpec controller, size_t key_dim,
                         LayerSchema schema)
    : capacity_(capacity), controller_(controller), key_dim_(key_dim), schema_(std::move(schema)) {}

namespace {

void check_values(const LayerSchema& schema, const GradSet& values) {
    if (values.size() != schema.size())
        throw std::invalid_argument("memstore: value layer count " +
                                    std::to_string(values.size()) + " != schema " +
                                    std::to_string(schema.size()));
    for (size_t i = 0; i < schema.size(); ++i)
        if (values[i].first != schema[i].first || values[i].second.shape != schema[i].second)
            throw std::invalid_argument("memstore: value layer '" + values[i].first +
                                        "' does not match schema layer '" + schema[i].first + "'");
}

} // namespace

std::vector<MemoryStore::Retrieved> MemoryStore::peek(const Tensor& query_key, size_t k) const {
    if (k < 1) throw std::invalid_argument("retrieve: k must be >= 1");
    if (query_key.numel() != key_dim_)
        throw std::invalid_argument("retrieve: key dim " + std::to_string(query_key.numel()) +
                                    " != " + std::to_string(key_dim_));
    std::vector<std::pair<double, size_t>> order;
    order.reserve(slots_.size());
    for (size_t i = 0; i < slots_.size(); ++i) {
        double d2 = 0.0;
        for (size_t j = 0; j < key_dim_; ++j) {
            double diff = slots_[i].key.data[j] - query_key.data[j];
            d2 += diff * diff;
        }
        order.emplace_back(d2, i);
    }
    std::sort(order.begin(), order.end());
    std::vector<Retrieved> out;
    size_t n = std::min(k, order.size());
    out.reserve(n);
    for (size_t i = 0; i < n; ++i)
        out.push_back({order[i].second, &slots_[order[i].second].values, order[i].first});
    return out;
}

std::vector<MemoryStore::Retrieved> MemoryStore::retrieve(const Tensor& query_key, size_t k) {
    auto out = peek(query_key, k);
    if (!frozen_ && !out.empty()) {
        ++global_tick_;
        for (const auto& r : out) {
            slots_[r.slot_index].last_access_tick = global_tick_;
            slots_[r.slot_index].ref_bit = true;
        }
    }
    return out;
}

void MemoryStore::touch(const std::vector<size_t>& slot_indices) {
    if (frozen_ || slot_indices.empty()) return;
    ++global_tick_;
    for (size_t i : slot_indices) {
        slots_.at(i).last_access_tick = global_tick_;
        slots_.at(i).ref_bit = true;
    }
}

size_t MemoryStore::clock_victim() {
    if (slots_.size() < capacity_ || slots_.empty())
        throw std::logic_error("clock_victim: store not full");
    while (slots_[clock_hand_].ref_bit) {
        slots_[clock_hand_].ref_bit = false;
        clock_hand_ = (clock_hand_ + 1) % slots_.size();
    }
    size_t victim = clock_hand_;
    clock_hand_ = (victim + 1) % slots_.size();
    return victim;
}

size_t MemoryStore::pick_victim() {
    switch (controller_.kind) {
    case ControllerKind::FIFO: {
        size_t best = 0;
        for (size_t i = 1; i < slots_.size(); ++i)
            if (slots_[i].insert_tick < slots_[best].insert_tick) best = i;
        return best;
    }
    case ControllerKind::LRU: {
        size_t best = 0;
        for (size_t i = 1; i < slots_.size(); ++i)
            if (slots_[i].last_access_tick < slots_[best].last_access_tick) best = i;
        return best;
    }
    case ControllerKind::CLOCK:
        return clock_victim();
    }
    throw std::logic_error("pick_victim: bad controller");
}

MemoryStore::WriteResult MemoryStore::write(const Tensor& key, const GradSet& values) {
    if (key.numel() != key_dim_)
        throw std::invalid_argument("write: key dim " + std::to_string(key.numel()) + " != " +
                                    std::to_string(key_dim_));
    check_values(schema_, values);
    if (frozen_ || capacity_ == 0) return {WriteResult::Ignored, 0};

    ++global_tick_;
    if (slots_.size() < capacity_) {
        MemorySlot s;
        s.key = key;
        s.values = clone(values);
        s.insert_tick = global_tick_;
        s.last_access_tick = global_tick_;
        s.ref_bit = false; // not yet referenced; the hand spares accessed slots only
        slots_.push_back(std::move(s));
        return {WriteResult::Appended, slots_.size() - 1};
    }
    size_t victim = pick_victim();
    MemorySlot& s = slots_[victim];
    s.key = key;
    s.values = clone(values);
    s.insert_tick = global_tick_;
    s.last_access_tick = global_tick_;
    s.ref_bit = true;
    return {WriteResult::Replaced, victim};
}

namespace {

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(uint8_t(v >> (8 * i)));
}
void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(uint8_t(v >> (8 * i)));
}
void put_f64(std::vector<uint8_t>& b, double v) { put_u64(b, std::bit_cast<uint64_t>(v)); }

struct Reader {
    const std::vector<uint8_t>& b;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > b.size()) throw SnapshotError("truncated");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(b[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(b.data() + pos), n);
        pos += n;
        return s;
    }
    uint8_t u8() {
        need(1);
        return b[pos++];
    }
};

constexpr char kMagic[4] = {'E', 'M', 'O', '1'};
constexpr uint32_t kVersion = 1;

} // namespace

std::vector<uint8_t> MemoryStore::snapshot() const {
    std::vector<uint8_t> b;
    b.insert(b.end(), kMagic, kMagic + 4);
    put_u32(b, kVersion);
    put_u32(b, uint32_t(key_dim_));
    put_u32(b, uint32_t(schema_.size()));
    for (const auto& [name, shape] : schema_) {
        put_u32(b, uint32_t(name.size()));
        b.insert(b.end(), name.begin(), name.end());
        put_u32(b, uint32_t(shape.size()));
        for (size_t d : shape) put_u32(b, uint32_t(d));
    }
    put_u32(b, uint32_t(capacity_));
    put_u32(b, uint32_t(controller_.kind));
    put_u32(b, uint32_t(slots_.size()));
    for (const MemorySlot& s : slots_) {
        for (double v : s.key.data) put_f64(b, v);
        for (const auto& [k, t] : s.values)
            for (double v : t.data) put_f64(b, v);
    }
    for (const MemorySlot& s : slots_) {
        put_u64(b, s.insert_tick);
        put_u64(b, s.last_access_tick);
        b.push_back(s.ref_bit ? 1 : 0);
    }
    put_u64(b, global_tick_);
    put_u32(b, uint32_t(clock_hand_));
    return b;
}

MemoryStore MemoryStore::load(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw SnapshotError("bad-magic");
    r.pos = 4;
    if (r.u32() != kVersion) throw SnapshotError("bad-version");
    size_t key_dim = r.u32();
    size_t n_layers = r.u32();
    LayerSchema schema;
    for (size_t i = 0; i < n_layers; ++i) {
        std::string name = r.str(r.u32());
        size_t nd = r.u32();
        std::vector<size_t> shape;
        for (size_t d = 0; d < nd; ++d) shape.push_back(r.u32());
        schema.emplace_back(std::move(name), std::move(shape));
    }
    size_t capacity = r.u32();
    auto kind = static_cast<ControllerKind>(r.u32());
    if (kind != ControllerKind::FIFO && kind != ControllerKind::LRU &&
        kind != ControllerKind::CLOCK)
        throw SnapshotError("bad-controller");
    size_t n_slots = r.u32();
    if (n_slots > capacity) throw SnapshotError("bad-slot-count");

    MemoryStore store(capacity, ControllerSpec{kind}, key_dim, schema);
    store.slots_.reserve(n_slots);
    for (size_t i = 0; i < n_slots; ++i) {
        MemorySlot s;
        s.key = Tensor::zeros({key_dim});
        for (size_t j = 0; j < key_dim; ++j) s.key.data[j] = r.f64();
        for (const auto& [name, shape] : schema) {
            Tensor t = Tensor::zeros(shape);
            for (double& v : t.data) v = r.f64();
            s.values.add(name, std::move(t));
        }
        store.slots_.push_back(std::move(s));
    }
    for (size_t i = 0; i < n_slots; ++i) {
        store.slots_[i].insert_tick = r.u64();
        store.slots_[i].last_access_tick = r.u64();
        store.slots_[i].ref_bit = r.u8() != 0;
    }
    store.global_tick_ = r.u64();
    store.clock_hand_ = r.u32();
    if (store.clock_hand_ >= std::max<size_t>(1, n_slots)) throw SnapshotError("bad-clock-hand");
    return store;
}

} // namespace emo::memstore
