// Copyright 2026 The emo-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emo/params.hpp"
#include "emo/tensor.hpp"

namespace emo::memstore {

enum class ControllerKind { FIFO, LRU, CLOCK };

struct ControllerSpec {
    ControllerKind kind = ControllerKind::FIFO;
};

const char* controller_name(ControllerKind k);
ControllerKind controller_from_name(const std::string& name);

/// One stored episode: task key, per-layer gradient values, and the
/// controller metadata. Ticks are store-wide and never decrease.
struct MemorySlot {
    Tensor key;
    GradSet values;
    uint64_t insert_tick = 0;
    uint64_t last_access_tick = 0;
    bool ref_bit = false;
};

struct SnapshotError : std::runtime_error {
    explicit SnapshotError(std::string c)
        : std::runtime_error("snapshot: " + c), code(std::move(c)) {}
    std::string code;
};

/// Fixed-capacity key-value episodic memory with kNN retrieval by Euclidean
/// key distance and FIFO/LRU/CLOCK replacement. While the store is full, a
/// write overwrites the controller's victim in place.
///
/// Frozen mode (meta-test): writes are no-ops and retrieval suppresses all
/// metadata updates, so a snapshot is byte-identical across any sequence of
/// frozen operations.
class MemoryStore {
public:
    MemoryStore(size_t capacity, ControllerSpec controller, size_t key_dim, LayerSchema schema);

    size_t capacity() const { return capacity_; }
    size_t size() const { return slots_.size(); }
    size_t key_dim() const { return key_dim_; }
    const LayerSchema& schema() const { return schema_; }
    ControllerSpec controller() const { return controller_; }
    const MemorySlot& slot(size_t i) const { return slots_.at(i); }
    uint64_t global_tick() const { return global_tick_; }
    size_t clock_hand() const { return clock_hand_; }

    bool frozen() const { return frozen_; }
    void set_frozen(bool f) { frozen_ = f; }

    struct Retrieved {
        size_t slot_index;
        const GradSet* values;
        double distance2;
    };

    /// k nearest slots by squared Euclidean key distance, ties broken by
    /// lower slot index. Marks the returned slots as accessed unless frozen.
    std::vector<Retrieved> retrieve(const Tensor& query_key, size_t k);

    /// Same selection as retrieve() but never touches metadata.
    std::vector<Retrieved> peek(const Tensor& query_key, size_t k) const;

    /// Mark slots as accessed in one event (ascending index order).
    void touch(const std::vector<size_t>& slot_indices);

    struct WriteResult {
        enum Kind { Appended, Replaced, Ignored } kind;
        size_t index;
    };

    WriteResult write(const Tensor& key, const GradSet& values);

    /// CLOCK victim: sweep from the hand clearing set ref bits; the first
    /// clear slot is the victim and the hand advances past it.
    size_t clock_victim();

    std::vector<uint8_t> snapshot() const;
    static MemoryStore load(const std::vector<uint8_t>& bytes);

private:
    size_t pick_victim();

    size_t capacity_;
    ControllerSpec controller_;
    size_t key_dim_;
    LayerSchema schema_;
    std::vector<MemorySlot> slots_;
    size_t clock_hand_ = 0;
    uint64_t global_tick_ = 0;
    bool frozen_ = false;
};

} // namespace emo::memstore
