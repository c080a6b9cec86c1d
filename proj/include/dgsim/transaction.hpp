#pragma once

#include "dgsim/types.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace dgsim {

enum class TxPhase : std::uint8_t { Active, Preparing, Committing, Aborted, Committed };
enum class TxOutcome : std::uint8_t { Pending, Committed, Aborted };

/// Coordinator-only bookkeeping; never copied onto events.
struct TxStatistics {
    SimTime start = 0.0;
    std::optional<SimTime> prepare_start;
    std::optional<SimTime> end;
    TxOutcome outcome = TxOutcome::Pending;
    std::uint32_t attempt = 0;
    bool read_only = true;
    ObjectId client = 0;
};

/// What statistics_log hands to the report sink.
struct TxRecord {
    TxId id;
    ObjectId client = 0;
    SimTime start = 0.0;
    SimTime end = 0.0;
    TxOutcome outcome = TxOutcome::Pending;
    bool read_only = true;
    std::uint32_t attempt = 0;

    SimTime latency() const noexcept { return end - start; }
};

/// Coordinator-side transaction record.
struct Transaction {
    TxInfo info;
    TxStatistics statistics;
    ObjectId client = 0;
    std::uint64_t client_request = 0;
    std::vector<std::pair<Key, std::uint32_t>> write_set;
    std::vector<Key> read_set;
    TxPhase phase = TxPhase::Active;

    bool in_write_set(Key k) const noexcept {
        for (const auto& [key, size] : write_set)
            if (key == k) return true;
        return false;
    }
    bool in_read_set(Key k) const noexcept {
        for (Key key : read_set)
            if (key == k) return true;
        return false;
    }
    /// Last write to a key within the transaction wins.
    void put(Key k, std::uint32_t size) {
        for (auto& [key, s] : write_set)
            if (key == k) {
                s = size;
                return;
            }
        write_set.emplace_back(k, size);
    }
};

enum class PendingKind : std::uint8_t { Read, Prepare };

/// An outstanding fan-out (remote read or prepare) at the coordinator.
/// Retired only once every contacted server has answered.
struct PendingOp {
    std::uint64_t id = 0;
    TxId tx;
    PendingKind kind = PendingKind::Read;
    std::vector<ServerId> contacted;
    std::vector<std::vector<Key>> keys;   // Prepare only: keys sent to each contacted server
    std::size_t replies_seen = 0;
    bool all_ok = true;
    bool decided = false;
    Key key = 0;                 // Read only
    ObjectId client = 0;
    std::uint64_t client_request = 0;

    bool complete() const noexcept { return replies_seen == contacted.size(); }
};

} // namespace dgsim
