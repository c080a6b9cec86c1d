#pragma once

#include "dgsim/concurrency_control.hpp"

#include <deque>
#include <map>
#include <unordered_map>

namespace dgsim {

/// Wait-for table: per key, a FIFO of transactions; the head holds the lock.
class LockTable : public CcTable {
public:
    struct Entry {
        TxInfo info;
        std::vector<Key> keys;
        bool granted = false;
    };

    std::map<Key, std::deque<TxId>> wait_for;
    std::unordered_map<TxId, Entry> active_tx;

    bool heads_all(const Entry& e) const;
    /// Unlinks `tx` from every row and from the active index; returns the
    /// rows it appeared in.
    std::vector<Key> unlink(const TxId& tx);
};

class TimestampLockTable : public LockTable {
public:
    std::map<Key, LogicalStamp> dot;   // last committed write timestamp per key
};

/// Two-phase locking at prepare: a preparing transaction is queued on every
/// key it writes and is prepared once it heads all of them. Reads never block.
class Lock2pc : public CcProtocol {
public:
    explicit Lock2pc(ProtocolOptions options) : options_(options) {}

    std::string_view name() const override { return "lock2pc"; }
    std::vector<CcIndication> invoke(const CcInvocation& invocation,
                                     std::unique_ptr<CcTable>& table) const override;

protected:
    virtual std::unique_ptr<LockTable> allocate() const;
    /// Admission test run before queueing; false means immediate PREPARE_FAIL.
    virtual bool admit(const LockTable&, const TxInfo&, const std::vector<Key>&) const {
        return true;
    }
    virtual void on_commit(LockTable&, const LockTable::Entry&) const {}

    void release(LockTable& table, const TxId& tx, std::vector<CcIndication>& out) const;

    ProtocolOptions options_;
};

/// Lock2pc gated by data-object timestamps: a transaction prepares only if
/// its timestamp exceeds the last committed write timestamp of every key it
/// writes. The same gate is re-applied when a queued transaction reaches the
/// head of its rows, so per-key commit timestamps only grow.
class Timestamp2pc : public Lock2pc {
public:
    explicit Timestamp2pc(ProtocolOptions options) : Lock2pc(options) {}

    std::string_view name() const override { return "ts2pc"; }
    void setup_transaction(TxInfo& info, TxStatistics& stats, const SetupContext& ctx) const override;

protected:
    std::unique_ptr<LockTable> allocate() const override;
    bool admit(const LockTable& table, const TxInfo& info, const std::vector<Key>& keys) const override;
    void on_commit(LockTable& table, const LockTable::Entry& entry) const override;
};

} // namespace dgsim
