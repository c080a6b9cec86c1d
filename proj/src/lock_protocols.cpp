#include "dgsim/lock_protocols.hpp"

#include "dgsim/errors.hpp"

#include <algorithm>
#include <set>

namespace dgsim {

bool LockTable::heads_all(const Entry& e) const {
    for (Key k : e.keys) {
        auto it = wait_for.find(k);
        if (it == wait_for.end() || it->second.empty() || it->second.front() != e.info.id)
            return false;
    }
    return true;
}

std::vector<Key> LockTable::unlink(const TxId& tx) {
    std::vector<Key> rows;
    auto it = active_tx.find(tx);
    if (it == active_tx.end()) return rows;
    for (Key k : it->second.keys) {
        auto row = wait_for.find(k);
        if (row == wait_for.end()) continue;
        auto& q = row->second;
        q.erase(std::remove(q.begin(), q.end(), tx), q.end());
        rows.push_back(k);
        if (q.empty()) wait_for.erase(row);
    }
    active_tx.erase(it);
    return rows;
}

std::unique_ptr<LockTable> Lock2pc::allocate() const { return std::make_unique<LockTable>(); }

std::vector<CcIndication> Lock2pc::invoke(const CcInvocation& inv,
                                          std::unique_ptr<CcTable>& handle) const {
    if (!handle) handle = allocate();
    auto* table = dynamic_cast<LockTable*>(handle.get());
    if (!table) throw ModelError(std::string(name()) + ": foreign CC table handle");
    const TxId& id = inv.info.id;
    std::vector<CcIndication> out;

    switch (inv.type) {
    case CcOp::Read:
        if (!inv.key) throw ModelError("READ invocation without a key for " + id.str());
        out.push_back({IndicationKind::ReadDone, id});
        break;

    case CcOp::Prepare: {
        if (inv.write_set_keys.empty())
            throw ModelError("PREPARE invocation without write-set keys for " + id.str());
        if (table->active_tx.contains(id))
            throw ModelError("transaction " + id.str() + " prepared twice");
        std::vector<Key> keys = inv.write_set_keys;
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
        if (!admit(*table, inv.info, keys)) {
            out.push_back({IndicationKind::PrepareFail, id});
            break;
        }
        for (Key k : keys) table->wait_for[k].push_back(id);
        auto& entry = table->active_tx[id];
        entry.info = inv.info;
        entry.keys = std::move(keys);
        if (table->heads_all(entry)) {
            entry.granted = true;
            out.push_back({IndicationKind::PrepareDone, id});
        } else {
            out.push_back({IndicationKind::TxWait, id});
            out.push_back({IndicationKind::TimeoutRequest, id, options_.deadlock_timeout});
        }
        break;
    }

    case CcOp::Commit: {
        auto it = table->active_tx.find(id);
        if (it == table->active_tx.end()) break;
        on_commit(*table, it->second);
        out.push_back({IndicationKind::CommitDone, id});
        release(*table, id, out);
        break;
    }

    case CcOp::Abort:
        if (!table->active_tx.contains(id)) break;
        out.push_back({IndicationKind::PrepareFail, id});
        release(*table, id, out);
        break;

    case CcOp::Timeout: {
        auto it = table->active_tx.find(id);
        if (it == table->active_tx.end() || it->second.granted) break;
        out.push_back({IndicationKind::PrepareFail, id});
        release(*table, id, out);
        break;
    }
    }
    return out;
}

void Lock2pc::release(LockTable& table, const TxId& tx, std::vector<CcIndication>& out) const {
    const std::vector<Key> rows = table.unlink(tx);
    std::set<Key> pending(rows.begin(), rows.end());
    while (!pending.empty()) {
        const Key k = *pending.begin();
        pending.erase(pending.begin());
        auto row = table.wait_for.find(k);
        if (row == table.wait_for.end() || row->second.empty()) continue;
        const TxId head = row->second.front();
        auto& entry = table.active_tx.at(head);
        if (entry.granted || !table.heads_all(entry)) continue;
        if (admit(table, entry.info, entry.keys)) {
            entry.granted = true;
            out.push_back({IndicationKind::PrepareDone, head});
        } else {
            for (Key r : table.unlink(head)) pending.insert(r);
            out.push_back({IndicationKind::PrepareFail, head});
        }
    }
}

void Timestamp2pc::setup_transaction(TxInfo& info, TxStatistics&, const SetupContext& ctx) const {
    info.timestamp = LogicalStamp{ctx.logical_clock, ctx.coordinator};
}

std::unique_ptr<LockTable> Timestamp2pc::allocate() const {
    return std::make_unique<TimestampLockTable>();
}

bool Timestamp2pc::admit(const LockTable& base, const TxInfo& info,
                         const std::vector<Key>& keys) const {
    const auto& table = static_cast<const TimestampLockTable&>(base);
    for (Key k : keys) {
        auto it = table.dot.find(k);
        if (it != table.dot.end() && !(info.timestamp > it->second)) return false;
    }
    return true;
}

void Timestamp2pc::on_commit(LockTable& base, const LockTable::Entry& entry) const {
    auto& table = static_cast<TimestampLockTable&>(base);
    for (Key k : entry.keys) table.dot[k] = entry.info.timestamp;
}

} // namespace dgsim
