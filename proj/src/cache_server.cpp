#include "dgsim/cache_server.hpp"

#include "dgsim/errors.hpp"

#include <algorithm>

namespace dgsim {

CacheServer::CacheServer(ServerId id, const OwnerDirectory& directory, const CcProtocol& protocol,
                         CpuModel cpu, NetworkModel& network, StatsCollector& sink,
                         ServerOptions options, RandomStream cpu_rng, RandomStream net_rng)
    : id_(id), directory_(directory), protocol_(protocol), cpu_(std::move(cpu)), network_(network),
      sink_(sink), options_(options), cpu_rng_(std::move(cpu_rng)), net_rng_(std::move(net_rng)),
      rate_(network.options().rate_half_life) {}

void CacheServer::handle(const SimEvent& event, Kernel& kernel) {
    logical_ = std::max(logical_, event.payload.lamport) + 1;
    switch (event.kind) {
    case EventKind::Begin: stage(CpuActivity::TxBegin, event, kernel); return;
    case EventKind::Get: stage(CpuActivity::LocalTxGet, event, kernel); return;
    case EventKind::Put: stage(CpuActivity::LocalTxPut, event, kernel); return;
    case EventKind::CommitRequest: stage(CpuActivity::TxPrepare, event, kernel); return;
    case EventKind::RemoteGet: stage(CpuActivity::LocalTxGetFromRemote, event, kernel); return;
    case EventKind::RemotePrepare: stage(CpuActivity::TxPrepare, event, kernel); return;
    case EventKind::FinalCommit: stage(CpuActivity::DistributedFinalTxCommit, event, kernel); return;
    case EventKind::Abort: stage(CpuActivity::TxAbort, event, kernel); return;
    case EventKind::ReadReply: on_read_reply(event, kernel); return;
    case EventKind::PrepareReply: on_prepare_reply(event, kernel); return;
    case EventKind::Timeout: on_timeout(event, kernel); return;
    case EventKind::CpuComplete: complete(event, kernel); return;
    case EventKind::ClientReply:
    case EventKind::ClientWake: break;
    }
    throw ModelError("cache server received " + std::string(to_string(event.kind)));
}

void CacheServer::stage(CpuActivity activity, const SimEvent& event, Kernel& kernel) {
    SimEvent done;
    done.timestamp = cpu_.submit(activity, kernel.now(), cpu_rng_);
    done.source = id_;
    done.destination = id_;
    done.kind = EventKind::CpuComplete;
    done.payload = event.payload;
    if (event.kind == EventKind::CpuComplete) {
        // Second stage of the same request: keep the original kind and origin.
        done.payload.activity = activity;
    } else {
        done.payload.deferred = event.kind;
        done.payload.activity = activity;
        done.payload.origin = event.source;
    }
    done.payload.lamport = 0;
    kernel.schedule(std::move(done));
}

void CacheServer::complete(const SimEvent& event, Kernel& kernel) {
    const Payload& p = event.payload;
    switch (p.deferred) {
    case EventKind::Begin: begin_done(p, p.origin, kernel); return;
    case EventKind::Get:
        if (p.activity == CpuActivity::LocalTxGet) {
            get_done(event, kernel);
        } else {
            send_remote_gets(p, kernel);
        }
        return;
    case EventKind::Put: put_done(p, kernel); return;
    case EventKind::CommitRequest: commit_done(p, kernel); return;
    case EventKind::RemoteGet: remote_get_done(p, p.origin, kernel); return;
    case EventKind::RemotePrepare:
        participant_prepare(p.tx, p.keys, p.origin, p.op, nullptr, kernel);
        return;
    case EventKind::FinalCommit: final_commit_done(p, kernel); return;
    case EventKind::Abort: abort_done(p, kernel); return;
    case EventKind::PrepareReply:
        coordinator_finalize(p,
                             p.activity == CpuActivity::DistributedFinalTxCommit ? TxOutcome::Committed
                                                                                 : TxOutcome::Aborted,
                             kernel);
        return;
    default: break;
    }
    throw ModelError("CPU completion for unexpected " + std::string(to_string(p.deferred)));
}

Transaction& CacheServer::transaction(const TxId& id, const char* what) {
    auto it = tx_.find(id);
    if (it == tx_.end()) throw ModelError(std::string(what) + " for unknown transaction " + id.str());
    return it->second;
}

void CacheServer::begin_done(const Payload& p, ObjectId client, Kernel& kernel) {
    Transaction t;
    t.info.id = TxId{id_, ++next_seq_};
    t.client = client;
    t.client_request = p.op;
    t.statistics.start = p.sent_at;
    t.statistics.attempt = p.attempt;
    t.statistics.client = client;
    protocol_.setup_transaction(t.info, t.statistics, SetupContext{id_, logical_, kernel.now()});
    TxId tid = t.info.id;
    Transaction& stored = tx_.emplace(tid, std::move(t)).first->second;
    reply_client(client, p.op, ReplyKind::BeginAck, stored.info, kernel);
}

void CacheServer::get_done(const SimEvent& cpu_done, Kernel& kernel) {
    const Payload& p = cpu_done.payload;
    Transaction& t = transaction(p.tx.id, "get");
    if (t.phase != TxPhase::Active) throw ModelError("get for non-active transaction " + t.info.id.str());
    if (t.in_write_set(p.key) || t.in_read_set(p.key)) {
        reply_client(t.client, t.client_request, ReplyKind::OpAck, t.info, kernel);
        return;
    }
    if (directory_.is_owner(id_, p.key)) {
        if (!reads_.emplace(t.info.id, ReadWaiter{true, p.key, t.client, 0}).second)
            throw ModelError("concurrent reads for transaction " + t.info.id.str());
        CcInvocation inv;
        inv.type = CcOp::Read;
        inv.info = t.info;
        inv.statistics = &t.statistics;
        inv.key = p.key;
        invoke(inv, kernel);
        return;
    }
    stage(CpuActivity::TxSendRemoteTxGet, cpu_done, kernel);
}

void CacheServer::send_remote_gets(const Payload& p, Kernel& kernel) {
    Transaction& t = transaction(p.tx.id, "get");
    PendingOp op;
    op.id = ++next_op_;
    op.tx = t.info.id;
    op.kind = PendingKind::Read;
    op.key = p.key;
    op.client = t.client;
    op.client_request = t.client_request;
    for (ServerId s : directory_.owners(p.key)) op.contacted.push_back(s);
    std::uint64_t id = op.id;
    std::vector<ServerId> targets = op.contacted;
    pending_.emplace(id, std::move(op));
    for (ServerId s : targets) {
        Payload q;
        q.tx = t.info;
        q.key = p.key;
        q.op = id;
        send(kernel, s, EventKind::RemoteGet, std::move(q), network_.sizes().keys_only(1), MessageClass::Read);
    }
}

void CacheServer::put_done(const Payload& p, Kernel& kernel) {
    Transaction& t = transaction(p.tx.id, "put");
    if (t.phase != TxPhase::Active) throw ModelError("put for non-active transaction " + t.info.id.str());
    t.put(p.key, p.value_size != 0 ? p.value_size : options_.value_size);
    reply_client(t.client, t.client_request, ReplyKind::OpAck, t.info, kernel);
}

void CacheServer::commit_done(const Payload& p, Kernel& kernel) {
    Transaction& t = transaction(p.tx.id, "commit");
    if (t.phase != TxPhase::Active) throw ModelError("commit for non-active transaction " + t.info.id.str());
    if (t.write_set.empty()) {
        t.statistics.read_only = true;
        t.phase = TxPhase::Committing;
        Payload q;
        q.tx = t.info;
        coordinator_finalize(q, TxOutcome::Committed, kernel);
        return;
    }
    t.statistics.read_only = false;
    t.statistics.prepare_start = kernel.now();
    t.phase = TxPhase::Preparing;

    std::map<ServerId, std::vector<Key>> parts;
    for (const auto& [key, size] : t.write_set) {
        if (options_.ownership == Ownership::Primary) {
            parts[directory_.primary(key)].push_back(key);
        } else {
            for (ServerId s : directory_.owners(key)) parts[s].push_back(key);
        }
    }
    PendingOp op;
    op.id = ++next_op_;
    op.tx = t.info.id;
    op.kind = PendingKind::Prepare;
    op.client = t.client;
    op.client_request = t.client_request;
    for (auto& [server, keys] : parts) {
        std::sort(keys.begin(), keys.end());
        op.contacted.push_back(server);
        op.keys.push_back(keys);
    }
    std::uint64_t id = op.id;
    pending_.emplace(id, op);
    for (std::size_t i = 0; i < op.contacted.size(); ++i) {
        ServerId s = op.contacted[i];
        if (s == id_) {
            participant_prepare(t.info, op.keys[i], id_, id, &t.statistics, kernel);
        } else {
            Payload q;
            q.tx = t.info;
            q.keys = op.keys[i];
            q.op = id;
            send(kernel, s, EventKind::RemotePrepare, std::move(q), network_.sizes().keys_only(op.keys[i].size()),
                 MessageClass::Prepare);
        }
    }
}

void CacheServer::remote_get_done(const Payload& p, ObjectId origin, Kernel& kernel) {
    if (!reads_.emplace(p.tx.id, ReadWaiter{false, p.key, origin, p.op}).second)
        throw ModelError("concurrent reads for transaction " + p.tx.id.str());
    CcInvocation inv;
    inv.type = CcOp::Read;
    inv.info = p.tx;
    inv.key = p.key;
    invoke(inv, kernel);
}

void CacheServer::participant_prepare(const TxInfo& info, std::vector<Key> keys, ObjectId coordinator,
                                      std::uint64_t op, TxStatistics* stats, Kernel& kernel) {
    if (tombstones_.erase(info.id) != 0) {
        // The abort overtook the prepare; answer so the coordinator can retire the op.
        Participant late{info, coordinator, op, std::move(keys), false, false};
        send_prepare_reply(late, false, kernel);
        return;
    }
    auto [it, fresh] = participants_.try_emplace(info.id, Participant{info, coordinator, op, keys, false, false});
    if (!fresh) throw ModelError("duplicate prepare for transaction " + info.id.str());
    CcInvocation inv;
    inv.type = CcOp::Prepare;
    inv.info = info;
    inv.statistics = stats;
    inv.write_set_keys = std::move(keys);
    invoke(inv, kernel);
}

void CacheServer::final_commit_done(const Payload& p, Kernel& kernel) {
    auto it = participants_.find(p.tx.id);
    CcInvocation inv;
    inv.type = CcOp::Commit;
    inv.info = p.tx;
    if (it != participants_.end()) {
        inv.info = it->second.info;
        if (it->second.granted && observer_) observer_->released(id_, p.tx.id, kernel.now());
        auto tx_it = tx_.find(p.tx.id);
        if (tx_it != tx_.end()) inv.statistics = &tx_it->second.statistics;
    }
    invoke(inv, kernel);
    if (it != participants_.end()) participants_.erase(p.tx.id);

    if (options_.ownership != Ownership::Primary || p.propagated) return;
    std::map<ServerId, std::vector<Key>> forward;
    for (Key k : p.keys) {
        for (ServerId s : directory_.owners(k))
            if (s != id_) forward[s].push_back(k);
    }
    for (auto& [server, keys] : forward) {
        Payload q;
        q.tx = p.tx;
        q.keys = std::move(keys);
        q.propagated = true;
        std::uint32_t bytes = network_.sizes().with_values(q.keys.size(),
                                                           std::uint64_t(q.keys.size()) * options_.value_size);
        send(kernel, server, EventKind::FinalCommit, std::move(q), bytes, MessageClass::Outcome);
    }
}

void CacheServer::abort_done(const Payload& p, Kernel& kernel) {
    auto it = participants_.find(p.tx.id);
    if (it == participants_.end()) {
        tombstones_.insert(p.tx.id);
        return;
    }
    if (it->second.granted && observer_) observer_->released(id_, p.tx.id, kernel.now());
    CcInvocation inv;
    inv.type = CcOp::Abort;
    inv.info = it->second.info;
    auto tx_it = tx_.find(p.tx.id);
    if (tx_it != tx_.end()) inv.statistics = &tx_it->second.statistics;
    invoke(inv, kernel);
    participants_.erase(p.tx.id);
}

void CacheServer::coordinator_finalize(const Payload& p, TxOutcome outcome, Kernel& kernel) {
    Transaction& t = transaction(p.tx.id, "finalize");
    protocol_.finalize_transaction(t.info, t.statistics, kernel.now(), outcome);
    t.phase = outcome == TxOutcome::Committed ? TxPhase::Committed : TxPhase::Aborted;
    sink_.record(protocol_.statistics_log(t.info, t.statistics));
    ObjectId client = t.client;
    std::uint64_t request = t.client_request;
    TxInfo info = t.info;
    tx_.erase(info.id);
    reply_client(client, request, outcome == TxOutcome::Committed ? ReplyKind::Committed : ReplyKind::Aborted,
                 info, kernel);
}

void CacheServer::on_read_reply(const SimEvent& event, Kernel& kernel) {
    const Payload& p = event.payload;
    auto it = pending_.find(p.op);
    if (it == pending_.end() || it->second.kind != PendingKind::Read)
        throw ModelError("read reply for unknown op " + std::to_string(p.op));
    PendingOp& op = it->second;
    ++op.replies_seen;
    if (op.replies_seen == 1) {
        Transaction& t = transaction(op.tx, "read reply");
        t.read_set.push_back(op.key);
        reply_client(t.client, t.client_request, ReplyKind::OpAck, t.info, kernel);
    }
    if (op.complete()) pending_.erase(it);
}

void CacheServer::on_prepare_reply(const SimEvent& event, Kernel& kernel) {
    const Payload& p = event.payload;
    auto it = pending_.find(p.op);
    if (it == pending_.end() || it->second.kind != PendingKind::Prepare)
        throw ModelError("prepare reply for unknown op " + std::to_string(p.op));
    PendingOp& op = it->second;
    ++op.replies_seen;
    if (!p.ok) op.all_ok = false;
    if (!op.decided) {
        if (!p.ok) {
            decide(op, false, kernel);
        } else if (op.complete()) {
            decide(op, true, kernel);
        }
    }
    if (op.complete()) pending_.erase(it);
}

void CacheServer::decide(PendingOp& op, bool commit, Kernel& kernel) {
    op.decided = true;
    Transaction& t = transaction(op.tx, "decision");
    t.phase = commit ? TxPhase::Committing : TxPhase::Aborted;
    for (std::size_t i = 0; i < op.contacted.size(); ++i) {
        Payload q;
        q.tx = t.info;
        q.op = op.id;
        if (commit) {
            q.keys = op.keys[i];
            std::uint32_t bytes = network_.sizes().with_values(q.keys.size(),
                                                               std::uint64_t(q.keys.size()) * options_.value_size);
            send(kernel, op.contacted[i], EventKind::FinalCommit, std::move(q), bytes, MessageClass::Outcome);
        } else {
            send(kernel, op.contacted[i], EventKind::Abort, std::move(q), network_.sizes().control(),
                 MessageClass::Outcome);
        }
    }
    SimEvent finish;
    finish.source = id_;
    finish.kind = EventKind::PrepareReply;
    finish.payload.tx = t.info;
    stage(commit ? CpuActivity::DistributedFinalTxCommit : CpuActivity::TxAbort, finish, kernel);
}

void CacheServer::on_timeout(const SimEvent& event, Kernel& kernel) {
    auto it = participants_.find(event.payload.tx.id);
    if (it == participants_.end() || it->second.replied) return;
    CcInvocation inv;
    inv.type = CcOp::Timeout;
    inv.info = it->second.info;
    invoke(inv, kernel);
}

void CacheServer::invoke(const CcInvocation& inv, Kernel& kernel) {
    std::vector<CcIndication> out = protocol_.invoke(inv, table_);
    if (observer_) observer_->invoked(id_, inv, out);
    dispatch(out, kernel);
}

void CacheServer::dispatch(const std::vector<CcIndication>& indications, Kernel& kernel) {
    for (const CcIndication& ind : indications) {
        switch (ind.kind) {
        case IndicationKind::ReadDone: {
            auto it = reads_.find(ind.tx);
            if (it == reads_.end()) throw ModelError("READ_DONE for unknown transaction " + ind.tx.str());
            ReadWaiter w = it->second;
            reads_.erase(it);
            if (w.local) {
                Transaction& t = transaction(ind.tx, "read");
                t.read_set.push_back(w.key);
                reply_client(t.client, t.client_request, ReplyKind::OpAck, t.info, kernel);
            } else {
                Payload q;
                q.tx.id = ind.tx;
                q.key = w.key;
                q.op = w.op;
                send(kernel, w.requester, EventKind::ReadReply, std::move(q),
                     network_.sizes().with_values(1, options_.value_size), MessageClass::Read);
            }
            break;
        }
        case IndicationKind::PrepareDone:
        case IndicationKind::PrepareFail: {
            auto it = participants_.find(ind.tx);
            if (it == participants_.end())
                throw ModelError(std::string(to_string(ind.kind)) + " for unknown transaction " + ind.tx.str());
            Participant& e = it->second;
            if (e.replied) break;
            bool ok = ind.kind == IndicationKind::PrepareDone;
            if (ok) {
                e.granted = true;
                if (observer_) observer_->granted(id_, ind.tx, e.keys, kernel.now());
            }
            send_prepare_reply(e, ok, kernel);
            break;
        }
        case IndicationKind::TxWait:
            if (!participants_.contains(ind.tx) && !reads_.contains(ind.tx))
                throw ModelError("TX_WAIT for unknown transaction " + ind.tx.str());
            break;
        case IndicationKind::CommitDone:
            break;
        case IndicationKind::TimeoutRequest: {
            SimEvent e;
            e.timestamp = kernel.now() + ind.timeout;
            e.source = id_;
            e.destination = id_;
            e.kind = EventKind::Timeout;
            e.payload.tx.id = ind.tx;
            kernel.schedule(std::move(e));
            break;
        }
        }
    }
}

void CacheServer::send_prepare_reply(Participant& entry, bool ok, Kernel& kernel) {
    entry.replied = true;
    Payload q;
    q.tx = entry.info;
    q.op = entry.op;
    q.ok = ok;
    send(kernel, entry.coordinator, EventKind::PrepareReply, std::move(q), network_.sizes().control(),
         MessageClass::Prepare);
}

void CacheServer::reply_client(ObjectId client, std::uint64_t request, ReplyKind kind, const TxInfo& info,
                               Kernel& kernel) {
    SimEvent e;
    e.timestamp = kernel.now();
    e.source = id_;
    e.destination = client;
    e.kind = EventKind::ClientReply;
    e.payload.tx = info;
    e.payload.op = request;
    e.payload.reply = kind;
    e.payload.sent_at = kernel.now();
    kernel.schedule(std::move(e));
}

void CacheServer::send(Kernel& kernel, ObjectId to, EventKind kind, Payload payload, std::uint32_t bytes,
                       MessageClass cls) {
    payload.lamport = logical_;
    payload.sent_at = kernel.now();
    double delay = 0.0;
    if (to != id_) {
        delay = network_.delay_for_send(id_, static_cast<ServerId>(to), cpu_, rate_, bytes, kernel.now(), net_rng_,
                                        cls);
        ++remote_sends_;
    }
    kernel.schedule(SimEvent{kernel.now() + delay, id_, to, kind, std::move(payload)});
}

} // namespace dgsim
