#pragma once

#include "dgsim/concurrency_control.hpp"
#include "dgsim/cpu_model.hpp"
#include "dgsim/kernel.hpp"
#include "dgsim/net_oracle.hpp"
#include "dgsim/placement.hpp"
#include "dgsim/stats.hpp"
#include "dgsim/transaction.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dgsim {

enum class Ownership : std::uint8_t { Primary, MultiMaster };

/// Hooks for test instrumentation (lock monitors, invocation recorders).
class ServerObserver {
public:
    virtual ~ServerObserver() = default;
    virtual void invoked(ServerId, const CcInvocation&, const std::vector<CcIndication>&) {}
    virtual void granted(ServerId, TxId, std::span<const Key>, SimTime) {}
    virtual void released(ServerId, TxId, SimTime) {}
};

struct ServerOptions {
    Ownership ownership = Ownership::Primary;
    std::uint32_t value_size = 1024;
};

/// Transaction manager of one cache server. Every incoming event first goes
/// through the CPU; its CPU_COMPLETE self-event carries the deferred work.
/// Server object ids equal server ids.
class CacheServer : public SimObject {
public:
    CacheServer(ServerId id, const OwnerDirectory& directory, const CcProtocol& protocol,
                CpuModel cpu, NetworkModel& network, StatsCollector& sink, ServerOptions options,
                RandomStream cpu_rng, RandomStream net_rng);

    void handle(const SimEvent& event, Kernel& kernel) override;

    void set_observer(ServerObserver* observer) noexcept { observer_ = observer; }

    ServerId id() const noexcept { return id_; }
    CpuModel& cpu() noexcept { return cpu_; }
    const SendRateMeter& send_rate() const noexcept { return rate_; }
    std::uint64_t logical_clock() const noexcept { return logical_; }

    std::size_t active_transactions() const noexcept { return tx_.size(); }
    std::size_t pending_ops() const noexcept { return pending_.size(); }
    std::size_t participant_entries() const noexcept { return participants_.size(); }
    std::size_t parked_reads() const noexcept { return reads_.size(); }
    std::size_t tombstones() const noexcept { return tombstones_.size(); }
    std::uint64_t remote_sends() const noexcept { return remote_sends_; }

private:
    struct Participant {
        TxInfo info;
        ObjectId coordinator = 0;
        std::uint64_t op = 0;
        std::vector<Key> keys;
        bool replied = false;
        bool granted = false;
    };
    struct ReadWaiter {
        bool local = true;
        Key key = 0;
        ObjectId requester = 0;   // coordinator for remote reads
        std::uint64_t op = 0;
    };

    void stage(CpuActivity activity, const SimEvent& event, Kernel& kernel);
    void complete(const SimEvent& event, Kernel& kernel);

    void begin_done(const Payload& p, ObjectId client, Kernel& kernel);
    void get_done(const SimEvent& cpu_done, Kernel& kernel);
    void send_remote_gets(const Payload& p, Kernel& kernel);
    void put_done(const Payload& p, Kernel& kernel);
    void commit_done(const Payload& p, Kernel& kernel);
    void remote_get_done(const Payload& p, ObjectId origin, Kernel& kernel);
    void participant_prepare(const TxInfo& info, std::vector<Key> keys, ObjectId coordinator,
                             std::uint64_t op, TxStatistics* stats, Kernel& kernel);
    void final_commit_done(const Payload& p, Kernel& kernel);
    void abort_done(const Payload& p, Kernel& kernel);
    void coordinator_finalize(const Payload& p, TxOutcome outcome, Kernel& kernel);

    void on_read_reply(const SimEvent& event, Kernel& kernel);
    void on_prepare_reply(const SimEvent& event, Kernel& kernel);
    void on_timeout(const SimEvent& event, Kernel& kernel);

    void decide(PendingOp& op, bool commit, Kernel& kernel);
    void invoke(const CcInvocation& inv, Kernel& kernel);
    void dispatch(const std::vector<CcIndication>& indications, Kernel& kernel);
    void send_prepare_reply(Participant& entry, bool ok, Kernel& kernel);

    Transaction& transaction(const TxId& id, const char* what);
    void reply_client(ObjectId client, std::uint64_t request, ReplyKind kind, const TxInfo& info,
                      Kernel& kernel);
    void send(Kernel& kernel, ObjectId to, EventKind kind, Payload payload, std::uint32_t bytes,
              MessageClass cls);

    ServerId id_;
    const OwnerDirectory& directory_;
    const CcProtocol& protocol_;
    CpuModel cpu_;
    NetworkModel& network_;
    StatsCollector& sink_;
    ServerOptions options_;
    RandomStream cpu_rng_;
    RandomStream net_rng_;
    SendRateMeter rate_;
    ServerObserver* observer_ = nullptr;

    std::unique_ptr<CcTable> table_;
    std::uint64_t logical_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_op_ = 0;
    std::uint64_t remote_sends_ = 0;
    std::unordered_map<TxId, Transaction> tx_;
    std::map<std::uint64_t, PendingOp> pending_;
    std::unordered_map<TxId, Participant> participants_;
    std::unordered_map<TxId, ReadWaiter> reads_;
    std::unordered_set<TxId> tombstones_;
};

} // namespace dgsim
