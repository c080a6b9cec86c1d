#pragma once

#include "dgsim/cpu_activity.hpp"
#include "dgsim/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace dgsim {

enum class EventKind : std::uint8_t {
    Begin,
    Get,
    Put,
    CommitRequest,
    CpuComplete,
    RemoteGet,
    ReadReply,
    RemotePrepare,
    PrepareReply,
    FinalCommit,
    Abort,
    Timeout,
    ClientReply,
    ClientWake,
};

std::string_view to_string(EventKind kind) noexcept;

enum class ReplyKind : std::uint8_t {
    None,
    BeginAck,
    OpAck,
    Committed,
    Aborted,
};

/// Kind-specific event content. Fields not used by a kind stay defaulted.
struct Payload {
    TxInfo tx;
    std::uint64_t op = 0;            // pending-op id, or client request id on client traffic
    Key key = 0;
    std::vector<Key> keys;
    std::uint32_t value_size = 0;
    std::uint32_t attempt = 0;       // 0 = first execution of a script
    bool ok = true;                  // prepare verdict
    bool propagated = false;         // FINAL_COMMIT forwarded by a primary
    ReplyKind reply = ReplyKind::None;
    std::uint64_t lamport = 0;       // sender logical clock on server-to-server traffic
    SimTime sent_at = 0.0;

    // CPU_COMPLETE only: the event that went through the CPU stage.
    EventKind deferred = EventKind::CpuComplete;
    CpuActivity activity = CpuActivity::TxBegin;
    ObjectId origin = 0;
};

struct SimEvent {
    SimTime timestamp = 0.0;
    ObjectId source = 0;
    ObjectId destination = 0;
    EventKind kind = EventKind::Begin;
    Payload payload;
};

} // namespace dgsim
