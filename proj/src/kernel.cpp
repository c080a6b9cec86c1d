#include "dgsim/kernel.hpp"

#include "dgsim/errors.hpp"

#include <bit>
#include <string>

namespace dgsim {

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::Begin: return "BEGIN";
    case EventKind::Get: return "GET";
    case EventKind::Put: return "PUT";
    case EventKind::CommitRequest: return "COMMIT_REQUEST";
    case EventKind::CpuComplete: return "CPU_COMPLETE";
    case EventKind::RemoteGet: return "REMOTE_GET";
    case EventKind::ReadReply: return "READ_REPLY";
    case EventKind::RemotePrepare: return "REMOTE_PREPARE";
    case EventKind::PrepareReply: return "PREPARE_REPLY";
    case EventKind::FinalCommit: return "FINAL_COMMIT";
    case EventKind::Abort: return "ABORT";
    case EventKind::Timeout: return "TIMEOUT";
    case EventKind::ClientReply: return "CLIENT_REPLY";
    case EventKind::ClientWake: return "CLIENT_WAKE";
    }
    return "?";
}

ObjectId Kernel::add(SimObject& object) {
    objects_.push_back(&object);
    return static_cast<ObjectId>(objects_.size() - 1);
}

void Kernel::schedule(SimEvent event) {
    if (event.timestamp < now_)
        throw CausalityError("event " + std::string(to_string(event.kind)) + " scheduled at " +
                             std::to_string(event.timestamp) + " before clock " +
                             std::to_string(now_));
    if (event.destination >= objects_.size())
        throw ModelError("event destination " + std::to_string(event.destination) +
                         " is not a registered object");
    queue_.push(Queued{std::move(event), next_seq_++});
}

void Kernel::started() {
    if (started_) return;
    started_ = true;
    for (SimObject* o : objects_) o->start(*this);
}

void Kernel::hash_event(const SimEvent& e) noexcept {
    auto mix = [this](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            trace_hash_ ^= (v >> (8 * i)) & 0xffU;
            trace_hash_ *= 0x100000001b3ULL;
        }
    };
    mix(std::bit_cast<std::uint64_t>(e.timestamp));
    mix((static_cast<std::uint64_t>(e.source) << 32) | e.destination);
    mix(static_cast<std::uint64_t>(e.kind));
}

StopReason Kernel::run(const RunBudget& budget, const std::function<std::uint64_t()>& committed) {
    started();
    if (budget.max_commits && committed && committed() >= *budget.max_commits)
        return StopReason::CommitLimit;
    while (!queue_.empty()) {
        if (budget.max_time && queue_.top().event.timestamp > *budget.max_time) {
            now_ = *budget.max_time;
            return StopReason::TimeLimit;
        }
        // priority_queue::top is const; the element is popped right after.
        SimEvent event = std::move(const_cast<Queued&>(queue_.top()).event);
        queue_.pop();
        now_ = event.timestamp;
        ++dispatched_;
        ++per_kind_[static_cast<std::size_t>(event.kind)];
        hash_event(event);
        if (recording_)
            trace_.push_back({event.timestamp, event.source, event.destination, event.kind,
                              event.payload.deferred, event.payload.activity});
        if (observer_) observer_(event);
        objects_[event.destination]->handle(event, *this);
        if (budget.max_commits && committed && committed() >= *budget.max_commits)
            return StopReason::CommitLimit;
    }
    if (budget.max_time && now_ < *budget.max_time) now_ = *budget.max_time;
    return StopReason::Drained;
}

} // namespace dgsim
