#pragma once

#include "dgsim/event.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

namespace dgsim {

class Kernel;

/// Anything that consumes events: clients and cache servers.
class SimObject {
public:
    virtual ~SimObject() = default;

    /// Called once before the first event is dispatched.
    virtual void start(Kernel&) {}
    virtual void handle(const SimEvent& event, Kernel& kernel) = 0;
};

struct RunBudget {
    std::optional<SimTime> max_time;
    std::optional<std::uint64_t> max_commits;
};

enum class StopReason : std::uint8_t { Drained, TimeLimit, CommitLimit };

struct TraceEntry {
    SimTime timestamp;
    ObjectId source;
    ObjectId destination;
    EventKind kind;
    EventKind deferred;   // meaningful for CPU_COMPLETE only
    CpuActivity activity; // meaningful for CPU_COMPLETE only

    bool operator==(const TraceEntry&) const = default;
};

/// Sequential discrete-event engine. Events are totally ordered by
/// (timestamp, insertion sequence); the clock only moves to the timestamp of
/// the event being dispatched.
class Kernel {
public:
    /// Registers an object and returns its id (ids are dense, starting at 0).
    ObjectId add(SimObject& object);

    /// Throws CausalityError for timestamps before now() and ModelError for
    /// unknown destinations.
    void schedule(SimEvent event);

    /// Dispatches events until the budget is exhausted or no event is left.
    /// `committed` reports the running commit count for commit budgets.
    StopReason run(const RunBudget& budget, const std::function<std::uint64_t()>& committed = {});

    /// Dispatches every remaining event.
    void drain() { run(RunBudget{}); }

    SimTime now() const noexcept { return now_; }
    bool empty() const noexcept { return queue_.empty(); }
    std::size_t pending() const noexcept { return queue_.size(); }
    std::uint64_t dispatched() const noexcept { return dispatched_; }
    std::uint64_t dispatched(EventKind kind) const noexcept {
        return per_kind_[static_cast<std::size_t>(kind)];
    }

    /// FNV-1a over every dispatched (timestamp, source, destination, kind).
    std::uint64_t trace_hash() const noexcept { return trace_hash_; }

    /// When enabled, every dispatched event is appended to trace().
    void record_trace(bool on) { recording_ = on; }
    const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

    /// Optional hook invoked before each dispatch (used by tests).
    void set_observer(std::function<void(const SimEvent&)> observer) {
        observer_ = std::move(observer);
    }

private:
    struct Queued {
        SimEvent event;
        std::uint64_t seq;
    };
    struct Later {
        bool operator()(const Queued& a, const Queued& b) const noexcept {
            if (a.event.timestamp != b.event.timestamp)
                return a.event.timestamp > b.event.timestamp;
            return a.seq > b.seq;
        }
    };

    void started();
    void hash_event(const SimEvent& e) noexcept;

    std::vector<SimObject*> objects_;
    std::priority_queue<Queued, std::vector<Queued>, Later> queue_;
    SimTime now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatched_ = 0;
    std::uint64_t per_kind_[16] = {};
    std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
    bool started_ = false;
    bool recording_ = false;
    std::vector<TraceEntry> trace_;
    std::function<void(const SimEvent&)> observer_;
};

} // namespace dgsim
