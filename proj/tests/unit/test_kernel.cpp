#include "dgsim/errors.hpp"
#include "dgsim/kernel.hpp"
#include "dgsim/random.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dgsim;

namespace {

struct Recorder : SimObject {
    std::vector<std::pair<SimTime, std::uint64_t>> seen;
    void handle(const SimEvent& e, Kernel&) override { seen.emplace_back(e.timestamp, e.payload.op); }
};

SimEvent at(SimTime t, ObjectId dst, std::uint64_t tag) {
    SimEvent e;
    e.timestamp = t;
    e.destination = dst;
    e.kind = EventKind::ClientWake;
    e.payload.op = tag;
    return e;
}

// Reschedules itself with a random delay; used for determinism checks.
struct Bouncer : SimObject {
    RandomStream rng;
    int left;
    explicit Bouncer(std::uint64_t seed, int n) : rng(seed), left(n) {}
    void start(Kernel& k) override { k.schedule(at(0.0, self, 0)); }
    void handle(const SimEvent& e, Kernel& k) override {
        if (--left > 0) k.schedule(at(e.timestamp + rng.exponential(1.0), self, 0));
    }
    ObjectId self = 0;
};

} // namespace

TEST(Kernel, DequeuesByTimestamp) {
    Kernel k;
    Recorder r;
    k.add(r);
    k.schedule(at(5.0, 0, 1));
    k.schedule(at(3.0, 0, 2));
    k.drain();
    ASSERT_EQ(r.seen.size(), 2u);
    EXPECT_EQ(r.seen[0].first, 3.0);
    EXPECT_EQ(r.seen[1].first, 5.0);
}

TEST(Kernel, EqualTimestampsAreFifo) {
    Kernel k;
    Recorder r;
    k.add(r);
    for (std::uint64_t i = 0; i < 50; ++i) k.schedule(at(4.0, 0, i));
    k.drain();
    for (std::uint64_t i = 0; i < 50; ++i) EXPECT_EQ(r.seen[i].second, i);
}

TEST(Kernel, SchedulingIntoThePastIsFatal) {
    Kernel k;
    Recorder r;
    k.add(r);
    k.schedule(at(2.0, 0, 0));
    k.drain();
    EXPECT_EQ(k.now(), 2.0);
    EXPECT_THROW(k.schedule(at(1.0, 0, 0)), CausalityError);
}

TEST(Kernel, UnknownDestinationIsFatal) {
    Kernel k;
    Recorder r;
    k.add(r);
    EXPECT_THROW(k.schedule(at(1.0, 7, 0)), ModelError);
}

TEST(Kernel, TimeBudgetStopsBeforeLaterEvents) {
    Kernel k;
    Recorder r;
    k.add(r);
    k.schedule(at(1.0, 0, 0));
    k.schedule(at(3.0, 0, 1));
    EXPECT_EQ(k.run(RunBudget{2.0, std::nullopt}), StopReason::TimeLimit);
    EXPECT_EQ(k.now(), 2.0);
    EXPECT_EQ(r.seen.size(), 1u);
    EXPECT_EQ(k.pending(), 1u);
}

TEST(Kernel, CommitBudgetStopsAtTheCount) {
    Kernel k;
    Recorder r;
    k.add(r);
    for (int i = 0; i < 10; ++i) k.schedule(at(i, 0, 0));
    auto count = [&] { return static_cast<std::uint64_t>(r.seen.size()); };
    EXPECT_EQ(k.run(RunBudget{std::nullopt, 4}, count), StopReason::CommitLimit);
    EXPECT_EQ(r.seen.size(), 4u);
    EXPECT_EQ(k.run(RunBudget{std::nullopt, 0}, count), StopReason::CommitLimit);
    EXPECT_EQ(r.seen.size(), 4u);
}

TEST(Kernel, ClockNeverMovesBackwards) {
    Kernel k;
    Bouncer a(1, 500), b(2, 500);
    a.self = k.add(a);
    b.self = k.add(b);
    SimTime last = 0.0;
    bool monotone = true;
    k.set_observer([&](const SimEvent& e) {
        monotone = monotone && e.timestamp >= last;
        last = e.timestamp;
    });
    k.drain();
    EXPECT_TRUE(monotone);
    EXPECT_EQ(k.dispatched(), 1000u);
}

TEST(Kernel, IdenticalRunsHaveIdenticalTraceHashes) {
    auto run = [](std::uint64_t seed) {
        Kernel k;
        Bouncer a(seed, 300), b(seed + 1, 300);
        a.self = k.add(a);
        b.self = k.add(b);
        k.drain();
        return k.trace_hash();
    };
    EXPECT_EQ(run(10), run(10));
    EXPECT_NE(run(10), run(11));
}

TEST(RandomStream, ChildStreamsDependOnlyOnTheirCoordinates) {
    auto a = RandomStream::child(99, 3, StreamPurpose::Cpu);
    auto unrelated = RandomStream::child(99, 4, StreamPurpose::Cpu);
    (void)unrelated.uniform();
    auto b = RandomStream::child(99, 3, StreamPurpose::Cpu);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());

    std::set<double> firsts;
    for (std::uint32_t obj = 0; obj < 50; ++obj)
        for (auto p : {StreamPurpose::Cpu, StreamPurpose::Network, StreamPurpose::Workload})
            firsts.insert(RandomStream::child(99, obj, p).uniform());
    EXPECT_EQ(firsts.size(), 150u);
}

TEST(RandomStream, ExponentialMean) {
    RandomStream rng(5);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += rng.exponential(0.002);
    EXPECT_NEAR(sum / n, 0.002, 0.002 * 0.01);
}
