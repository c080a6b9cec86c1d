#include "dgsim/random.hpp"
#include "dgsim/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace dgsim;

namespace {

TxRecord rec(SimTime start, SimTime end, bool read_only, TxOutcome outcome, std::uint32_t attempt = 0) {
    TxRecord r;
    r.start = start;
    r.end = end;
    r.read_only = read_only;
    r.outcome = outcome;
    r.attempt = attempt;
    return r;
}

SimulationReport with_throughput(double t) {
    SimulationReport r;
    r.throughput = t;
    return r;
}

} // namespace

TEST(QuantileSketch, RelativeErrorWithinAlpha) {
    QuantileSketch sketch(0.005);
    RandomStream rng(1);
    std::vector<double> v;
    for (int i = 0; i < 100000; ++i) {
        double x = rng.exponential(2e-3) + 1e-5;
        v.push_back(x);
        sketch.add(x);
    }
    std::sort(v.begin(), v.end());
    for (double q : {0.01, 0.25, 0.5, 0.9, 0.95, 0.99}) {
        double exact = v[static_cast<std::size_t>(q * (v.size() - 1))];
        EXPECT_NEAR(sketch.quantile(q), exact, 0.005 * exact * 1.0001) << "q " << q;
    }
    EXPECT_EQ(sketch.count(), 100000u);
}

TEST(Stats, ThroughputOverThePostWarmupSpan) {
    StatsCollector c(5.0);
    for (int i = 0; i < 100; ++i) c.record(rec(5.0 + i * 0.1, 5.05 + i * 0.1, true, TxOutcome::Committed));
    auto r = c.finalize(15.0);
    EXPECT_DOUBLE_EQ(r.throughput, 10.0);
}

TEST(Stats, CommitProbabilityCountsEveryAttempt) {
    StatsCollector c(0.0);
    for (int i = 0; i < 80; ++i) c.record(rec(0.0, 1.0, false, TxOutcome::Committed, i % 2));
    for (int i = 0; i < 20; ++i) c.record(rec(0.0, 1.0, false, TxOutcome::Aborted));
    auto r = c.finalize(2.0);
    EXPECT_DOUBLE_EQ(*r.commit_probability, 0.8);
    EXPECT_EQ(r.aborts, 20u);
    EXPECT_EQ(r.retries, 40u);
}

TEST(Stats, AllRecordsInsideWarmupGiveNoSamples) {
    StatsCollector c(10.0);
    c.record(rec(1.0, 2.0, false, TxOutcome::Committed));
    auto r = c.finalize(20.0);
    EXPECT_TRUE(r.no_samples());
    EXPECT_FALSE(r.commit_probability);
    EXPECT_FALSE(r.update_latency);
    EXPECT_EQ(c.total_commits(), 1u);
    std::ostringstream out;
    write_table(out, r);
    EXPECT_NE(out.str().find("no samples"), std::string::npos);
}

TEST(Stats, NoContentionMeansCertainCommit) {
    StatsCollector c(0.0);
    for (int i = 0; i < 10; ++i) c.record(rec(i, i + 0.5, false, TxOutcome::Committed));
    EXPECT_EQ(*c.finalize(20.0).commit_probability, 1.0);
}

TEST(Stats, ReadOnlyWorkloadHasNoUpdateLatency) {
    StatsCollector c(0.0);
    c.record(rec(0.0, 0.25, true, TxOutcome::Committed));
    auto r = c.finalize(1.0);
    EXPECT_FALSE(r.update_latency);
    ASSERT_TRUE(r.read_only_latency);
    EXPECT_DOUBLE_EQ(r.read_only_latency->mean, 0.25);
    auto row = csv_row(r, "x");
    EXPECT_NE(row.find("NA"), std::string::npos);
}

TEST(Stats, ThroughputRsd) {
    std::vector<SimulationReport> runs{with_throughput(90), with_throughput(100), with_throughput(110)};
    EXPECT_DOUBLE_EQ(mean_throughput(runs), 100.0);
    EXPECT_NEAR(throughput_rsd(runs), 0.1, 1e-12);
    std::vector<SimulationReport> one{with_throughput(5)};
    EXPECT_EQ(throughput_rsd(one), 0.0);
}

TEST(Stats, CsvRowsMatchTheHeader) {
    auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    std::vector<SimulationReport> runs{with_throughput(1), with_throughput(2)};
    EXPECT_EQ(count(csv_row(runs[0], "a")), count(csv_header()));
    EXPECT_EQ(count(csv_aggregate_row(runs, "a")), count(csv_header()));
}
