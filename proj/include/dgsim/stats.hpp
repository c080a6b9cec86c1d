#pragma once

#include "dgsim/net_oracle.hpp"
#include "dgsim/transaction.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dgsim {

/// Fixed-size log-bucketed quantile sketch: every value within the range is
/// reported with relative error at most `alpha`.
class QuantileSketch {
public:
    explicit QuantileSketch(double alpha = 0.005, double min_value = 1e-9, double max_value = 1e5);

    void add(double v);
    double quantile(double q) const;
    std::uint64_t count() const noexcept { return count_; }
    std::size_t buckets() const noexcept { return counts_.size(); }

private:
    std::size_t bucket(double v) const;
    double value_of(std::size_t b) const;

    double gamma_;
    double log_gamma_;
    double min_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t underflow_ = 0;
    std::uint64_t count_ = 0;
};

struct LatencySummary {
    std::uint64_t count = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
};

struct SimulationReport {
    // run metadata
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string placement_hash;
    SimTime warmup_cutoff = 0.0;
    SimTime end_time = 0.0;
    std::uint64_t events = 0;
    std::uint64_t trace_hash = 0;

    // post-warm-up KPIs
    std::uint64_t committed = 0;
    std::uint64_t read_only_attempts = 0;
    std::uint64_t read_only_commits = 0;
    std::uint64_t update_attempts = 0;
    std::uint64_t update_commits = 0;
    std::uint64_t aborts = 0;
    std::uint64_t retries = 0;
    double throughput = 0.0;
    std::optional<double> commit_probability;
    std::optional<double> read_only_commit_probability;
    std::optional<LatencySummary> read_only_latency;
    std::optional<LatencySummary> update_latency;
    /// Over every attempt, committed or aborted.
    std::optional<double> mean_response_time;
    double attempt_throughput = 0.0;

    std::vector<double> cpu_utilization;
    NetworkDiagnostics network;

    bool no_samples() const noexcept { return read_only_attempts + update_attempts == 0; }
};

/// Receives statistics_log records and turns them into a report. Records
/// ending before the warm-up cutoff only count towards the run budget.
class StatsCollector {
public:
    explicit StatsCollector(SimTime warmup_cutoff = 0.0);

    void record(const TxRecord& rec);

    std::uint64_t total_commits() const noexcept { return total_commits_; }
    std::uint64_t total_records() const noexcept { return total_records_; }
    SimTime warmup_cutoff() const noexcept { return cutoff_; }

    /// KPIs over [cutoff, end].
    SimulationReport finalize(SimTime end) const;

private:
    SimTime cutoff_;
    std::uint64_t total_commits_ = 0;
    std::uint64_t total_records_ = 0;

    std::uint64_t ro_attempts_ = 0, ro_commits_ = 0;
    std::uint64_t up_attempts_ = 0, up_commits_ = 0;
    std::uint64_t retries_ = 0;
    double ro_sum_ = 0.0, up_sum_ = 0.0, all_sum_ = 0.0;
    QuantileSketch ro_sketch_, up_sketch_;
};

/// CSV with a fixed column order; see csv_header().
std::string csv_header();
std::string csv_row(const SimulationReport& r, const std::string& label);
/// Column-wise mean over runs plus the relative standard deviation of throughput.
std::string csv_aggregate_row(std::span<const SimulationReport> runs, const std::string& label);

double mean_throughput(std::span<const SimulationReport> runs);
/// Sample standard deviation over mean; 0 for fewer than two runs.
double throughput_rsd(std::span<const SimulationReport> runs);

void write_table(std::ostream& out, const SimulationReport& r);

} // namespace dgsim
