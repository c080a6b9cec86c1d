#include "dgsim/stats.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace dgsim {

QuantileSketch::QuantileSketch(double alpha, double min_value, double max_value)
    : gamma_((1.0 + alpha) / (1.0 - alpha)), log_gamma_(std::log(gamma_)), min_(min_value) {
    const auto n = static_cast<std::size_t>(std::ceil(std::log(max_value / min_value) / log_gamma_)) + 1;
    counts_.assign(n, 0);
}

std::size_t QuantileSketch::bucket(double v) const {
    const auto b = static_cast<std::size_t>(std::ceil(std::log(v / min_) / log_gamma_));
    return std::min(b, counts_.size() - 1);
}

double QuantileSketch::value_of(std::size_t b) const {
    // midpoint (in relative terms) of (min*gamma^(b-1), min*gamma^b]
    return min_ * std::pow(gamma_, static_cast<double>(b)) * 2.0 / (1.0 + gamma_);
}

void QuantileSketch::add(double v) {
    ++count_;
    if (!(v > min_)) {
        ++underflow_;
        return;
    }
    ++counts_[bucket(v)];
}

double QuantileSketch::quantile(double q) const {
    if (count_ == 0) return 0.0;
    q = std::clamp(q, 0.0, 1.0);
    const auto rank = static_cast<std::uint64_t>(q * static_cast<double>(count_ - 1));
    std::uint64_t seen = underflow_;
    if (rank < seen) return min_;
    for (std::size_t b = 0; b < counts_.size(); ++b) {
        seen += counts_[b];
        if (rank < seen) return value_of(b);
    }
    return value_of(counts_.size() - 1);
}

StatsCollector::StatsCollector(SimTime warmup_cutoff) : cutoff_(warmup_cutoff) {}

void StatsCollector::record(const TxRecord& rec) {
    ++total_records_;
    const bool committed = rec.outcome == TxOutcome::Committed;
    if (committed) ++total_commits_;
    if (rec.end < cutoff_) return;

    const double lat = rec.latency();
    all_sum_ += lat;
    if (rec.attempt > 0) ++retries_;
    if (rec.read_only) {
        ++ro_attempts_;
        if (committed) {
            ++ro_commits_;
            ro_sum_ += lat;
            ro_sketch_.add(lat);
        }
    } else {
        ++up_attempts_;
        if (committed) {
            ++up_commits_;
            up_sum_ += lat;
            up_sketch_.add(lat);
        }
    }
}

SimulationReport StatsCollector::finalize(SimTime end) const {
    SimulationReport r;
    r.warmup_cutoff = cutoff_;
    r.end_time = end;
    r.read_only_attempts = ro_attempts_;
    r.read_only_commits = ro_commits_;
    r.update_attempts = up_attempts_;
    r.update_commits = up_commits_;
    r.committed = ro_commits_ + up_commits_;
    r.aborts = (ro_attempts_ - ro_commits_) + (up_attempts_ - up_commits_);
    r.retries = retries_;
    const double span = end - cutoff_;
    if (span > 0.0) {
        r.throughput = static_cast<double>(r.committed) / span;
        r.attempt_throughput = static_cast<double>(ro_attempts_ + up_attempts_) / span;
    }
    if (up_attempts_ > 0)
        r.commit_probability = static_cast<double>(up_commits_) / static_cast<double>(up_attempts_);
    if (ro_attempts_ > 0)
        r.read_only_commit_probability =
            static_cast<double>(ro_commits_) / static_cast<double>(ro_attempts_);
    if (ro_commits_ > 0)
        r.read_only_latency = LatencySummary{ro_commits_, ro_sum_ / static_cast<double>(ro_commits_),
                                             ro_sketch_.quantile(0.5), ro_sketch_.quantile(0.95)};
    if (up_commits_ > 0)
        r.update_latency = LatencySummary{up_commits_, up_sum_ / static_cast<double>(up_commits_),
                                          up_sketch_.quantile(0.5), up_sketch_.quantile(0.95)};
    if (ro_attempts_ + up_attempts_ > 0)
        r.mean_response_time = all_sum_ / static_cast<double>(ro_attempts_ + up_attempts_);
    return r;
}

namespace {

using Cell = std::optional<double>;

struct Column {
    const char* name;
    Cell (*get)(const SimulationReport&);
};

Cell lat(const std::optional<LatencySummary>& s, double LatencySummary::*field) {
    if (!s) return std::nullopt;
    return (*s).*field;
}

double cpu_mean(const SimulationReport& r) {
    if (r.cpu_utilization.empty()) return 0.0;
    double s = 0.0;
    for (double u : r.cpu_utilization) s += u;
    return s / static_cast<double>(r.cpu_utilization.size());
}

const Column kColumns[] = {
    {"end_time", [](const SimulationReport& r) -> Cell { return r.end_time; }},
    {"warmup_cutoff", [](const SimulationReport& r) -> Cell { return r.warmup_cutoff; }},
    {"throughput", [](const SimulationReport& r) -> Cell { return r.throughput; }},
    {"committed", [](const SimulationReport& r) -> Cell { return double(r.committed); }},
    {"update_attempts", [](const SimulationReport& r) -> Cell { return double(r.update_attempts); }},
    {"update_commits", [](const SimulationReport& r) -> Cell { return double(r.update_commits); }},
    {"aborts", [](const SimulationReport& r) -> Cell { return double(r.aborts); }},
    {"retries", [](const SimulationReport& r) -> Cell { return double(r.retries); }},
    {"commit_probability", [](const SimulationReport& r) -> Cell { return r.commit_probability; }},
    {"read_only_commit_probability",
     [](const SimulationReport& r) -> Cell { return r.read_only_commit_probability; }},
    {"ro_latency_mean", [](const SimulationReport& r) { return lat(r.read_only_latency, &LatencySummary::mean); }},
    {"ro_latency_p50", [](const SimulationReport& r) { return lat(r.read_only_latency, &LatencySummary::p50); }},
    {"ro_latency_p95", [](const SimulationReport& r) { return lat(r.read_only_latency, &LatencySummary::p95); }},
    {"update_latency_mean", [](const SimulationReport& r) { return lat(r.update_latency, &LatencySummary::mean); }},
    {"update_latency_p50", [](const SimulationReport& r) { return lat(r.update_latency, &LatencySummary::p50); }},
    {"update_latency_p95", [](const SimulationReport& r) { return lat(r.update_latency, &LatencySummary::p95); }},
    {"mean_response_time", [](const SimulationReport& r) -> Cell { return r.mean_response_time; }},
    {"attempt_throughput", [](const SimulationReport& r) -> Cell { return r.attempt_throughput; }},
    {"cpu_util_mean", [](const SimulationReport& r) -> Cell { return cpu_mean(r); }},
    {"cpu_util_max",
     [](const SimulationReport& r) -> Cell {
         if (r.cpu_utilization.empty()) return 0.0;
         return *std::max_element(r.cpu_utilization.begin(), r.cpu_utilization.end());
     }},
    {"net_messages", [](const SimulationReport& r) -> Cell { return double(r.network.messages); }},
    {"net_mean_delay", [](const SimulationReport& r) -> Cell { return r.network.mean_delay(); }},
    {"net_mean_prepare_delay",
     [](const SimulationReport& r) -> Cell { return r.network.mean_prepare_delay(); }},
    {"net_extrapolations", [](const SimulationReport& r) -> Cell { return double(r.network.extrapolations); }},
    {"msg_rate_drift", [](const SimulationReport& r) -> Cell { return r.network.msg_rate_drift(); }},
    {"events", [](const SimulationReport& r) -> Cell { return double(r.events); }},
};

std::string fmt(Cell c) {
    if (!c) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", *c);
    return buf;
}

std::string hex(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

} // namespace

std::string csv_header() {
    std::string h = "label,seed,config_hash";
    for (const auto& c : kColumns) h += std::string(",") + c.name;
    h += ",trace_hash,throughput_rsd";
    return h;
}

std::string csv_row(const SimulationReport& r, const std::string& label) {
    std::string row = label + "," + std::to_string(r.seed) + "," + r.config_hash;
    for (const auto& c : kColumns) row += "," + fmt(c.get(r));
    row += "," + hex(r.trace_hash) + ",";
    return row;
}

double mean_throughput(std::span<const SimulationReport> runs) {
    if (runs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : runs) s += r.throughput;
    return s / static_cast<double>(runs.size());
}

double throughput_rsd(std::span<const SimulationReport> runs) {
    if (runs.size() < 2) return 0.0;
    const double m = mean_throughput(runs);
    if (m <= 0.0) return 0.0;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.throughput - m) * (r.throughput - m);
    return std::sqrt(ss / static_cast<double>(runs.size() - 1)) / m;
}

std::string csv_aggregate_row(std::span<const SimulationReport> runs, const std::string& label) {
    std::string row = label + ",mean," + (runs.empty() ? std::string() : runs.front().config_hash);
    for (const auto& c : kColumns) {
        double s = 0.0;
        std::size_t n = 0;
        bool complete = !runs.empty();
        for (const auto& r : runs) {
            const Cell v = c.get(r);
            if (!v) {
                complete = false;
                break;
            }
            s += *v;
            ++n;
        }
        row += "," + fmt(complete ? Cell(s / static_cast<double>(n)) : std::nullopt);
    }
    row += ",," + fmt(throughput_rsd(runs));
    return row;
}

void write_table(std::ostream& out, const SimulationReport& r) {
    auto line = [&out](const char* name, const std::string& value) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-30s %s\n", name, value.c_str());
        out << buf;
    };
    auto summary = [&](const char* name, const std::optional<LatencySummary>& s) {
        if (!s) {
            line(name, "no samples");
            return;
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "mean %.6f s  p50 %.6f s  p95 %.6f s  (n=%" PRIu64 ")", s->mean,
                      s->p50, s->p95, s->count);
        line(name, buf);
    };
    auto ratio = [&](const char* name, const std::optional<double>& v) {
        line(name, v ? fmt(v) : std::string("no samples"));
    };

    out << "run seed " << r.seed << ", config " << r.config_hash << ", placement hash "
        << r.placement_hash << "\n";
    line("simulated interval", fmt(r.warmup_cutoff) + " .. " + fmt(r.end_time) + " s");
    if (r.no_samples()) out << "  no samples after warm-up\n";
    line("throughput (tx/s)", fmt(r.throughput));
    line("committed", std::to_string(r.committed));
    line("update attempts", std::to_string(r.update_attempts));
    line("aborts", std::to_string(r.aborts));
    line("retries", std::to_string(r.retries));
    ratio("commit probability (update)", r.commit_probability);
    ratio("commit probability (read-only)", r.read_only_commit_probability);
    summary("latency (read-only)", r.read_only_latency);
    summary("latency (update)", r.update_latency);
    for (std::size_t s = 0; s < r.cpu_utilization.size(); ++s) {
        const std::string name = "cpu utilization server " + std::to_string(s);
        line(name.c_str(), fmt(r.cpu_utilization[s]));
    }
    line("network messages", std::to_string(r.network.messages));
    ratio("mean network delay (s)", r.network.mean_delay());
    ratio("mean prepare-phase delay (s)", r.network.mean_prepare_delay());
    line("oracle extrapolations", std::to_string(r.network.extrapolations));
    ratio("msg_rate window drift", r.network.msg_rate_drift());
    line("events", std::to_string(r.events));
    line("trace hash", hex(r.trace_hash));
}

} // namespace dgsim
