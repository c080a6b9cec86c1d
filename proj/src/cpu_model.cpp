#include "dgsim/cpu_model.hpp"

#include "dgsim/errors.hpp"

#include <algorithm>
#include <string>

namespace dgsim {

void ServiceDemandProfile::validate() const {
    for (std::size_t i = 0; i < kCpuActivityCount; ++i)
        if (!(mean[i] > 0.0))
            throw ConfigError("cpu." + std::string(kCpuActivityNames[i]), "",
                              "service demand must be > 0");
}

ServiceDemandProfile ServiceDemandProfile::measured_defaults() {
    ServiceDemandProfile p;
    p[CpuActivity::LocalTxGet] = 0.027e-3;
    p[CpuActivity::LocalTxPut] = 0.022e-3;
    p[CpuActivity::LocalTxGetFromRemote] = 0.015e-3;
    p[CpuActivity::TxSendRemoteTxGet] = 0.022e-3;
    p[CpuActivity::TxBegin] = 0.004e-3;
    p[CpuActivity::TxAbort] = 0.369e-3;
    p[CpuActivity::TxPrepare] = 0.129e-3;
    p[CpuActivity::DistributedFinalTxCommit] = 0.077e-3;
    return p;
}

CpuModel::CpuModel(unsigned cores, ServiceDemandProfile demands, ServiceTimeModel model,
                   SimTime retention)
    : cores_(cores), demands_(demands), model_(model), retention_(retention) {
    if (cores == 0) throw ConfigError("cluster.cores", "", "core count must be positive");
    if (!(retention > 0.0)) throw ConfigError("network.cpu_window", "", "window must be > 0");
    demands_.validate();
    for (unsigned i = 0; i < cores_; ++i) core_free_.push(0.0);
    history_.push_back({0.0, 0.0, 0});
}

SimTime CpuModel::submit(CpuActivity activity, SimTime now, RandomStream& rng) {
    const double mean = demands_[activity];
    const double service = model_ == ServiceTimeModel::Exponential ? rng.exponential(mean) : mean;
    return submit_with_service(now, service);
}

SimTime CpuModel::submit_with_service(SimTime now, double service) {
    advance(now);
    const SimTime free_at = core_free_.top();
    core_free_.pop();
    const SimTime start = std::max(now, free_at);
    const SimTime done = start + service;
    core_free_.push(done);
    ++jobs_;
    if (start > now) {
        ++pending_starts_;
        boundaries_.push({start, +1});
    } else {
        // starts immediately
        ++busy_;
        history_.push_back({now, busy_total_, busy_});
    }
    boundaries_.push({done, -1});
    return done;
}

void CpuModel::advance(SimTime now) {
    while (!boundaries_.empty() && boundaries_.top().at <= now) {
        const Boundary b = boundaries_.top();
        boundaries_.pop();
        busy_total_ += busy_ * (b.at - last_at_);
        last_at_ = b.at;
        if (b.delta > 0) {
            --pending_starts_;
            ++busy_;
        } else {
            --busy_;
        }
        history_.push_back({b.at, busy_total_, busy_});
    }
    busy_total_ += busy_ * (now - last_at_);
    last_at_ = now;
    while (history_.size() > 1 && history_[1].at < now - retention_) history_.pop_front();
}

double CpuModel::cumulative_at(SimTime t) const {
    // last checkpoint at or before t
    auto it = std::upper_bound(history_.begin(), history_.end(), t,
                               [](SimTime v, const Checkpoint& c) { return v < c.at; });
    if (it == history_.begin()) return history_.front().busy_total;
    --it;
    return it->busy_total + it->busy * (t - it->at);
}

double CpuModel::utilization(SimTime now, double window) {
    advance(now);
    if (!(window > 0.0)) return 0.0;
    const double w = std::min(window, retention_);
    const SimTime from = std::max(0.0, now - w);
    if (now <= from) return 0.0;
    const double busy = busy_total_ - cumulative_at(from);
    return std::clamp(busy / (cores_ * (now - from)), 0.0, 1.0);
}

unsigned CpuModel::busy(SimTime now) {
    advance(now);
    return busy_;
}

std::size_t CpuModel::waiting(SimTime now) {
    advance(now);
    return pending_starts_;
}

double CpuModel::busy_time(SimTime now) {
    advance(now);
    return busy_total_;
}

} // namespace dgsim
