#pragma once

#include "dgsim/cpu_activity.hpp"
#include "dgsim/random.hpp"
#include "dgsim/types.hpp"

#include <array>
#include <deque>
#include <queue>
#include <vector>

namespace dgsim {

/// Mean CPU demand, in seconds, of every activity kind.
struct ServiceDemandProfile {
    std::array<double, kCpuActivityCount> mean{};

    double& operator[](CpuActivity a) noexcept { return mean[static_cast<std::size_t>(a)]; }
    double operator[](CpuActivity a) const noexcept { return mean[static_cast<std::size_t>(a)]; }

    /// Throws ConfigError naming the first non-positive demand.
    void validate() const;

    /// Demands measured on the reference deployment (converted to seconds).
    static ServiceDemandProfile measured_defaults();
};

enum class ServiceTimeModel : std::uint8_t { Exponential, Deterministic };

/// G/M/K station with FIFO discipline. Jobs arrive in non-decreasing time
/// order (the simulation clock), so each job's start and completion are fixed
/// at submission: it takes the earliest-free core, or waits for it.
class CpuModel {
public:
    CpuModel(unsigned cores, ServiceDemandProfile demands,
             ServiceTimeModel model = ServiceTimeModel::Exponential,
             SimTime retention = 1.0);

    /// Draws a service time for `activity` and returns the completion time.
    SimTime submit(CpuActivity activity, SimTime now, RandomStream& rng);

    /// Same as submit() with an explicit service time.
    SimTime submit_with_service(SimTime now, double service);

    /// Busy core-seconds over [now - window, now] divided by cores * window.
    /// Windows longer than the retention horizon are truncated to it.
    double utilization(SimTime now, double window);

    unsigned cores() const noexcept { return cores_; }
    unsigned busy(SimTime now);
    std::size_t waiting(SimTime now);
    double busy_time(SimTime now);
    std::uint64_t jobs() const noexcept { return jobs_; }
    const ServiceDemandProfile& demands() const noexcept { return demands_; }

private:
    struct Boundary {
        SimTime at;
        int delta;   // +1 job starts, -1 job ends
        bool operator>(const Boundary& o) const noexcept { return at > o.at; }
    };
    struct Checkpoint {
        SimTime at;
        double busy_total;  // cumulative core-seconds up to `at`
        unsigned busy;      // cores busy right after `at`
    };

    void advance(SimTime now);
    double cumulative_at(SimTime t) const;

    unsigned cores_;
    ServiceDemandProfile demands_;
    ServiceTimeModel model_;
    SimTime retention_;
    std::uint64_t jobs_ = 0;

    // free time of each core, min-heap
    std::priority_queue<SimTime, std::vector<SimTime>, std::greater<>> core_free_;
    std::priority_queue<Boundary, std::vector<Boundary>, std::greater<>> boundaries_;
    std::size_t pending_starts_ = 0;

    std::deque<Checkpoint> history_;
    SimTime last_at_ = 0.0;
    double busy_total_ = 0.0;
    unsigned busy_ = 0;
};

} // namespace dgsim
