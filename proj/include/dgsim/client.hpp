#pragma once

#include "dgsim/kernel.hpp"
#include "dgsim/random.hpp"
#include "dgsim/workload.hpp"

#include <cstdint>
#include <map>
#include <memory>

namespace dgsim {

struct ClientOptions {
    SystemKind system = SystemKind::Closed;
    ThinkDistribution think = ThinkDistribution::Exponential;
    double think_time = 0.0;
    double arrival_rate = 100.0;
    bool retry_aborted = true;
    bool redraw_on_retry = false;
    double retry_backoff = 0.0;
    std::uint32_t value_size = 1024;

    static ClientOptions from(const WorkloadSpec& spec, std::uint32_t value_size);
};

/// A workload thread bound to one cache server. Client-to-server traffic has
/// zero delay.
class Client : public SimObject {
public:
    Client(ObjectId server, std::unique_ptr<ScriptSource> source, ClientOptions options,
           RandomStream workload_rng, RandomStream think_rng);

    /// Must be called with the id returned by Kernel::add.
    void bind(ObjectId self) noexcept { self_ = self; }

    void start(Kernel& kernel) override;
    void handle(const SimEvent& event, Kernel& kernel) override;

    /// Stop issuing new scripts and retries; in-flight work completes.
    void stop_issuing() noexcept { draining_ = true; }

    ObjectId server() const noexcept { return server_; }
    std::size_t in_flight() const noexcept { return in_flight_.size(); }
    std::size_t max_in_flight() const noexcept { return max_in_flight_; }
    std::uint64_t begins() const noexcept { return begins_; }
    std::uint64_t commits() const noexcept { return commits_; }
    std::uint64_t aborts() const noexcept { return aborts_; }
    bool idle() const noexcept { return exhausted_ && in_flight_.empty(); }

private:
    struct Request {
        TxScript script;
        std::uint32_t attempt = 0;
        std::size_t next_op = 0;
        TxInfo tx;
    };

    void on_reply(const SimEvent& event, Kernel& kernel);
    void on_wake(const SimEvent& event, Kernel& kernel);
    void next_script(Kernel& kernel);
    void launch(TxScript script, std::uint32_t attempt, Kernel& kernel);
    void issue(std::uint64_t request, Request& r, Kernel& kernel);
    void after_terminal(Kernel& kernel);
    void send(Kernel& kernel, EventKind kind, Payload payload);
    void wake_at(Kernel& kernel, SimTime at, Payload payload);

    ObjectId self_ = 0;
    ObjectId server_;
    std::unique_ptr<ScriptSource> source_;
    ClientOptions options_;
    RandomStream workload_rng_;
    RandomStream think_rng_;

    std::map<std::uint64_t, Request> in_flight_;
    std::map<std::uint64_t, std::pair<TxScript, std::uint32_t>> retries_;
    std::uint64_t next_request_ = 1;
    std::uint64_t next_retry_ = 1;
    std::size_t max_in_flight_ = 0;
    std::uint64_t begins_ = 0;
    std::uint64_t commits_ = 0;
    std::uint64_t aborts_ = 0;
    bool draining_ = false;
    bool exhausted_ = false;
};

} // namespace dgsim
