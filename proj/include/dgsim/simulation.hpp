#pragma once

#include "dgsim/cache_server.hpp"
#include "dgsim/client.hpp"
#include "dgsim/config.hpp"
#include "dgsim/kernel.hpp"
#include "dgsim/model_tree.hpp"
#include "dgsim/placement.hpp"
#include "dgsim/stats.hpp"
#include "dgsim/workload.hpp"

#include <memory>
#include <string>
#include <vector>

namespace dgsim {

/// Inputs shared read-only by every run of one configuration.
struct RunResources {
    std::shared_ptr<const ModelTree> tree;
    std::shared_ptr<const std::vector<TxScript>> trace;

    /// Loads the trace and the tree (training it from the knowledge base when
    /// no dump is given) that `config` refers to.
    static RunResources load(const RunConfig& config);
};

/// A client bound to a server with an explicit script source (tests, traces).
struct ClientBinding {
    ServerId server = 0;
    std::unique_ptr<ScriptSource> source;
};

/// One fully assembled simulation: kernel, servers (object ids 0..n-1),
/// then clients.
class Simulation {
public:
    /// Validates `config`; clients come from its workload.
    Simulation(const RunConfig& config, std::uint64_t seed, RunResources resources = {});
    /// Same, with explicit clients instead of the configured ones.
    Simulation(const RunConfig& config, std::uint64_t seed, std::vector<ClientBinding> clients,
               RunResources resources = {});

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs the budget, finalizes the report, then (when configured) stops the
    /// clients and drains every outstanding event. Throws ModelError if the
    /// drained state still holds transactions or pending operations.
    SimulationReport run();

    /// Empty when no transaction, pending op, participant entry or parked read remains.
    std::vector<std::string> leftovers() const;

    Kernel& kernel() noexcept { return kernel_; }
    const RunConfig& config() const noexcept { return config_; }
    const HashRing& ring() const noexcept { return *ring_; }
    const OwnerDirectory& directory() const noexcept { return *directory_; }
    NetworkModel& network() noexcept { return *network_; }
    StatsCollector& stats() noexcept { return *stats_; }
    const CcProtocol& protocol() const noexcept { return *protocol_; }
    std::size_t server_count() const noexcept { return servers_.size(); }
    std::size_t client_count() const noexcept { return clients_.size(); }
    CacheServer& server(std::size_t i) { return *servers_.at(i); }
    Client& client(std::size_t i) { return *clients_.at(i); }

    void set_server_observer(ServerObserver* observer);

private:
    void build(std::vector<ClientBinding> clients);

    RunConfig config_;
    std::uint64_t seed_;
    RunResources resources_;
    Kernel kernel_;
    std::unique_ptr<HashRing> ring_;
    std::unique_ptr<OwnerDirectory> directory_;
    std::unique_ptr<CcProtocol> protocol_;
    std::unique_ptr<StatsCollector> stats_;
    std::unique_ptr<NetworkModel> network_;
    std::vector<std::unique_ptr<CacheServer>> servers_;
    std::vector<std::unique_ptr<Client>> clients_;
};

/// Hash of the key-to-owners assignment, as 16 hex digits.
std::string placement_digest(const OwnerDirectory& directory);

/// Convenience: build, run and return the report.
SimulationReport simulate(const RunConfig& config, std::uint64_t seed, const RunResources& resources = {});

} // namespace dgsim
