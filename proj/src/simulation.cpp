#include "dgsim/simulation.hpp"

#include "dgsim/errors.hpp"

#include <fstream>

namespace dgsim {

RunResources RunResources::load(const RunConfig& config) {
    RunResources r;
    if (config.workload.access.kind == AccessKind::Trace) {
        r.trace = std::make_shared<const std::vector<TxScript>>(
            load_trace(config.workload.access.trace_path, config.workload.dataset_size));
    }
    if (config.network.oracle == OracleKind::ModelTree) {
        if (!config.network.tree_path.empty()) {
            std::ifstream in(config.network.tree_path);
            if (!in) throw ConfigError("network.tree", config.network.tree_path, "cannot open tree file");
            r.tree = std::make_shared<const ModelTree>(ModelTree::read(in, config.network.tree_path));
        } else {
            TrainingSet data = read_knowledge_base(config.network.knowledge_base);
            r.tree = std::make_shared<const ModelTree>(train(data, config.network.train));
        }
    }
    return r;
}

std::string placement_digest(const OwnerDirectory& directory) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Key k = 0; k < directory.keys(); ++k) {
        for (ServerId s : directory.owners(k)) {
            for (int b = 0; b < 4; ++b) {
                h ^= (s >> (8 * b)) & 0xffu;
                h *= 0x100000001b3ULL;
            }
        }
    }
    return hex64(h);
}

Simulation::Simulation(const RunConfig& config, std::uint64_t seed, RunResources resources)
    : config_(config), seed_(seed), resources_(std::move(resources)) {
    config_.validate();
    if (config_.workload.access.kind == AccessKind::Trace && !resources_.trace) {
        resources_.trace = std::make_shared<const std::vector<TxScript>>(
            load_trace(config_.workload.access.trace_path, config_.workload.dataset_size));
    }
    std::vector<ClientBinding> bindings;
    std::shared_ptr<const AccessSampler> sampler;
    if (config_.workload.access.kind != AccessKind::Trace)
        sampler = std::make_shared<const AccessSampler>(config_.workload.access, config_.workload.dataset_size);
    for (ServerId s = 0; s < config_.servers; ++s) {
        for (std::uint32_t c = 0; c < config_.clients_per_server; ++c) {
            ClientBinding b;
            b.server = s;
            if (sampler) {
                b.source = std::make_unique<GeneratedScripts>(config_.workload, sampler);
            } else {
                b.source = std::make_unique<TraceScripts>(resources_.trace);
            }
            bindings.push_back(std::move(b));
        }
    }
    build(std::move(bindings));
}

Simulation::Simulation(const RunConfig& config, std::uint64_t seed, std::vector<ClientBinding> clients,
                       RunResources resources)
    : config_(config), seed_(seed), resources_(std::move(resources)) {
    config_.validate();
    build(std::move(clients));
}

void Simulation::build(std::vector<ClientBinding> clients) {
    if (config_.network.oracle == OracleKind::ModelTree && !resources_.tree) {
        RunResources loaded = RunResources::load(config_);
        resources_.tree = loaded.tree;
    }
    ring_ = std::make_unique<HashRing>(config_.servers, config_.replication, config_.vnodes);
    directory_ = std::make_unique<OwnerDirectory>(*ring_, config_.workload.dataset_size);
    protocol_ = ProtocolRegistry::instance().make(config_.protocol, ProtocolOptions{config_.deadlock_timeout});
    const double cutoff = config_.warmup_cutoff();
    stats_ = std::make_unique<StatsCollector>(cutoff);

    NetworkOptions net = config_.network.options;
    net.warmup_cutoff = cutoff;
    LatencyOracle oracle = [&] {
        switch (config_.network.oracle) {
        case OracleKind::Constant: return LatencyOracle::constant(config_.network.mean_delay);
        case OracleKind::Exponential: return LatencyOracle::exponential(config_.network.mean_delay);
        case OracleKind::ModelTree: break;
        }
        return LatencyOracle::tree(resources_.tree, config_.network.floor);
    }();
    std::vector<std::uint64_t> copies(config_.servers);
    for (ServerId s = 0; s < config_.servers; ++s) copies[s] = directory_->copies(s);
    network_ = std::make_unique<NetworkModel>(std::move(oracle), net, NetworkModel::memory_from_copies(net, copies));

    ServerOptions sopts{config_.ownership, config_.value_size};
    for (ServerId s = 0; s < config_.servers; ++s) {
        CpuModel cpu(config_.cores, config_.demands, config_.service,
                     std::max(1.0, config_.network.options.cpu_window));
        auto server = std::make_unique<CacheServer>(
            s, *directory_, *protocol_, std::move(cpu), *network_, *stats_, sopts,
            RandomStream::child(seed_, s, StreamPurpose::Cpu), RandomStream::child(seed_, s, StreamPurpose::Network));
        ObjectId id = kernel_.add(*server);
        if (id != s) throw ModelError("server object ids must equal server ids");
        servers_.push_back(std::move(server));
    }
    ClientOptions copts = ClientOptions::from(config_.workload, config_.value_size);
    for (auto& b : clients) {
        if (b.server >= config_.servers) throw ConfigError("", "", "client bound to a missing server");
        ObjectId next = static_cast<ObjectId>(servers_.size() + clients_.size());
        auto client = std::make_unique<Client>(b.server, std::move(b.source), copts,
                                               RandomStream::child(seed_, next, StreamPurpose::Workload),
                                               RandomStream::child(seed_, next, StreamPurpose::ThinkTime));
        ObjectId id = kernel_.add(*client);
        client->bind(id);
        clients_.push_back(std::move(client));
    }
}

void Simulation::set_server_observer(ServerObserver* observer) {
    for (auto& s : servers_) s->set_observer(observer);
}

SimulationReport Simulation::run() {
    auto committed = [this] { return stats_->total_commits(); };
    const double cutoff = config_.warmup_cutoff();
    RunBudget warm{cutoff, config_.run.max_commits};
    StopReason reason = StopReason::Drained;
    if (cutoff > 0.0) reason = kernel_.run(warm, committed);
    std::vector<double> busy_at_cutoff;
    for (auto& s : servers_) busy_at_cutoff.push_back(s->cpu().busy_time(std::min(cutoff, kernel_.now())));
    if (reason != StopReason::CommitLimit) kernel_.run(RunBudget{config_.run.max_time, config_.run.max_commits}, committed);

    const SimTime end = kernel_.now();
    SimulationReport report = stats_->finalize(end);
    report.seed = seed_;
    report.config_hash = config_hash(config_);
    report.placement_hash = placement_digest(*directory_);
    report.events = kernel_.dispatched();
    report.trace_hash = kernel_.trace_hash();
    const double span = end - cutoff;
    for (std::size_t i = 0; i < servers_.size(); ++i) {
        double busy = servers_[i]->cpu().busy_time(end) - busy_at_cutoff[i];
        report.cpu_utilization.push_back(span > 0.0 ? busy / (config_.cores * span) : 0.0);
    }
    report.network = network_->diagnostics(end);

    if (config_.run.drain) {
        for (auto& c : clients_) c->stop_issuing();
        kernel_.drain();
        auto left = leftovers();
        if (!left.empty()) {
            std::string msg = "state left after drain:";
            for (const auto& l : left) msg += " " + l + ";";
            throw ModelError(msg);
        }
    }
    return report;
}

std::vector<std::string> Simulation::leftovers() const {
    std::vector<std::string> out;
    for (const auto& s : servers_) {
        auto note = [&](std::size_t n, const char* what) {
            if (n != 0) out.push_back("server " + std::to_string(s->id()) + ": " + std::to_string(n) + " " + what);
        };
        note(s->active_transactions(), "transactions");
        note(s->pending_ops(), "pending ops");
        note(s->participant_entries(), "participant entries");
        note(s->parked_reads(), "parked reads");
        note(s->tombstones(), "abort tombstones");
    }
    for (std::size_t i = 0; i < clients_.size(); ++i) {
        if (clients_[i]->in_flight() != 0)
            out.push_back("client " + std::to_string(i) + ": " + std::to_string(clients_[i]->in_flight()) +
                          " in flight");
    }
    if (!kernel_.empty()) out.push_back(std::to_string(kernel_.pending()) + " queued events");
    return out;
}

SimulationReport simulate(const RunConfig& config, std::uint64_t seed, const RunResources& resources) {
    Simulation sim(config, seed, resources);
    return sim.run();
}

} // namespace dgsim
