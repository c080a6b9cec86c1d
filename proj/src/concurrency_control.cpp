#include "dgsim/concurrency_control.hpp"

#include "dgsim/errors.hpp"
#include "dgsim/lock_protocols.hpp"

namespace dgsim {

std::string_view to_string(IndicationKind kind) noexcept {
    switch (kind) {
    case IndicationKind::TxWait: return "TX_WAIT";
    case IndicationKind::ReadDone: return "READ_DONE";
    case IndicationKind::PrepareDone: return "PREPARE_DONE";
    case IndicationKind::PrepareFail: return "PREPARE_FAIL";
    case IndicationKind::CommitDone: return "COMMIT_DONE";
    case IndicationKind::TimeoutRequest: return "TIMEOUT";
    }
    return "?";
}

void CcProtocol::setup_transaction(TxInfo&, TxStatistics&, const SetupContext&) const {}

void CcProtocol::finalize_transaction(const TxInfo& info, TxStatistics& stats, SimTime now,
                                      TxOutcome outcome) const {
    if (stats.outcome != TxOutcome::Pending)
        throw ModelError("transaction " + info.id.str() + " finalized twice");
    if (outcome == TxOutcome::Pending)
        throw ModelError("transaction " + info.id.str() + " finalized without an outcome");
    stats.outcome = outcome;
    stats.end = now;
}

TxRecord CcProtocol::statistics_log(const TxInfo& info, const TxStatistics& stats) const {
    if (!stats.end) throw ModelError("statistics_log before finalize for " + info.id.str());
    TxRecord r;
    r.id = info.id;
    r.client = stats.client;
    r.start = stats.start;
    r.end = *stats.end;
    r.outcome = stats.outcome;
    r.read_only = stats.read_only;
    r.attempt = stats.attempt;
    return r;
}

ProtocolRegistry::ProtocolRegistry() {
    add("lock2pc", [](const ProtocolOptions& o) { return std::make_unique<Lock2pc>(o); });
    add("ts2pc", [](const ProtocolOptions& o) { return std::make_unique<Timestamp2pc>(o); });
}

ProtocolRegistry& ProtocolRegistry::instance() {
    static ProtocolRegistry registry;
    return registry;
}

void ProtocolRegistry::add(std::string name, ProtocolFactory factory) {
    factories_[std::move(name)] = std::move(factory);
}

bool ProtocolRegistry::contains(std::string_view name) const {
    return factories_.find(name) != factories_.end();
}

std::unique_ptr<CcProtocol> ProtocolRegistry::make(std::string_view name,
                                                   const ProtocolOptions& options) const {
    auto it = factories_.find(name);
    if (it == factories_.end())
        throw ConfigError("cluster.protocol", "", "unknown protocol '" + std::string(name) + "'");
    return it->second(options);
}

std::vector<std::string> ProtocolRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, f] : factories_) out.push_back(name);
    return out;
}

} // namespace dgsim
