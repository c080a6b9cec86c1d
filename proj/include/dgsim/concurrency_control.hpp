#pragma once

#include "dgsim/transaction.hpp"
#include "dgsim/types.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dgsim {

enum class CcOp : std::uint8_t { Read, Prepare, Commit, Abort, Timeout };

struct CcInvocation {
    CcOp type = CcOp::Read;
    TxInfo info;
    TxStatistics* statistics = nullptr;   // non-null only at the coordinator
    std::optional<Key> key;               // Read
    std::vector<Key> write_set_keys;      // Prepare
};

enum class IndicationKind : std::uint8_t {
    TxWait,
    ReadDone,
    PrepareDone,
    PrepareFail,
    CommitDone,
    TimeoutRequest,
};

std::string_view to_string(IndicationKind kind) noexcept;

/// A request, raised by a protocol, that the transaction manager turn into
/// an actual event. Protocols never address events themselves.
struct CcIndication {
    IndicationKind kind;
    TxId tx;
    double timeout = 0.0;   // TimeoutRequest only

    bool operator==(const CcIndication&) const = default;
};

/// Protocol-private contention state of one cache server.
class CcTable {
public:
    virtual ~CcTable() = default;
};

struct SetupContext {
    ServerId coordinator = 0;
    std::uint64_t logical_clock = 0;
    SimTime now = 0.0;
};

struct ProtocolOptions {
    double deadlock_timeout = 0.005;
};

/// A concurrency-control algorithm. Implementations see operation types,
/// transaction snapshots and keys only; they know nothing about placement or
/// replication. Their state lives in the CcTable the caller hands back on
/// every invocation (allocated by the protocol when the handle is empty).
class CcProtocol {
public:
    virtual ~CcProtocol() = default;

    virtual std::string_view name() const = 0;

    virtual std::vector<CcIndication> invoke(const CcInvocation& invocation,
                                             std::unique_ptr<CcTable>& table) const = 0;

    /// Initializes protocol fields of a new transaction.
    virtual void setup_transaction(TxInfo& info, TxStatistics& stats, const SetupContext& ctx) const;

    /// Stamps the terminal outcome. Throws ModelError on a second call.
    virtual void finalize_transaction(const TxInfo& info, TxStatistics& stats, SimTime now,
                                      TxOutcome outcome) const;

    virtual TxRecord statistics_log(const TxInfo& info, const TxStatistics& stats) const;
};

using ProtocolFactory = std::function<std::unique_ptr<CcProtocol>(const ProtocolOptions&)>;

/// Protocols by configuration name. "lock2pc" and "ts2pc" are built in.
class ProtocolRegistry {
public:
    static ProtocolRegistry& instance();

    void add(std::string name, ProtocolFactory factory);
    bool contains(std::string_view name) const;
    /// Throws ConfigError for unknown names.
    std::unique_ptr<CcProtocol> make(std::string_view name, const ProtocolOptions& options) const;
    std::vector<std::string> names() const;

private:
    ProtocolRegistry();
    std::map<std::string, ProtocolFactory, std::less<>> factories_;
};

} // namespace dgsim
