#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace dgsim {

using ObjectId = std::uint32_t;
using ServerId = ObjectId;
using Key = std::uint64_t;
using SimTime = double;

/// Globally unique transaction identifier: coordinator plus local sequence.
struct TxId {
    ServerId server = 0;
    std::uint64_t seq = 0;

    auto operator<=>(const TxId&) const = default;

    std::string str() const {
        return std::to_string(server) + "." + std::to_string(seq);
    }
};

/// Lamport-style pair: (logical counter, coordinator id), ordered lexicographically.
struct LogicalStamp {
    std::uint64_t counter = 0;
    ServerId server = 0;

    auto operator<=>(const LogicalStamp&) const = default;
};

/// Cross-server transaction record. The id must stay the leading field; the
/// remaining fields belong to the concurrency-control protocol and travel
/// with every event that carries a snapshot.
struct TxInfo {
    TxId id;
    LogicalStamp timestamp;
};

} // namespace dgsim

template <>
struct std::hash<dgsim::TxId> {
    std::size_t operator()(const dgsim::TxId& id) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(id.server) << 40) ^ id.seq);
    }
};
